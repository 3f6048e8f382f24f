#pragma once

#include "lcsynth/safety.hpp"

namespace lcs {

enum class NodeStatus : uint8_t {
  Open,
  Expanded,
  ClosedGoal,      // knowledge inside Goal: true leaf
  ClosedSubsumed,  // strict ancestor with smaller knowledge: false leaf
  ClosedS1,        // pending proc-1 knowledge the adversary can hold forever
                   // (silent loop) or kill (dead pending state): false leaf
  ClosedDead,      // p = 0 knowledge with no enabled label: false leaf
};

const char* node_status_name(NodeStatus s);

struct ForestNode {
  int id = 0;
  int parent = -1;  // -1 for roots
  KnowSet knowledge;
  NodeStatus status = NodeStatus::Open;
  bool win = false;
  // For Expanded nodes: the winning pick when win holds.
  std::optional<EAct> witness;
  // Children grouped by (exists pick, adversary label); deduplicated by
  // knowledge inside each group.
  std::vector<std::tuple<EAct, LabelId, std::vector<int>>> children;
};

struct ReachForest {
  std::vector<ForestNode> nodes;
  std::vector<int> roots;
  int max_depth = 0;
  // Longest silent proc-1 segment folded into any single edge; depth bounds
  // for play-level re-checks need max_depth * (max_sigma1_run + 1) game steps.
  int max_sigma1_run = 0;
};

struct ReachSolveResult {
  Winner winner = Winner::ForallWins;
  ReachForest forest;
  size_t nodes_built = 0;
};

// Builds the knowledge forest breadth-first; throws BudgetExceededError past
// max_nodes. Roots: the p = 0 initial knowledge plus every observable
// successor of the p = 1 initial knowledge (minus Goal states, which count).
ReachForest build_forest(const GameCtx& ctx, size_t max_nodes = 200000);

// Bottom-up win labelling: a leaf wins iff ClosedGoal; an expanded node wins
// iff some pick answers every adversary label with all-winning children.
void label_win(ReachForest& f);

ReachSolveResult solve_reach(const GameCtx& ctx, size_t max_nodes = 200000);

}  // namespace lcs
