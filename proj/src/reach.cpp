#include "lcsynth/reach.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace lcs {

const char* node_status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Expanded: return "expanded";
    case NodeStatus::ClosedGoal: return "closed-goal";
    case NodeStatus::ClosedSubsumed: return "closed-subsumed";
    case NodeStatus::ClosedS1: return "closed-s1";
    case NodeStatus::ClosedDead: return "closed-dead";
  }
  return "?";
}

namespace {

NodeStatus leaf_status(ChainEmit::Kind k) {
  switch (k) {
    case ChainEmit::GoalLeaf: return NodeStatus::ClosedGoal;
    case ChainEmit::StallLeaf:
    case ChainEmit::DeadLeaf: return NodeStatus::ClosedS1;
    case ChainEmit::Piece: break;
  }
  return NodeStatus::Open;
}

}  // namespace

ReachForest build_forest(const GameCtx& ctx, size_t max_nodes) {
  const LcsModel& m = *ctx.model;
  if (m.objective.kind != ObjectiveKind::Reach)
    throw std::logic_error("forest construction requires a reach objective");
  const ObsPredicate* goal = &m.objective.target;

  ReachForest f;
  std::vector<int> depth;
  std::deque<int> frontier;

  auto add_node = [&](int parent, KnowSet d, NodeStatus st) {
    if (f.nodes.size() >= max_nodes)
      throw BudgetExceededError("knowledge forest passed " +
                                std::to_string(max_nodes) + " nodes");
    ForestNode n;
    n.id = static_cast<int>(f.nodes.size());
    n.parent = parent;
    n.knowledge = std::move(d);
    n.status = st;
    int dep = parent < 0 ? 0 : depth[parent] + 1;
    depth.push_back(dep);
    f.max_depth = std::max(f.max_depth, dep);
    f.nodes.push_back(std::move(n));
    if (st == NodeStatus::Open) frontier.push_back(f.nodes.back().id);
    return f.nodes.back().id;
  };

  // p = 0 initial knowledge
  {
    KnowSet d;
    d.obs = observe(m, GameState{0, m.proc[0].initial, m.proc[1].initial,
                                 empty_valuation(m.chan_count())});
    d.maxima = {QVal{m.proc[1].initial, empty_valuation(m.chan_count())}};
    d.normalize();
    f.roots.push_back(add_node(-1, std::move(d), NodeStatus::Open));
  }

  // observable successors of the p = 1 initial knowledge; a goal hit at the
  // pending observation counts as visited and contributes no obligation
  {
    KnowSet seed;
    seed.obs = observe(m, GameState{1, m.proc[0].initial, m.proc[1].initial,
                                    empty_valuation(m.chan_count())});
    seed.maxima = {QVal{m.proc[1].initial, empty_valuation(m.chan_count())}};
    seed.normalize();
    for (ChainEmit& em : post1_obs(ctx, seed, goal, &f.max_sigma1_run)) {
      if (em.kind == ChainEmit::GoalLeaf) continue;
      f.roots.push_back(add_node(-1, std::move(em.piece),
                                 leaf_status(em.kind)));
    }
  }

  while (!frontier.empty()) {
    int id = frontier.front();
    frontier.pop_front();
    KnowSet d = f.nodes[id].knowledge;

    if (predicate_matches(m, *goal, d.obs)) {
      f.nodes[id].status = NodeStatus::ClosedGoal;
      continue;
    }
    bool subsumed = false;
    for (int a = f.nodes[id].parent; a >= 0; a = f.nodes[a].parent) {
      if (knowset_subseteq(f.nodes[a].knowledge, d)) { subsumed = true; break; }
    }
    if (subsumed) {
      f.nodes[id].status = NodeStatus::ClosedSubsumed;
      continue;
    }
    if (enabled_of_obs(m, d.obs).empty()) {
      // no menu at all: every play stops here short of the goal
      f.nodes[id].status = NodeStatus::ClosedDead;
      continue;
    }

    f.nodes[id].status = NodeStatus::Expanded;
    for (const EAct& pick : acts_exists(m, d.obs)) {
      for (LabelId a : acts_forall(m, d.obs, pick)) {
        std::vector<int> kids;
        for (ChainEmit& em :
             post0_obs(ctx, d, a, goal, &f.max_sigma1_run)) {
          kids.push_back(add_node(id, std::move(em.piece),
                                  leaf_status(em.kind)));
        }
        f.nodes[id].children.emplace_back(pick, a, std::move(kids));
      }
    }
  }
  return f;
}

void label_win(ReachForest& f) {
  for (auto it = f.nodes.rbegin(); it != f.nodes.rend(); ++it) {
    ForestNode& n = *it;
    switch (n.status) {
      case NodeStatus::ClosedGoal:
        n.win = true;
        break;
      case NodeStatus::ClosedSubsumed:
      case NodeStatus::ClosedS1:
      case NodeStatus::ClosedDead:
        n.win = false;
        break;
      case NodeStatus::Expanded: {
        n.win = false;
        n.witness.reset();
        // children are grouped per (pick, label) in canonical order; a pick
        // wins when every label it admits has all-winning children
        std::map<EAct, bool> per_pick;
        for (const auto& [pick, a, kids] : n.children) {
          (void)a;
          auto [it2, inserted] = per_pick.emplace(pick, true);
          bool& good = it2->second;
          (void)inserted;
          for (int c : kids)
            if (!f.nodes[c].win) { good = false; break; }
        }
        for (const auto& [pick, good] : per_pick) {
          if (good) {
            n.win = true;
            n.witness = pick;
            break;
          }
        }
        break;
      }
      case NodeStatus::Open:
        n.win = false;
        break;
    }
  }
}

ReachSolveResult solve_reach(const GameCtx& ctx, size_t max_nodes) {
  ReachSolveResult res;
  res.forest = build_forest(ctx, max_nodes);
  label_win(res.forest);
  res.nodes_built = res.forest.nodes.size();
  bool all = true;
  for (int r : res.forest.roots)
    if (!res.forest.nodes[r].win) { all = false; break; }
  res.winner = all ? Winner::ExistsWins : Winner::ForallWins;
  return res;
}

}  // namespace lcs
