#pragma once

#include "lcsynth/reach.hpp"

namespace lcs {

// Finite-memory observation-based strategy for the existential player.
// States are plain ids; edges fire on (p = 0 observation, adversary label).
// The choice is a function of (state, observation) alone: all edges sharing
// (from, obs) carry the same choice.
struct StrategyEdge {
  int from = 0;
  Obs obs;          // p = 0 observation
  EAct choice;      // existential pick at (from, obs)
  LabelId adv = 0;  // adversary's resolved label
  int to = 0;
  bool operator==(const StrategyEdge&) const = default;
};

struct StrategyAutomaton {
  int num_states = 0;
  int initial = 0;
  std::vector<StrategyEdge> edges;
  bool operator==(const StrategyAutomaton&) const = default;

  std::optional<EAct> choice_at(int state, const Obs& o) const;
  std::optional<int> next_state(int state, const Obs& o, LabelId adv) const;
};

struct WellformedReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// (i) single choice per (state, observation); (ii) a choice at every p = 0
// observation of every state; (iii) every choice drawn from the existential
// menu of its observation; (iv) an outgoing edge per adversary answer.
WellformedReport check_wellformed(const LcsModel& m, const StrategyAutomaton& a);

// Moore quotient on (choice rows, successor blocks): states merge when they
// choose identically at every observation and their successors stay merged,
// so the result maps every observation history to the same picks as the
// input. Requires a total automaton (check_wellformed passes).
StrategyAutomaton minimize_strategy(const LcsModel& m,
                                    const StrategyAutomaton& a);

// Winning-strategy extraction against a safety basis. Every family in the
// basis is a sound losing certificate even before convergence, and the
// result is re-verified exactly, so a partial basis is acceptable: it only
// risks incompleteness, never a wrong automaton. Throws
// ExtractionIncompleteError when the knowledge abstraction cannot certify
// any pick at a reachable (state, observation).
StrategyAutomaton extract_safety_strategy(const GameCtx& ctx,
                                          const std::vector<LFamily>& basis);

// Non-throwing probe used by the anytime driver: extraction plus the exact
// product re-check, with the refusal reason instead of an exception.
struct ExtractAttempt {
  std::optional<StrategyAutomaton> strategy;  // present iff verified winning
  std::string failure;
};
ExtractAttempt try_extract_safety_strategy(const GameCtx& ctx,
                                           const std::vector<LFamily>& basis);

// Extraction from a fully win-labelled forest; follows winning picks and
// dispatches on the child observation.
StrategyAutomaton extract_reach_strategy(const GameCtx& ctx, const ReachForest& f);

// ---- simulation ----

// One resolved move: the state it left, the pick shown to the strategy
// (p = 0 states only) and the label that fired.
struct SimStep {
  GameState state;
  std::optional<EAct> choice;
  LabelId action = 0;
};

struct SimPlay {
  std::vector<SimStep> steps;
  GameState final_state;
  bool ended = false;           // maximal: final_state has no successor
  bool visited_target = false;  // some visited state matched the objective
};

struct SimReport {
  std::vector<SimPlay> plays;
  bool truncated = false;  // play cap hit; plays is a prefix of the full set
};

// Deterministic run update on one observed move; asserts an edge exists
// (guaranteed for well-formed automata).
int step_strategy(const StrategyAutomaton& a, int run_state, const Obs& o,
                  const EAct& choice, LabelId adv);

// Enumerates every outcome play against the strategy from both initial
// states: the adversary ranges over its full menu and over all weak-step
// resolutions, up to depth moves per play.
SimReport simulate(const LcsModel& m, const StrategyAutomaton& a, int depth,
                   size_t max_plays = 100000);

// Scripted adversary. Lose drops one message at a valuation index; Step
// fires a label strongly and hands the turn to next_p. Step labels must be
// legal for the adversary at the current state given the strategy's pick.
struct ScriptOp {
  enum Kind : uint8_t { Lose, Step } kind = Step;
  ChanId chan = 0;
  int index = 0;
  LabelId label = 0;
  int next_p = 0;
};

struct ScriptResult {
  SimPlay play;
  std::string error;  // nonempty: script rejected after play.steps moves
};

ScriptResult run_script(const LcsModel& m, const StrategyAutomaton& a,
                        const std::vector<ScriptOp>& script, int start_p);

// ---- serialization ----

std::string strategy_to_json(const LcsModel& m, const StrategyAutomaton& a);
StrategyAutomaton strategy_from_json(const LcsModel& m, const std::string& text);
std::string strategy_to_dot(const LcsModel& m, const StrategyAutomaton& a);

}  // namespace lcs
