#pragma once

#include "lcsynth/strategy.hpp"

namespace lcs {

// ---- independent verification of extracted strategies ----

// Product of proc-0 with the strategy automaton: locations Q0 x A-states,
// transitions pair strategy edges with matching proc-0 transitions, head
// observations folded into strengthened guards. Proc-1 is copied unchanged.
// The play under the strategy is exactly the play of the product model.
LcsModel product_lcs(const LcsModel& m, const StrategyAutomaton& a);

// Map from product proc-0 location back to (q0, automaton state).
struct ProductInfo {
  LcsModel model;
  std::vector<std::pair<LocId, int>> loc_origin;
};

ProductInfo product_lcs_info(const LcsModel& m, const StrategyAutomaton& a);

// Backward coverability for the weak (lossy) transition system of a model:
// can a state covering the target predicate be reached from the initial
// state? Standard antichain saturation over minimal configurations.
struct CoverState {
  uint8_t p = 0;
  LocId q0 = 0;
  LocId q1 = 0;
  Valuation w;
  bool operator<(const CoverState& o) const {
    if (p != o.p) return p < o.p;
    if (q0 != o.q0) return q0 < o.q0;
    if (q1 != o.q1) return q1 < o.q1;
    return w < o.w;
  }
  bool operator==(const CoverState&) const = default;
};

struct CoverResult {
  bool reachable = false;
  size_t basis_size = 0;
  int iterations = 0;
};

CoverResult backward_coverability(const LcsModel& m, const ObsPredicate& target,
                                  size_t max_basis = 2000000);

// ---- bounded exhaustive playouts ----

struct OutcomeReport {
  bool violated = false;       // some play broke the objective within bound
  bool frontier_open = false;  // some play hit the depth bound unresolved
  size_t plays_explored = 0;
  std::vector<SimStep> counterexample;  // filled when violated
};

// Explores every weak play of the model under the strategy up to depth,
// memoized on (game state, automaton state). Safety: violated when an error
// state is visited. Reach: violated when a maximal (dead) play misses Goal;
// frontier_open marks depth-truncated plays that have not visited Goal yet.
OutcomeReport exhaustive_outcomes(const LcsModel& m, const StrategyAutomaton& a,
                                  int depth, size_t max_states = 4000000);

// ---- reference solver, small instances only ----

struct OracleResult {
  bool finite = false;  // weak state space enumerated within budget
  Winner winner = Winner::ForallWins;
  size_t states = 0;
};

// Explicit-state solver over the weak transition graph: builds the full
// knowledge-subset game and runs the matching fixpoint. Only sound when the
// reachable weak state space is finite; reports finite = false otherwise.
OracleResult finite_oracle_solve(const LcsModel& m, size_t max_states = 500000);

// ---- random model generation ----

struct FuzzParams {
  int max_locs0 = 3;
  int max_locs1 = 3;
  int max_msgs = 2;
  int max_chans = 2;
  int max_trans = 6;
  bool reach = false;
};

// Random small model, valid by construction, finite-weak-space biased (write
// budget via structural loop breaking is not guaranteed; pair with
// finite_oracle_solve and skip non-finite draws).
LcsModel fuzz_model(uint64_t seed, const FuzzParams& params);

}  // namespace lcs
