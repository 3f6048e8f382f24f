#pragma once

#include "lcsynth/safety.hpp"
#include "lcsynth/strategy.hpp"

namespace lcs {

// what ended the anytime run
enum class SafetyStop : uint8_t { Converged, InitialFlagged, StrategyCertified };

inline const char* safety_stop_name(SafetyStop s) {
  switch (s) {
    case SafetyStop::Converged: return "converged";
    case SafetyStop::InitialFlagged: return "initial-flagged";
    case SafetyStop::StrategyCertified: return "strategy-certified";
  }
  return "?";
}

struct AnytimeSafetyResult {
  Winner winner = Winner::ForallWins;
  SafetyStop stop = SafetyStop::Converged;
  std::vector<LFamily> basis;  // as of the stopping generation
  int generations = 0;
  size_t families_seen = 0;
  // verified winning automaton; always present when the stop is
  // StrategyCertified, present after a Converged ExistsWins iff want_strategy
  std::optional<StrategyAutomaton> strategy;
};

// Interleaves the backward fixpoint with certificate checks so instances
// whose basis diverges can still terminate:
//  - a family fully meeting the initial knowledge certifies ForallWins at
//    any generation, since families are losing certificates as soon as they
//    are built;
//  - a strategy extracted from the current basis and accepted by the exact
//    product check certifies ExistsWins at any generation;
//  - convergence decides either way via the initial-knowledge test.
// Throws BudgetExceededError when max_generations passes with no verdict.
AnytimeSafetyResult solve_safety_anytime(const GameCtx& ctx,
                                         int max_generations = 10000,
                                         bool want_strategy = false);

}  // namespace lcs
