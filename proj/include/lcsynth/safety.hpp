#pragma once

#include "lcsynth/semantics.hpp"

namespace lcs {

enum class Winner : uint8_t { ExistsWins, ForallWins };

inline const char* winner_name(Winner w) {
  return w == Winner::ExistsWins ? "exists" : "forall";
}

struct SafetySolveResult {
  Winner winner = Winner::ForallWins;
  // Converged basis of losing-certificate families, minimal elements only.
  std::vector<LFamily> basis;
  int generations = 0;
  size_t families_seen = 0;
};

// Seed families: one singleton family per error observation, holding the full
// state set of that observation as an upward closed piece.
std::vector<LFamily> init_bad(const GameCtx& ctx);

// Reusable state for repeated expansions: backward images per piece and
// label, and silent-run saturations per piece. Both depend only on the model.
struct ExpandScratch {
  std::map<UpSet, std::map<LabelId, std::map<Obs, UpSet>>> pre;
  std::map<UpSet, UpSet> sat1;
};

// One backward generation: applies both generators to every stored family
// and returns the new candidates (not yet minimized into the basis).
// fresh, when given, lists the families added by the previous merge; only
// selections involving at least one fresh ingredient are enumerated, the
// rest were already produced the generation their last ingredient arrived.
std::vector<LFamily> expand_bad(const GameCtx& ctx,
                                const std::vector<LFamily>& basis,
                                const std::vector<LFamily>* fresh = nullptr,
                                ExpandScratch* scratch = nullptr);

// Fixpoint test on consecutive minimized generations: stop when the next
// minimal set introduces nothing outside the previous one.
bool has_converged(const std::vector<LFamily>& prev_min,
                   const std::vector<LFamily>& next_min);

// True when every knowledge set flagged by f is flagged by some keeper, so f
// adds nothing to the union of the kept bad regions. Pairwise family
// domination plus an exact union-coverage witness search on minima bitsets;
// falls back to keeping f when the search would be too wide.
bool region_covered(const LFamily& f, const std::vector<const LFamily*>& kept);

// True when knowledge k is certified losing: some family has every piece
// meeting k.
bool losing_knowledge(const KnowSet& k, const std::vector<LFamily>& basis);

// True when the existential player avoids the error set from every initial
// knowledge: no basis family is fully met by the initial states.
bool exists_wins_safety(const GameCtx& ctx, const std::vector<LFamily>& basis);

// Stepping form of the backward fixpoint so callers can interleave
// certificate checks between generations. basis holds the minimal families
// after the last step; every family in it is a sound losing certificate
// whether or not the fixpoint has converged.
struct SafetyFixpoint {
  explicit SafetyFixpoint(const GameCtx& ctx, bool minimize = true);

  // one expand+merge generation; true when Min(B_{k+1}) added nothing new
  bool step();

  const GameCtx* ctx;
  bool minimize;
  std::vector<LFamily> basis;
  std::vector<LFamily> fresh;  // families added by the last merge
  std::set<LFamily> seen;
  ExpandScratch scratch;
  int generations = 0;
};

// Backward fixpoint over minimal families; throws BudgetExceededError when
// max_generations passes without convergence. minimize = false keeps every
// generated family (equivalence with the pruned run is a test property).
SafetySolveResult solve_safety(const GameCtx& ctx, int max_generations = 10000,
                               bool minimize = true);

}  // namespace lcs
