#include "lcsynth/solve.hpp"

#include <string>

#include "lcsynth/errors.hpp"

namespace lcs {

AnytimeSafetyResult solve_safety_anytime(const GameCtx& ctx,
                                         int max_generations,
                                         bool want_strategy) {
  SafetyFixpoint fp(ctx);
  AnytimeSafetyResult res;
  auto finish = [&](Winner w, SafetyStop stop) {
    res.winner = w;
    res.stop = stop;
    res.basis = std::move(fp.basis);
    res.generations = fp.generations;
    res.families_seen = fp.seen.size();
    return std::move(res);
  };

  // the seed families can already flag the initial knowledge (error at start)
  if (!exists_wins_safety(ctx, fp.basis))
    return finish(Winner::ForallWins, SafetyStop::InitialFlagged);

  for (;;) {
    if (fp.generations >= max_generations)
      throw BudgetExceededError("safety fixpoint passed " +
                                std::to_string(max_generations) +
                                " generations without a certificate");
    bool done = fp.step();
    if (!exists_wins_safety(ctx, fp.basis))
      return finish(Winner::ForallWins, SafetyStop::InitialFlagged);
    if (done) {
      if (want_strategy) res.strategy = extract_safety_strategy(ctx, fp.basis);
      return finish(Winner::ExistsWins, SafetyStop::Converged);
    }
    ExtractAttempt at = try_extract_safety_strategy(ctx, fp.basis);
    if (at.strategy) {
      res.strategy = std::move(at.strategy);
      return finish(Winner::ExistsWins, SafetyStop::StrategyCertified);
    }
  }
}

}  // namespace lcs
