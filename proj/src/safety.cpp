#include "lcsynth/safety.hpp"

#include <algorithm>
#include <bitset>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace lcs {

namespace {

// u touches an initial state: initial proc-0 location, all heads empty, and
// a minimum equal to (initial proc-1 location, all-empty channels). Both next
// flags are initial, so the observation flag does not filter.
bool meets_initial(const LcsModel& m, const UpSet& u) {
  if (u.obs.q0 != m.proc[0].initial) return false;
  for (uint8_t h : u.obs.heads)
    if (h != kEps) return false;
  for (const QVal& v : u.minima) {
    if (v.q1 != m.proc[1].initial) continue;
    bool all_empty = true;
    for (const Word& w : v.val)
      if (!w.empty()) { all_empty = false; break; }
    if (all_empty) return true;
  }
  return false;
}

}  // namespace

std::vector<LFamily> init_bad(const GameCtx& ctx) {
  const LcsModel& m = *ctx.model;
  std::vector<LFamily> out;
  for (const Obs& o : objective_observations(m)) {
    // full state set of o: one minimum per proc-1 location, channel words
    // pinned to the observed heads
    UpSet all;
    all.obs = o;
    for (size_t q1 = 0; q1 < m.proc[1].loc_names.size(); ++q1) {
      QVal v;
      v.q1 = (LocId)q1;
      v.val = empty_valuation(m.chan_count());
      for (int c = 0; c < m.chan_count(); ++c)
        if (o.heads[c] != kEps) v.val[c] = Word(1, (char)o.heads[c]);
      all.minima.push_back(std::move(v));
    }
    all.normalize();
    if (all.empty()) continue;
    LFamily fam;
    fam.pieces.push_back(std::move(all));
    fam.normalize();
    out.push_back(std::move(fam));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<LFamily> expand_bad(const GameCtx& ctx,
                                const std::vector<LFamily>& basis,
                                const std::vector<LFamily>* fresh,
                                ExpandScratch* scratch) {
  const LcsModel& m = *ctx.model;
  std::set<LFamily> cands;

  ExpandScratch local;
  if (scratch == nullptr) scratch = &local;
  std::set<LFamily> fresh_set;
  if (fresh != nullptr) fresh_set.insert(fresh->begin(), fresh->end());
  auto is_fresh = [&](const LFamily& lp) {
    return fresh == nullptr || fresh_set.count(lp) != 0;
  };

  // pending-turn generator: pull every piece of a family back through the
  // silent process, to saturation when idle steps make the pullback grow
  // monotonically. The saturated family dominates every intermediate stage,
  // so emitting only the limit keeps the basis free of orbit noise.
  for (const LFamily& lp : basis) {
    if (!is_fresh(lp)) continue;
    LFamily cand;
    bool ok = true;
    for (const UpSet& u : lp.pieces) {
      auto sit = scratch->sat1.find(u);
      if (sit == scratch->sat1.end()) {
        UpSet p = pre1_piece(ctx, u);
        if (ctx.idle) {
          for (int round = 0; round < 100000; ++round) {
            UpSet q = pre1_piece(ctx, p);
            if (q == p) break;
            p = std::move(q);
          }
        }
        sit = scratch->sat1.emplace(u, std::move(p)).first;
      }
      if (sit->second.empty()) { ok = false; break; }
      cand.pieces.push_back(sit->second);
    }
    if (ok) {
      cand.normalize();
      cands.insert(std::move(cand));
    }
  }

  std::vector<LabelId> labels0;
  for (size_t a = 0; a < m.label_names.size(); ++a)
    if (m.label_proc[a] == 0) labels0.push_back((LabelId)a);

  // piece -> label -> source observation -> pre piece, persistent across
  // generations. Candidate targets are exactly the observations showing up
  // here; everywhere else some required pre piece is empty.
  auto& pre = scratch->pre;
  std::set<Obs> targets;
  for (const LFamily& lp : basis)
    for (const UpSet& u : lp.pieces) {
      auto it = pre.find(u);
      if (it == pre.end()) {
        it = pre.emplace(u, std::map<LabelId, std::map<Obs, UpSet>>()).first;
        for (LabelId a : labels0) {
          std::map<Obs, UpSet> by_obs;
          for (UpSet& p : pre0_pieces(ctx, u, a))
            by_obs.emplace(p.obs, std::move(p));
          it->second.emplace(a, std::move(by_obs));
        }
      }
      for (const auto& [a, by_obs] : it->second)
        for (const auto& [o, p] : by_obs) targets.insert(o);
    }

  // a ⊑ b as piece sets: every piece of a contains some piece of b; products
  // built from a replacing b only shrink in ⊑, so dominated options and
  // dominated partial unions can be dropped without losing minimal families
  auto option_leq = [](const std::vector<UpSet>& a,
                       const std::vector<UpSet>& b) {
    for (const UpSet& u : a) {
      bool cov = false;
      for (const UpSet& v : b)
        if (upset_superseteq(u, v)) { cov = true; break; }
      if (!cov) return false;
    }
    return true;
  };

  struct Option {
    std::vector<UpSet> pieces;
    bool is_new = false;
  };

  // control-turn generator: per target observation, one candidate per choice
  // function mapping each menu pick to an adversary response. A response is a
  // resolved label plus a stored family whose pieces all pull back to the
  // target; distinct responses with equal pullbacks collapse.
  for (const Obs& o : targets) {
    std::vector<EAct> menu = acts_exists(m, o);
    if (menu.empty()) continue;

    std::map<LabelId, std::map<std::vector<UpSet>, bool>> by_label;
    auto options_for =
        [&](LabelId a) -> const std::map<std::vector<UpSet>, bool>& {
      auto it = by_label.find(a);
      if (it == by_label.end()) {
        std::map<std::vector<UpSet>, bool> opts;
        for (const LFamily& lp : basis) {
          std::vector<UpSet> chosen;
          bool ok = true;
          for (const UpSet& u : lp.pieces) {
            const auto& by_obs = pre.at(u).at(a);
            auto pit = by_obs.find(o);
            if (pit == by_obs.end()) { ok = false; break; }
            chosen.push_back(pit->second);
          }
          if (!ok) continue;
          std::sort(chosen.begin(), chosen.end());
          chosen.erase(std::unique(chosen.begin(), chosen.end()),
                       chosen.end());
          // an option reachable from an old family counts as old
          auto [oit, inserted] = opts.emplace(std::move(chosen), is_fresh(lp));
          if (!inserted && !is_fresh(lp)) oit->second = false;
        }
        it = by_label.emplace(a, std::move(opts)).first;
      }
      return it->second;
    };

    std::vector<std::vector<Option>> per_pick;
    bool feasible = true;
    for (const EAct& pick : menu) {
      std::map<std::vector<UpSet>, bool> raw;
      for (LabelId a : acts_forall(m, o, pick))
        for (const auto& [piece_set, fresh_flag] : options_for(a)) {
          auto [rit, inserted] = raw.emplace(piece_set, fresh_flag);
          if (!inserted && !fresh_flag) rit->second = false;
        }
      // a pick the adversary cannot answer keeps the play out of the basis
      if (raw.empty()) { feasible = false; break; }
      std::vector<Option> opts;
      for (const auto& [piece_set, fresh_flag] : raw) {
        bool dominated = false;
        for (const Option& kept : opts)
          if (option_leq(kept.pieces, piece_set)) { dominated = true; break; }
        if (dominated) continue;
        std::erase_if(opts, [&](const Option& kept) {
          return option_leq(piece_set, kept.pieces);
        });
        opts.push_back({piece_set, fresh_flag});
      }
      per_pick.push_back(std::move(opts));
    }
    if (!feasible || per_pick.empty()) continue;

    // fewest options first tightens the pruning below
    std::sort(per_pick.begin(), per_pick.end(),
              [](const auto& a, const auto& b) { return a.size() < b.size(); });

    // all-old selections were emitted the generation their last ingredient
    // arrived; a branch with no fresh option left can stop early
    std::vector<char> fresh_ahead(per_pick.size() + 1, 0);
    for (size_t i = per_pick.size(); i > 0; --i) {
      bool here = false;
      for (const Option& opt : per_pick[i - 1])
        if (opt.is_new) { here = true; break; }
      fresh_ahead[i - 1] = (char)(here || fresh_ahead[i]);
    }
    if (fresh != nullptr && !fresh_ahead[0]) continue;

    std::vector<const LFamily*> ref;
    for (const LFamily& lp : basis)
      if (!lp.pieces.empty() && lp.pieces.front().obs == o)
        ref.push_back(&lp);
    std::vector<LFamily> emitted;

    // accumulated union of chosen piece sets, refcounted across levels
    std::map<UpSet, int> acc;
    auto acc_dominated = [&]() {
      auto covered_by_acc = [&](const LFamily& f) {
        if (f.pieces.empty()) return false;
        for (const UpSet& u : f.pieces) {
          bool cov = false;
          for (const auto& [v, n] : acc)
            if (upset_superseteq(u, v)) { cov = true; break; }
          if (!cov) return false;
        }
        return true;
      };
      for (const LFamily* f : ref)
        if (covered_by_acc(*f)) return true;
      for (const LFamily& f : emitted)
        if (covered_by_acc(f)) return true;
      return false;
    };

    std::function<void(size_t, int)> go = [&](size_t i, int used_fresh) {
      // a dominated partial union stays dominated under every extension
      if (acc_dominated()) return;
      if (fresh != nullptr && used_fresh == 0 && !fresh_ahead[i]) return;
      if (i == per_pick.size()) {
        LFamily cand;
        for (const auto& [u, n] : acc) cand.pieces.push_back(u);
        cand.normalize();
        emitted.push_back(cand);
        cands.insert(std::move(cand));
        return;
      }
      for (const Option& option : per_pick[i]) {
        for (const UpSet& u : option.pieces) ++acc[u];
        go(i + 1, used_fresh + (option.is_new ? 1 : 0));
        for (const UpSet& u : option.pieces) {
          auto it = acc.find(u);
          if (--it->second == 0) acc.erase(it);
        }
      }
    };
    go(0, 0);
  }

  return {cands.begin(), cands.end()};
}

// Bad(f) is the set of knowledge sets meeting every piece of f. A candidate
// whose bad region sits inside the union of the kept regions can be dropped:
// any knowledge set it flags is flagged by a keeper, and its descendants are
// matched by descendants of the coverers response for response.
bool region_covered(const LFamily& f,
                    const std::vector<const LFamily*>& kept) {
  for (const LFamily* g : kept)
    if (family_leq(*g, f)) return true;

  // Exact test against same-observation keepers. A witness for f escaping
  // the union picks one state per f piece while avoiding, in every keeper,
  // some piece that contains no f piece (a piece containing an f piece is
  // met no matter what). Such a choice exists iff the union of the avoided
  // pieces engulfs no f piece, checked on minima bitsets. Downward closing
  // the witness adds no meets of upward closed pieces, so the
  // state-per-piece construction is exact.
  constexpr size_t kBits = 512;
  using Mask = std::bitset<kBits>;
  std::vector<const QVal*> xs;
  std::vector<Mask> piece_mask(f.pieces.size());
  for (size_t j = 0; j < f.pieces.size(); ++j)
    for (const QVal& x : f.pieces[j].minima) {
      if (xs.size() >= kBits) return false;  // too wide, keep f
      piece_mask[j].set(xs.size());
      xs.push_back(&x);
    }

  auto cover_of = [&](const UpSet& p) {
    Mask c;
    for (size_t b = 0; b < xs.size(); ++b)
      for (const QVal& m : p.minima)
        if (qval_leq(m, *xs[b])) { c.set(b); break; }
    return c;
  };

  // per keeper: the minimal antichain of avoidance coverages
  std::vector<std::vector<Mask>> engaged;
  for (const LFamily* g : kept) {
    std::vector<Mask> opts;
    bool free_avoid = false;
    for (const UpSet& p : g->pieces) {
      bool holds = false;
      for (const UpSet& u : f.pieces)
        if (upset_superseteq(p, u)) { holds = true; break; }
      if (holds) continue;
      Mask c = cover_of(p);
      if (c.none()) { free_avoid = true; break; }
      bool dom = false;
      for (const Mask& o : opts)
        if ((o & ~c).none()) { dom = true; break; }
      if (dom) continue;
      std::erase_if(opts, [&](const Mask& o) { return (c & ~o).none(); });
      opts.push_back(c);
    }
    if (free_avoid) continue;
    if (opts.empty()) return true;  // every piece holds an f piece
    engaged.push_back(std::move(opts));
  }
  if (engaged.empty()) return false;
  std::sort(engaged.begin(), engaged.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });

  // witness search: some avoidance choice leaves every piece partly exposed
  long nodes = 0;
  std::function<bool(size_t, const Mask&)> escape = [&](size_t k,
                                                        const Mask& acc) {
    if (++nodes > 20000) return true;  // search too wide, keep f
    for (const Mask& pm : piece_mask)
      if ((pm & ~acc).none()) return false;
    if (k == engaged.size()) return true;
    for (const Mask& opt : engaged[k])
      if (escape(k + 1, acc | opt)) return true;
    return false;
  };
  return !escape(0, Mask());
}

bool has_converged(const std::vector<LFamily>& prev_min,
                   const std::vector<LFamily>& next_min) {
  std::vector<LFamily> prev = prev_min;
  std::vector<LFamily> next = next_min;
  std::sort(prev.begin(), prev.end());
  std::sort(next.begin(), next.end());
  return std::includes(prev.begin(), prev.end(), next.begin(), next.end());
}

bool losing_knowledge(const KnowSet& k, const std::vector<LFamily>& basis) {
  for (const LFamily& lp : basis) {
    if (lp.pieces.empty()) continue;
    bool all = true;
    for (const UpSet& u : lp.pieces)
      if (!knowset_meets_upset(k, u)) { all = false; break; }
    if (all) return true;
  }
  return false;
}

bool exists_wins_safety(const GameCtx& ctx, const std::vector<LFamily>& basis) {
  const LcsModel& m = *ctx.model;
  for (const LFamily& lp : basis) {
    bool has_clean = false;
    for (const UpSet& u : lp.pieces)
      if (!meets_initial(m, u)) { has_clean = true; break; }
    if (!has_clean) return false;
  }
  return true;
}

SafetyFixpoint::SafetyFixpoint(const GameCtx& c, bool min)
    : ctx(&c), minimize(min) {
  const LcsModel& m = *c.model;
  if (m.objective.kind != ObjectiveKind::Safety)
    throw std::logic_error("safety solver requires a safety objective");
  basis = init_bad(c);
  if (minimize) basis = family_min(std::move(basis));
  seen.insert(basis.begin(), basis.end());
  fresh = basis;
}

bool SafetyFixpoint::step() {
  std::vector<LFamily> cands =
      expand_bad(*ctx, basis, minimize ? &fresh : nullptr, &scratch);
  ++generations;
  seen.insert(cands.begin(), cands.end());

  std::vector<LFamily> next;
  if (minimize) {
    // the basis is already an antichain; only the candidates need checks.
    // Families at distinct observations never compare, so keepers are
    // bucketed by observation.
    fresh.clear();
    std::map<Obs, std::vector<LFamily>> buckets;
    for (LFamily& g : basis) buckets[g.pieces.front().obs].push_back(g);
    for (LFamily& f : cands) {
      if (f.pieces.empty()) continue;
      auto& bucket = buckets[f.pieces.front().obs];
      std::vector<const LFamily*> kept;
      kept.reserve(bucket.size());
      for (const LFamily& g : bucket) kept.push_back(&g);
      if (region_covered(f, kept)) continue;
      std::erase_if(bucket, [&](const LFamily& g) { return family_leq(f, g); });
      bucket.push_back(f);
      fresh.push_back(std::move(f));
    }
    for (auto& [o, bucket] : buckets)
      for (LFamily& g : bucket) next.push_back(std::move(g));
    std::sort(next.begin(), next.end());
  } else {
    std::set<LFamily> merged(basis.begin(), basis.end());
    merged.insert(cands.begin(), cands.end());
    next.assign(merged.begin(), merged.end());
  }

  bool done = has_converged(basis, next);
  basis = std::move(next);
  return done;
}

SafetySolveResult solve_safety(const GameCtx& ctx, int max_generations,
                               bool minimize) {
  SafetyFixpoint fp(ctx, minimize);
  for (;;) {
    if (fp.generations >= max_generations)
      throw BudgetExceededError("safety fixpoint passed " +
                                std::to_string(max_generations) +
                                " generations without converging");
    if (fp.step()) break;
  }

  SafetySolveResult res;
  res.winner = exists_wins_safety(ctx, fp.basis) ? Winner::ExistsWins
                                                 : Winner::ForallWins;
  res.basis = std::move(fp.basis);
  res.generations = fp.generations;
  res.families_seen = fp.seen.size();
  return res;
}

}  // namespace lcs
