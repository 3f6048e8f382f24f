#pragma once

#include <string>
#include <vector>

#include "lcsynth/model.hpp"

namespace lcs {

// Channel contents are words over MsgId, stored byte-per-message.
using Word = std::string;

// Subword (scattered-subsequence) embedding x into y, greedy left-to-right.
bool subword_leq(const Word& x, const Word& y);

// Suffix of y strictly after the first occurrence of m; empty optional when
// m does not occur in y.
std::optional<Word> suffix_after_first(MsgId m, const Word& y);

// All subwords of y, deduplicated, shortlex order. Exponential; test use only.
std::vector<Word> subwords(const Word& y);

// One word per channel.
using Valuation = std::vector<Word>;

Valuation empty_valuation(int chans);

// Pointwise subword order on valuations of equal arity.
bool valuation_leq(const Valuation& a, const Valuation& b);

std::string format_valuation(const LcsModel& m, const Valuation& v);

// A state bucket: proc-1 location plus channel valuation. States of one
// upward/downward closed piece share a fixed observation (p, q0, heads), so
// only (q1, w) varies inside it.
struct QVal {
  LocId q1 = 0;
  Valuation val;
  bool operator==(const QVal&) const = default;
  bool operator<(const QVal& o) const {
    if (q1 != o.q1) return q1 < o.q1;
    return val < o.val;
  }
};

// q1 must agree; valuations compare pointwise.
bool qval_leq(const QVal& a, const QVal& b);

// Inserts v into an antichain of minima: drops v if some element is <= v,
// removes elements v is <= of. Returns true when v entered.
bool min_antichain_insert(std::vector<QVal>& chain, const QVal& v);

// Same for maxima.
bool max_antichain_insert(std::vector<QVal>& chain, const QVal& v);

// Upward closed set of states at one observation, as minima antichain.
// Empty minima = empty set.
struct UpSet {
  Obs obs;
  std::vector<QVal> minima;

  bool empty() const { return minima.empty(); }
  bool contains(const QVal& v) const;
  void normalize();  // sort minima; assumes antichain
  bool operator==(const UpSet&) const = default;
  bool operator<(const UpSet& o) const {
    if (!(obs == o.obs)) return obs < o.obs;
    return minima < o.minima;
  }
};

// upset_superseteq(a, b) holds iff a contains b as sets: observations agree
// and every minimum of b lies above some minimum of a.
bool upset_superseteq(const UpSet& a, const UpSet& b);

UpSet upset_union(const UpSet& a, const UpSet& b);

// Downward closed set at one observation, as maxima antichain.
struct KnowSet {
  Obs obs;
  std::vector<QVal> maxima;

  bool empty() const { return maxima.empty(); }
  bool contains(const QVal& v) const;
  void normalize();
  bool operator==(const KnowSet&) const = default;
};

// Nonempty intersection test between a downward closed set and an upward
// closed set at the same observation.
bool knowset_meets_upset(const KnowSet& k, const UpSet& u);

// Containment a within b: observations agree and every maximum of a lies
// below some maximum of b.
bool knowset_subseteq(const KnowSet& a, const KnowSet& b);

// A family: finite set of upward closed pieces, all sharing one observation
// (the solver builds families per target observation). Order: l <= l' iff
// every piece of l contains some piece of l'. Kept sorted and deduplicated.
struct LFamily {
  std::vector<UpSet> pieces;
  void normalize();
  bool operator==(const LFamily&) const = default;
  bool operator<(const LFamily& o) const { return pieces < o.pieces; }
};

bool family_leq(const LFamily& a, const LFamily& b);

// Keeps only <=-minimal families; stable result order.
std::vector<LFamily> family_min(std::vector<LFamily> fams);

std::string format_upset(const LcsModel& m, const UpSet& u);
std::string format_family(const LcsModel& m, const LFamily& l);

}  // namespace lcs
