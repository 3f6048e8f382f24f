#include "lcsynth/order.hpp"

#include <algorithm>
#include <set>

namespace lcs {

bool subword_leq(const Word& x, const Word& y) {
  // Greedy left-to-right matching; exact for the embedding order.
  size_t i = 0;
  for (size_t j = 0; i < x.size() && j < y.size(); ++j) {
    if (x[i] == y[j]) ++i;
  }
  return i == x.size();
}

std::optional<Word> suffix_after_first(MsgId m, const Word& y) {
  auto pos = y.find((char)m);
  if (pos == Word::npos) return std::nullopt;
  return y.substr(pos + 1);
}

std::vector<Word> subwords(const Word& y) {
  std::set<Word> out;
  // Bitmask enumeration; y is tiny in every caller.
  size_t n = y.size();
  for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
    Word w;
    for (size_t i = 0; i < n; ++i)
      if (mask & (size_t(1) << i)) w.push_back(y[i]);
    out.insert(w);
  }
  std::vector<Word> res(out.begin(), out.end());
  std::sort(res.begin(), res.end(), [](const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return res;
}

Valuation empty_valuation(int chans) { return Valuation(chans); }

bool valuation_leq(const Valuation& a, const Valuation& b) {
  if (a.size() != b.size()) return false;
  for (size_t c = 0; c < a.size(); ++c)
    if (!subword_leq(a[c], b[c])) return false;
  return true;
}

static std::string word_text(const LcsModel& m, const Word& w) {
  if (w.empty()) return "eps";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ".";
    s += m.messages[(uint8_t)w[i]];
  }
  return s;
}

std::string format_valuation(const LcsModel& m, const Valuation& v) {
  std::string s = "[";
  for (size_t c = 0; c < v.size(); ++c) {
    if (c) s += ", ";
    s += m.channels[c] + "=" + word_text(m, v[c]);
  }
  return s + "]";
}

bool qval_leq(const QVal& a, const QVal& b) {
  return a.q1 == b.q1 && valuation_leq(a.val, b.val);
}

bool min_antichain_insert(std::vector<QVal>& chain, const QVal& v) {
  for (const auto& e : chain)
    if (qval_leq(e, v)) return false;
  std::erase_if(chain, [&](const QVal& e) { return qval_leq(v, e); });
  chain.push_back(v);
  return true;
}

bool max_antichain_insert(std::vector<QVal>& chain, const QVal& v) {
  for (const auto& e : chain)
    if (qval_leq(v, e)) return false;
  std::erase_if(chain, [&](const QVal& e) { return qval_leq(e, v); });
  chain.push_back(v);
  return true;
}

bool UpSet::contains(const QVal& v) const {
  for (const auto& e : minima)
    if (qval_leq(e, v)) return true;
  return false;
}

void UpSet::normalize() {
  std::vector<QVal> chain;
  for (auto& v : minima) min_antichain_insert(chain, v);
  minima = std::move(chain);
  std::sort(minima.begin(), minima.end());
}

bool upset_superseteq(const UpSet& a, const UpSet& b) {
  if (!(a.obs == b.obs)) return false;
  for (const auto& mb : b.minima)
    if (!a.contains(mb)) return false;
  return true;
}

UpSet upset_union(const UpSet& a, const UpSet& b) {
  UpSet r = a;
  for (const auto& v : b.minima) min_antichain_insert(r.minima, v);
  r.normalize();
  return r;
}

bool KnowSet::contains(const QVal& v) const {
  for (const auto& e : maxima)
    if (qval_leq(v, e)) return true;
  return false;
}

void KnowSet::normalize() {
  std::vector<QVal> chain;
  for (auto& v : maxima) max_antichain_insert(chain, v);
  maxima = std::move(chain);
  std::sort(maxima.begin(), maxima.end());
}

bool knowset_meets_upset(const KnowSet& k, const UpSet& u) {
  if (!(k.obs == u.obs)) return false;
  // Down-closure of maxima meets up-closure of minima iff some pair with
  // equal q1 has min <= max; losses let the middle be realized.
  for (const auto& mx : k.maxima)
    for (const auto& mn : u.minima)
      if (qval_leq(mn, mx)) return true;
  return false;
}

bool knowset_subseteq(const KnowSet& a, const KnowSet& b) {
  if (!(a.obs == b.obs)) return false;
  for (const auto& mx : a.maxima) {
    bool covered = false;
    for (const auto& bx : b.maxima) {
      if (qval_leq(mx, bx)) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

void LFamily::normalize() {
  for (auto& u : pieces) u.normalize();
  std::sort(pieces.begin(), pieces.end());
  pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
  // a piece containing another piece is implied by it (meeting the smaller
  // piece forces meeting the larger), so only the containment-minimal pieces
  // carry the meet-all predicate
  std::vector<UpSet> kept;
  for (size_t i = 0; i < pieces.size(); ++i) {
    bool implied = false;
    for (size_t j = 0; j < pieces.size() && !implied; ++j)
      implied = i != j && upset_superseteq(pieces[i], pieces[j]) &&
                !upset_superseteq(pieces[j], pieces[i]);
    if (!implied) kept.push_back(std::move(pieces[i]));
  }
  pieces = std::move(kept);
}

bool family_leq(const LFamily& a, const LFamily& b) {
  if (a.pieces.empty() || b.pieces.empty()) return a.pieces.empty();
  if (!(a.pieces.front().obs == b.pieces.front().obs)) return false;
  for (const auto& u : a.pieces) {
    bool found = false;
    for (const auto& u2 : b.pieces) {
      if (upset_superseteq(u, u2)) { found = true; break; }
    }
    if (!found) return false;
  }
  return true;
}

std::vector<LFamily> family_min(std::vector<LFamily> fams) {
  std::vector<LFamily> out;
  for (auto& f : fams) {
    bool dominated = false;
    for (const auto& kept : out)
      if (family_leq(kept, f)) { dominated = true; break; }
    if (dominated) continue;
    std::erase_if(out, [&](const LFamily& kept) { return family_leq(f, kept); });
    out.push_back(std::move(f));
  }
  return out;
}

std::string format_obs(const LcsModel& m, const Obs& o) {
  std::string s = "(p=" + std::to_string(o.p) + ", " + m.proc[0].loc_names[o.q0];
  if (o.p == 0) {
    for (int c = 0; c < m.chan_count(); ++c) {
      if (!m.observable[c]) continue;
      s += ", " + m.channels[c] + "=";
      s += o.heads[c] == kEps ? "eps" : m.messages[o.heads[c]];
    }
  }
  return s + ")";
}

std::string format_upset(const LcsModel& m, const UpSet& u) {
  std::string s = "up" + format_obs(m, u.obs) + "{";
  for (size_t i = 0; i < u.minima.size(); ++i) {
    if (i) s += "; ";
    s += m.proc[1].loc_names[u.minima[i].q1] + format_valuation(m, u.minima[i].val);
  }
  return s + "}";
}

std::string format_family(const LcsModel& m, const LFamily& l) {
  std::string s = "{";
  for (size_t i = 0; i < l.pieces.size(); ++i) {
    if (i) s += ", ";
    s += format_upset(m, l.pieces[i]);
  }
  return s + "}";
}

}  // namespace lcs
