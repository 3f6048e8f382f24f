#include "lcsynth/sre.hpp"

#include <algorithm>
#include <map>

namespace lcs {

namespace {

bool subset(uint64_t a, uint64_t b) { return (a & ~b) == 0; }

}  // namespace

void sre_normalize(Sre& e) {
  bool again = true;
  while (again) {
    again = false;
    std::vector<SreAtom> out;
    out.reserve(e.atoms.size());
    for (const SreAtom& a : e.atoms) {
      if (a.syms == 0) continue;
      if (!out.empty()) {
        SreAtom& prev = out.back();
        // letter next to a star that covers it adds nothing
        if (prev.star && !a.star && subset(a.syms, prev.syms)) {
          again = true;
          continue;
        }
        if (!prev.star && a.star && subset(prev.syms, a.syms)) {
          prev = a;
          again = true;
          continue;
        }
        // A* B* with one side contained collapses to the larger star
        if (prev.star && a.star && (subset(a.syms, prev.syms) || subset(prev.syms, a.syms))) {
          prev.syms |= a.syms;
          again = true;
          continue;
        }
      }
      out.push_back(a);
    }
    e.atoms = std::move(out);
  }
}

Sre sre_append(const Sre& e, MsgId m) {
  Sre r = e;
  r.atoms.push_back(letter_atom(m));
  sre_normalize(r);
  return r;
}

std::vector<Sre> sre_read(const Sre& e, MsgId m) {
  std::vector<Sre> out;
  const uint64_t bit = uint64_t{1} << m;
  for (size_t i = 0; i < e.atoms.size(); ++i) {
    if (!(e.atoms[i].syms & bit)) continue;
    // head produced by atom i; everything before it contributed eps
    Sre tail;
    if (e.atoms[i].star) tail.atoms.push_back(e.atoms[i]);
    tail.atoms.insert(tail.atoms.end(), e.atoms.begin() + i + 1, e.atoms.end());
    sre_normalize(tail);
    bool dominated = false;
    for (const Sre& o : out)
      if (sre_subseteq(tail, o)) {
        dominated = true;
        break;
      }
    if (dominated) continue;
    std::erase_if(out, [&](const Sre& o) { return sre_subseteq(o, tail); });
    out.push_back(std::move(tail));
  }
  return out;
}

std::vector<SreHead> sre_heads(const Sre& e) {
  std::vector<SreHead> out;
  uint64_t seen = 0;
  for (const SreAtom& a : e.atoms) seen |= a.syms;
  for (MsgId m = 0; m < 64; ++m) {
    if (!(seen & (uint64_t{1} << m))) continue;
    for (Sre& t : sre_read(e, m)) out.push_back({m, std::move(t)});
  }
  out.push_back({kEps, Sre{}});
  return out;
}

bool sre_has_superword(const Sre& e, const Word& w) {
  size_t pos = 0;
  for (const SreAtom& a : e.atoms) {
    if (pos == w.size()) break;
    if (a.star) {
      while (pos < w.size() && (a.syms & (uint64_t{1} << (MsgId)w[pos]))) ++pos;
    } else {
      if (a.syms & (uint64_t{1} << (MsgId)w[pos])) ++pos;
    }
  }
  return pos == w.size();
}

namespace {

// a[i..] subset of b[j..]; small inputs, memo keyed by (i, j)
bool incl(const Sre& a, const Sre& b, size_t i, size_t j, std::map<std::pair<size_t, size_t>, bool>& memo) {
  if (i == a.atoms.size()) return true;
  if (j == b.atoms.size()) return false;
  auto key = std::make_pair(i, j);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  bool r = false;
  const SreAtom& x = a.atoms[i];
  const SreAtom& y = b.atoms[j];
  if (x.star) {
    // unbounded repetition needs one covering star on the right
    if (y.star && subset(x.syms, y.syms)) r = incl(a, b, i + 1, j, memo);
  } else {
    if (y.star ? subset(x.syms, y.syms) : x.syms == y.syms)
      r = incl(a, b, i + 1, y.star ? j : j + 1, memo);
  }
  if (!r) r = incl(a, b, i, j + 1, memo);
  memo[key] = r;
  return r;
}

}  // namespace

bool sre_subseteq(const Sre& a, const Sre& b) {
  std::map<std::pair<size_t, size_t>, bool> memo;
  return incl(a, b, 0, 0, memo);
}

Sre sre_widen(const Sre& e, size_t max_atoms) {
  if (e.atoms.size() <= max_atoms || max_atoms < 2) return e;
  // first collapse runs of equal letters into stars; this keeps phase shapes
  // like 0^a 1^b as 0* 1* instead of smearing them into (0|1)*
  Sre r;
  for (const SreAtom& a : e.atoms) {
    if (!r.atoms.empty() && !a.star && !r.atoms.back().star &&
        r.atoms.back().syms == a.syms) {
      r.atoms.back() = star_atom(a.syms);
    } else {
      r.atoms.push_back(a);
    }
  }
  sre_normalize(r);
  if (r.atoms.size() <= max_atoms) return r;
  // still too wide: collapse a middle window into a star over its symbols
  size_t front = max_atoms / 2;
  size_t back = max_atoms - front - 1;
  Sre w;
  w.atoms.assign(r.atoms.begin(), r.atoms.begin() + front);
  uint64_t mid = 0;
  for (size_t i = front; i + back < r.atoms.size(); ++i) mid |= r.atoms[i].syms;
  w.atoms.push_back(star_atom(mid));
  w.atoms.insert(w.atoms.end(), r.atoms.end() - back, r.atoms.end());
  sre_normalize(w);
  return w;
}

std::string format_sre(const LcsModel& m, int chan, const Sre& e) {
  std::string s = m.channels[chan] + "~";
  if (e.atoms.empty()) return s + "eps";
  for (const SreAtom& a : e.atoms) {
    if (a.star) {
      s += "(";
      bool first = true;
      for (int i = 0; i < m.msg_count(); ++i)
        if (a.syms & (uint64_t{1} << i)) {
          if (!first) s += "|";
          s += m.messages[i];
          first = false;
        }
      s += ")*";
    } else {
      for (int i = 0; i < m.msg_count(); ++i)
        if (a.syms & (uint64_t{1} << i)) s += m.messages[i] + "?";
    }
  }
  return s;
}

}  // namespace lcs
