#pragma once

// Simple regular expressions: products of atoms (m + eps) and (m1+..+mk)*.
// Every subword-downward-closed word language is a finite union of such
// products; one product serves as the per-channel abstraction value in
// strategy extraction. Symbols are MsgId, sets are bitmasks (MsgId < 64).

#include <cstdint>
#include <string>
#include <vector>

#include "lcsynth/order.hpp"

namespace lcs {

struct SreAtom {
  bool star = false;
  uint64_t syms = 0;  // nonempty; letter atoms carry exactly one bit

  friend auto operator<=>(const SreAtom&, const SreAtom&) = default;
};

// product of atoms; empty product denotes {eps}
struct Sre {
  std::vector<SreAtom> atoms;

  friend auto operator<=>(const Sre&, const Sre&) = default;
};

inline SreAtom letter_atom(MsgId m) { return {false, uint64_t{1} << m}; }
inline SreAtom star_atom(uint64_t syms) { return {true, syms}; }

// absorbs letter atoms adjacent to stars that already contain them and
// merges adjacent stars where one side contains the other
void sre_normalize(Sre& e);

// language extension with one trailing write: e * (m + eps)
Sre sre_append(const Sre& e, MsgId m);

// tails after consuming head m: every way to serve m from some atom with all
// earlier atoms flattened to eps. Result is a union, possibly empty when m
// does not occur in e.
std::vector<Sre> sre_read(const Sre& e, MsgId m);

// possible observed heads: every symbol of every atom, plus eps (all atoms
// are nullable). Pairs each head with the tail language after it; the eps
// head pairs with {eps} itself.
struct SreHead {
  MsgId head;  // kEps for the empty-channel option
  Sre tail;
};
std::vector<SreHead> sre_heads(const Sre& e);

// w embeddable in some word of the language; greedy left-to-right scan
bool sre_has_superword(const Sre& e, const Word& w);

// language inclusion for products, memoized recursive matcher
bool sre_subseteq(const Sre& a, const Sre& b);

// caps the atom count by merging a middle window into a star over its
// symbol union; identity when already within the cap
Sre sre_widen(const Sre& e, size_t max_atoms);

std::string format_sre(const LcsModel& m, int chan, const Sre& e);

}  // namespace lcs
