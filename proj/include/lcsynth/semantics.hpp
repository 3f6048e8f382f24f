#pragma once

#include <map>
#include <set>

#include "lcsynth/order.hpp"

namespace lcs {

// A game action from the existential player's menu: a proc-0 controllable
// label or the surrender/pass action bottom.
struct EAct {
  bool bottom = false;
  LabelId label = 0;
  bool operator==(const EAct&) const = default;
  bool operator<(const EAct& o) const {
    if (bottom != o.bottom) return bottom > o.bottom;  // bottom sorts first
    return label < o.label;
  }
};

std::string format_eact(const LcsModel& m, const EAct& a);

struct GameCtx {
  const LcsModel* model = nullptr;
  // With idle steps, every proc-1 state also yields itself (under both next
  // flags) as a predecessor option; needed for sound knowledge tracking when
  // proc-1 moves are silent.
  bool idle = true;

  explicit GameCtx(const LcsModel& m, bool idle_steps = true)
      : model(&m), idle(idle_steps) {}
};

// ---- concrete states, test/oracle use ----

struct GameState {
  uint8_t p = 0;
  LocId q0 = 0;
  LocId q1 = 0;
  Valuation w;
  bool operator==(const GameState&) const = default;
  bool operator<(const GameState& o) const {
    if (p != o.p) return p < o.p;
    if (q0 != o.q0) return q0 < o.q0;
    if (q1 != o.q1) return q1 < o.q1;
    return w < o.w;
  }
};

Obs observe(const LcsModel& m, const GameState& s);

// Guard satisfaction on a concrete valuation.
bool guard_sat(const std::vector<Guard>& g, const Valuation& w);

// Strong firing of a transition: nullopt when a read or guard fails.
std::optional<Valuation> apply_ops(const std::vector<Guard>& g,
                                   const std::vector<ChanOp>& op,
                                   const Valuation& w);

// Labels strongly enabled at a concrete state (process p's transitions).
std::vector<LabelId> enabled_labels(const LcsModel& m, const GameState& s);

// All weak successors of s under label: lose, fire strongly, lose again, with
// both next flags. Enumerated directly from subword sets so it stays
// independent of the per-channel transformer tables; meant for plays, oracle
// solving and bounded checks on small words, not for the symbolic solvers.
std::vector<GameState> weak_successors(const LcsModel& m, const GameState& s,
                                       LabelId label);

// ---- menus ----

// Labels strongly enabled at an observation o with p = 0: a proc-0 label is
// enabled iff some transition from q0 carries guards/reads consistent with
// the observed heads. Unobservable channels admit any content, so only
// observable-channel constraints filter.
std::vector<LabelId> enabled_of_obs(const LcsModel& m, const Obs& o);

// Existential menu at a p = 0 observation: enabled controllable labels, plus
// bottom iff none is enabled or some enabled proc-0 label is uncontrollable.
std::vector<EAct> acts_exists(const LcsModel& m, const Obs& o);

// Adversary menu after the existential pick: the pick itself when it is a
// real label, plus every enabled uncontrollable proc-0 label.
std::vector<LabelId> acts_forall(const LcsModel& m, const Obs& o, const EAct& a);

// ---- per-channel word transformers ----

// Least source word x admitting a strong firing x1 -[g,op]-> x' with x1 <= x
// and t <= x'; nullopt when no source works. The minimum is unique: losses
// before the step collapse the candidate set to a single least witness.
std::optional<Word> chan_pre_word(const Guard& g, const ChanOp& op, const Word& t);

// Maximal word reachable from source y through [g,op] with losses before and
// after; nullopt when blocked for every subword of y.
std::optional<Word> chan_post_word(const Guard& g, const ChanOp& op, const Word& y);

// ---- symbolic predecessors ----

// Predecessor pieces of an upward closed piece u under proc-0 label a: the
// p = 0 states (grouped per source observation) from which some a-transition
// weakly reaches into u. Multiple pieces arise from the head split of
// observable channels.
std::vector<UpSet> pre0_pieces(const GameCtx& ctx, const UpSet& u, LabelId a);

// Predecessor piece of u under all proc-1 labels together, including idle
// when ctx.idle: a single p = 1 piece at (1, q0 of u).
UpSet pre1_piece(const GameCtx& ctx, const UpSet& u);

// ---- symbolic successors (knowledge propagation) ----

// Downward closed successor knowledge of a p = 0 piece under adversary label
// a, split per successor observation. The successor flag is the adversary's
// choice, so both p = 0 and p = 1 successors appear.
std::vector<KnowSet> post0_pieces(const GameCtx& ctx, const KnowSet& d, LabelId a);

// Successor knowledge of a p = 1 piece under every proc-1 label, keeping the
// p = 1 flag. Single observation (1, q0). Empty maxima when no label fires.
KnowSet post1_piece(const GameCtx& ctx, const KnowSet& d);

// Flip of a p = 1 piece: same states re-flagged p = 0, split per observation.
std::vector<KnowSet> flip_pieces(const GameCtx& ctx, const KnowSet& d);

// ---- chain-based observable successors ----

// A chain step emission: observable knowledge reached after the silent
// proc-1 run, or a terminal marker.
struct ChainEmit {
  enum Kind : uint8_t {
    Piece,       // p = 0 knowledge at one observation
    GoalLeaf,    // proc-1 knowledge already inside Goal (reach only)
    StallLeaf,   // proc-1 cycle cover: adversary can run silently forever
    DeadLeaf,    // proc-1 knowledge containing a stuck state
  } kind = Piece;
  KnowSet piece;
  bool operator<(const ChainEmit& e) const {
    if (kind != e.kind) return kind < e.kind;
    if (!(piece.obs == e.piece.obs)) return piece.obs < e.piece.obs;
    return piece.maxima < e.piece.maxima;
  }
  bool operator==(const ChainEmit&) const = default;
};

// Runs the silent proc-1 chain d0 = seed, d_{i+1} = post1(d_i), emitting flip
// pieces of the accumulated union at every prefix. The chain's observation is
// fixed, so a goal hit is decided once at the seed (GoalLeaf, no chain). The
// chain stops when some d_i is covered by the latest element (StallLeaf: the
// cover yields a concrete silent loop) or when no proc-1 label fires. A
// location that can go dead inside any d_i yields DeadLeaf. goal may be null
// (no GoalLeaf screening; used outside reach). chain_len, when given, is
// raised to the number of silent steps folded in.
std::vector<ChainEmit> chain_emissions(const GameCtx& ctx, const KnowSet& seed,
                                        const ObsPredicate* goal,
                                        int* chain_len = nullptr);

// Observable successors of p = 0 knowledge d under (exists pick, adversary
// label): flip to proc-1 where the adversary hands the turn over, otherwise
// direct p = 0 pieces. Both flags always available to the adversary, so the
// result merges direct p0 pieces with chain emissions from the p1 part.
std::vector<ChainEmit> post0_obs(const GameCtx& ctx, const KnowSet& d, LabelId a,
                                 const ObsPredicate* goal,
                                 int* chain_len = nullptr);

// Observable successors of initial p = 1 knowledge (root seeding).
std::vector<ChainEmit> post1_obs(const GameCtx& ctx, const KnowSet& seed,
                                 const ObsPredicate* goal,
                                 int* chain_len = nullptr);

// Static check: every transition out of q1 needs some message (a read or a
// head guard), so the all-empty state at q1 is stuck. Stuckness is downward
// closed per location, which makes this the exact emptiness test for "d's
// closure contains a stuck state at q1".
bool proc1_dead_at(const LcsModel& m, LocId q1);

}  // namespace lcs
