#include "lcsynth/semantics.hpp"

#include <algorithm>
#include <cassert>

#include "lcsynth/errors.hpp"

namespace lcs {

namespace {

std::vector<uint8_t> masked_heads(const LcsModel& m) {
  return std::vector<uint8_t>(m.channels.size(), kEps);
}

Word headfix(MsgId msg, const Word& w) {
  if (!w.empty() && static_cast<uint8_t>(w[0]) == msg) return w;
  Word r(1, static_cast<char>(msg));
  r += w;
  return r;
}

bool word_has(const Word& w, MsgId msg) {
  return w.find(static_cast<char>(msg)) != Word::npos;
}

// All valuations below w, channelwise subwords. Exponential; callers stay on
// short words.
std::vector<Valuation> sub_valuations(const Valuation& w) {
  std::vector<std::vector<Word>> per;
  per.reserve(w.size());
  for (const Word& c : w) per.push_back(subwords(c));
  std::vector<Valuation> out;
  Valuation cur(w.size());
  std::vector<size_t> idx(w.size(), 0);
  for (;;) {
    for (size_t c = 0; c < w.size(); ++c) cur[c] = per[c][idx[c]];
    out.push_back(cur);
    size_t c = 0;
    for (; c < w.size(); ++c) {
      if (++idx[c] < per[c].size()) break;
      idx[c] = 0;
    }
    if (c == w.size()) break;
  }
  return out;
}

}  // namespace

std::string format_eact(const LcsModel& m, const EAct& a) {
  if (a.bottom) return "bot";
  return m.label_names[a.label];
}

Obs observe(const LcsModel& m, const GameState& s) {
  Obs o;
  o.p = s.p;
  o.q0 = s.q0;
  o.heads = masked_heads(m);
  if (s.p == 0) {
    for (size_t c = 0; c < m.channels.size(); ++c) {
      if (!m.observable[c] || s.w[c].empty()) continue;
      o.heads[c] = static_cast<uint8_t>(s.w[c][0]);
    }
  }
  return o;
}

bool guard_sat(const std::vector<Guard>& g, const Valuation& w) {
  for (size_t c = 0; c < g.size(); ++c) {
    switch (g[c].kind) {
      case GuardKind::True:
        break;
      case GuardKind::IsEmpty:
        if (!w[c].empty()) return false;
        break;
      case GuardKind::HeadIs:
        if (w[c].empty() || static_cast<uint8_t>(w[c][0]) != g[c].msg)
          return false;
        break;
    }
  }
  return true;
}

std::optional<Valuation> apply_ops(const std::vector<Guard>& g,
                                   const std::vector<ChanOp>& op,
                                   const Valuation& w) {
  if (!guard_sat(g, w)) return std::nullopt;
  Valuation r = w;
  for (size_t c = 0; c < op.size(); ++c) {
    switch (op[c].kind) {
      case OpKind::Nop:
        break;
      case OpKind::Read:
        if (r[c].empty() || static_cast<uint8_t>(r[c][0]) != op[c].msg)
          return std::nullopt;
        r[c].erase(r[c].begin());
        break;
      case OpKind::Write:
        r[c].push_back(static_cast<char>(op[c].msg));
        break;
    }
  }
  return r;
}

std::vector<LabelId> enabled_labels(const LcsModel& m, const GameState& s) {
  const ProcessAutomaton& pa = m.proc[s.p];
  LocId at = s.p == 0 ? s.q0 : s.q1;
  std::vector<LabelId> out;
  for (const Transition& tr : pa.transitions) {
    if (tr.from != at) continue;
    if (apply_ops(tr.guard, tr.op, s.w)) out.push_back(tr.label);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<GameState> weak_successors(const LcsModel& m, const GameState& s,
                                       LabelId label) {
  const ProcessAutomaton& pa = m.proc[s.p];
  LocId at = s.p == 0 ? s.q0 : s.q1;
  std::set<GameState> out;
  for (const Transition& tr : pa.transitions) {
    if (tr.from != at || tr.label != label) continue;
    for (const Valuation& w1 : sub_valuations(s.w)) {
      auto fired = apply_ops(tr.guard, tr.op, w1);
      if (!fired) continue;
      GameState t;
      t.q0 = s.p == 0 ? tr.to : s.q0;
      t.q1 = s.p == 0 ? s.q1 : tr.to;
      for (const Valuation& w2 : sub_valuations(*fired)) {
        t.w = w2;
        t.p = 0;
        out.insert(t);
        t.p = 1;
        out.insert(t);
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<LabelId> enabled_of_obs(const LcsModel& m, const Obs& o) {
  assert(o.p == 0);
  std::vector<LabelId> out;
  for (const Transition& tr : m.proc[0].transitions) {
    if (tr.from != o.q0) continue;
    bool ok = true;
    for (size_t c = 0; ok && c < m.channels.size(); ++c) {
      if (!m.observable[c]) continue;  // validation bars guards/reads here
      uint8_t h = o.heads[c];
      switch (tr.guard[c].kind) {
        case GuardKind::True:
          break;
        case GuardKind::IsEmpty:
          ok = h == kEps;
          break;
        case GuardKind::HeadIs:
          ok = h == tr.guard[c].msg;
          break;
      }
      if (ok && tr.op[c].kind == OpKind::Read) ok = h == tr.op[c].msg;
    }
    if (ok) out.push_back(tr.label);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EAct> acts_exists(const LcsModel& m, const Obs& o) {
  std::vector<EAct> out;
  bool any_ctrl = false;
  bool any_unctrl = false;
  std::vector<LabelId> ctrl;
  for (LabelId a : enabled_of_obs(m, o)) {
    if (m.controllable[a]) {
      any_ctrl = true;
      ctrl.push_back(a);
    } else {
      any_unctrl = true;
    }
  }
  if (!any_ctrl || any_unctrl) out.push_back(EAct{true, 0});
  for (LabelId a : ctrl) out.push_back(EAct{false, a});
  return out;
}

std::vector<LabelId> acts_forall(const LcsModel& m, const Obs& o,
                                 const EAct& a) {
  std::vector<LabelId> out;
  if (!a.bottom) out.push_back(a.label);
  for (LabelId b : enabled_of_obs(m, o))
    if (!m.controllable[b]) out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Word> chan_pre_word(const Guard& g, const ChanOp& op,
                                  const Word& t) {
  switch (op.kind) {
    case OpKind::Nop:
      switch (g.kind) {
        case GuardKind::True:
          return t;
        case GuardKind::IsEmpty:
          if (t.empty()) return Word();
          return std::nullopt;
        case GuardKind::HeadIs:
          return headfix(g.msg, t);
      }
      break;
    case OpKind::Read:
      // the read consumes the head, so a head guard must name the same symbol
      if (g.kind == GuardKind::IsEmpty) return std::nullopt;
      if (g.kind == GuardKind::HeadIs && g.msg != op.msg) return std::nullopt;
      return Word(1, static_cast<char>(op.msg)) + t;
    case OpKind::Write: {
      // the appended symbol can serve as t's last letter
      Word base = t;
      if (!t.empty() && static_cast<uint8_t>(t.back()) == op.msg)
        base.pop_back();
      switch (g.kind) {
        case GuardKind::True:
          return base;
        case GuardKind::IsEmpty:
          if (base.empty()) return Word();
          return std::nullopt;
        case GuardKind::HeadIs:
          return headfix(g.msg, base);
      }
      break;
    }
  }
  return std::nullopt;
}

std::optional<Word> chan_post_word(const Guard& g, const ChanOp& op,
                                   const Word& y) {
  switch (g.kind) {
    case GuardKind::True:
      switch (op.kind) {
        case OpKind::Nop:
          return y;
        case OpKind::Read:
          return suffix_after_first(op.msg, y);
        case OpKind::Write:
          return y + static_cast<char>(op.msg);
      }
      break;
    case GuardKind::IsEmpty:
      // fire from the fully lost channel
      switch (op.kind) {
        case OpKind::Nop:
          return Word();
        case OpKind::Read:
          return std::nullopt;
        case OpKind::Write:
          return Word(1, static_cast<char>(op.msg));
      }
      break;
    case GuardKind::HeadIs: {
      auto rest = suffix_after_first(g.msg, y);
      if (!rest) return std::nullopt;
      // the largest guarded source below y is msg . rest
      switch (op.kind) {
        case OpKind::Nop:
          return Word(1, static_cast<char>(g.msg)) + *rest;
        case OpKind::Read:
          if (op.msg != g.msg) return std::nullopt;
          return *rest;
        case OpKind::Write:
          return Word(1, static_cast<char>(g.msg)) + *rest +
                 static_cast<char>(op.msg);
      }
      break;
    }
  }
  return std::nullopt;
}

namespace {

// Spreads the plain cone above (q1, x) across the p = 0 observations it
// meets: any head can be prefixed onto a channel, eps only when the channel
// is already empty. Minimal representative per observation via headfix.
void spread_pre_obs(const LcsModel& m, LocId q0, LocId q1, const Valuation& x,
                    std::map<Obs, UpSet>& acc) {
  size_t chans = m.channels.size();
  std::vector<std::vector<uint8_t>> opts(chans);
  for (size_t c = 0; c < chans; ++c) {
    if (!m.observable[c]) {
      opts[c] = {kEps};
      continue;
    }
    for (size_t msg = 0; msg < m.messages.size(); ++msg)
      opts[c].push_back(static_cast<uint8_t>(msg));
    if (x[c].empty()) opts[c].push_back(kEps);
  }
  std::vector<size_t> idx(chans, 0);
  for (;;) {
    Obs o;
    o.p = 0;
    o.q0 = q0;
    o.heads = masked_heads(m);
    QVal qv;
    qv.q1 = q1;
    qv.val = x;
    for (size_t c = 0; c < chans; ++c) {
      uint8_t h = opts[c][idx[c]];
      if (!m.observable[c] || h == kEps) continue;
      o.heads[c] = h;
      qv.val[c] = headfix(h, x[c]);
    }
    UpSet& piece = acc[o];
    piece.obs = o;
    min_antichain_insert(piece.minima, qv);
    size_t c = 0;
    for (; c < chans; ++c) {
      if (++idx[c] < opts[c].size()) break;
      idx[c] = 0;
    }
    if (c == chans) break;
  }
}

// Splits the down-closure of (q1, val) across p = 0 observations: a head is
// available iff the symbol occurs in the channel word, eps always is.
void split_p0(const LcsModel& m, LocId q0, const QVal& qv,
              std::map<Obs, KnowSet>& acc) {
  size_t chans = m.channels.size();
  std::vector<std::vector<uint8_t>> opts(chans);
  for (size_t c = 0; c < chans; ++c) {
    if (!m.observable[c]) {
      opts[c] = {kEps};
      continue;
    }
    opts[c].push_back(kEps);
    for (size_t msg = 0; msg < m.messages.size(); ++msg)
      if (word_has(qv.val[c], static_cast<MsgId>(msg)))
        opts[c].push_back(static_cast<uint8_t>(msg));
  }
  std::vector<size_t> idx(chans, 0);
  for (;;) {
    Obs o;
    o.p = 0;
    o.q0 = q0;
    o.heads = masked_heads(m);
    QVal mx;
    mx.q1 = qv.q1;
    mx.val = qv.val;
    for (size_t c = 0; c < chans; ++c) {
      uint8_t h = opts[c][idx[c]];
      if (!m.observable[c]) continue;
      if (h == kEps) {
        mx.val[c].clear();
      } else {
        o.heads[c] = h;
        mx.val[c] = Word(1, static_cast<char>(h)) +
                    *suffix_after_first(static_cast<MsgId>(h), qv.val[c]);
      }
    }
    KnowSet& piece = acc[o];
    piece.obs = o;
    max_antichain_insert(piece.maxima, mx);
    size_t c = 0;
    for (; c < chans; ++c) {
      if (++idx[c] < opts[c].size()) break;
      idx[c] = 0;
    }
    if (c == chans) break;
  }
}

}  // namespace

std::vector<UpSet> pre0_pieces(const GameCtx& ctx, const UpSet& u, LabelId a) {
  const LcsModel& m = *ctx.model;
  size_t chans = m.channels.size();
  std::map<Obs, UpSet> acc;
  for (const Transition& tr : m.proc[0].transitions) {
    if (tr.label != a || tr.to != u.obs.q0) continue;
    for (const QVal& mn : u.minima) {
      Valuation x(chans);
      bool ok = true;
      for (size_t c = 0; ok && c < chans; ++c) {
        auto p = chan_pre_word(tr.guard[c], tr.op[c], mn.val[c]);
        if (p)
          x[c] = *p;
        else
          ok = false;
      }
      if (!ok) continue;
      spread_pre_obs(m, tr.from, mn.q1, x, acc);
    }
  }
  std::vector<UpSet> out;
  out.reserve(acc.size());
  for (auto& [o, piece] : acc) {
    piece.normalize();
    out.push_back(std::move(piece));
  }
  return out;
}

UpSet pre1_piece(const GameCtx& ctx, const UpSet& u) {
  const LcsModel& m = *ctx.model;
  size_t chans = m.channels.size();
  UpSet r;
  r.obs = Obs{1, u.obs.q0, masked_heads(m)};
  for (const Transition& tr : m.proc[1].transitions) {
    for (const QVal& mn : u.minima) {
      if (tr.to != mn.q1) continue;
      Valuation x(chans);
      bool ok = true;
      for (size_t c = 0; ok && c < chans; ++c) {
        auto p = chan_pre_word(tr.guard[c], tr.op[c], mn.val[c]);
        if (p)
          x[c] = *p;
        else
          ok = false;
      }
      if (ok) min_antichain_insert(r.minima, QVal{tr.from, std::move(x)});
    }
  }
  if (ctx.idle) {
    // idle keeps proc-1 in place under either next flag
    for (const QVal& mn : u.minima) min_antichain_insert(r.minima, mn);
  }
  r.normalize();
  return r;
}

std::vector<KnowSet> post0_pieces(const GameCtx& ctx, const KnowSet& d,
                                  LabelId a) {
  const LcsModel& m = *ctx.model;
  size_t chans = m.channels.size();
  std::map<Obs, KnowSet> acc;
  for (const Transition& tr : m.proc[0].transitions) {
    if (tr.label != a || tr.from != d.obs.q0) continue;
    for (const QVal& mx : d.maxima) {
      Valuation z(chans);
      bool ok = true;
      for (size_t c = 0; ok && c < chans; ++c) {
        auto q = chan_post_word(tr.guard[c], tr.op[c], mx.val[c]);
        if (q)
          z[c] = *q;
        else
          ok = false;
      }
      if (!ok) continue;
      QVal nxt{mx.q1, z};
      Obs o1{1, tr.to, masked_heads(m)};
      KnowSet& pending = acc[o1];
      pending.obs = o1;
      max_antichain_insert(pending.maxima, nxt);
      split_p0(m, tr.to, nxt, acc);
    }
  }
  std::vector<KnowSet> out;
  out.reserve(acc.size());
  for (auto& [o, piece] : acc) {
    piece.normalize();
    out.push_back(std::move(piece));
  }
  return out;
}

KnowSet post1_piece(const GameCtx& ctx, const KnowSet& d) {
  const LcsModel& m = *ctx.model;
  size_t chans = m.channels.size();
  assert(d.obs.p == 1);
  KnowSet r;
  r.obs = d.obs;
  for (const Transition& tr : m.proc[1].transitions) {
    for (const QVal& mx : d.maxima) {
      if (tr.from != mx.q1) continue;
      Valuation z(chans);
      bool ok = true;
      for (size_t c = 0; ok && c < chans; ++c) {
        auto q = chan_post_word(tr.guard[c], tr.op[c], mx.val[c]);
        if (q)
          z[c] = *q;
        else
          ok = false;
      }
      if (ok) max_antichain_insert(r.maxima, QVal{tr.to, std::move(z)});
    }
  }
  r.normalize();
  return r;
}

std::vector<KnowSet> flip_pieces(const GameCtx& ctx, const KnowSet& d) {
  const LcsModel& m = *ctx.model;
  assert(d.obs.p == 1);
  std::map<Obs, KnowSet> acc;
  for (const QVal& mx : d.maxima) split_p0(m, d.obs.q0, mx, acc);
  std::vector<KnowSet> out;
  out.reserve(acc.size());
  for (auto& [o, piece] : acc) {
    piece.normalize();
    out.push_back(std::move(piece));
  }
  return out;
}

bool proc1_dead_at(const LcsModel& m, LocId q1) {
  for (const Transition& tr : m.proc[1].transitions) {
    if (tr.from != q1) continue;
    bool needs_msg = false;
    for (size_t c = 0; c < m.channels.size(); ++c) {
      if (tr.op[c].kind == OpKind::Read ||
          tr.guard[c].kind == GuardKind::HeadIs) {
        needs_msg = true;
        break;
      }
    }
    if (!needs_msg) return false;
  }
  return true;
}

std::vector<ChainEmit> chain_emissions(const GameCtx& ctx, const KnowSet& seed,
                                       const ObsPredicate* goal,
                                       int* chain_len) {
  const LcsModel& m = *ctx.model;
  std::vector<ChainEmit> out;
  if (seed.empty()) return out;
  assert(seed.obs.p == 1);
  if (goal && predicate_matches(m, *goal, seed.obs)) {
    // the chain's observation never changes, so the goal test is settled here
    out.push_back(ChainEmit{ChainEmit::GoalLeaf, seed});
    return out;
  }
  std::vector<KnowSet> chain{seed};
  KnowSet acc = seed;  // union over the prefix
  std::set<LocId> dead_seen;
  auto scan_dead = [&](const KnowSet& d) {
    for (const QVal& mx : d.maxima) {
      if (!proc1_dead_at(m, mx.q1) || !dead_seen.insert(mx.q1).second)
        continue;
      KnowSet leaf;
      leaf.obs = d.obs;
      leaf.maxima = {
          QVal{mx.q1, empty_valuation(static_cast<int>(m.channels.size()))}};
      out.push_back(ChainEmit{ChainEmit::DeadLeaf, leaf});
    }
  };
  auto emit_flips = [&]() {
    std::map<Obs, KnowSet> fl;
    for (const QVal& mx : acc.maxima) split_p0(m, acc.obs.q0, mx, fl);
    for (auto& [o, piece] : fl) {
      piece.normalize();
      out.push_back(ChainEmit{ChainEmit::Piece, std::move(piece)});
    }
  };
  scan_dead(seed);
  emit_flips();
  for (;;) {
    if (chain.size() > 100000)
      throw BudgetExceededError("silent proc-1 chain exceeded 100000 steps");
    KnowSet next = post1_piece(ctx, chain.back());
    if (next.empty()) break;  // every pending continuation is dead-scanned
    bool cover = false;
    for (const KnowSet& di : chain) {
      if (knowset_subseteq(di, next)) {
        cover = true;
        break;
      }
    }
    chain.push_back(next);
    scan_dead(next);
    for (const QVal& mx : next.maxima) max_antichain_insert(acc.maxima, mx);
    acc.normalize();
    emit_flips();
    if (cover) {
      // a covered earlier element yields a concrete silent loop the
      // adversary can ride forever
      out.push_back(ChainEmit{ChainEmit::StallLeaf, next});
      break;
    }
  }
  if (chain_len)
    *chain_len = std::max(*chain_len, static_cast<int>(chain.size()) - 1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ChainEmit> post0_obs(const GameCtx& ctx, const KnowSet& d,
                                 LabelId a, const ObsPredicate* goal,
                                 int* chain_len) {
  assert(d.obs.p == 0);
  std::vector<ChainEmit> out;
  // the pending (p = 1) pieces seed silent chains whose first flips already
  // reproduce the direct p = 0 successor pieces
  for (const KnowSet& piece : post0_pieces(ctx, d, a)) {
    if (piece.obs.p != 1) continue;
    auto em = chain_emissions(ctx, piece, goal, chain_len);
    out.insert(out.end(), em.begin(), em.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ChainEmit> post1_obs(const GameCtx& ctx, const KnowSet& seed,
                                 const ObsPredicate* goal, int* chain_len) {
  return chain_emissions(ctx, seed, goal, chain_len);
}

}  // namespace lcs
