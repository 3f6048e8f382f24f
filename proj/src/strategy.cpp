#include "lcsynth/strategy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lcsynth/sre.hpp"
#include "lcsynth/verify.hpp"

namespace lcs {

std::optional<EAct> StrategyAutomaton::choice_at(int state, const Obs& o) const {
  for (const StrategyEdge& e : edges)
    if (e.from == state && e.obs == o) return e.choice;
  return std::nullopt;
}

std::optional<int> StrategyAutomaton::next_state(int state, const Obs& o,
                                                 LabelId adv) const {
  for (const StrategyEdge& e : edges)
    if (e.from == state && e.obs == o && e.adv == adv) return e.to;
  return std::nullopt;
}

WellformedReport check_wellformed(const LcsModel& m,
                                  const StrategyAutomaton& a) {
  WellformedReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };

  std::map<std::pair<int, Obs>, std::vector<const StrategyEdge*>> groups;
  for (const StrategyEdge& e : a.edges) {
    if (e.from < 0 || e.from >= a.num_states || e.to < 0 ||
        e.to >= a.num_states) {
      fail("edge with out-of-range state id");
      continue;
    }
    if (e.obs.p != 0) {
      fail("edge on a pending-turn observation");
      continue;
    }
    groups[{e.from, e.obs}].push_back(&e);
  }

  for (auto& [key, es] : groups) {
    const auto& [st, o] = key;
    std::string where =
        "state " + std::to_string(st) + " at " + format_obs(m, o);
    const EAct& choice = es.front()->choice;
    for (const StrategyEdge* e : es)
      if (!(e->choice == choice)) {
        fail(where + ": multiple choices");  // (iv)
        break;
      }
    std::set<LabelId> advs;
    for (const StrategyEdge* e : es)
      if (!advs.insert(e->adv).second) fail(where + ": duplicate answer edge");  // (i)
    auto menu = acts_exists(m, o);
    if (std::find(menu.begin(), menu.end(), choice) == menu.end())
      fail(where + ": choice outside the menu");
    for (LabelId adv : acts_forall(m, o, choice))
      if (!advs.count(adv))
        fail(where + ": missing edge for answer " + m.label_names[adv]);  // (iii)
  }

  for (int st = 0; st < a.num_states; ++st)  // (ii)
    for (const Obs& o : enumerate_observations(m)) {
      if (o.p != 0) continue;
      if (!groups.count({st, o}))
        fail("state " + std::to_string(st) + " at " + format_obs(m, o) +
             ": no transition");
    }
  return rep;
}

// ---- safety extraction ----

namespace {

// growth cap for per-channel expressions; overflow collapses a middle window
// into a star, so the whole abstract domain stays finite
constexpr size_t kMaxAtoms = 8;

// Per-channel knowledge entry: a downward closed word language as one sre
// product. At a control-turn observation, observable channels hold the tail
// after the observed head (the head itself lives in the Obs); masked channels
// and every channel of a pending set hold the full content language.
using AbsVal = std::vector<Sre>;

struct AbsQ {
  LocId q1 = 0;
  AbsVal val;
  auto operator<=>(const AbsQ&) const = default;
};

// knowledge per observation; pieces are maximal antichains under inclusion
using Bundle = std::map<Obs, std::vector<AbsQ>>;

bool absq_leq(const AbsQ& x, const AbsQ& y) {
  if (x.q1 != y.q1) return false;
  for (size_t c = 0; c < x.val.size(); ++c)
    if (!sre_subseteq(x.val[c], y.val[c])) return false;
  return true;
}

void abs_insert(std::vector<AbsQ>& chain, AbsQ v) {
  for (const AbsQ& x : chain)
    if (absq_leq(v, x)) return;
  std::erase_if(chain, [&](const AbsQ& x) { return absq_leq(x, v); });
  chain.push_back(std::move(v));
}

// weak per-channel step on a downward closed content language: losses are
// already inside the language, so guard and op apply to its words directly.
// Reads can return several incomparable tails; empty result blocks the fire.
std::vector<Sre> sre_chan_post(const Guard& g, const ChanOp& op,
                               const Sre& e) {
  std::vector<Sre> out;
  switch (g.kind) {
    case GuardKind::True:
      switch (op.kind) {
        case OpKind::Nop:
          out.push_back(e);
          break;
        case OpKind::Read:
          out = sre_read(e, op.msg);
          break;
        case OpKind::Write:
          out.push_back(sre_append(e, op.msg));
          break;
      }
      break;
    case GuardKind::IsEmpty: {
      // fire from the fully lost channel
      if (op.kind == OpKind::Read) break;
      Sre r;
      if (op.kind == OpKind::Write) r.atoms.push_back(letter_atom(op.msg));
      out.push_back(std::move(r));
      break;
    }
    case GuardKind::HeadIs: {
      if (op.kind == OpKind::Read && op.msg != g.msg) break;
      for (Sre& t : sre_read(e, g.msg)) {
        if (op.kind == OpKind::Read) {
          out.push_back(std::move(t));
          continue;
        }
        // sources are g.msg . t; the trailing loss makes the head optional
        Sre r;
        r.atoms.push_back(letter_atom(g.msg));
        r.atoms.insert(r.atoms.end(), t.atoms.begin(), t.atoms.end());
        if (op.kind == OpKind::Write) r.atoms.push_back(letter_atom(op.msg));
        sre_normalize(r);
        out.push_back(std::move(r));
      }
      break;
    }
  }
  for (Sre& r : out) r = sre_widen(r, kMaxAtoms);
  return out;
}

// all per-channel combinations of one transition applied to a valuation;
// empty when some channel blocks
std::vector<AbsVal> abs_fire(const LcsModel& m, const Transition& tr,
                             const AbsVal& val) {
  std::vector<std::vector<Sre>> per(m.chan_count());
  for (int c = 0; c < m.chan_count(); ++c) {
    per[c] = sre_chan_post(tr.guard[c], tr.op[c], val[c]);
    if (per[c].empty()) return {};
  }
  std::vector<AbsVal> out;
  std::vector<size_t> idx(per.size(), 0);
  for (;;) {
    AbsVal v;
    v.reserve(per.size());
    for (size_t c = 0; c < per.size(); ++c) v.push_back(per[c][idx[c]]);
    out.push_back(std::move(v));
    size_t c = 0;
    for (; c < per.size(); ++c) {
      if (++idx[c] < per[c].size()) break;
      idx[c] = 0;
    }
    if (c == per.size()) break;
  }
  return out;
}

// observation split of a pending set flipped to the control turn: each
// observable channel resolves into (head, tail) options of its language
void abs_split_p0(const LcsModel& m, LocId q0, const std::vector<AbsQ>& set,
                  Bundle& out) {
  std::vector<int> ocs;
  for (int c = 0; c < m.chan_count(); ++c)
    if (m.observable[c]) ocs.push_back(c);

  for (const AbsQ& q : set) {
    std::vector<std::vector<SreHead>> opts(ocs.size());
    for (size_t i = 0; i < ocs.size(); ++i) opts[i] = sre_heads(q.val[ocs[i]]);
    std::vector<size_t> idx(ocs.size(), 0);
    for (;;) {
      Obs o;
      o.p = 0;
      o.q0 = q0;
      o.heads.assign(m.chan_count(), kEps);
      AbsQ nq;
      nq.q1 = q.q1;
      nq.val = q.val;
      for (size_t i = 0; i < ocs.size(); ++i) {
        o.heads[ocs[i]] = opts[i][idx[i]].head;
        nq.val[ocs[i]] = opts[i][idx[i]].tail;
      }
      abs_insert(out[o], std::move(nq));
      size_t i = 0;
      for (; i < idx.size(); ++i) {
        if (++idx[i] < opts[i].size()) break;
        idx[i] = 0;
      }
      if (i == idx.size()) break;
    }
  }
}

// nonempty intersection with an upward closed piece at the same observation:
// some minimum embeds into the represented content of some abstract state
bool abs_meets_upset(const LcsModel& m, const Obs& o,
                     const std::vector<AbsQ>& set, const UpSet& u) {
  if (!(o == u.obs)) return false;
  for (const AbsQ& q : set)
    for (const QVal& mn : u.minima) {
      if (q.q1 != mn.q1) continue;
      bool above = true;
      for (int c = 0; c < m.chan_count() && above; ++c) {
        const Word& w = mn.val[c];
        if (o.p == 0 && m.observable[c]) {
          uint8_t h = o.heads[c];
          if (h == kEps) {
            above = w.empty();  // the channel is exactly empty
            continue;
          }
          // contents are h . t with t in the tail language
          bool ok = !w.empty() && (uint8_t)w[0] == h &&
                    sre_has_superword(q.val[c], w.substr(1));
          above = ok || sre_has_superword(q.val[c], w);
        } else {
          above = sre_has_superword(q.val[c], w);
        }
      }
      if (above) return true;
    }
  return false;
}

// index of the first basis family fully met by the set, if any
std::optional<size_t> abs_losing(const LcsModel& m, const Obs& o,
                                 const std::vector<AbsQ>& set,
                                 const std::vector<LFamily>& basis) {
  for (size_t i = 0; i < basis.size(); ++i) {
    const LFamily& lp = basis[i];
    if (lp.pieces.empty()) continue;
    bool all = true;
    for (const UpSet& u : lp.pieces)
      if (!abs_meets_upset(m, o, set, u)) { all = false; break; }
    if (all) return i;
  }
  return std::nullopt;
}

std::string format_absq(const LcsModel& m, const AbsQ& q) {
  std::string s = "(" + m.proc[1].loc_names[q.q1];
  for (int c = 0; c < m.chan_count(); ++c)
    s += " " + m.channels[c] + ":" + format_sre(m, c, q.val[c]);
  return s + ")";
}

struct SafetyExtractor {
  const GameCtx& ctx;
  const LcsModel& m;
  const std::vector<LFamily>& basis;
  // armed only while replaying a fatal failure, so rejected picks during the
  // normal search stay quiet
  bool trace = false;
  bool trace_wanted = std::getenv("LCSYNTH_EXTRACT_TRACE") != nullptr;

  SafetyExtractor(const GameCtx& c, const std::vector<LFamily>& b)
      : ctx(c), m(*c.model), basis(b) {}

  void trace_hit(const char* where, const Obs& o, const std::vector<AbsQ>& set,
                 size_t fam) {
    if (!trace) return;
    std::ostringstream os;
    os << "[extract] " << where << " at " << format_obs(m, o)
       << " meets family #" << fam << " " << format_family(m, basis[fam])
       << "\n  knowledge:";
    for (const AbsQ& q : set) os << " " << format_absq(m, q);
    std::fputs((os.str() + "\n").c_str(), stderr);
  }

  [[noreturn]] void give_up(const std::string& what) {
    if (const char* dir = std::getenv("LCSYNTH_CORPUS")) {
      std::string text = serialize_model(m);
      std::ostringstream name;
      name << dir << "/extraction_" << std::hex
           << std::hash<std::string>{}(text) << ".lcs";
      std::ofstream(name.str()) << text;
    }
    throw ExtractionIncompleteError(what);
  }

  // silent-turn closure of a pending set; the atom cap inside the channel
  // step makes the domain finite, so the loop terminates. nullopt when the
  // reachable pending knowledge is certified losing.
  std::optional<std::vector<AbsQ>> close_pending(std::vector<AbsQ> set,
                                                 LocId q0) {
    std::vector<AbsQ> cum;
    for (AbsQ& q : set) abs_insert(cum, std::move(q));
    std::vector<AbsQ> cur = cum;
    bool stable = false;
    for (int round = 0; round < 100000 && !stable; ++round) {
      std::vector<AbsQ> next;
      for (const AbsQ& q : cur)
        for (const Transition& tr : m.proc[1].transitions) {
          if (tr.from != q.q1) continue;
          for (AbsVal& v : abs_fire(m, tr, q.val))
            abs_insert(next, AbsQ{tr.to, std::move(v)});
        }
      std::vector<AbsQ> fresh;
      for (AbsQ& q : next) {
        bool dominated = false;
        for (const AbsQ& x : cum)
          if (absq_leq(q, x)) { dominated = true; break; }
        if (!dominated) fresh.push_back(q);
      }
      stable = fresh.empty();
      for (AbsQ& q : fresh) abs_insert(cum, std::move(q));
      cur = std::move(next);
    }
    if (!stable) give_up("pending closure did not stabilize");
    Obs po;
    po.p = 1;
    po.q0 = q0;
    po.heads.assign(m.chan_count(), kEps);
    if (auto fam = abs_losing(m, po, cum, basis)) {
      trace_hit("pending closure", po, cum, *fam);
      return std::nullopt;
    }
    return cum;
  }

  // all knowledge reachable after (piece at o, adversary label a), merged per
  // next observation; nullopt when any of it is certified losing
  std::optional<Bundle> successor_bundle(const Obs& o,
                                         const std::vector<AbsQ>& piece,
                                         LabelId a) {
    std::map<LocId, std::vector<AbsQ>> pend;
    for (const Transition& tr : m.proc[0].transitions) {
      if (tr.from != o.q0 || tr.label != a) continue;
      for (const AbsQ& q : piece) {
        // losing the observed head is a legal prefix of the weak step, so
        // the full content language re-adds it in front of the tail
        AbsVal full = q.val;
        for (int c = 0; c < m.chan_count(); ++c) {
          if (!m.observable[c] || o.heads[c] == kEps) continue;
          Sre e;
          e.atoms.push_back(letter_atom(o.heads[c]));
          e.atoms.insert(e.atoms.end(), full[c].atoms.begin(),
                         full[c].atoms.end());
          sre_normalize(e);
          full[c] = std::move(e);
        }
        for (AbsVal& v : abs_fire(m, tr, full))
          abs_insert(pend[tr.to], AbsQ{q.q1, std::move(v)});
      }
    }
    Bundle bundle;
    for (auto& [q0p, set] : pend) {
      auto closed = close_pending(std::move(set), q0p);
      if (!closed) return std::nullopt;
      abs_split_p0(m, q0p, *closed, bundle);
    }
    for (auto& [no, set] : bundle)
      if (auto fam = abs_losing(m, no, set, basis)) {
        trace_hit("successor", no, set, *fam);
        return std::nullopt;
      }
    return bundle;
  }

  bool bundle_subsumed(const Bundle& small, const Bundle& big) {
    for (const auto& [o, piece] : small) {
      auto it = big.find(o);
      if (it == big.end()) return false;
      for (const AbsQ& q : piece) {
        bool covered = false;
        for (const AbsQ& x : it->second)
          if (absq_leq(q, x)) { covered = true; break; }
        if (!covered) return false;
      }
    }
    return true;
  }

  StrategyAutomaton run() {
    std::vector<Bundle> nodes;
    std::map<Bundle, int> exact;
    StrategyAutomaton a;

    auto node_for = [&](Bundle b) {
      auto it = exact.find(b);
      if (it != exact.end()) return it->second;
      for (size_t i = 0; i < nodes.size(); ++i)
        if (bundle_subsumed(b, nodes[i])) return (int)i;
      int id = (int)nodes.size();
      exact.emplace(b, id);
      nodes.push_back(std::move(b));
      return id;
    };

    // initial knowledge: both start flags collapse into one pending closure
    {
      trace = trace_wanted;  // a rejection here is fatal, so print it live
      std::vector<AbsQ> seed{
          AbsQ{m.proc[1].initial, AbsVal(m.chan_count(), Sre{})}};
      auto closed = close_pending(std::move(seed), m.proc[0].initial);
      if (!closed)
        give_up("initial pending knowledge is certified losing");
      Bundle init;
      abs_split_p0(m, m.proc[0].initial, *closed, init);
      for (auto& [no, set] : init)
        if (auto fam = abs_losing(m, no, set, basis)) {
          trace_hit("initial", no, set, *fam);
          give_up("initial knowledge at " + format_obs(m, no) +
                  " is certified losing");
        }
      node_for(std::move(init));
      trace = false;
    }

    for (size_t id = 0; id < nodes.size(); ++id) {
      Bundle payload = nodes[id];  // node_for may grow the vector below
      for (const auto& [o, piece] : payload) {
        bool decided = false;
        for (const EAct& pick : acts_exists(m, o)) {
          std::vector<std::pair<LabelId, Bundle>> outs;
          bool ok = true;
          for (LabelId adv : acts_forall(m, o, pick)) {
            auto b = successor_bundle(o, piece, adv);
            if (!b) { ok = false; break; }
            outs.emplace_back(adv, std::move(*b));
          }
          if (!ok) continue;
          for (auto& [adv, b] : outs) {
            int to = node_for(std::move(b));
            a.edges.push_back(StrategyEdge{(int)id, o, pick, adv, to});
          }
          if (outs.empty() && !m.label_names.empty()) {
            // surrendering at a dead observation still needs an edge for
            // totality; the answer label is never fired
            a.edges.push_back(StrategyEdge{(int)id, o, pick, 0, (int)id});
          }
          decided = true;
          break;
        }
        if (!decided) {
          if (trace_wanted) {
            trace = true;
            std::ostringstream os;
            os << "[extract] stuck at " << format_obs(m, o) << "\n  piece:";
            for (const AbsQ& q : piece) os << " " << format_absq(m, q);
            std::fputs((os.str() + "\n").c_str(), stderr);
            for (const EAct& pick : acts_exists(m, o))
              for (LabelId adv : acts_forall(m, o, pick)) {
                std::fputs(("[extract] pick " + format_eact(m, pick) +
                            " answer " + m.label_names[adv] + "\n")
                               .c_str(),
                           stderr);
                if (!successor_bundle(o, piece, adv)) break;
              }
          }
          give_up("no safe choice at " + format_obs(m, o));
        }
      }
    }

    int sink = (int)nodes.size();
    a.num_states = sink + 1;
    a.initial = 0;

    std::set<std::pair<int, Obs>> covered;
    for (const StrategyEdge& e : a.edges) covered.insert({e.from, e.obs});
    for (int st = 0; st < a.num_states; ++st) {
      for (const Obs& o : enumerate_observations(m)) {
        if (o.p != 0 || covered.count({st, o})) continue;
        EAct pick = acts_exists(m, o).front();
        auto advs = acts_forall(m, o, pick);
        if (advs.empty()) {
          if (!m.label_names.empty())
            a.edges.push_back(StrategyEdge{st, o, pick, 0, sink});
          continue;
        }
        for (LabelId adv : advs)
          a.edges.push_back(StrategyEdge{st, o, pick, adv, sink});
      }
    }
    return a;
  }
};

}  // namespace

StrategyAutomaton minimize_strategy(const LcsModel& m,
                                    const StrategyAutomaton& a) {
  if (a.num_states <= 1) return a;
  std::vector<Obs> obses;
  for (const Obs& o : enumerate_observations(m))
    if (o.p == 0) obses.push_back(o);

  std::map<std::pair<int, Obs>, EAct> pick_at;
  std::map<std::tuple<int, Obs, LabelId>, int> succ;
  for (const StrategyEdge& e : a.edges) {
    pick_at.emplace(std::make_pair(e.from, e.obs), e.choice);
    succ[{e.from, e.obs, e.adv}] = e.to;
  }

  // initial split by choice rows, then refine on successor blocks until the
  // block count stops growing (refinement only ever splits)
  std::vector<int> block(a.num_states, 0);
  size_t nblocks;
  {
    std::map<std::vector<EAct>, int> rows;
    for (int st = 0; st < a.num_states; ++st) {
      std::vector<EAct> row;
      row.reserve(obses.size());
      for (const Obs& o : obses) row.push_back(pick_at.at({st, o}));
      block[st] = rows.emplace(std::move(row), (int)rows.size()).first->second;
    }
    nblocks = rows.size();
  }
  for (;;) {
    std::map<std::pair<int, std::vector<int>>, int> sigs;
    std::vector<int> nb(a.num_states);
    for (int st = 0; st < a.num_states; ++st) {
      std::vector<int> tos;
      for (const Obs& o : obses) {
        const EAct pick = pick_at.at({st, o});
        std::vector<LabelId> advs = acts_forall(m, o, pick);
        if (advs.empty()) {
          // dead observation: the surrender filler edge, if any, self-loops
          auto it = succ.find({st, o, 0});
          tos.push_back(it == succ.end() ? -1 : block[it->second]);
          continue;
        }
        for (LabelId adv : advs) tos.push_back(block[succ.at({st, o, adv})]);
      }
      nb[st] = sigs.emplace(std::make_pair(block[st], std::move(tos)),
                            (int)sigs.size())
                   .first->second;
    }
    if (sigs.size() == nblocks) break;
    nblocks = sigs.size();
    block = std::move(nb);
  }

  // renumber blocks by smallest member so the output is deterministic
  std::vector<int> rep(nblocks, a.num_states);
  for (int st = a.num_states - 1; st >= 0; --st) rep[block[st]] = st;
  std::vector<int> order(nblocks);
  for (size_t b = 0; b < nblocks; ++b) order[b] = (int)b;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return rep[x] < rep[y]; });
  std::vector<int> newid(nblocks);
  for (size_t i = 0; i < nblocks; ++i) newid[order[i]] = (int)i;

  StrategyAutomaton r;
  r.num_states = (int)nblocks;
  r.initial = newid[block[a.initial]];
  for (size_t b = 0; b < nblocks; ++b)
    for (const StrategyEdge& e : a.edges) {
      if (e.from != rep[b]) continue;
      r.edges.push_back(StrategyEdge{newid[b], e.obs, e.choice, e.adv,
                                     newid[block[e.to]]});
    }
  return r;
}

namespace {

enum class ExtractFail : uint8_t { None, Incomplete, Illformed, GateRejected };

struct GateOutcome {
  std::optional<StrategyAutomaton> strategy;
  ExtractFail fail = ExtractFail::None;
  std::string detail;
};

GateOutcome extract_and_gate(const GameCtx& ctx,
                             const std::vector<LFamily>& basis) {
  GateOutcome out;
  SafetyExtractor ex(ctx, basis);
  StrategyAutomaton a;
  try {
    a = ex.run();
  } catch (const ExtractionIncompleteError& e) {
    out.fail = ExtractFail::Incomplete;
    out.detail = e.what();
    return out;
  }

  auto illformed = [&](const WellformedReport& rep, const char* stage) {
    out.fail = ExtractFail::Illformed;
    out.detail = std::string(stage) + " automaton is ill-formed:";
    for (const std::string& v : rep.violations) out.detail += "\n  " + v;
  };
  WellformedReport rep = check_wellformed(*ctx.model, a);
  if (!rep.ok) {
    illformed(rep, "extracted");
    return out;
  }
  a = minimize_strategy(*ctx.model, a);
  rep = check_wellformed(*ctx.model, a);
  if (!rep.ok) {
    illformed(rep, "minimized");
    return out;
  }

  LcsModel prod = product_lcs(*ctx.model, a);
  // the product carries the target lifted to its own location space
  CoverResult cover = backward_coverability(prod, prod.objective.target);
  if (cover.reachable) {
    out.fail = ExtractFail::GateRejected;
    out.detail =
        "extracted strategy fails product verification: the error set stays "
        "coverable";
    return out;
  }
  out.strategy = std::move(a);
  return out;
}

}  // namespace

StrategyAutomaton extract_safety_strategy(const GameCtx& ctx,
                                          const std::vector<LFamily>& basis) {
  GateOutcome out = extract_and_gate(ctx, basis);
  if (out.strategy) return std::move(*out.strategy);
  if (out.fail == ExtractFail::Incomplete)
    throw ExtractionIncompleteError(out.detail);
  throw std::logic_error(out.detail);
}

ExtractAttempt try_extract_safety_strategy(const GameCtx& ctx,
                                           const std::vector<LFamily>& basis) {
  GateOutcome out = extract_and_gate(ctx, basis);
  ExtractAttempt at;
  at.strategy = std::move(out.strategy);
  at.failure = std::move(out.detail);
  return at;
}

StrategyAutomaton extract_reach_strategy(const GameCtx& ctx,
                                         const ReachForest& f) {
  const LcsModel& m = *ctx.model;
  for (int r : f.roots)
    if (!f.nodes[r].win)
      throw std::logic_error("reach extraction needs a winning forest");

  StrategyAutomaton a;
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> payloads;
  auto state_for = [&](std::vector<int> group) {
    auto it = ids.find(group);
    if (it != ids.end()) return it->second;
    int id = (int)payloads.size();
    ids.emplace(group, id);
    payloads.push_back(std::move(group));
    return id;
  };
  state_for(f.roots);

  std::set<std::pair<int, Obs>> covered;
  std::vector<std::tuple<int, Obs, EAct, LabelId, std::vector<int>>> raw;
  for (size_t id = 0; id < payloads.size(); ++id) {
    std::vector<int> group = payloads[id];
    std::set<Obs> seen_obs;
    for (int c : group) {
      const Obs& o = f.nodes[c].knowledge.obs;
      if (o.p != 0 || !seen_obs.insert(o).second) continue;
      // the real knowledge at o is the largest matching piece: the adversary
      // chooses silently how long to wait, and waiting only grows it
      int best = -1;
      for (int d : group) {
        if (!(f.nodes[d].knowledge.obs == o)) continue;
        if (best < 0 ||
            knowset_subseteq(f.nodes[best].knowledge, f.nodes[d].knowledge))
          best = d;
      }
      const ForestNode& n = f.nodes[best];
      if (n.status == NodeStatus::ClosedGoal) continue;  // defaults suffice
      if (n.status != NodeStatus::Expanded || !n.witness)
        throw std::logic_error("winning forest node without a usable choice");
      covered.insert({(int)id, o});
      for (const auto& [pick, adv, kids] : n.children) {
        if (!(pick == *n.witness)) continue;
        int to = state_for(kids);
        raw.emplace_back((int)id, o, *n.witness, adv, std::vector<int>{to});
      }
    }
  }
  for (auto& [from, o, pick, adv, tos] : raw)
    a.edges.push_back(StrategyEdge{from, o, pick, adv, tos.front()});

  int sink = (int)payloads.size();
  a.num_states = sink + 1;
  a.initial = 0;
  for (int st = 0; st < a.num_states; ++st) {
    for (const Obs& o : enumerate_observations(m)) {
      if (o.p != 0 || covered.count({st, o})) continue;
      EAct pick = acts_exists(m, o).front();
      auto advs = acts_forall(m, o, pick);
      if (advs.empty()) {
        if (!m.label_names.empty())
          a.edges.push_back(StrategyEdge{st, o, pick, 0, sink});
        continue;
      }
      for (LabelId adv : advs)
        a.edges.push_back(StrategyEdge{st, o, pick, adv, sink});
    }
  }
  return a;
}

// ---- simulation ----

int step_strategy(const StrategyAutomaton& a, int run_state, const Obs& o,
                  const EAct& choice, LabelId adv) {
  for (const StrategyEdge& e : a.edges)
    if (e.from == run_state && e.obs == o && e.choice == choice &&
        e.adv == adv)
      return e.to;
  throw std::logic_error("no strategy transition for the observed move");
}

SimReport simulate(const LcsModel& m, const StrategyAutomaton& a, int depth,
                   size_t max_plays) {
  SimReport rep;
  std::vector<SimStep> prefix;
  auto matches = [&](const GameState& s) {
    return predicate_matches(m, m.objective.target, observe(m, s));
  };

  std::function<void(const GameState&, int, bool, int)> go =
      [&](const GameState& s, int run, bool seen, int d) {
        if (rep.truncated) return;
        seen = seen || matches(s);

        std::vector<std::tuple<SimStep, GameState, int>> moves;
        if (s.p == 0) {
          Obs o = observe(m, s);
          auto choice = a.choice_at(run, o);
          if (!choice)
            throw std::logic_error(
                "strategy has no choice at a reachable observation");
          for (LabelId adv : acts_forall(m, o, *choice)) {
            int run2 = step_strategy(a, run, o, *choice, adv);
            for (const GameState& t : weak_successors(m, s, adv))
              moves.emplace_back(SimStep{s, *choice, adv}, t, run2);
          }
        } else {
          for (size_t lb = 0; lb < m.label_names.size(); ++lb) {
            if (m.label_proc[lb] != 1) continue;
            for (const GameState& t : weak_successors(m, s, (LabelId)lb))
              moves.emplace_back(SimStep{s, std::nullopt, (LabelId)lb}, t,
                                 run);
          }
        }

        if (moves.empty() || d == depth) {
          if (rep.plays.size() >= max_plays) {
            rep.truncated = true;
            return;
          }
          rep.plays.push_back(SimPlay{prefix, s, moves.empty(), seen});
          return;
        }
        for (auto& [step, t, run2] : moves) {
          prefix.push_back(step);
          go(t, run2, seen, d + 1);
          prefix.pop_back();
          if (rep.truncated) return;
        }
      };

  GameState init{0, m.proc[0].initial, m.proc[1].initial,
                 empty_valuation(m.chan_count())};
  for (auto p : {0, 1}) {
    GameState s = init;
    s.p = (uint8_t)p;
    go(s, a.initial, false, 0);
  }
  return rep;
}

ScriptResult run_script(const LcsModel& m, const StrategyAutomaton& a,
                        const std::vector<ScriptOp>& script, int start_p) {
  ScriptResult res;
  auto matches = [&](const GameState& s) {
    return predicate_matches(m, m.objective.target, observe(m, s));
  };
  GameState s{(uint8_t)start_p, m.proc[0].initial, m.proc[1].initial,
              empty_valuation(m.chan_count())};
  int run = a.initial;
  bool seen = false;
  auto fail = [&](const std::string& why) {
    res.error = why;
    res.play.final_state = s;
    res.play.visited_target = seen || matches(s);
    return res;
  };
  if (start_p != 0 && start_p != 1) return fail("start flag must be 0 or 1");

  for (const ScriptOp& op : script) {
    seen = seen || matches(s);
    if (op.kind == ScriptOp::Lose) {
      if (op.chan >= m.chan_count()) return fail("loss on an unknown channel");
      Word& w = s.w[op.chan];
      if (op.index < 0 || (size_t)op.index >= w.size())
        return fail("loss index outside the channel content");
      w.erase((size_t)op.index, 1);
      continue;
    }
    if (op.label >= m.label_names.size())
      return fail("unknown label in script");
    if (m.label_proc[op.label] != s.p)
      return fail("label " + m.label_names[op.label] +
                  " does not belong to the process holding the turn");
    if (op.next_p != 0 && op.next_p != 1)
      return fail("successor flag must be 0 or 1");

    std::optional<EAct> choice;
    if (s.p == 0) {
      Obs o = observe(m, s);
      choice = a.choice_at(run, o);
      if (!choice) return fail("strategy has no choice here");
      auto menu = acts_forall(m, o, *choice);
      if (std::find(menu.begin(), menu.end(), op.label) == menu.end())
        return fail("label " + m.label_names[op.label] +
                    " is not an available answer to the strategy's choice");
      run = step_strategy(a, run, o, *choice, op.label);
    }

    // first declared transition that fires strongly resolves the label
    const ProcessAutomaton& pa = m.proc[s.p];
    LocId at = s.p == 0 ? s.q0 : s.q1;
    bool fired = false;
    for (const Transition& tr : pa.transitions) {
      if (tr.from != at || tr.label != op.label) continue;
      auto w2 = apply_ops(tr.guard, tr.op, s.w);
      if (!w2) continue;
      res.play.steps.push_back(SimStep{s, choice, op.label});
      if (s.p == 0)
        s.q0 = tr.to;
      else
        s.q1 = tr.to;
      s.w = std::move(*w2);
      s.p = (uint8_t)op.next_p;
      fired = true;
      break;
    }
    if (!fired)
      return fail("label " + m.label_names[op.label] +
                  " cannot fire strongly from the current state");
  }

  seen = seen || matches(s);
  res.play.final_state = s;
  res.play.visited_target = seen;
  bool any = false;
  for (size_t lb = 0; lb < m.label_names.size() && !any; ++lb) {
    if (m.label_proc[lb] != s.p) continue;
    any = !weak_successors(m, s, (LabelId)lb).empty();
  }
  res.play.ended = !any;
  return res;
}

// ---- serialization ----

std::string strategy_to_json(const LcsModel& m, const StrategyAutomaton& a) {
  nlohmann::json j;
  for (int i = 0; i < a.num_states; ++i) j["states"].push_back(i);
  j["initial"] = a.initial;
  j["transitions"] = nlohmann::json::array();
  for (const StrategyEdge& e : a.edges) {
    nlohmann::json t;
    t["from"] = e.from;
    t["obs"]["q0"] = m.proc[0].loc_names[e.obs.q0];
    nlohmann::json heads = nlohmann::json::object();
    for (int c = 0; c < m.chan_count(); ++c) {
      if (!m.observable[c]) continue;
      heads[m.channels[c]] =
          e.obs.heads[c] == kEps ? "eps" : m.messages[e.obs.heads[c]];
    }
    t["obs"]["heads"] = std::move(heads);
    t["choice"] = e.choice.bottom ? "bot" : m.label_names[e.choice.label];
    t["adv"] = m.label_names[e.adv];
    t["to"] = e.to;
    j["transitions"].push_back(std::move(t));
  }
  return j.dump(2) + "\n";
}

StrategyAutomaton strategy_from_json(const LcsModel& m,
                                     const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  StrategyAutomaton a;
  a.num_states = (int)j.at("states").size();
  a.initial = j.at("initial").get<int>();
  for (const auto& t : j.at("transitions")) {
    StrategyEdge e;
    e.from = t.at("from").get<int>();
    e.to = t.at("to").get<int>();
    std::string q0 = t.at("obs").at("q0").get<std::string>();
    bool found = false;
    for (size_t i = 0; i < m.proc[0].loc_names.size(); ++i)
      if (m.proc[0].loc_names[i] == q0) {
        e.obs.q0 = (LocId)i;
        found = true;
      }
    if (!found) throw std::runtime_error("unknown location " + q0);
    e.obs.p = 0;
    e.obs.heads.assign(m.chan_count(), kEps);
    for (const auto& [chan, sym] : t.at("obs").at("heads").items()) {
      auto c = m.chan_id(chan);
      if (!c) throw std::runtime_error("unknown channel " + chan);
      std::string v = sym.get<std::string>();
      if (v == "eps") {
        e.obs.heads[*c] = kEps;
      } else {
        auto msg = m.msg_id(v);
        if (!msg) throw std::runtime_error("unknown message " + v);
        e.obs.heads[*c] = *msg;
      }
    }
    std::string choice = t.at("choice").get<std::string>();
    if (choice == "bot") {
      e.choice = EAct{true, 0};
    } else {
      auto lb = m.label_id(choice);
      if (!lb) throw std::runtime_error("unknown label " + choice);
      e.choice = EAct{false, *lb};
    }
    auto adv = m.label_id(t.at("adv").get<std::string>());
    if (!adv)
      throw std::runtime_error("unknown label " +
                               t.at("adv").get<std::string>());
    e.adv = *adv;
    a.edges.push_back(std::move(e));
  }
  return a;
}

std::string strategy_to_dot(const LcsModel& m, const StrategyAutomaton& a) {
  std::ostringstream out;
  out << "digraph strategy {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (int i = 0; i < a.num_states; ++i) {
    out << "  s" << i;
    if (i == a.initial) out << " [shape=doublecircle]";
    out << ";\n";
  }
  for (const StrategyEdge& e : a.edges) {
    out << "  s" << e.from << " -> s" << e.to << " [label=\""
        << format_obs(m, e.obs) << " / " << format_eact(m, e.choice) << " / "
        << m.label_names[e.adv] << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace lcs
