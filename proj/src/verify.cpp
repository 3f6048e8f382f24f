#include "lcsynth/verify.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace lcs {

namespace {

// transition compatible with the heads an automaton edge was issued under;
// only observable channels filter (proc-0 guards and reads are restricted to
// them by validation)
bool tr_obs_compatible(const LcsModel& m, const Transition& tr, const Obs& o) {
  for (int c = 0; c < m.chan_count(); ++c) {
    if (!m.observable[c]) continue;
    uint8_t h = o.heads[c];
    switch (tr.guard[c].kind) {
      case GuardKind::True: break;
      case GuardKind::IsEmpty:
        if (h != kEps) return false;
        break;
      case GuardKind::HeadIs:
        if (h != tr.guard[c].msg) return false;
        break;
    }
    if (tr.op[c].kind == OpKind::Read && h != tr.op[c].msg) return false;
  }
  return true;
}

}  // namespace

ProductInfo product_lcs_info(const LcsModel& m, const StrategyAutomaton& a) {
  ProductInfo info;
  LcsModel& p = info.model;
  p.messages = m.messages;
  p.channels = m.channels;
  p.observable = m.observable;
  p.label_names = m.label_names;
  p.label_proc = m.label_proc;
  p.controllable = m.controllable;
  p.proc[1] = m.proc[1];

  int na = a.num_states;
  size_t nq = m.proc[0].loc_names.size();
  auto pid = [&](LocId q0, int s) { return (LocId)((int)q0 * na + s); };
  for (size_t q0 = 0; q0 < nq; ++q0)
    for (int s = 0; s < na; ++s) {
      p.proc[0].loc_names.push_back(m.proc[0].loc_names[q0] + "@" +
                                    std::to_string(s));
      info.loc_origin.emplace_back((LocId)q0, s);
    }
  p.proc[0].initial = pid(m.proc[0].initial, a.initial);

  for (const StrategyEdge& e : a.edges) {
    for (const Transition& tr : m.proc[0].transitions) {
      if (tr.from != e.obs.q0 || tr.label != e.adv) continue;
      if (!tr_obs_compatible(m, tr, e.obs)) continue;
      Transition nt;
      nt.from = pid(tr.from, e.from);
      nt.to = pid(tr.to, e.to);
      nt.label = tr.label;
      nt.op = tr.op;
      nt.guard = tr.guard;
      // strengthen to the observed heads so the product only fires where the
      // automaton edge applies
      for (int c = 0; c < m.chan_count(); ++c) {
        if (!m.observable[c]) continue;
        if (e.obs.heads[c] == kEps)
          nt.guard[c] = Guard{GuardKind::IsEmpty, 0};
        else
          nt.guard[c] = Guard{GuardKind::HeadIs, e.obs.heads[c]};
      }
      p.proc[0].transitions.push_back(std::move(nt));
    }
  }

  p.objective.kind = m.objective.kind;
  p.objective.target.p = m.objective.target.p;
  p.objective.target.heads = m.objective.target.heads;
  if (m.objective.target.locs) {
    std::vector<bool> lifted(nq * (size_t)na, false);
    for (size_t q0 = 0; q0 < nq; ++q0)
      if ((*m.objective.target.locs)[q0])
        for (int s = 0; s < na; ++s) lifted[pid((LocId)q0, s)] = true;
    p.objective.target.locs = std::move(lifted);
  }
  return info;
}

LcsModel product_lcs(const LcsModel& m, const StrategyAutomaton& a) {
  return product_lcs_info(m, a).model;
}

CoverResult backward_coverability(const LcsModel& m, const ObsPredicate& target,
                                  size_t max_basis) {
  using Key = std::tuple<uint8_t, LocId, LocId>;
  std::map<Key, std::vector<Valuation>> basis;
  std::deque<CoverState> work;
  size_t total = 0;

  auto insert = [&](CoverState v) {
    auto& vec = basis[{v.p, v.q0, v.q1}];
    for (const Valuation& x : vec)
      if (valuation_leq(x, v.w)) return;
    size_t before = vec.size();
    std::erase_if(vec,
                  [&](const Valuation& x) { return valuation_leq(v.w, x); });
    total -= before - vec.size();
    vec.push_back(v.w);
    ++total;
    if (total > max_basis)
      throw BudgetExceededError("coverability basis passed " +
                                std::to_string(max_basis) + " elements");
    work.push_back(std::move(v));
  };

  for (const Obs& o : enumerate_observations(m)) {
    if (!predicate_matches(m, target, o)) continue;
    for (size_t q1 = 0; q1 < m.proc[1].loc_names.size(); ++q1) {
      CoverState v;
      v.p = o.p;
      v.q0 = o.q0;
      v.q1 = (LocId)q1;
      v.w = empty_valuation(m.chan_count());
      for (int c = 0; c < m.chan_count(); ++c)
        if (o.heads[c] != kEps) v.w[c] = Word(1, (char)o.heads[c]);
      insert(std::move(v));
    }
  }

  CoverResult res;
  while (!work.empty()) {
    CoverState v = std::move(work.front());
    work.pop_front();
    // dropped by a later stronger element: skip stale entries
    const auto& vec = basis[{v.p, v.q0, v.q1}];
    if (std::find(vec.begin(), vec.end(), v.w) == vec.end()) continue;
    ++res.iterations;

    // the successor flag is free, so predecessors ignore v.p
    for (int proc = 0; proc < 2; ++proc) {
      for (const Transition& tr : m.proc[proc].transitions) {
        if (tr.to != (proc == 0 ? v.q0 : v.q1)) continue;
        CoverState u;
        u.p = (uint8_t)proc;
        u.q0 = proc == 0 ? tr.from : v.q0;
        u.q1 = proc == 0 ? v.q1 : tr.from;
        bool ok = true;
        u.w.reserve(v.w.size());
        for (int c = 0; c < m.chan_count(); ++c) {
          auto x = chan_pre_word(tr.guard[c], tr.op[c], v.w[c]);
          if (!x) { ok = false; break; }
          u.w.push_back(std::move(*x));
        }
        if (ok) insert(std::move(u));
      }
    }
  }

  res.basis_size = total;
  for (auto p : {0, 1}) {
    auto it = basis.find({(uint8_t)p, m.proc[0].initial, m.proc[1].initial});
    if (it == basis.end()) continue;
    for (const Valuation& x : it->second) {
      bool empty = true;
      for (const Word& w : x)
        if (!w.empty()) { empty = false; break; }
      if (empty) { res.reachable = true; return res; }
    }
  }
  return res;
}

OutcomeReport exhaustive_outcomes(const LcsModel& m, const StrategyAutomaton& a,
                                  int depth, size_t max_states) {
  const bool reach = m.objective.kind == ObjectiveKind::Reach;
  using Key = std::tuple<GameState, int, bool>;  // state, run state, satisfied
  std::map<Key, std::pair<Key, SimStep>> parent;
  std::set<Key> visited;
  std::deque<std::pair<Key, int>> queue;
  OutcomeReport rep;

  auto matches = [&](const GameState& s) {
    return predicate_matches(m, m.objective.target, observe(m, s));
  };
  auto trace = [&](Key k) {
    std::vector<SimStep> steps;
    for (auto it = parent.find(k); it != parent.end();
         it = parent.find(it->second.first))
      steps.push_back(it->second.second);
    std::reverse(steps.begin(), steps.end());
    return steps;
  };
  auto push = [&](Key k, int d) {
    if (!visited.insert(k).second) return;
    if (visited.size() > max_states)
      throw BudgetExceededError("outcome exploration passed " +
                                std::to_string(max_states) + " states");
    queue.emplace_back(std::move(k), d);
  };

  GameState init{0, m.proc[0].initial, m.proc[1].initial,
                 empty_valuation(m.chan_count())};
  for (auto p : {0, 1}) {
    GameState s = init;
    s.p = (uint8_t)p;
    push({s, a.initial, matches(s)}, 0);
  }

  while (!queue.empty()) {
    auto [key, d] = queue.front();
    queue.pop_front();
    const auto& [s, run, sat] = key;
    ++rep.plays_explored;

    if (!reach && sat) {
      rep.violated = true;
      rep.counterexample = trace(key);
      return rep;
    }
    if (reach && sat) continue;  // this play already satisfied the objective
    if (d == depth) {
      rep.frontier_open = true;
      continue;
    }

    bool any = false;
    auto emit = [&](const GameState& t, int run2, const SimStep& step) {
      any = true;
      Key k2{t, run2, sat || matches(t)};
      if (visited.count(k2)) return;
      parent.emplace(k2, std::make_pair(key, step));
      push(std::move(k2), d + 1);
    };

    if (s.p == 0) {
      Obs o = observe(m, s);
      auto choice = a.choice_at(run, o);
      if (!choice)
        throw std::logic_error("strategy has no choice at a reachable "
                               "observation");
      for (LabelId lb : acts_forall(m, o, *choice)) {
        int run2 = step_strategy(a, run, o, *choice, lb);
        for (const GameState& t : weak_successors(m, s, lb))
          emit(t, run2, SimStep{s, *choice, lb});
      }
    } else {
      for (size_t lb = 0; lb < m.label_names.size(); ++lb) {
        if (m.label_proc[lb] != 1) continue;
        for (const GameState& t : weak_successors(m, s, (LabelId)lb))
          emit(t, run, SimStep{s, std::nullopt, (LabelId)lb});
      }
    }

    if (!any && reach) {  // maximal play that never saw the goal
      rep.violated = true;
      rep.counterexample = trace(key);
      return rep;
    }
  }
  return rep;
}

namespace {

struct WeakGraph {
  std::set<GameState> states;
  std::map<std::pair<GameState, LabelId>, std::vector<GameState>> succ;
  bool complete = false;
};

WeakGraph explore_weak(const LcsModel& m, size_t max_states) {
  WeakGraph g;
  GameState init{0, m.proc[0].initial, m.proc[1].initial,
                 empty_valuation(m.chan_count())};
  std::deque<GameState> work;
  for (auto p : {0, 1}) {
    GameState s = init;
    s.p = (uint8_t)p;
    g.states.insert(s);
    work.push_back(s);
  }
  while (!work.empty()) {
    GameState s = std::move(work.front());
    work.pop_front();
    for (size_t lb = 0; lb < m.label_names.size(); ++lb) {
      if (m.label_proc[lb] != s.p) continue;
      auto v = weak_successors(m, s, (LabelId)lb);
      for (const GameState& t : v) {
        if (g.states.insert(t).second) {
          if (g.states.size() > max_states) return g;
          work.push_back(t);
        }
      }
      g.succ.emplace(std::make_pair(s, (LabelId)lb), std::move(v));
    }
  }
  g.complete = true;
  return g;
}

struct KnowledgeGame {
  const LcsModel& m;
  const WeakGraph& g;
  bool reach;
  size_t cap;
  bool overflow = false;

  std::map<std::vector<GameState>, int> ids;
  struct Branch {
    LabelId label = 0;
    bool bad = false;  // silent segment already decides against the chooser
    std::vector<int> children;
  };
  struct Node {
    Obs o;
    std::vector<GameState> set;
    std::vector<std::pair<EAct, std::vector<Branch>>> menu;
    bool expanded = false;
  };
  std::vector<Node> nodes;

  KnowledgeGame(const LcsModel& mm, const WeakGraph& gg, bool r, size_t c)
      : m(mm), g(gg), reach(r), cap(c) {}

  bool is_target(const GameState& s) const {
    return predicate_matches(m, m.objective.target, observe(m, s));
  }

  // Silent closure of a mixed successor set. Safety: bad when a pending state
  // hits the error set. Reach: satisfied plays are pruned at their first goal
  // visit, and bad when the adversary can stall (cycle) or die (dead pending
  // state) before satisfying.
  struct Decomp {
    std::map<Obs, std::set<GameState>> emerge;
    bool bad = false;
  };
  Decomp decompose(const std::set<GameState>& start) const {
    Decomp d;
    std::set<GameState> pend;
    std::deque<GameState> work;
    auto classify = [&](const GameState& s) {
      if (reach && is_target(s)) return;  // play satisfied, drop it
      if (!reach && is_target(s)) {
        d.bad = true;
        return;
      }
      if (s.p == 0) {
        d.emerge[observe(m, s)].insert(s);
      } else if (pend.insert(s).second) {
        work.push_back(s);
      }
    };
    for (const GameState& s : start) classify(s);
    while (!work.empty() && !d.bad) {
      GameState s = std::move(work.front());
      work.pop_front();
      bool any = false;
      for (size_t lb = 0; lb < m.label_names.size(); ++lb) {
        if (m.label_proc[lb] != 1) continue;
        auto it = g.succ.find({s, (LabelId)lb});
        if (it == g.succ.end()) continue;
        for (const GameState& t : it->second) {
          any = true;
          classify(t);
        }
      }
      if (!any && reach) d.bad = true;  // dead pending play misses the goal
    }
    if (reach && !d.bad && !pend.empty()) {
      // cycle among unsatisfied pending states lets the adversary stall
      std::map<GameState, int> indeg;
      std::map<GameState, std::vector<GameState>> adj;
      for (const GameState& s : pend) indeg[s];
      for (const GameState& s : pend) {
        for (size_t lb = 0; lb < m.label_names.size(); ++lb) {
          if (m.label_proc[lb] != 1) continue;
          auto it = g.succ.find({s, (LabelId)lb});
          if (it == g.succ.end()) continue;
          for (const GameState& t : it->second) {
            if (!pend.count(t)) continue;
            adj[s].push_back(t);
            ++indeg[t];
          }
        }
      }
      std::deque<GameState> q0;
      size_t seen = 0;
      for (auto& [s, deg] : indeg)
        if (deg == 0) q0.push_back(s);
      while (!q0.empty()) {
        GameState s = std::move(q0.front());
        q0.pop_front();
        ++seen;
        for (const GameState& t : adj[s])
          if (--indeg[t] == 0) q0.push_back(t);
      }
      if (seen < pend.size()) d.bad = true;
    }
    return d;
  }

  int node_for(std::set<GameState> set) {
    std::vector<GameState> key(set.begin(), set.end());
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    if (nodes.size() >= cap) {
      overflow = true;
      return -1;
    }
    int id = (int)nodes.size();
    ids.emplace(key, id);
    nodes.push_back(Node{observe(m, *key.begin()), std::move(key), {}, false});
    return id;
  }

  void expand(int id) {
    if (nodes[id].expanded || overflow) return;
    nodes[id].expanded = true;
    Obs o = nodes[id].o;
    std::vector<GameState> set = nodes[id].set;
    std::vector<std::pair<EAct, std::vector<Branch>>> menu;
    for (const EAct& pick : acts_exists(m, o)) {
      std::vector<Branch> branches;
      for (LabelId lb : acts_forall(m, o, pick)) {
        Branch br;
        br.label = lb;
        std::set<GameState> next;
        for (const GameState& s : set) {
          auto it = g.succ.find({s, lb});
          if (it == g.succ.end()) continue;
          next.insert(it->second.begin(), it->second.end());
        }
        Decomp d = decompose(next);
        br.bad = d.bad;
        if (!br.bad)
          for (auto& [eo, eset] : d.emerge) {
            int c = node_for(std::move(eset));
            if (c < 0) return;
            br.children.push_back(c);
          }
        branches.push_back(std::move(br));
      }
      menu.emplace_back(pick, std::move(branches));
    }
    nodes[id].menu = std::move(menu);
  }
};

}  // namespace

OracleResult finite_oracle_solve(const LcsModel& m, size_t max_states) {
  OracleResult res;
  WeakGraph g = explore_weak(m, max_states);
  res.states = g.states.size();
  if (!g.complete) return res;

  const bool reach = m.objective.kind == ObjectiveKind::Reach;
  KnowledgeGame kg(m, g, reach, max_states);

  // the roots share the silent-closure treatment: both initial flags seed it
  GameState init{0, m.proc[0].initial, m.proc[1].initial,
                 empty_valuation(m.chan_count())};
  std::set<GameState> seed;
  for (auto p : {0, 1}) {
    GameState s = init;
    s.p = (uint8_t)p;
    seed.insert(s);
  }
  KnowledgeGame::Decomp droot = kg.decompose(seed);
  std::vector<int> roots;
  if (!droot.bad) {
    for (auto& [eo, eset] : droot.emerge) {
      int id = kg.node_for(std::move(eset));
      if (id < 0) break;
      roots.push_back(id);
    }
  }
  for (size_t i = 0; i < kg.nodes.size() && !kg.overflow; ++i)
    kg.expand((int)i);
  if (kg.overflow) return res;  // finite graph, oversized knowledge game

  size_t n = kg.nodes.size();
  // safety: greatest fixpoint of "safe"; reach: least fixpoint of "win"
  std::vector<char> good(n, reach ? 0 : 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      const auto& node = kg.nodes[i];
      bool target_here = predicate_matches(m, m.objective.target, node.o);
      bool v;
      if (!reach && target_here) {
        v = false;
      } else {
        // reach nodes never sit inside the goal: satisfied plays are pruned
        bool some_pick = false;
        for (const auto& [pick, branches] : node.menu) {
          bool all = true;
          for (const auto& br : branches) {
            if (br.bad) { all = false; break; }
            for (int c : br.children)
              if (!good[c]) { all = false; break; }
            if (!all) break;
          }
          if (reach && branches.empty()) all = false;  // pick ends the play
          if (all) { some_pick = true; break; }
        }
        v = some_pick;
      }
      if ((bool)good[i] != v) {
        good[i] = v;
        changed = true;
      }
    }
  }

  bool exists = !droot.bad;
  for (int r : roots)
    if (!good[r]) { exists = false; break; }
  res.finite = true;
  res.winner = exists ? Winner::ExistsWins : Winner::ForallWins;
  return res;
}

LcsModel fuzz_model(uint64_t seed, const FuzzParams& params) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {  // inclusive
    return lo + (int)(rng() % (uint64_t)(hi - lo + 1));
  };

  LcsModel m;
  int nm = pick(1, params.max_msgs);
  for (int i = 0; i < nm; ++i) m.messages.push_back(std::to_string(i));
  int nc = pick(1, params.max_chans);
  for (int i = 0; i < nc; ++i) m.channels.push_back(std::string(1, 'K' + i));
  m.observable.resize(nc);
  std::vector<int> obs_chans;
  for (int i = 0; i < nc; ++i) {
    m.observable[i] = pick(0, 2) > 0;
    if (m.observable[i]) obs_chans.push_back(i);
  }

  int n0 = pick(1, params.max_locs0);
  int n1 = pick(1, params.max_locs1);
  for (int i = 0; i < n0; ++i)
    m.proc[0].loc_names.push_back("a" + std::to_string(i));
  for (int i = 0; i < n1; ++i)
    m.proc[1].loc_names.push_back("b" + std::to_string(i));

  int k0 = pick(1, 3);
  int k1 = pick(1, 2);
  for (int i = 0; i < k0; ++i) {
    m.label_names.push_back("x" + std::to_string(i));
    m.label_proc.push_back(0);
    m.controllable.push_back(pick(0, 1) == 1);
  }
  for (int i = 0; i < k1; ++i) {
    m.label_names.push_back("t" + std::to_string(i));
    m.label_proc.push_back(1);
    m.controllable.push_back(false);
  }

  // processes stay finite by construction: forward edges plus self-loops,
  // and self-loops never write
  auto gen_proc = [&](int proc, int nlocs, int lab_lo, int lab_hi) {
    int ntr = pick(0, params.max_trans);
    for (int i = 0; i < ntr; ++i) {
      Transition tr;
      tr.from = (LocId)pick(0, nlocs - 1);
      bool self = tr.from == (LocId)(nlocs - 1) || pick(0, 3) == 0;
      tr.to = self ? tr.from : (LocId)pick((int)tr.from + 1, nlocs - 1);
      tr.label = (LabelId)pick(lab_lo, lab_hi);
      tr.guard.resize(nc);
      tr.op.resize(nc);
      for (int c = 0; c < nc; ++c) {
        bool constrainable = proc == 1 || m.observable[c];
        int gk = constrainable ? pick(0, 5) : 0;
        if (gk == 1)
          tr.guard[c] = Guard{GuardKind::IsEmpty, 0};
        else if (gk == 2)
          tr.guard[c] = Guard{GuardKind::HeadIs, (MsgId)pick(0, nm - 1)};
        int ok = pick(0, 5);
        if (ok == 1 && !self)
          tr.op[c] = ChanOp{OpKind::Write, (MsgId)pick(0, nm - 1)};
        else if (ok == 2 && constrainable &&
                 tr.guard[c].kind != GuardKind::IsEmpty)
          tr.op[c] = ChanOp{OpKind::Read, (MsgId)pick(0, nm - 1)};
      }
      // a read under a head guard must consume the guarded symbol
      for (int c = 0; c < nc; ++c)
        if (tr.op[c].kind == OpKind::Read &&
            tr.guard[c].kind == GuardKind::HeadIs)
          tr.op[c].msg = tr.guard[c].msg;
      m.proc[proc].transitions.push_back(std::move(tr));
    }
  };
  gen_proc(0, n0, 0, k0 - 1);
  gen_proc(1, n1, k0, k0 + k1 - 1);

  m.objective.kind = params.reach ? ObjectiveKind::Reach : ObjectiveKind::Safety;
  ObsPredicate& t = m.objective.target;
  int pc = pick(0, 2);
  t.p = pc == 2 ? -1 : pc;
  if (pick(0, 1) == 1) {
    std::vector<bool> locs(n0, false);
    int count = pick(1, n0);
    for (int i = 0; i < count; ++i) locs[pick(0, n0 - 1)] = true;
    t.locs = std::move(locs);
  }
  t.heads.resize(nc);
  if (!obs_chans.empty() && t.p != 1 && pick(0, 1) == 1) {
    int c = obs_chans[pick(0, (int)obs_chans.size() - 1)];
    t.heads[c] = pick(0, nm) == nm ? kEps : (uint8_t)pick(0, nm - 1);
  }
  return m;
}

}  // namespace lcs
