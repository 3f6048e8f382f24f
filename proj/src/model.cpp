#include "lcsynth/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace lcs {

std::optional<MsgId> LcsModel::msg_id(const std::string& name) const {
  for (size_t i = 0; i < messages.size(); ++i)
    if (messages[i] == name) return (MsgId)i;
  return std::nullopt;
}

std::optional<ChanId> LcsModel::chan_id(const std::string& name) const {
  for (size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == name) return (ChanId)i;
  return std::nullopt;
}

std::optional<LabelId> LcsModel::label_id(const std::string& name) const {
  for (size_t i = 0; i < label_names.size(); ++i)
    if (label_names[i] == name) return (LabelId)i;
  return std::nullopt;
}

// ---- tokenizer ----

namespace {

struct Token {
  enum Kind {
    Ident,   // [A-Za-z0-9_]+
    Punct,   // one of { } [ ] , ; : = == -> - ! ? @
    Eof,
  } kind = Eof;
  std::string text;
  int line = 1;
  int col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1;
  int col = 1;
  Token cur;

  explicit Lexer(const std::string& s) : src(s) { advance(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(cur.line, cur.col, what);
  }

  static bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
  }

  void bump(char c) {
    ++pos;
    if (c == '\n') { ++line; col = 1; } else ++col;
  }

  void skip_space_and_comments() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '#') {
        while (pos < src.size() && src[pos] != '\n') bump(src[pos]);
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump(c);
      } else {
        break;
      }
    }
  }

  void advance() {
    skip_space_and_comments();
    cur.line = line;
    cur.col = col;
    if (pos >= src.size()) {
      cur.kind = Token::Eof;
      cur.text.clear();
      return;
    }
    char c = src[pos];
    if (ident_char(c)) {
      cur.kind = Token::Ident;
      cur.text.clear();
      while (pos < src.size() && ident_char(src[pos])) {
        cur.text.push_back(src[pos]);
        bump(src[pos]);
      }
      return;
    }
    cur.kind = Token::Punct;
    if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '>') {
      cur.text = "->";
      bump('-');
      bump('>');
      return;
    }
    if (c == '=' && pos + 1 < src.size() && src[pos + 1] == '=') {
      cur.text = "==";
      bump('=');
      bump('=');
      return;
    }
    static const std::string singles = "{}[],;:=-!?@";
    if (singles.find(c) == std::string::npos)
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    cur.text = std::string(1, c);
    bump(c);
  }

  bool at_punct(const std::string& p) const {
    return cur.kind == Token::Punct && cur.text == p;
  }
  bool at_ident(const std::string& w) const {
    return cur.kind == Token::Ident && cur.text == w;
  }
  void expect_punct(const std::string& p) {
    if (!at_punct(p)) fail("expected '" + p + "'");
    advance();
  }
  std::string expect_ident(const std::string& what) {
    if (cur.kind != Token::Ident) fail("expected " + what);
    std::string t = cur.text;
    advance();
    return t;
  }
};

struct Parser {
  Lexer lex;
  LcsModel m;
  // Locations and labels are declared by use; remember first-use positions
  // for error reporting on unknown references.
  std::map<std::string, LocId> locs[2];
  bool saw_init[2] = {false, false};
  bool saw_process[2] = {false, false};
  bool saw_objective = false;
  std::vector<std::string> controllable_names;
  int controllable_line = 0, controllable_col = 0;
  std::vector<std::string> observable_names;
  int observable_line = 0, observable_col = 0;

  explicit Parser(const std::string& text) : lex(text) {}

  MsgId need_msg(const std::string& name) {
    auto id = m.msg_id(name);
    if (!id) lex.fail("unknown message " + name);
    return *id;
  }

  ChanId need_chan(const std::string& name) {
    auto id = m.chan_id(name);
    if (!id) lex.fail("unknown channel " + name);
    return *id;
  }

  LocId need_loc(int p, const std::string& name, bool declare) {
    auto it = locs[p].find(name);
    if (it != locs[p].end()) return it->second;
    if (!declare) lex.fail("unknown location " + name);
    LocId id = (LocId)m.proc[p].loc_names.size();
    m.proc[p].loc_names.push_back(name);
    locs[p][name] = id;
    return id;
  }

  LabelId need_label(int p, const std::string& name) {
    auto id = m.label_id(name);
    if (id) {
      if (m.label_proc[*id] != p)
        lex.fail("label " + name + " already used by process " +
                 std::to_string(m.label_proc[*id]));
      return *id;
    }
    LabelId fresh = (LabelId)m.label_names.size();
    m.label_names.push_back(name);
    m.label_proc.push_back((uint8_t)p);
    m.controllable.push_back(false);
    return fresh;
  }

  // name list until the next section keyword or block opener
  std::vector<std::string> name_list() {
    std::vector<std::string> out;
    while (lex.cur.kind == Token::Ident) {
      // Section keywords terminate the list; they are only ambiguous when a
      // list is empty, and none of them is a legal channel/message name in
      // any corpus, so keywords win.
      const std::string& t = lex.cur.text;
      if (t == "messages" || t == "channels" || t == "observable" ||
          t == "controllable" || t == "process" || t == "objective")
        break;
      out.push_back(t);
      lex.advance();
    }
    return out;
  }

  void parse_guard_list(Transition& tr) {
    lex.expect_punct("[");
    while (true) {
      std::string cn = lex.expect_ident("channel name");
      ChanId c = need_chan(cn);
      if (lex.at_punct("==")) {
        lex.advance();
        std::string v = lex.expect_ident("'eps'");
        if (v != "eps") lex.fail("only emptiness guards use '==', expected eps");
        if (tr.guard[c].kind != GuardKind::True)
          lex.fail("duplicate guard on channel " + cn);
        tr.guard[c] = {GuardKind::IsEmpty, 0};
      } else if (lex.at_punct("@")) {
        lex.advance();
        std::string v = lex.expect_ident("message");
        if (tr.guard[c].kind != GuardKind::True)
          lex.fail("duplicate guard on channel " + cn);
        tr.guard[c] = {GuardKind::HeadIs, need_msg(v)};
      } else {
        lex.fail("expected '==' or '@' in guard");
      }
      if (lex.at_punct(",")) { lex.advance(); continue; }
      break;
    }
    lex.expect_punct("]");
  }

  void parse_op_list(Transition& tr) {
    lex.expect_punct("{");
    while (true) {
      std::string cn = lex.expect_ident("channel name");
      ChanId c = need_chan(cn);
      bool write;
      if (lex.at_punct("!")) write = true;
      else if (lex.at_punct("?")) write = false;
      else lex.fail("expected '!' or '?' in operation");
      lex.advance();
      std::string v = lex.expect_ident("message");
      if (tr.op[c].kind != OpKind::Nop)
        lex.fail("duplicate operation on channel " + cn);
      tr.op[c] = {write ? OpKind::Write : OpKind::Read, need_msg(v)};
      if (lex.at_punct(",")) { lex.advance(); continue; }
      break;
    }
    lex.expect_punct("}");
  }

  void parse_process() {
    lex.advance();  // 'process'
    std::string pn = lex.expect_ident("process number");
    if (pn != "0" && pn != "1") lex.fail("process number must be 0 or 1");
    int p = pn == "1" ? 1 : 0;
    if (saw_process[p]) lex.fail("duplicate process " + pn + " block");
    saw_process[p] = true;
    lex.expect_punct("{");
    while (!lex.at_punct("}")) {
      if (lex.cur.kind == Token::Eof) lex.fail("unterminated process block");
      if (lex.at_ident("init")) {
        lex.advance();
        std::string ln = lex.expect_ident("location name");
        if (saw_init[p]) lex.fail("duplicate init in process " + pn);
        saw_init[p] = true;
        m.proc[p].initial = need_loc(p, ln, true);
        if (lex.at_punct(";")) lex.advance();
        continue;
      }
      // transition: from -label-> to [guards] {ops}
      std::string from = lex.expect_ident("location name");
      lex.expect_punct("-");
      std::string label = lex.expect_ident("label name");
      lex.expect_punct("->");
      std::string to = lex.expect_ident("location name");
      Transition tr;
      tr.from = need_loc(p, from, true);
      tr.to = need_loc(p, to, true);
      tr.label = need_label(p, label);
      tr.guard.assign(m.channels.size(), Guard{});
      tr.op.assign(m.channels.size(), ChanOp{});
      if (lex.at_punct("[")) parse_guard_list(tr);
      if (lex.at_punct("{")) parse_op_list(tr);
      if (lex.at_punct(";")) lex.advance();
      m.proc[p].transitions.push_back(std::move(tr));
    }
    lex.advance();  // '}'
    if (!saw_init[p]) lex.fail("process " + pn + " has no init");
  }

  void parse_objective() {
    lex.advance();  // 'objective'
    if (saw_objective) lex.fail("duplicate objective block");
    saw_objective = true;
    int kw_line = lex.cur.line, kw_col = lex.cur.col;
    std::string kind = lex.expect_ident("objective kind");
    if (kind == "safety") m.objective.kind = ObjectiveKind::Safety;
    else if (kind == "reach") m.objective.kind = ObjectiveKind::Reach;
    else throw UnsupportedObjectiveError(kw_line, kw_col, kind);
    auto& pred = m.objective.target;
    pred.heads.assign(m.channels.size(), std::nullopt);
    lex.expect_punct("{");
    while (!lex.at_punct("}")) {
      if (lex.cur.kind == Token::Eof) lex.fail("unterminated objective block");
      std::string key = lex.expect_ident("objective constraint");
      if (key == "p") {
        lex.expect_punct("=");
        std::string v = lex.expect_ident("0 or 1");
        if (v != "0" && v != "1") lex.fail("p must be 0 or 1");
        pred.p = v == "1" ? 1 : 0;
      } else if (key == "loc") {
        if (!lex.at_ident("in")) lex.fail("expected 'in' after loc");
        lex.advance();
        lex.expect_punct("{");
        std::vector<bool> mask(m.proc[0].loc_names.size(), false);
        while (true) {
          std::string ln = lex.expect_ident("location name");
          auto it = locs[0].find(ln);
          if (it == locs[0].end()) lex.fail("unknown location " + ln);
          mask[it->second] = true;
          if (lex.at_punct(",")) { lex.advance(); continue; }
          break;
        }
        lex.expect_punct("}");
        pred.locs = std::move(mask);
      } else if (key == "head") {
        std::string cn = lex.expect_ident("channel name");
        ChanId c = need_chan(cn);
        lex.expect_punct("=");
        std::string v = lex.expect_ident("message or eps");
        pred.heads[c] = v == "eps" ? kEps : need_msg(v);
      } else {
        lex.fail("unknown objective constraint '" + key + "'");
      }
      if (lex.at_punct(";")) lex.advance();
    }
    lex.advance();  // '}'
  }

  LcsModel run() {
    if (lex.cur.kind == Token::Eof)
      throw ParseError(1, 1, "empty document");
    bool saw_messages = false, saw_channels = false;
    while (lex.cur.kind != Token::Eof) {
      if (lex.at_ident("messages")) {
        lex.advance();
        lex.expect_punct(":");
        if (saw_messages) lex.fail("duplicate messages section");
        saw_messages = true;
        for (auto& n : name_list()) {
          if (m.msg_id(n)) lex.fail("duplicate message " + n);
          if (m.messages.size() >= 250) lex.fail("too many messages");
          m.messages.push_back(n);
        }
      } else if (lex.at_ident("channels")) {
        lex.advance();
        lex.expect_punct(":");
        if (saw_channels) lex.fail("duplicate channels section");
        saw_channels = true;
        for (auto& n : name_list()) {
          if (m.chan_id(n)) lex.fail("duplicate channel " + n);
          m.channels.push_back(n);
        }
        m.observable.assign(m.channels.size(), false);
      } else if (lex.at_ident("observable")) {
        observable_line = lex.cur.line;
        observable_col = lex.cur.col;
        lex.advance();
        lex.expect_punct(":");
        observable_names = name_list();
      } else if (lex.at_ident("controllable")) {
        controllable_line = lex.cur.line;
        controllable_col = lex.cur.col;
        lex.advance();
        lex.expect_punct(":");
        controllable_names = name_list();
      } else if (lex.at_ident("process")) {
        if (!saw_channels) lex.fail("process block before channels section");
        parse_process();
      } else if (lex.at_ident("objective")) {
        if (!saw_process[0]) lex.fail("objective block before process 0");
        parse_objective();
      } else {
        lex.fail("expected a section");
      }
    }
    if (!saw_process[0] || !saw_process[1])
      throw ParseError(lex.line, 1, "missing process block");
    if (!saw_objective) throw ParseError(lex.line, 1, "missing objective block");
    for (auto& n : observable_names) {
      auto c = m.chan_id(n);
      if (!c) throw ParseError(observable_line, observable_col, "unknown channel " + n);
      m.observable[*c] = true;
    }
    for (auto& n : controllable_names) {
      auto l = m.label_id(n);
      if (!l)
        throw ParseError(controllable_line, controllable_col,
                         "controllable label " + n + " does not occur in process 0");
      if (m.label_proc[*l] != 0)
        throw ParseError(controllable_line, controllable_col,
                         "controllable label " + n + " belongs to process 1");
      m.controllable[*l] = true;
    }
    return std::move(m);
  }
};

}  // namespace

LcsModel parse_model(const std::string& text) { return Parser(text).run(); }

// ---- serializer ----

static void write_transition(std::ostringstream& out, const LcsModel& m,
                             const Transition& t, int p) {
  out << "  " << m.proc[p].loc_names[t.from] << " -" << m.label_names[t.label]
      << "-> " << m.proc[p].loc_names[t.to];
  std::vector<std::string> guards;
  for (size_t c = 0; c < t.guard.size(); ++c) {
    if (t.guard[c].kind == GuardKind::IsEmpty)
      guards.push_back(m.channels[c] + "==eps");
    else if (t.guard[c].kind == GuardKind::HeadIs)
      guards.push_back(m.channels[c] + "@" + m.messages[t.guard[c].msg]);
  }
  if (!guards.empty()) {
    out << " [";
    for (size_t i = 0; i < guards.size(); ++i) out << (i ? ", " : "") << guards[i];
    out << "]";
  }
  std::vector<std::string> ops;
  for (size_t c = 0; c < t.op.size(); ++c) {
    if (t.op[c].kind == OpKind::Write)
      ops.push_back(m.channels[c] + "!" + m.messages[t.op[c].msg]);
    else if (t.op[c].kind == OpKind::Read)
      ops.push_back(m.channels[c] + "?" + m.messages[t.op[c].msg]);
  }
  if (!ops.empty()) {
    out << " {";
    for (size_t i = 0; i < ops.size(); ++i) out << (i ? ", " : "") << ops[i];
    out << "}";
  }
  out << "\n";
}

std::string serialize_model(const LcsModel& m) {
  std::ostringstream out;
  out << "messages:";
  for (auto& s : m.messages) out << " " << s;
  out << "\nchannels:";
  for (auto& s : m.channels) out << " " << s;
  out << "\nobservable:";
  for (size_t c = 0; c < m.channels.size(); ++c)
    if (m.observable[c]) out << " " << m.channels[c];
  out << "\ncontrollable:";
  for (size_t l = 0; l < m.label_names.size(); ++l)
    if (m.controllable[l]) out << " " << m.label_names[l];
  out << "\n";
  for (int p = 0; p < 2; ++p) {
    out << "\nprocess " << p << " {\n";
    out << "  init " << m.proc[p].loc_names[m.proc[p].initial] << "\n";
    for (const auto& t : m.proc[p].transitions) write_transition(out, m, t, p);
    out << "}\n";
  }
  out << "\nobjective "
      << (m.objective.kind == ObjectiveKind::Safety ? "safety" : "reach")
      << " {\n";
  const auto& pred = m.objective.target;
  if (pred.p >= 0) out << "  p = " << pred.p << "\n";
  if (pred.locs) {
    out << "  loc in {";
    bool first = true;
    for (size_t q = 0; q < pred.locs->size(); ++q)
      if ((*pred.locs)[q]) {
        out << (first ? "" : ", ") << m.proc[0].loc_names[q];
        first = false;
      }
    out << "}\n";
  }
  for (size_t c = 0; c < pred.heads.size(); ++c)
    if (pred.heads[c]) {
      out << "  head " << m.channels[c] << " = "
          << (*pred.heads[c] == kEps ? std::string("eps") : m.messages[*pred.heads[c]])
          << "\n";
    }
  out << "}\n";
  return out.str();
}

// ---- validation ----

std::vector<ValidationIssue> validate_model(const LcsModel& m) {
  std::vector<ValidationIssue> issues;
  auto err = [&](const std::string& s) { issues.push_back({true, s}); };
  auto warn = [&](const std::string& s) { issues.push_back({false, s}); };

  if (m.messages.empty()) err("no messages declared");
  if (m.observable.size() != m.channels.size()) err("observable mask arity mismatch");
  if (m.label_proc.size() != m.label_names.size() ||
      m.controllable.size() != m.label_names.size())
    err("label table arity mismatch");

  for (size_t l = 0; l < m.label_names.size(); ++l)
    if (m.controllable[l] && m.label_proc[l] != 0)
      err("controllable label " + m.label_names[l] + " not in process 0 alphabet");

  for (int p = 0; p < 2; ++p) {
    const auto& pa = m.proc[p];
    if (pa.loc_names.empty()) {
      err("process " + std::to_string(p) + " has no locations");
      continue;
    }
    if (pa.initial >= pa.loc_names.size())
      err("process " + std::to_string(p) + " initial location out of range");
    for (const auto& t : pa.transitions) {
      if (t.from >= pa.loc_names.size() || t.to >= pa.loc_names.size())
        err("transition endpoint out of range in process " + std::to_string(p));
      if (t.label >= m.label_names.size())
        err("transition label out of range in process " + std::to_string(p));
      else if (m.label_proc[t.label] != p)
        err("label " + m.label_names[t.label] + " used by both processes");
      if (t.guard.size() != m.channels.size() || t.op.size() != m.channels.size())
        err("guard/op arity mismatch in process " + std::to_string(p));
      for (size_t c = 0; c < std::min(t.guard.size(), t.op.size()); ++c) {
        const auto& g = t.guard[c];
        const auto& o = t.op[c];
        if (g.kind == GuardKind::HeadIs && g.msg >= m.messages.size())
          err("guard references unknown message id");
        if (o.kind != OpKind::Nop && o.msg >= m.messages.size())
          err("operation references unknown message id");
        if (p == 0 && (g.kind != GuardKind::True || o.kind == OpKind::Read) &&
            !m.observable[c])
          err("process 0 guards or reads channel " + m.channels[c] +
              " not in the observable set");
        if (g.kind == GuardKind::HeadIs && o.kind == OpKind::Read && o.msg != g.msg)
          warn("transition with head guard " + m.messages[g.msg] + " and read " +
               m.messages[o.msg] + " on " + m.channels[c] + " can never fire");
        if (g.kind == GuardKind::IsEmpty && o.kind == OpKind::Read)
          warn("transition reads " + m.channels[c] + " under an emptiness guard and can never fire");
      }
    }
  }

  const auto& pred = m.objective.target;
  if (pred.heads.size() != m.channels.size())
    err("objective head constraints arity mismatch");
  else
    for (size_t c = 0; c < pred.heads.size(); ++c) {
      if (!pred.heads[c]) continue;
      if (!m.observable[c])
        err("objective constrains head of unobservable channel " + m.channels[c]);
      if (*pred.heads[c] != kEps && *pred.heads[c] >= m.messages.size())
        err("objective head constraint references unknown message");
      if (pred.p == 1 && *pred.heads[c] != kEps)
        warn("objective fixes p = 1 where heads are always eps; head constraint unsatisfiable");
    }
  if (pred.locs && pred.locs->size() != m.proc[0].loc_names.size())
    err("objective location mask arity mismatch");

  return issues;
}

// ---- observation enumeration ----

std::vector<Obs> enumerate_observations(const LcsModel& m) {
  std::vector<Obs> out;
  std::vector<ChanId> obs_chans;
  for (int c = 0; c < m.chan_count(); ++c)
    if (m.observable[c]) obs_chans.push_back((ChanId)c);

  for (LocId q0 = 0; q0 < m.proc[0].loc_names.size(); ++q0) {
    Obs o;
    o.p = 1;
    o.q0 = q0;
    o.heads.assign(m.channels.size(), kEps);
    out.push_back(o);
  }
  for (LocId q0 = 0; q0 < m.proc[0].loc_names.size(); ++q0) {
    // odometer over head symbols of observable channels
    std::vector<int> digit(obs_chans.size(), 0);
    int radix = m.msg_count() + 1;
    while (true) {
      Obs o;
      o.p = 0;
      o.q0 = q0;
      o.heads.assign(m.channels.size(), kEps);
      for (size_t i = 0; i < obs_chans.size(); ++i)
        o.heads[obs_chans[i]] = digit[i] == m.msg_count() ? kEps : (uint8_t)digit[i];
      out.push_back(std::move(o));
      size_t k = 0;
      for (; k < digit.size(); ++k) {
        if (++digit[k] < radix) break;
        digit[k] = 0;
      }
      if (k == digit.size() && !digit.empty()) break;
      if (digit.empty()) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool predicate_matches(const LcsModel& m, const ObsPredicate& pred, const Obs& o) {
  if (pred.p >= 0 && o.p != pred.p) return false;
  if (pred.locs && !(*pred.locs)[o.q0]) return false;
  for (size_t c = 0; c < pred.heads.size(); ++c) {
    if (!pred.heads[c]) continue;
    if (o.heads[c] != *pred.heads[c]) return false;
  }
  (void)m;
  return true;
}

std::vector<Obs> objective_observations(const LcsModel& m) {
  std::vector<Obs> out;
  for (const auto& o : enumerate_observations(m))
    if (predicate_matches(m, m.objective.target, o)) out.push_back(o);
  return out;
}

}  // namespace lcs
