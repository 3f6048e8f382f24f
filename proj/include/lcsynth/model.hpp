#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcsynth/errors.hpp"

namespace lcs {

using MsgId = uint8_t;
using ChanId = uint16_t;
using LocId = uint16_t;
using LabelId = uint16_t;

// Head symbol of an observed channel: a message id or EPS for the empty word.
constexpr uint8_t kEps = 0xff;

enum class GuardKind : uint8_t { True, IsEmpty, HeadIs };

struct Guard {
  GuardKind kind = GuardKind::True;
  MsgId msg = 0;  // HeadIs only
  bool operator==(const Guard&) const = default;
};

enum class OpKind : uint8_t { Nop, Write, Read };

struct ChanOp {
  OpKind kind = OpKind::Nop;
  MsgId msg = 0;  // Write/Read only
  bool operator==(const ChanOp&) const = default;
};

struct Transition {
  LocId from = 0;
  LocId to = 0;
  LabelId label = 0;
  std::vector<Guard> guard;  // one per channel
  std::vector<ChanOp> op;    // one per channel
  bool operator==(const Transition&) const = default;
};

struct ProcessAutomaton {
  std::vector<std::string> loc_names;
  LocId initial = 0;
  std::vector<Transition> transitions;
  bool operator==(const ProcessAutomaton&) const = default;
};

// Conjunctive predicate over observations: optional process flag, optional
// proc-0 location set, optional head constraint per channel. Only observable
// channels may carry head constraints. Denotes a visible set by construction.
struct ObsPredicate {
  int p = -1;  // 0, 1, or -1 for unconstrained
  std::optional<std::vector<bool>> locs;      // per proc-0 location
  std::vector<std::optional<uint8_t>> heads;  // per channel; value is MsgId or kEps
  bool operator==(const ObsPredicate&) const = default;
};

enum class ObjectiveKind : uint8_t { Safety, Reach };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::Safety;
  ObsPredicate target;
  bool operator==(const Objective&) const = default;
};

struct LcsModel {
  std::vector<std::string> messages;
  std::vector<std::string> channels;
  std::vector<bool> observable;  // per channel
  std::vector<std::string> label_names;
  std::vector<uint8_t> label_proc;    // per label: owning process
  std::vector<bool> controllable;     // per label; only proc-0 labels may be set
  ProcessAutomaton proc[2];
  Objective objective;

  bool operator==(const LcsModel&) const = default;

  int msg_count() const { return (int)messages.size(); }
  int chan_count() const { return (int)channels.size(); }
  std::optional<MsgId> msg_id(const std::string& name) const;
  std::optional<ChanId> chan_id(const std::string& name) const;
  std::optional<LabelId> label_id(const std::string& name) const;
};

// Observation (p, q0, h). h maps every channel to a head symbol; unobservable
// channels and all channels of p = 1 states are pinned to kEps.
struct Obs {
  uint8_t p = 0;
  LocId q0 = 0;
  std::vector<uint8_t> heads;  // per channel, kEps when masked

  bool operator==(const Obs&) const = default;
  bool operator<(const Obs& o) const {
    if (p != o.p) return p < o.p;
    if (q0 != o.q0) return q0 < o.q0;
    return heads < o.heads;
  }
};

std::string format_obs(const LcsModel& m, const Obs& o);

// Parses the line-oriented model format. Throws ParseError on malformed input
// and UnsupportedObjectiveError for objective kinds outside safety/reach.
LcsModel parse_model(const std::string& text);

// Canonical text form; parse_model(serialize_model(m)) reproduces m.
std::string serialize_model(const LcsModel& m);

struct ValidationIssue {
  bool error = true;  // false: warning
  std::string message;
};

// Structural checks: disjoint alphabets, observability of guarded/read
// channels, id ranges, objective sanity. Warnings cover statically
// unsatisfiable guard/op combinations.
std::vector<ValidationIssue> validate_model(const LcsModel& m);

// All observations of the model, canonically ordered: p = 1 observations
// carry all-eps heads; p = 0 observations range over every head assignment of
// the observable channels. Size is |Q0| * (1 + (|M|+1)^|C_obs|).
std::vector<Obs> enumerate_observations(const LcsModel& m);

bool predicate_matches(const LcsModel& m, const ObsPredicate& pred, const Obs& o);

// Observations satisfying the model's objective predicate.
std::vector<Obs> objective_observations(const LcsModel& m);

}  // namespace lcs
