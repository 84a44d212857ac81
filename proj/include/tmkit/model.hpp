#pragma once

// The metamodel: machines with stages, flows and triggers between stages,
// plus the event/chronology/program layers owned by the model. Models are
// immutable values; every operation is a pure function.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tmkit/core.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Static structure

struct Machine {
  std::string name;
  std::set<StageKind> stages;           // at most one stage per kind
  std::vector<Machine> children;        // document order
  std::optional<Path> of_owner;         // foreign-part annotation
  std::map<std::string, std::string> metadata;

  const Machine* find_child(std::string_view child_name) const {
    for (const Machine& c : children)
      if (c.name == child_name) return &c;
    return nullptr;
  }

  bool operator==(const Machine&) const = default;
};

// Solid arrow. Endpoints are stage paths in stage-level models or machine
// paths in stage-free (elided) models.
struct Flow {
  Path from;
  Path to;
  bool operator==(const Flow&) const = default;
  auto operator<=>(const Flow&) const = default;
};

// Dashed arrow; unconstrained by the flow grammar.
struct Trigger {
  Path from;
  Path to;
  bool operator==(const Trigger&) const = default;
  auto operator<=>(const Trigger&) const = default;
};

// ---------------------------------------------------------------------------
// Dynamic layer data (events, chronology, programs)

enum class EventKind : std::uint8_t { Plain, Ctor, Set, Get };

inline std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Plain: return "plain";
    case EventKind::Ctor: return "ctor";
    case EventKind::Set: return "set";
    case EventKind::Get: return "get";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_name(std::string_view s) {
  if (s == "plain") return EventKind::Plain;
  if (s == "ctor") return EventKind::Ctor;
  if (s == "set") return EventKind::Set;
  if (s == "get") return EventKind::Get;
  return std::nullopt;
}

// An event is represented by its region: the part of the static model where
// it unfolds. Time and any further features are carried as opaque strings.
struct Event {
  std::string id;
  std::string label;
  std::vector<Path> region;        // kept sorted and unique
  EventKind kind = EventKind::Plain;
  std::string attr;                // attribute name for set/get kinds
  std::optional<std::string> time;
  std::optional<std::string> meta;

  bool operator==(const Event&) const = default;
};

inline void canonicalize_region(std::vector<Path>& region) {
  std::sort(region.begin(), region.end());
  region.erase(std::unique(region.begin(), region.end()), region.end());
}

// Precedence relation over event ids; must be a DAG.
using Chronology = std::set<std::pair<std::string, std::string>>;

// Condition literal: null or a piece of text (quoted string or integer).
struct Literal {
  bool is_null = false;
  bool quoted = false;
  std::string text;

  bool operator==(const Literal&) const = default;
};

struct Cond {
  Path lhs;               // store machine, or a machine holding one store
  bool negated = false;   // false: ==, true: !=
  Literal rhs;

  bool operator==(const Cond&) const = default;
};

struct Stmt {
  enum class Kind : std::uint8_t { Fire, If, Repeat };

  Kind kind = Kind::Fire;
  std::string event_id;          // Fire
  Cond cond;                     // If
  std::vector<Stmt> body;        // If then-block / Repeat block
  std::vector<Stmt> else_body;   // If else-block
  bool has_else = false;
  long long count = 0;           // Repeat

  static Stmt fire(std::string id) {
    Stmt s;
    s.kind = Kind::Fire;
    s.event_id = std::move(id);
    return s;
  }
  static Stmt repeat(long long n, std::vector<Stmt> block) {
    Stmt s;
    s.kind = Kind::Repeat;
    s.count = n;
    s.body = std::move(block);
    return s;
  }
  static Stmt branch(Cond c, std::vector<Stmt> then_block,
                     std::optional<std::vector<Stmt>> else_block = std::nullopt) {
    Stmt s;
    s.kind = Kind::If;
    s.cond = std::move(c);
    s.body = std::move(then_block);
    if (else_block) {
      s.has_else = true;
      s.else_body = std::move(*else_block);
    }
    return s;
  }

  bool operator==(const Stmt&) const = default;
};

struct Program {
  std::string name;
  std::vector<Stmt> body;

  bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Model

struct Model {
  std::vector<Machine> machines;   // top level, document order
  std::vector<Flow> flows;
  std::vector<Trigger> triggers;
  std::vector<Event> events;
  Chronology chronology;
  std::vector<Program> programs;

  const Machine* find_top(std::string_view name) const {
    for (const Machine& m : machines)
      if (m.name == name) return &m;
    return nullptr;
  }

  const Event* find_event(std::string_view id) const {
    for (const Event& e : events)
      if (e.id == id) return &e;
    return nullptr;
  }

  const Program* find_program(std::string_view name) const {
    for (const Program& p : programs)
      if (p.name == name) return &p;
    return nullptr;
  }

  bool operator==(const Model&) const = default;
};

// ---------------------------------------------------------------------------
// Resolution

// What a path names: the innermost machine, and the stage kind when the path
// ends in one.
struct ElementRef {
  const Machine* machine = nullptr;
  std::optional<StageKind> stage;

  bool is_stage() const { return stage.has_value(); }
};

inline std::optional<ElementRef> try_resolve(const Model& model, const Path& path) {
  if (path.segments.empty()) return std::nullopt;
  const Machine* m = model.find_top(path.segments.front());
  if (!m) return std::nullopt;
  for (std::size_t i = 1; i < path.segments.size(); ++i) {
    m = m->find_child(path.segments[i]);
    if (!m) return std::nullopt;
  }
  if (path.stage) {
    if (!m->stages.count(*path.stage)) return std::nullopt;
    return ElementRef{m, path.stage};
  }
  return ElementRef{m, std::nullopt};
}

// Resolves or throws NOT_FOUND.
inline ElementRef resolve(const Model& model, const Path& path) {
  if (auto r = try_resolve(model, path)) return *r;
  throw Error("NOT_FOUND", "path does not resolve: " + path.text(), path);
}

// ---------------------------------------------------------------------------
// Flow grammar

// Legal ordered stage pairs for a flow inside one machine. Everything not
// listed (18 of the 25 ordered pairs) is rejected. Process-to-Create
// causation is expressed with a trigger, never a flow.
inline constexpr std::array<std::pair<StageKind, StageKind>, 7> intra_flow_grammar = {{
    {StageKind::Create, StageKind::Process},
    {StageKind::Create, StageKind::Release},
    {StageKind::Process, StageKind::Release},
    {StageKind::Receive, StageKind::Process},
    {StageKind::Receive, StageKind::Release},
    {StageKind::Release, StageKind::Transfer},
    {StageKind::Transfer, StageKind::Receive},
}};

inline bool flow_allowed(StageKind from, StageKind to) {
  for (auto [a, b] : intra_flow_grammar)
    if (a == from && b == to) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Checked edge construction

// Appends a flow after checking resolution, the flow grammar (intra-machine)
// or the Transfer-Transfer rule (inter-machine), and duplicates.
// Returns the updated model; the input is never mutated.
inline Model add_flow(const Model& model, const Path& from, const Path& to) {
  ElementRef a = resolve(model, from);
  ElementRef b = resolve(model, to);
  if (!a.is_stage() || !b.is_stage())
    throw Error("FLOW_ENDPOINT", "flow endpoints must be stages", !a.is_stage() ? from : to);
  bool same_machine = from.machine() == to.machine();
  if (same_machine) {
    if (!flow_allowed(*a.stage, *b.stage))
      throw Error("FLOW_GRAMMAR",
                  "flow " + std::string(stage_keyword(*a.stage)) + " -> " +
                      std::string(stage_keyword(*b.stage)) +
                      " is not in the flow grammar",
                  from);
  } else {
    if (*a.stage != StageKind::Transfer || *b.stage != StageKind::Transfer)
      throw Error("CROSS_MACHINE_FLOW",
                  "flows between machines must connect transfer stages", from);
  }
  Flow f{from, to};
  for (const Flow& existing : model.flows)
    if (existing == f)
      throw Error("DUPLICATE_FLOW", "flow already present: " + from.text() + " -> " + to.text(), from);
  Model out = model;
  out.flows.push_back(std::move(f));
  return out;
}

// Appends a trigger; any stage pair is allowed except a self-loop.
inline Model add_trigger(const Model& model, const Path& from, const Path& to) {
  resolve(model, from);
  resolve(model, to);
  if (from == to)
    throw Error("TRIGGER_SELF", "trigger endpoints must differ", from);
  Trigger t{from, to};
  for (const Trigger& existing : model.triggers)
    if (existing == t)
      throw Error("DUPLICATE_TRIGGER",
                  "trigger already present: " + from.text() + " => " + to.text(), from);
  Model out = model;
  out.triggers.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void validate_machine(const Model& model, const Machine& m, const Path& path,
                             const std::vector<const Machine*>& ancestors,
                             std::vector<Diagnostic>& out) {
  if (m.name.empty())
    out.push_back({Severity::Error, "EMPTY_NAME", "machine has an empty name", path, {}});
  std::set<std::string_view> seen;
  for (const Machine& c : m.children) {
    if (!seen.insert(c.name).second)
      out.push_back({Severity::Error, "NAME_CLASH",
                     "duplicate child name '" + c.name + "'", path.child(c.name), {}});
  }
  if (m.of_owner) {
    const Path& owner = *m.of_owner;
    auto ref = try_resolve(model, owner);
    if (!ref || ref->is_stage()) {
      out.push_back({Severity::Error, "OF_UNRESOLVED",
                     "of-owner does not resolve to a machine: " + owner.text(), path, {}});
    } else if (owner.segments.size() != 1) {
      out.push_back({Severity::Error, "OF_NOT_TOP_LEVEL",
                     "of-owner must name a top-level machine: " + owner.text(), path, {}});
    } else {
      bool is_self_or_ancestor = ref->machine == &m;
      for (const Machine* anc : ancestors)
        if (ref->machine == anc) is_self_or_ancestor = true;
      if (is_self_or_ancestor)
        out.push_back({Severity::Error, "OF_ANCESTOR",
                       "of-owner may not be the machine itself or an ancestor", path, {}});
    }
  }
  auto nested = ancestors;
  nested.push_back(&m);
  for (const Machine& c : m.children)
    validate_machine(model, c, path.child(c.name), nested, out);
}

inline void validate_edge_endpoints(const Model& model, const Path& from, const Path& to,
                                    bool is_flow, std::vector<Diagnostic>& out) {
  auto a = try_resolve(model, from);
  auto b = try_resolve(model, to);
  if (!a)
    out.push_back({Severity::Error, "UNRESOLVED_PATH",
                   "endpoint does not resolve: " + from.text(), from, {}});
  if (!b)
    out.push_back({Severity::Error, "UNRESOLVED_PATH",
                   "endpoint does not resolve: " + to.text(), to, {}});
  if (!a || !b) return;

  const char* what = is_flow ? "flow" : "trigger";
  if (a->is_stage() != b->is_stage()) {
    out.push_back({Severity::Error, is_flow ? "FLOW_ENDPOINT" : "TRIGGER_ENDPOINT",
                   std::string(what) + " mixes a stage endpoint with a machine endpoint",
                   from, {}});
    return;
  }
  if (is_flow) {
    if (a->is_stage()) {
      if (from.machine() == to.machine()) {
        if (!flow_allowed(*a->stage, *b->stage))
          out.push_back({Severity::Error, "FLOW_GRAMMAR",
                         "flow " + std::string(stage_keyword(*a->stage)) + " -> " +
                             std::string(stage_keyword(*b->stage)) +
                             " is not in the flow grammar",
                         from, {}});
      } else if (*a->stage != StageKind::Transfer || *b->stage != StageKind::Transfer) {
        out.push_back({Severity::Error, "CROSS_MACHINE_FLOW",
                       "flows between machines must connect transfer stages", from, {}});
      }
    } else if (from == to) {
      out.push_back({Severity::Error, "SELF_EDGE",
                     "machine-level flow may not loop on one machine", from, {}});
    }
  } else if (from == to) {
    out.push_back({Severity::Error, "TRIGGER_SELF", "trigger endpoints must differ", from, {}});
  }
}

}  // namespace detail

// Checks every structural invariant of the static model and returns the
// findings sorted by location then code. An empty result means the model is
// well formed. Stage-free (elided) models are accepted: machine-to-machine
// edges carry no stage kinds, so the flow grammar does not apply to them.
inline std::vector<Diagnostic> validate(const Model& model) {
  std::vector<Diagnostic> out;

  std::set<std::string_view> top_names;
  for (const Machine& m : model.machines) {
    if (!top_names.insert(m.name).second)
      out.push_back({Severity::Error, "NAME_CLASH",
                     "duplicate top-level machine name '" + m.name + "'",
                     Path{{m.name}, {}}, {}});
    detail::validate_machine(model, m, Path{{m.name}, {}}, {}, out);
  }

  std::set<Flow> seen_flows;
  for (const Flow& f : model.flows) {
    detail::validate_edge_endpoints(model, f.from, f.to, /*is_flow=*/true, out);
    if (!seen_flows.insert(f).second)
      out.push_back({Severity::Error, "DUPLICATE_FLOW",
                     "duplicate flow: " + f.from.text() + " -> " + f.to.text(), f.from, {}});
  }
  std::set<Trigger> seen_triggers;
  for (const Trigger& t : model.triggers) {
    detail::validate_edge_endpoints(model, t.from, t.to, /*is_flow=*/false, out);
    if (!seen_triggers.insert(t).second)
      out.push_back({Severity::Error, "DUPLICATE_TRIGGER",
                     "duplicate trigger: " + t.from.text() + " => " + t.to.text(), t.from, {}});
  }

  std::stable_sort(out.begin(), out.end(), diagnostic_order);
  return out;
}

// Throws InvalidInput when the model fails validation; transforms use this to
// enforce their preconditions.
inline void require_valid(const Model& model, const char* op) {
  std::vector<Diagnostic> diags = validate(model);
  if (!diags.empty())
    throw Error("INVALID_INPUT",
                std::string(op) + " requires a valid model; first problem: " +
                    render_diagnostic(diags.front()));
}

}  // namespace tmkit
