#pragma once

// The dynamic layers on top of the static model: events over regions, the
// chronology (a precedence DAG over events), programs with control structure,
// actualization checking and the deterministic simulator.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Region connectivity

namespace detail {

// Region elements are connected when they sit in the same machine (a machine
// and its stages count as one site) or when a flow/trigger joins them.
inline bool region_connected(const Model& model, const std::vector<Path>& region) {
  if (region.empty()) return false;
  const std::size_t n = region.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

  std::map<Path, std::vector<std::size_t>> by_machine;
  std::map<Path, std::size_t> index_of;
  for (std::size_t i = 0; i < n; ++i) {
    by_machine[region[i].machine()].push_back(i);
    index_of[region[i]] = i;
  }
  for (const auto& [mp, members] : by_machine)
    for (std::size_t i = 1; i < members.size(); ++i) unite(members[0], members[i]);

  auto connect_edge = [&](const Path& from, const Path& to) {
    auto a = index_of.find(from);
    auto b = index_of.find(to);
    if (a != index_of.end() && b != index_of.end()) unite(a->second, b->second);
  };
  for (const Flow& f : model.flows) connect_edge(f.from, f.to);
  for (const Trigger& t : model.triggers) connect_edge(t.from, t.to);

  for (std::size_t i = 1; i < n; ++i)
    if (find(i) != find(0)) return false;
  return true;
}

}  // namespace detail

// Adds an event after checking its region: paths must resolve, the region
// must be non-empty and connected, and the id must be fresh.
inline Model define_event(const Model& model, Event event) {
  canonicalize_region(event.region);
  if (model.find_event(event.id))
    throw Error("DUPLICATE_EVENT", "event id already defined: " + event.id);
  if (event.region.empty())
    throw Error("EMPTY_REGION", "event region must not be empty");
  for (const Path& p : event.region)
    if (!try_resolve(model, p))
      throw Error("UNKNOWN_PATH", "region path does not resolve: " + p.text(), p);
  if (!detail::region_connected(model, event.region))
    throw Error("DISCONNECTED_REGION",
                "event region is not connected: " + event.id);
  Model out = model;
  out.events.push_back(std::move(event));
  return out;
}

// ---------------------------------------------------------------------------
// Chronology

// Transitive closure of the precedence relation, keyed by event id.
inline std::map<std::string, std::set<std::string>> chronology_closure(const Chronology& chrono) {
  std::map<std::string, std::set<std::string>> succ;
  for (const auto& [a, b] : chrono) succ[a].insert(b);
  std::map<std::string, std::set<std::string>> closure;
  std::function<const std::set<std::string>&(const std::string&)> reach =
      [&](const std::string& id) -> const std::set<std::string>& {
    auto done = closure.find(id);
    if (done != closure.end()) return done->second;
    closure[id] = {};  // placeholder breaks cycles during the walk
    std::set<std::string> acc;
    auto it = succ.find(id);
    if (it != succ.end()) {
      for (const std::string& next : it->second) {
        acc.insert(next);
        const std::set<std::string>& deeper = reach(next);
        acc.insert(deeper.begin(), deeper.end());
      }
    }
    return closure[id] = std::move(acc);
  };
  for (const auto& [a, b] : chrono) {
    reach(a);
    reach(b);
  }
  return closure;
}

// Diagnostics for unknown event ids and cycles in the precedence relation.
inline std::vector<Diagnostic> validate_chronology(const Model& model) {
  std::vector<Diagnostic> out;
  std::set<std::string> ids;
  for (const Event& e : model.events) ids.insert(e.id);
  for (const auto& [a, b] : model.chronology) {
    for (const std::string& id : {a, b})
      if (!ids.count(id))
        out.push_back({Severity::Error, "UNKNOWN_EVENT",
                       "chronology references undefined event: " + id, {}, {}});
  }

  // Kahn's algorithm; whatever cannot be ordered lies on a cycle.
  std::map<std::string, int> indegree;
  std::map<std::string, std::set<std::string>> succ;
  for (const auto& [a, b] : model.chronology) {
    indegree.emplace(a, 0);
    if (succ[a].insert(b).second) ++indegree[b];
  }
  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.insert(id);
  std::size_t ordered = 0;
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    ++ordered;
    for (const std::string& next : succ[id])
      if (--indegree[next] == 0) ready.insert(next);
  }
  if (ordered < indegree.size()) {
    std::string cyclic;
    for (const auto& [id, deg] : indegree)
      if (deg > 0) cyclic += (cyclic.empty() ? "" : ", ") + id;
    out.push_back({Severity::Error, "CHRONO_CYCLE",
                   "chronology is cyclic through: " + cyclic, {}, {}});
  }
  std::stable_sort(out.begin(), out.end(), diagnostic_order);
  return out;
}

// A required-before pair that a sequence broke: `required_first` must come
// before `preempted_by` but fired after it.
struct ChronologyViolation {
  std::string required_first;
  std::string preempted_by;

  std::string message() const {
    return required_first + " before " + preempted_by + " required";
  }
  bool operator==(const ChronologyViolation&) const = default;
};

// A sequence actualizes the chronology when, for every precedence pair with
// both events present, the first occurrence of the earlier event comes first.
// Repeated firings are fine. Returns the first violation found, if any.
inline std::optional<ChronologyViolation> check_actualization(
    const std::vector<std::string>& sequence, const Chronology& chrono) {
  auto closure = chronology_closure(chrono);
  std::vector<std::string> fired;  // first occurrences, in firing order
  std::set<std::string> fired_set;
  for (const std::string& id : sequence) {
    if (!fired_set.insert(id).second) continue;
    auto later = closure.find(id);
    if (later != closure.end())
      for (const std::string& f : fired)
        if (later->second.count(f)) return ChronologyViolation{id, f};
    fired.push_back(id);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Simulation state

// A store holds null (no value yet) or a piece of text.
using StoreValue = std::optional<std::string>;

inline std::string store_value_text(const StoreValue& v) { return v ? *v : "null"; }

// Store machines are the sub-machines named "store"; they carry the
// simulation state.
inline bool is_store(const Machine& m) { return m.name == "store"; }

using SimState = std::map<Path, StoreValue>;

inline SimState initial_state(const Model& model) {
  SimState state;
  std::function<void(const Machine&, const Path&)> walk = [&](const Machine& m, const Path& at) {
    if (is_store(m)) state[at] = std::nullopt;
    for (const Machine& c : m.children) walk(c, at.child(c.name));
  };
  for (const Machine& m : model.machines) walk(m, Path{{m.name}, {}});
  return state;
}

// Declared-type conformance for stored values. Null conforms to every type.
inline bool value_conforms(const StoreValue& v, const std::string& type) {
  if (!v) return true;
  if (type == "char") return v->size() == 1;
  if (type == "int") {
    std::string_view s = *v;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
    if (s.empty()) return false;
    return s.find_first_not_of("0123456789") == std::string_view::npos;
  }
  return true;  // String and unconstrained types accept any text
}

namespace detail {

// The store a set/get event acts on: the unique store machine its region
// touches.
inline Path event_store(const Model& model, const Event& event) {
  std::set<Path> stores;
  for (const Path& p : event.region) {
    Path mp = p.machine();
    auto ref = try_resolve(model, mp);
    if (ref && !ref->is_stage() && is_store(*ref->machine)) stores.insert(mp);
  }
  if (stores.size() != 1)
    throw Error("EVENT_STORE",
                "event " + event.id + " must touch exactly one store machine");
  return *stores.begin();
}

// Declared type for the attribute a store belongs to, read from the sibling
// type-descriptor machine. Absent descriptor means unconstrained text.
inline std::string store_declared_type(const Model& model, const Path& store) {
  if (store.segments.size() < 2) return "String";
  Path typedesc = store;
  typedesc.segments.back() = "typedesc";
  auto ref = try_resolve(model, typedesc);
  if (!ref || ref->is_stage()) return "String";
  auto it = ref->machine->metadata.find("type");
  return it == ref->machine->metadata.end() ? "String" : it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Traces

struct StateDelta {
  Path store;
  StoreValue old_value;
  StoreValue new_value;
  bool operator==(const StateDelta&) const = default;
};

struct Firing {
  int step = 0;
  std::string event_id;
  bool applied = true;  // false: rejected (set value failed its type check)
  std::optional<StateDelta> delta;
  std::optional<StoreValue> output;  // get events report the read value

  bool operator==(const Firing&) const = default;
};

using Trace = std::vector<Firing>;

// One firing per line: step TAB event TAB outcome TAB delta-or-output.
inline std::string trace_to_text(const Trace& trace) {
  std::ostringstream out;
  for (const Firing& f : trace) {
    out << f.step << '\t' << f.event_id << '\t' << (f.applied ? "applied" : "rejected") << '\t';
    if (f.delta)
      out << f.delta->store.text() << ':' << store_value_text(f.delta->old_value) << "->"
          << store_value_text(f.delta->new_value);
    else if (f.output)
      out << store_value_text(*f.output);
    else
      out << '-';
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Execution

// Per-event input values; map value std::nullopt is the null value.
using Bindings = std::map<std::string, StoreValue>;

// Carries the partial trace produced before a simulation aborted.
class SimulationError : public Error {
 public:
  SimulationError(std::string code, const std::string& message, Trace partial)
      : Error(std::move(code), message), partial_(std::move(partial)) {}
  const Trace& partial_trace() const { return partial_; }

 private:
  Trace partial_;
};

namespace detail {

struct FiringEffect {
  bool applied = true;
  std::optional<StateDelta> delta;
  std::optional<StoreValue> output;
};

// Applies one event to the state. Set events need a binding and a passing
// type check; constructor events reset every store to null.
inline FiringEffect apply_event(const Model& model, const Event& event,
                                const Bindings& bindings, SimState& state) {
  FiringEffect effect;
  switch (event.kind) {
    case EventKind::Ctor:
      for (auto& [path, value] : state) value = std::nullopt;
      break;
    case EventKind::Set: {
      Path store = event_store(model, event);
      auto bound = bindings.find(event.id);
      if (bound == bindings.end())
        throw Error("MISSING_BINDING", "set event " + event.id + " has no bound value");
      if (value_conforms(bound->second, store_declared_type(model, store))) {
        effect.delta = StateDelta{store, state[store], bound->second};
        state[store] = bound->second;
      } else {
        effect.applied = false;  // value refused, store untouched
      }
      break;
    }
    case EventKind::Get:
      effect.output = state[event_store(model, event)];
      break;
    case EventKind::Plain:
      break;
  }
  return effect;
}

// The store a condition reads: the machine itself when it is a store, else
// its unique store descendant.
inline Path cond_store(const Model& model, const Path& lhs) {
  auto ref = try_resolve(model, lhs);
  if (!ref || ref->is_stage())
    throw Error("COND_TARGET", "condition target is not a machine: " + lhs.text(), lhs);
  if (is_store(*ref->machine)) return lhs;
  std::vector<Path> stores;
  std::function<void(const Machine&, const Path&)> walk = [&](const Machine& m, const Path& at) {
    if (is_store(m)) stores.push_back(at);
    for (const Machine& c : m.children) walk(c, at.child(c.name));
  };
  walk(*ref->machine, lhs);
  if (stores.size() != 1)
    throw Error("COND_TARGET",
                "condition target must hold exactly one store: " + lhs.text(), lhs);
  return stores.front();
}

inline bool eval_cond(const Model& model, const Cond& cond, const SimState& state) {
  Path store = cond_store(model, cond.lhs);
  auto it = state.find(store);
  StoreValue current = it == state.end() ? StoreValue{} : it->second;
  StoreValue rhs = cond.rhs.is_null ? StoreValue{} : StoreValue{cond.rhs.text};
  bool equal = current == rhs;
  return cond.negated ? !equal : equal;
}

}  // namespace detail

// Diagnostics for the dynamic layers: event regions, chronology, and
// programs (unknown events, negative repeat counts, condition targets).
inline std::vector<Diagnostic> validate_dynamics(const Model& model) {
  std::vector<Diagnostic> out;
  std::set<std::string> ids;
  for (const Event& e : model.events) {
    if (!ids.insert(e.id).second)
      out.push_back({Severity::Error, "DUPLICATE_EVENT",
                     "event id defined twice: " + e.id, {}, {}});
    if (e.region.empty()) {
      out.push_back({Severity::Error, "EMPTY_REGION",
                     "event " + e.id + " has an empty region", {}, {}});
      continue;
    }
    bool resolved = true;
    for (const Path& p : e.region)
      if (!try_resolve(model, p)) {
        out.push_back({Severity::Error, "UNKNOWN_PATH",
                       "event " + e.id + " region path does not resolve: " + p.text(), p, {}});
        resolved = false;
      }
    if (resolved && !detail::region_connected(model, e.region))
      out.push_back({Severity::Error, "DISCONNECTED_REGION",
                     "event " + e.id + " region is not connected", {}, {}});
  }

  auto chrono = validate_chronology(model);
  out.insert(out.end(), chrono.begin(), chrono.end());

  std::function<void(const std::vector<Stmt>&, const std::string&)> check_block =
      [&](const std::vector<Stmt>& block, const std::string& program) {
        for (const Stmt& s : block) {
          switch (s.kind) {
            case Stmt::Kind::Fire:
              if (!ids.count(s.event_id))
                out.push_back({Severity::Error, "UNKNOWN_EVENT",
                               "program " + program + " fires undefined event: " + s.event_id,
                               {}, {}});
              break;
            case Stmt::Kind::If:
              try {
                detail::cond_store(model, s.cond.lhs);
              } catch (const Error& e) {
                out.push_back(e.to_diagnostic());
              }
              check_block(s.body, program);
              check_block(s.else_body, program);
              break;
            case Stmt::Kind::Repeat:
              if (s.count < 0)
                out.push_back({Severity::Error, "NEGATIVE_COUNT",
                               "program " + program + " repeats a negative number of times",
                               {}, {}});
              check_block(s.body, program);
              break;
          }
        }
      };
  std::set<std::string> program_names;
  for (const Program& p : model.programs) {
    if (!program_names.insert(p.name).second)
      out.push_back({Severity::Error, "DUPLICATE_PROGRAM",
                     "program name defined twice: " + p.name, {}, {}});
    check_block(p.body, p.name);
  }

  std::stable_sort(out.begin(), out.end(), diagnostic_order);
  return out;
}

// Flattens a program's control structure into the fired event ids. Conditions
// are evaluated against the state as it evolves, so expansion and execution
// are the same walk; this routine applies event effects to its own copy of
// the state.
inline std::vector<std::string> expand(const Model& model, const Program& program,
                                       const Bindings& bindings) {
  SimState state = initial_state(model);
  std::vector<std::string> out;
  std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& block) {
    for (const Stmt& s : block) {
      switch (s.kind) {
        case Stmt::Kind::Fire: {
          const Event* e = model.find_event(s.event_id);
          if (!e) throw Error("UNKNOWN_EVENT", "undefined event: " + s.event_id);
          detail::apply_event(model, *e, bindings, state);
          out.push_back(s.event_id);
          break;
        }
        case Stmt::Kind::If:
          walk(detail::eval_cond(model, s.cond, state) ? s.body : s.else_body);
          break;
        case Stmt::Kind::Repeat:
          for (long long i = 0; i < s.count; ++i) walk(s.body);
          break;
      }
    }
  };
  walk(program.body);
  return out;
}

struct SimResult {
  Trace trace;
  SimState final_state;

  bool operator==(const SimResult&) const = default;
};

// Runs a program: fires events in expansion order, applies set/get/ctor
// semantics against the store state, and checks the chronology as firings
// happen. Deterministic for a given (model, program, bindings).
inline SimResult simulate(const Model& model, const Program& program,
                          const Bindings& bindings) {
  require_valid(model, "simulate");
  {
    std::vector<Diagnostic> diags = validate_dynamics(model);
    if (!diags.empty())
      throw Error("INVALID_INPUT", "simulate requires valid dynamics; first problem: " +
                                       render_diagnostic(diags.front()));
  }

  auto closure = chronology_closure(model.chronology);
  SimResult result;
  result.final_state = initial_state(model);
  std::vector<std::string> fired;
  std::set<std::string> fired_set;

  auto fire = [&](const std::string& id) {
    const Event* e = model.find_event(id);
    if (!e) throw Error("UNKNOWN_EVENT", "undefined event: " + id);
    if (fired_set.insert(id).second) {
      auto later = closure.find(id);
      if (later != closure.end())
        for (const std::string& f : fired)
          if (later->second.count(f)) {
            ChronologyViolation v{id, f};
            throw SimulationError("CHRONOLOGY_VIOLATION",
                                  "firing order breaks the chronology: " + v.message(),
                                  result.trace);
          }
      fired.push_back(id);
    }
    detail::FiringEffect effect;
    try {
      effect = detail::apply_event(model, *e, bindings, result.final_state);
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& err) {
      throw SimulationError(err.code(), err.what(), result.trace);
    }
    Firing firing;
    firing.step = static_cast<int>(result.trace.size());
    firing.event_id = id;
    firing.applied = effect.applied;
    firing.delta = effect.delta;
    firing.output = effect.output;
    result.trace.push_back(std::move(firing));
  };

  std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& block) {
    for (const Stmt& s : block) {
      switch (s.kind) {
        case Stmt::Kind::Fire:
          fire(s.event_id);
          break;
        case Stmt::Kind::If:
          walk(detail::eval_cond(model, s.cond, result.final_state) ? s.body : s.else_body);
          break;
        case Stmt::Kind::Repeat:
          for (long long i = 0; i < s.count; ++i) walk(s.body);
          break;
      }
    }
  };
  walk(program.body);
  return result;
}

}  // namespace tmkit
