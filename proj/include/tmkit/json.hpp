#pragma once

// Lossless JSON interchange for models, plus the trace report emitted by the
// simulator. Field names are stable; keys come out sorted; empty collections
// are omitted, so an empty model is `{}`.

#include <string>

#include <json.hpp>

#include "tmkit/class_spec.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

namespace detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& message) {
  throw Error("SCHEMA", "at " + (pointer.empty() ? "/" : pointer) + ": " + message);
}

// ---- export ----

inline json machine_to_json(const Machine& m) {
  json j = json::object();
  j["name"] = m.name;
  if (m.of_owner) j["of"] = m.of_owner->text();
  if (!m.stages.empty()) {
    json stages = json::array();
    for (StageKind k : m.stages) stages.push_back(std::string(stage_keyword(k)));
    j["stages"] = std::move(stages);
  }
  if (!m.metadata.empty()) j["meta"] = m.metadata;
  if (!m.children.empty()) {
    json kids = json::array();
    for (const Machine& c : m.children) kids.push_back(machine_to_json(c));
    j["machines"] = std::move(kids);
  }
  return j;
}

inline json literal_to_json(const Literal& lit) {
  if (lit.is_null) return nullptr;
  json j = json::object();
  j[lit.quoted ? "str" : "int"] = lit.text;
  return j;
}

inline json stmts_to_json(const std::vector<Stmt>& block) {
  json arr = json::array();
  for (const Stmt& s : block) {
    json j = json::object();
    switch (s.kind) {
      case Stmt::Kind::Fire:
        j["fire"] = s.event_id;
        break;
      case Stmt::Kind::If: {
        json cond = json::object();
        cond["lhs"] = s.cond.lhs.text();
        cond["op"] = s.cond.negated ? "!=" : "==";
        cond["rhs"] = literal_to_json(s.cond.rhs);
        cond["then"] = stmts_to_json(s.body);
        if (s.has_else) cond["else"] = stmts_to_json(s.else_body);
        j["if"] = std::move(cond);
        break;
      }
      case Stmt::Kind::Repeat:
        j["repeat"] = s.count;
        j["body"] = stmts_to_json(s.body);
        break;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline json model_to_json(const Model& model) {
  json j = json::object();
  if (!model.machines.empty()) {
    json machines = json::array();
    for (const Machine& m : model.machines) machines.push_back(machine_to_json(m));
    j["machines"] = std::move(machines);
  }
  auto edge_array = [](const auto& edges) {
    json arr = json::array();
    for (const auto& e : edges)
      arr.push_back(json{{"from", e.from.text()}, {"to", e.to.text()}});
    return arr;
  };
  if (!model.flows.empty()) j["flows"] = edge_array(model.flows);
  if (!model.triggers.empty()) j["triggers"] = edge_array(model.triggers);
  if (!model.events.empty()) {
    json events = json::array();
    for (const Event& e : model.events) {
      json je = json::object();
      je["id"] = e.id;
      if (!e.label.empty()) je["label"] = e.label;
      json region = json::array();
      for (const Path& p : e.region) region.push_back(p.text());
      je["region"] = std::move(region);
      if (e.kind != EventKind::Plain) je["kind"] = std::string(event_kind_name(e.kind));
      if (!e.attr.empty()) je["attr"] = e.attr;
      if (e.time) je["time"] = *e.time;
      if (e.meta) je["meta"] = *e.meta;
      events.push_back(std::move(je));
    }
    j["events"] = std::move(events);
  }
  if (!model.chronology.empty()) {
    json chrono = json::array();
    for (const auto& [a, b] : model.chronology) chrono.push_back(json::array({a, b}));
    j["chronology"] = std::move(chrono);
  }
  if (!model.programs.empty()) {
    json programs = json::array();
    for (const Program& p : model.programs)
      programs.push_back(json{{"body", stmts_to_json(p.body)}, {"name", p.name}});
    j["programs"] = std::move(programs);
  }
  return j;
}

// ---- import ----

inline const json& field(const json& j, const char* key, const std::string& pointer) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(pointer, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string string_at(const json& j, const std::string& pointer) {
  if (!j.is_string()) schema_error(pointer, "expected a string");
  return j.get<std::string>();
}

inline Path path_at(const json& j, const std::string& pointer) {
  auto p = parse_path(string_at(j, pointer));
  if (!p) schema_error(pointer, "malformed path '" + j.get<std::string>() + "'");
  return *p;
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& pointer) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) schema_error(pointer, "unknown field '" + it.key() + "'");
  }
}

inline Machine machine_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) schema_error(pointer, "expected an object");
  check_keys(j, {"name", "of", "stages", "meta", "machines"}, pointer);
  Machine m;
  m.name = string_at(field(j, "name", pointer), pointer + "/name");
  if (j.contains("of")) m.of_owner = path_at(j["of"], pointer + "/of");
  if (j.contains("stages")) {
    const json& stages = j["stages"];
    if (!stages.is_array()) schema_error(pointer + "/stages", "expected an array");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      std::string p = pointer + "/stages/" + std::to_string(i);
      auto kind = stage_from_keyword(string_at(stages[i], p));
      if (!kind) schema_error(p, "unknown stage kind");
      m.stages.insert(*kind);
    }
  }
  if (j.contains("meta")) {
    const json& meta = j["meta"];
    if (!meta.is_object()) schema_error(pointer + "/meta", "expected an object");
    for (auto it = meta.begin(); it != meta.end(); ++it)
      m.metadata[it.key()] = string_at(it.value(), pointer + "/meta/" + it.key());
  }
  if (j.contains("machines")) {
    const json& kids = j["machines"];
    if (!kids.is_array()) schema_error(pointer + "/machines", "expected an array");
    for (std::size_t i = 0; i < kids.size(); ++i)
      m.children.push_back(
          machine_from_json(kids[i], pointer + "/machines/" + std::to_string(i)));
  }
  return m;
}

inline Literal literal_from_json(const json& j, const std::string& pointer) {
  Literal lit;
  if (j.is_null()) {
    lit.is_null = true;
    return lit;
  }
  if (!j.is_object() || j.size() != 1)
    schema_error(pointer, "expected null, {\"str\": ...} or {\"int\": ...}");
  if (j.contains("str")) {
    lit.quoted = true;
    lit.text = string_at(j["str"], pointer + "/str");
  } else if (j.contains("int")) {
    lit.text = string_at(j["int"], pointer + "/int");
  } else {
    schema_error(pointer, "expected null, {\"str\": ...} or {\"int\": ...}");
  }
  return lit;
}

inline std::vector<Stmt> stmts_from_json(const json& j, const std::string& pointer, int depth) {
  if (depth > 256) schema_error(pointer, "statement nesting too deep");
  if (!j.is_array()) schema_error(pointer, "expected an array");
  std::vector<Stmt> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string p = pointer + "/" + std::to_string(i);
    const json& js = j[i];
    if (!js.is_object()) schema_error(p, "expected an object");
    if (js.contains("fire")) {
      check_keys(js, {"fire"}, p);
      out.push_back(Stmt::fire(string_at(js["fire"], p + "/fire")));
    } else if (js.contains("if")) {
      check_keys(js, {"if"}, p);
      const json& c = js["if"];
      if (!c.is_object()) schema_error(p + "/if", "expected an object");
      check_keys(c, {"lhs", "op", "rhs", "then", "else"}, p + "/if");
      Cond cond;
      cond.lhs = path_at(field(c, "lhs", p + "/if"), p + "/if/lhs");
      std::string op = string_at(field(c, "op", p + "/if"), p + "/if/op");
      if (op != "==" && op != "!=") schema_error(p + "/if/op", "expected '==' or '!='");
      cond.negated = op == "!=";
      cond.rhs = literal_from_json(field(c, "rhs", p + "/if"), p + "/if/rhs");
      std::vector<Stmt> then_block =
          stmts_from_json(field(c, "then", p + "/if"), p + "/if/then", depth + 1);
      std::optional<std::vector<Stmt>> else_block;
      if (c.contains("else"))
        else_block = stmts_from_json(c["else"], p + "/if/else", depth + 1);
      out.push_back(Stmt::branch(std::move(cond), std::move(then_block), std::move(else_block)));
    } else if (js.contains("repeat")) {
      check_keys(js, {"repeat", "body"}, p);
      if (!js["repeat"].is_number_integer()) schema_error(p + "/repeat", "expected an integer");
      long long n = js["repeat"].get<long long>();
      if (n < 0) schema_error(p + "/repeat", "repeat count must not be negative");
      out.push_back(Stmt::repeat(n, stmts_from_json(field(js, "body", p), p + "/body", depth + 1)));
    } else {
      schema_error(p, "expected a 'fire', 'if', or 'repeat' statement");
    }
  }
  return out;
}

inline Model model_from_json(const json& j) {
  if (!j.is_object()) schema_error("", "expected a JSON object");
  check_keys(j, {"machines", "flows", "triggers", "events", "chronology", "programs"}, "");
  Model model;
  if (j.contains("machines")) {
    const json& machines = j["machines"];
    if (!machines.is_array()) schema_error("/machines", "expected an array");
    for (std::size_t i = 0; i < machines.size(); ++i)
      model.machines.push_back(
          machine_from_json(machines[i], "/machines/" + std::to_string(i)));
  }
  auto read_edges = [&](const char* key, auto push) {
    if (!j.contains(key)) return;
    const json& arr = j[key];
    std::string base = std::string("/") + key;
    if (!arr.is_array()) schema_error(base, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string p = base + "/" + std::to_string(i);
      const json& je = arr[i];
      if (!je.is_object()) schema_error(p, "expected an object");
      check_keys(je, {"from", "to"}, p);
      push(path_at(field(je, "from", p), p + "/from"), path_at(field(je, "to", p), p + "/to"));
    }
  };
  read_edges("flows", [&](Path from, Path to) {
    model.flows.push_back(Flow{std::move(from), std::move(to)});
  });
  read_edges("triggers", [&](Path from, Path to) {
    model.triggers.push_back(Trigger{std::move(from), std::move(to)});
  });
  if (j.contains("events")) {
    const json& events = j["events"];
    if (!events.is_array()) schema_error("/events", "expected an array");
    for (std::size_t i = 0; i < events.size(); ++i) {
      std::string p = "/events/" + std::to_string(i);
      const json& je = events[i];
      if (!je.is_object()) schema_error(p, "expected an object");
      check_keys(je, {"id", "label", "region", "kind", "attr", "time", "meta"}, p);
      Event e;
      e.id = string_at(field(je, "id", p), p + "/id");
      if (je.contains("label")) e.label = string_at(je["label"], p + "/label");
      const json& region = field(je, "region", p);
      if (!region.is_array()) schema_error(p + "/region", "expected an array");
      for (std::size_t r = 0; r < region.size(); ++r)
        e.region.push_back(path_at(region[r], p + "/region/" + std::to_string(r)));
      canonicalize_region(e.region);
      if (je.contains("kind")) {
        auto kind = event_kind_from_name(string_at(je["kind"], p + "/kind"));
        if (!kind) schema_error(p + "/kind", "unknown event kind");
        e.kind = *kind;
      }
      if (je.contains("attr")) e.attr = string_at(je["attr"], p + "/attr");
      if (je.contains("time")) e.time = string_at(je["time"], p + "/time");
      if (je.contains("meta")) e.meta = string_at(je["meta"], p + "/meta");
      model.events.push_back(std::move(e));
    }
  }
  if (j.contains("chronology")) {
    const json& chrono = j["chronology"];
    if (!chrono.is_array()) schema_error("/chronology", "expected an array");
    for (std::size_t i = 0; i < chrono.size(); ++i) {
      std::string p = "/chronology/" + std::to_string(i);
      const json& edge = chrono[i];
      if (!edge.is_array() || edge.size() != 2) schema_error(p, "expected a pair of event ids");
      model.chronology.insert({string_at(edge[0], p + "/0"), string_at(edge[1], p + "/1")});
    }
  }
  if (j.contains("programs")) {
    const json& programs = j["programs"];
    if (!programs.is_array()) schema_error("/programs", "expected an array");
    for (std::size_t i = 0; i < programs.size(); ++i) {
      std::string p = "/programs/" + std::to_string(i);
      const json& jp = programs[i];
      if (!jp.is_object()) schema_error(p, "expected an object");
      check_keys(jp, {"name", "body"}, p);
      Program prog;
      prog.name = string_at(field(jp, "name", p), p + "/name");
      prog.body = stmts_from_json(field(jp, "body", p), p + "/body", 0);
      model.programs.push_back(std::move(prog));
    }
  }
  return model;
}

// Resolution checks with pointer-accurate locations, then the full validators.
inline void check_imported(const Model& model) {
  auto check_path = [&](const Path& path, const std::string& pointer) {
    if (!try_resolve(model, path))
      schema_error(pointer, "path does not resolve: " + path.text());
  };
  for (std::size_t i = 0; i < model.flows.size(); ++i) {
    check_path(model.flows[i].from, "/flows/" + std::to_string(i) + "/from");
    check_path(model.flows[i].to, "/flows/" + std::to_string(i) + "/to");
  }
  for (std::size_t i = 0; i < model.triggers.size(); ++i) {
    check_path(model.triggers[i].from, "/triggers/" + std::to_string(i) + "/from");
    check_path(model.triggers[i].to, "/triggers/" + std::to_string(i) + "/to");
  }
  for (std::size_t i = 0; i < model.events.size(); ++i)
    for (const Path& p : model.events[i].region)
      check_path(p, "/events/" + std::to_string(i) + "/region");

  std::vector<Diagnostic> diags = validate(model);
  std::vector<Diagnostic> dynamic = validate_dynamics(model);
  diags.insert(diags.end(), dynamic.begin(), dynamic.end());
  if (!diags.empty()) schema_error("", render_diagnostic(diags.front()));
}

}  // namespace detail

// Canonical JSON text of a valid model: sorted keys, two-space indentation,
// trailing newline.
inline std::string export_json(const Model& model) {
  require_valid(model, "export_json");
  return detail::model_to_json(model).dump(2) + "\n";
}

// Parses and fully checks a model document. Throws Error("SCHEMA", ...) with
// a JSON-pointer location on any structural or semantic problem.
inline Model import_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("SCHEMA", std::string("malformed JSON: ") + e.what());
  }
  Model model = detail::model_from_json(j);
  detail::check_imported(model);
  return model;
}

// Simulation report: the model document with the trace and final store state
// embedded under "trace" and "state".
inline std::string export_trace_json(const Model& model, const Trace& trace,
                                     const SimState& state) {
  nlohmann::json j = detail::model_to_json(model);
  nlohmann::json jt = nlohmann::json::array();
  for (const Firing& f : trace) {
    nlohmann::json jf = nlohmann::json::object();
    jf["step"] = f.step;
    jf["event"] = f.event_id;
    jf["outcome"] = f.applied ? "applied" : "rejected";
    if (f.delta) {
      nlohmann::json d = nlohmann::json::object();
      d["path"] = f.delta->store.text();
      d["old"] = f.delta->old_value ? nlohmann::json(*f.delta->old_value) : nlohmann::json();
      d["new"] = f.delta->new_value ? nlohmann::json(*f.delta->new_value) : nlohmann::json();
      jf["delta"] = std::move(d);
    }
    if (f.output)
      jf["output"] = *f.output ? nlohmann::json(**f.output) : nlohmann::json();
    jt.push_back(std::move(jf));
  }
  j["trace"] = std::move(jt);
  nlohmann::json js = nlohmann::json::object();
  for (const auto& [path, value] : state)
    js[path.text()] = value ? nlohmann::json(*value) : nlohmann::json();
  j["state"] = std::move(js);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Class specifications as JSON

// Accepts {"name": ..., "attributes": [{"name","type"}...],
// "methods": [{"name","kind","attr"}...], "extends": ...}; method kind
// defaults to name-based classification.
inline ClassSpec class_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("SCHEMA", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) detail::schema_error("", "expected a JSON object");
  detail::check_keys(j, {"name", "attributes", "methods", "extends"}, "");
  ClassSpec spec;
  spec.name = detail::string_at(detail::field(j, "name", ""), "/name");
  if (j.contains("extends")) spec.superclass = detail::string_at(j["extends"], "/extends");
  if (j.contains("attributes")) {
    const nlohmann::json& attrs = j["attributes"];
    if (!attrs.is_array()) detail::schema_error("/attributes", "expected an array");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      std::string p = "/attributes/" + std::to_string(i);
      const nlohmann::json& ja = attrs[i];
      if (!ja.is_object()) detail::schema_error(p, "expected an object");
      detail::check_keys(ja, {"name", "type"}, p);
      spec.attributes.push_back(
          Attribute{detail::string_at(detail::field(ja, "name", p), p + "/name"),
                    detail::string_at(detail::field(ja, "type", p), p + "/type")});
    }
  }
  if (j.contains("methods")) {
    const nlohmann::json& methods = j["methods"];
    if (!methods.is_array()) detail::schema_error("/methods", "expected an array");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      std::string p = "/methods/" + std::to_string(i);
      const nlohmann::json& jm = methods[i];
      if (!jm.is_object()) detail::schema_error(p, "expected an object");
      detail::check_keys(jm, {"name", "kind", "attr"}, p);
      std::string name = detail::string_at(detail::field(jm, "name", p), p + "/name");
      if (jm.contains("kind")) {
        auto kind = method_kind_from_name(detail::string_at(jm["kind"], p + "/kind"));
        if (!kind) detail::schema_error(p + "/kind", "unknown method kind");
        Method m{std::move(name), *kind, ""};
        if (jm.contains("attr")) m.attr = detail::string_at(jm["attr"], p + "/attr");
        spec.methods.push_back(std::move(m));
      } else {
        spec.methods.push_back(classify_method(spec, std::move(name)));
      }
    }
  }
  return spec;
}

// The inverse, for the to-class output.
inline std::string class_to_json(const ClassSpec& spec) {
  nlohmann::json j = nlohmann::json::object();
  j["name"] = spec.name;
  if (spec.superclass) j["extends"] = *spec.superclass;
  if (!spec.attributes.empty()) {
    nlohmann::json attrs = nlohmann::json::array();
    for (const Attribute& a : spec.attributes)
      attrs.push_back(nlohmann::json{{"name", a.name}, {"type", a.type}});
    j["attributes"] = std::move(attrs);
  }
  if (!spec.methods.empty()) {
    nlohmann::json methods = nlohmann::json::array();
    for (const Method& m : spec.methods) {
      nlohmann::json jm = nlohmann::json::object();
      jm["name"] = m.name;
      jm["kind"] = std::string(method_kind_name(m.kind));
      if (!m.attr.empty()) jm["attr"] = m.attr;
      methods.push_back(std::move(jm));
    }
    j["methods"] = std::move(methods);
  }
  return j.dump(2) + "\n";
}

}  // namespace tmkit
