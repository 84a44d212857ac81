#pragma once

// Canonical pretty-printer for the DSL. Output is byte-deterministic:
// two-space indentation, one declaration per line, machines in document
// order followed by flows, triggers, events, the chronology, and programs.
// Flows and triggers declared inside machine bodies come out flattened at
// the top level.

#include <sstream>
#include <string>

#include "tmkit/model.hpp"

namespace tmkit {

namespace detail {

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

inline std::string literal_text(const Literal& lit) {
  if (lit.is_null) return "null";
  if (lit.quoted) return quoted(lit.text);
  return lit.text;
}

inline void format_machine(std::ostringstream& out, const Machine& m, int indent) {
  std::string pad(2 * static_cast<std::size_t>(indent), ' ');
  out << pad << "machine " << m.name;
  if (m.of_owner) out << " of " << m.of_owner->text();
  out << " {\n";
  for (StageKind k : m.stages) out << pad << "  stage " << stage_keyword(k) << '\n';
  for (const auto& [key, value] : m.metadata)
    out << pad << "  meta " << key << " : " << quoted(value) << '\n';
  for (const Machine& c : m.children) format_machine(out, c, indent + 1);
  out << pad << "}\n";
}

inline void format_block(std::ostringstream& out, const std::vector<Stmt>& block, int indent) {
  std::string pad(2 * static_cast<std::size_t>(indent), ' ');
  for (const Stmt& s : block) {
    switch (s.kind) {
      case Stmt::Kind::Fire:
        out << pad << s.event_id << ";\n";
        break;
      case Stmt::Kind::If:
        out << pad << "if " << s.cond.lhs.text() << (s.cond.negated ? " != " : " == ")
            << literal_text(s.cond.rhs) << " {\n";
        format_block(out, s.body, indent + 1);
        out << pad << "}";
        if (s.has_else) {
          out << " else {\n";
          format_block(out, s.else_body, indent + 1);
          out << pad << "}";
        }
        out << '\n';
        break;
      case Stmt::Kind::Repeat:
        out << pad << "repeat " << s.count << " {\n";
        format_block(out, s.body, indent + 1);
        out << pad << "}\n";
        break;
    }
  }
}

}  // namespace detail

// Renders the canonical text of a valid model; parse(format(m)) is
// structurally equal to m, and format is idempotent.
inline std::string format(const Model& model) {
  require_valid(model, "format");
  std::ostringstream out;
  out << "# tm-dsl v1\n";
  for (const Machine& m : model.machines) detail::format_machine(out, m, 0);
  for (const Flow& f : model.flows)
    out << "flow " << f.from.text() << " -> " << f.to.text() << '\n';
  for (const Trigger& t : model.triggers)
    out << "trigger " << t.from.text() << " => " << t.to.text() << '\n';
  for (const Event& e : model.events) {
    out << "event " << e.id;
    if (!e.label.empty()) out << ' ' << detail::quoted(e.label);
    out << " {\n  region: ";
    for (std::size_t i = 0; i < e.region.size(); ++i) {
      if (i) out << ", ";
      out << e.region[i].text();
    }
    out << '\n';
    if (e.kind != EventKind::Plain) {
      out << "  kind: " << event_kind_name(e.kind);
      if (e.kind == EventKind::Set || e.kind == EventKind::Get) out << '(' << e.attr << ')';
      out << '\n';
    }
    if (e.time) out << "  time: " << detail::quoted(*e.time) << '\n';
    if (e.meta) out << "  meta: " << detail::quoted(*e.meta) << '\n';
    out << "}\n";
  }
  if (!model.chronology.empty()) {
    out << "chronology {\n";
    for (const auto& [a, b] : model.chronology) out << "  " << a << " -> " << b << '\n';
    out << "}\n";
  }
  for (const Program& p : model.programs) {
    out << "program " << p.name << " {\n";
    detail::format_block(out, p.body, 1);
    out << "}\n";
  }
  return out.str();
}

}  // namespace tmkit
