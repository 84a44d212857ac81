#pragma once

// Deterministic DOT emitter: machines as nested clusters, stages as labeled
// nodes, flows as solid edges, triggers as dashed ones. Event regions can be
// highlighted to reproduce the event-ized view. Structure only, no layout.

#include <set>
#include <sstream>
#include <string>

#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"
#include "tmkit/transforms.hpp"

namespace tmkit {

enum class RenderLevel { Full, Elided };

struct RenderOptions {
  RenderLevel level = RenderLevel::Full;
  bool show_triggers = true;
  std::vector<std::string> show_events;  // highlight these events' regions
};

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

struct DotWriter {
  const Model& model;
  const std::set<Path>& highlighted;
  std::ostringstream out;

  void machine(const Machine& m, const Path& at, int indent) {
    std::string pad(2 * static_cast<std::size_t>(indent), ' ');
    out << pad << "subgraph " << dot_quote("cluster_" + at.text()) << " {\n";
    std::string label = m.name;
    if (m.of_owner) label += " of " + m.of_owner->text();
    out << pad << "  label=" << dot_quote(label) << ";\n";
    if (highlighted.count(at)) out << pad << "  color=\"red\";\n" << pad << "  penwidth=2;\n";
    // anchor carries machine-level edges in and out of the cluster
    out << pad << "  " << dot_quote(at.text()) << " [shape=point, style=invis];\n";
    for (StageKind k : m.stages) {
      Path sp = at.with_stage(k);
      out << pad << "  " << dot_quote(sp.text()) << " [label="
          << dot_quote(std::string(stage_label(k))) << (highlighted.count(sp)
                                                            ? ", color=\"red\", penwidth=2"
                                                            : "")
          << "];\n";
    }
    for (const Machine& c : m.children) machine(c, at.child(c.name), indent + 1);
    out << pad << "}\n";
  }

  void edge(const Path& from, const Path& to, bool dashed) {
    out << "  " << dot_quote(from.text()) << " -> " << dot_quote(to.text());
    std::vector<std::string> attrs;
    if (!from.stage) attrs.push_back("ltail=" + dot_quote("cluster_" + from.text()));
    if (!to.stage) attrs.push_back("lhead=" + dot_quote("cluster_" + to.text()));
    if (dashed) attrs.push_back("style=dashed");
    if (highlighted.count(from) && highlighted.count(to)) {
      attrs.push_back("color=\"red\"");
      attrs.push_back("penwidth=2");
    }
    if (!attrs.empty()) {
      out << " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
      out << "]";
    }
    out << ";\n";
  }
};

}  // namespace detail

inline std::string render_dot(const Model& input, const RenderOptions& opts = {}) {
  require_valid(input, "render_dot");
  for (const std::string& id : opts.show_events)
    if (!input.find_event(id))
      throw Error("UNKNOWN_EVENT", "cannot highlight undefined event: " + id);

  Model elided;
  const Model* model = &input;
  if (opts.level == RenderLevel::Elided) {
    elided = elide_stages(input);
    model = &elided;
  }

  std::set<Path> highlighted;
  for (const std::string& id : opts.show_events) {
    const Event* e = model->find_event(id);
    highlighted.insert(e->region.begin(), e->region.end());
  }

  detail::DotWriter w{*model, highlighted, {}};
  w.out << "digraph tm {\n";
  w.out << "  graph [compound=true];\n";
  w.out << "  node [shape=box];\n";
  for (const Machine& m : model->machines) w.machine(m, Path{{m.name}, {}}, 1);
  for (const Flow& f : model->flows) w.edge(f.from, f.to, /*dashed=*/false);
  if (opts.show_triggers)
    for (const Trigger& t : model->triggers) w.edge(t.from, t.to, /*dashed=*/true);
  w.out << "}\n";
  return w.out.str();
}

}  // namespace tmkit
