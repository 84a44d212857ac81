#pragma once

// Model-to-model transforms over the static structure: stage elision,
// sibling-machine merging, the foreign-part query and stage path enumeration.

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

namespace detail {

template <typename Edge>
std::vector<Edge> lift_edges(const std::vector<Edge>& edges) {
  std::vector<Edge> out;
  std::set<std::pair<Path, Path>> seen;
  for (const Edge& e : edges) {
    Path from = e.from.machine();
    Path to = e.to.machine();
    if (from == to) continue;  // intra-machine arrows vanish at machine level
    if (seen.insert({from, to}).second) out.push_back(Edge{from, to});
  }
  return out;
}

inline void clear_stages(Machine& m) {
  m.stages.clear();
  for (Machine& c : m.children) clear_stages(c);
}

}  // namespace detail

// Removes the stage level: machines and their nesting survive unchanged,
// every flow and trigger is lifted to a machine-to-machine edge (deduplicated,
// self-edges dropped), and event regions are lifted the same way. Idempotent.
inline Model elide_stages(const Model& model) {
  require_valid(model, "elide_stages");
  Model out = model;
  for (Machine& m : out.machines) detail::clear_stages(m);
  out.flows = detail::lift_edges(model.flows);
  out.triggers = detail::lift_edges(model.triggers);
  for (Event& e : out.events) {
    for (Path& p : e.region) p = p.machine();
    canonicalize_region(e.region);
  }
  return out;
}

// ---------------------------------------------------------------------------
// merge_machines

namespace detail {

// Rewrites one path under the merge of `merged` (children of `parent`) into
// `parent`.`merged_name`; children of merged machines get their original
// machine's name as a prefix.
inline Path merge_rewrite(const Path& p, const Path& parent,
                          const std::vector<std::string>& merged,
                          const std::string& merged_name) {
  const std::size_t n = parent.segments.size();
  if (p.segments.size() <= n) return p;
  for (std::size_t i = 0; i < n; ++i)
    if (p.segments[i] != parent.segments[i]) return p;
  const std::string& sib = p.segments[n];
  if (std::find(merged.begin(), merged.end(), sib) == merged.end()) return p;
  Path out;
  out.segments.assign(p.segments.begin(), p.segments.begin() + n);
  out.segments.push_back(merged_name);
  if (p.segments.size() > n + 1) {
    out.segments.push_back(sib + "_" + p.segments[n + 1]);
    out.segments.insert(out.segments.end(), p.segments.begin() + n + 2, p.segments.end());
  }
  out.stage = p.stage;
  return out;
}

template <typename Edge>
std::vector<Edge> merge_rewrite_edges(const std::vector<Edge>& edges, const Path& parent,
                                      const std::vector<std::string>& merged,
                                      const std::string& merged_name) {
  std::vector<Edge> out;
  std::set<std::pair<Path, Path>> seen;
  for (const Edge& e : edges) {
    Path from = merge_rewrite(e.from, parent, merged, merged_name);
    Path to = merge_rewrite(e.to, parent, merged, merged_name);
    if (from == to) continue;  // endpoints collapsed into one element
    if (seen.insert({from, to}).second) out.push_back(Edge{from, to});
  }
  return out;
}

inline void merge_rewrite_stmts(std::vector<Stmt>& stmts, const Path& parent,
                                const std::vector<std::string>& merged,
                                const std::string& merged_name) {
  for (Stmt& s : stmts) {
    if (s.kind == Stmt::Kind::If)
      s.cond.lhs = merge_rewrite(s.cond.lhs, parent, merged, merged_name);
    merge_rewrite_stmts(s.body, parent, merged, merged_name);
    merge_rewrite_stmts(s.else_body, parent, merged, merged_name);
  }
}

}  // namespace detail

// Replaces two or more sibling machines with a single machine named
// `merged_name`: stage sets are unioned, children are concatenated with their
// original machine's name as a prefix, and every path in the model is
// re-targeted. Edges are deduplicated; edges whose endpoints collapse into
// one element are dropped.
inline Model merge_machines(const Model& model, const std::vector<Path>& paths,
                            const std::string& merged_name) {
  std::vector<Path> distinct;
  for (const Path& p : paths) {
    if (p.stage) throw Error("NOT_SIBLINGS", "merge targets must be machines", p);
    if (std::find(distinct.begin(), distinct.end(), p) == distinct.end())
      distinct.push_back(p);
  }
  if (distinct.size() < 2)
    throw Error("NOT_SIBLINGS", "merge needs at least two distinct sibling machines");
  Path parent = distinct.front();
  parent.segments.pop_back();
  std::vector<std::string> merged_names;
  for (const Path& p : distinct) {
    Path pp = p;
    pp.segments.pop_back();
    if (pp != parent)
      throw Error("NOT_SIBLINGS", "merge targets must share one parent", p);
    resolve(model, p);
    merged_names.push_back(p.segments.back());
  }

  Model out = model;
  std::vector<Machine>* siblings = &out.machines;
  if (!parent.segments.empty()) {
    Machine* pm = nullptr;
    std::vector<Machine>* level = &out.machines;
    for (const std::string& seg : parent.segments) {
      pm = nullptr;
      for (Machine& m : *level)
        if (m.name == seg) pm = &m;
      if (!pm) throw Error("NOT_FOUND", "path does not resolve: " + parent.text(), parent);
      level = &pm->children;
    }
    siblings = level;
  }

  auto is_merged = [&](const Machine& m) {
    return std::find(merged_names.begin(), merged_names.end(), m.name) != merged_names.end();
  };
  for (const Machine& m : *siblings)
    if (!is_merged(m) && m.name == merged_name)
      throw Error("NAME_CLASH", "merged name already used among siblings: " + merged_name,
                  parent.child(merged_name));

  Machine merged;
  merged.name = merged_name;
  std::set<std::string> child_names;
  for (const Machine& m : *siblings) {
    if (!is_merged(m)) continue;
    merged.stages.insert(m.stages.begin(), m.stages.end());
    for (const auto& [k, v] : m.metadata) merged.metadata.emplace(k, v);
    for (const Machine& c : m.children) {
      Machine moved = c;
      moved.name = m.name + "_" + c.name;
      if (!child_names.insert(moved.name).second)
        throw Error("NAME_CLASH", "merged children collide on name: " + moved.name,
                    parent.child(merged_name));
      merged.children.push_back(std::move(moved));
    }
  }

  std::vector<Machine> rebuilt;
  bool placed = false;
  for (Machine& m : *siblings) {
    if (is_merged(m)) {
      if (!placed) {
        rebuilt.push_back(merged);
        placed = true;
      }
      continue;
    }
    rebuilt.push_back(std::move(m));
  }
  *siblings = std::move(rebuilt);

  out.flows = detail::merge_rewrite_edges(out.flows, parent, merged_names, merged_name);
  out.triggers = detail::merge_rewrite_edges(out.triggers, parent, merged_names, merged_name);
  for (Event& e : out.events) {
    for (Path& p : e.region)
      p = detail::merge_rewrite(p, parent, merged_names, merged_name);
    canonicalize_region(e.region);
  }
  for (Program& prog : out.programs)
    detail::merge_rewrite_stmts(prog.body, parent, merged_names, merged_name);

  std::function<void(Machine&, const Path&)> fix_owners = [&](Machine& m, const Path& at) {
    if (m.of_owner)
      m.of_owner = detail::merge_rewrite(*m.of_owner, parent, merged_names, merged_name);
    for (Machine& c : m.children) fix_owners(c, at.child(c.name));
  };
  for (Machine& m : out.machines) fix_owners(m, Path{{m.name}, {}});

  return out;
}

// ---------------------------------------------------------------------------
// foreign_parts

// Every descendant of `grand` annotated as a projected part of another thing,
// paired with its owner, in document order.
inline std::vector<std::pair<Path, Path>> foreign_parts(const Model& model, const Path& grand) {
  ElementRef ref = resolve(model, grand);
  if (ref.is_stage())
    throw Error("NOT_FOUND", "foreign_parts needs a machine path: " + grand.text(), grand);
  std::vector<std::pair<Path, Path>> out;
  std::function<void(const Machine&, const Path&)> walk = [&](const Machine& m, const Path& at) {
    if (m.of_owner) out.emplace_back(at, *m.of_owner);
    for (const Machine& c : m.children) walk(c, at.child(c.name));
  };
  for (const Machine& c : ref.machine->children) walk(c, grand.child(c.name));
  return out;
}

// ---------------------------------------------------------------------------
// stage_paths

// Enumerates the simple stage paths of one machine: walks its intra-machine
// flows from a source stage (Create, or Transfer in its input role) until a
// path arrives at Transfer. The starting Transfer may be revisited only as
// the terminal arrival. Paths come out in lexicographic order.
inline std::vector<std::vector<StageKind>> stage_paths(const Model& model,
                                                       const Path& machine_path) {
  auto ref = try_resolve(model, machine_path);
  if (!ref || ref->is_stage()) return {};

  std::set<std::pair<StageKind, StageKind>> edges;
  for (const Flow& f : model.flows) {
    if (!f.from.stage || !f.to.stage) continue;
    if (f.from.machine() != machine_path || f.to.machine() != machine_path) continue;
    edges.insert({*f.from.stage, *f.to.stage});
  }

  std::vector<std::vector<StageKind>> out;
  std::vector<StageKind> current;
  std::set<StageKind> visited;

  std::function<void(StageKind)> walk = [&](StageKind at) {
    for (auto [from, to] : edges) {
      if (from != at) continue;
      if (to == StageKind::Transfer) {
        current.push_back(to);
        out.push_back(current);
        current.pop_back();
        continue;
      }
      if (visited.count(to)) continue;
      visited.insert(to);
      current.push_back(to);
      walk(to);
      current.pop_back();
      visited.erase(to);
    }
  };

  for (StageKind source : {StageKind::Create, StageKind::Transfer}) {
    if (!ref->machine->stages.count(source)) continue;
    visited = {source};
    current = {source};
    walk(source);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tmkit
