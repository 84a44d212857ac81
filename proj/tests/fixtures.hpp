#pragma once

// Shared example models for the test suites: the dog, the TV controller, the
// student record, the Author class, and a seeded generator of random
// grammar-conformant models for the property tests.

#include <random>
#include <string>
#include <vector>

#include "tmkit/tm.hpp"

namespace fixtures {

using namespace tmkit;

inline Path p(const std::string& text) {
  auto parsed = parse_path(text);
  if (!parsed) throw std::runtime_error("bad fixture path: " + text);
  return *parsed;
}

inline Machine machine(std::string name, std::set<StageKind> stages,
                       std::vector<Machine> children = {},
                       std::optional<Path> of_owner = std::nullopt) {
  Machine m;
  m.name = std::move(name);
  m.stages = std::move(stages);
  m.children = std::move(children);
  m.of_owner = std::move(of_owner);
  return m;
}

// The dog: color assigned at creation, name input from outside, barking, and
// an owner whose spoken command triggers the dog to come to him.
inline Model dog_model() {
  Model m;
  m.machines.push_back(machine(
      "Dog", {},
      {machine("color", {StageKind::Create}),
       machine("name", {StageKind::Transfer, StageKind::Receive}),
       machine("bark", {StageKind::Create, StageKind::Release, StageKind::Transfer}),
       machine("command", {StageKind::Transfer, StageKind::Receive, StageKind::Process}),
       machine("come", {StageKind::Create, StageKind::Release, StageKind::Transfer})}));
  m.machines.push_back(machine(
      "Owner", {},
      {machine("command", {StageKind::Create, StageKind::Release, StageKind::Transfer}),
       machine("dog_arrival", {StageKind::Transfer, StageKind::Receive})}));
  auto flow = [&](const char* from, const char* to) { m.flows.push_back({p(from), p(to)}); };
  flow("Dog.name.transfer", "Dog.name.receive");
  flow("Dog.bark.create", "Dog.bark.release");
  flow("Dog.bark.release", "Dog.bark.transfer");
  flow("Owner.command.create", "Owner.command.release");
  flow("Owner.command.release", "Owner.command.transfer");
  flow("Owner.command.transfer", "Dog.command.transfer");
  flow("Dog.command.transfer", "Dog.command.receive");
  flow("Dog.command.receive", "Dog.command.process");
  flow("Dog.come.create", "Dog.come.release");
  flow("Dog.come.release", "Dog.come.transfer");
  flow("Dog.come.transfer", "Owner.dog_arrival.transfer");
  flow("Owner.dog_arrival.transfer", "Owner.dog_arrival.receive");
  m.triggers.push_back({p("Dog.command.process"), p("Dog.come.create")});
  return m;
}

// The TV controller as a grand machine: device, TV, hand, function, and
// signal interacting; only the hand's clicking correlate belongs to it, so
// the hand is a projected part of Human.
inline Model controller_model() {
  Model m;
  m.machines.push_back(machine(
      "Controller", {},
      {machine("device", {StageKind::Transfer, StageKind::Receive, StageKind::Process}),
       machine("tv", {StageKind::Transfer, StageKind::Receive, StageKind::Process}),
       machine("hand", {StageKind::Create, StageKind::Release, StageKind::Transfer}, {},
               p("Human")),
       machine("function", {StageKind::Create, StageKind::Process}),
       machine("signal", {StageKind::Create, StageKind::Release, StageKind::Transfer})}));
  m.machines.push_back(machine("Human", {}));
  auto flow = [&](const char* from, const char* to) { m.flows.push_back({p(from), p(to)}); };
  flow("Controller.hand.create", "Controller.hand.release");
  flow("Controller.hand.release", "Controller.hand.transfer");
  flow("Controller.hand.transfer", "Controller.device.transfer");
  flow("Controller.device.transfer", "Controller.device.receive");
  flow("Controller.device.receive", "Controller.device.process");
  flow("Controller.signal.create", "Controller.signal.release");
  flow("Controller.signal.release", "Controller.signal.transfer");
  flow("Controller.signal.transfer", "Controller.tv.transfer");
  flow("Controller.tv.transfer", "Controller.tv.receive");
  flow("Controller.tv.receive", "Controller.tv.process");
  flow("Controller.function.create", "Controller.function.process");
  m.triggers.push_back({p("Controller.device.process"), p("Controller.signal.create")});
  m.triggers.push_back({p("Controller.tv.process"), p("Controller.function.create")});
  return m;
}

// Student as a thing: its digital boundary includes the parts of Lecturer
// and Class that matter to it.
inline Model student_model() {
  Model m;
  m.machines.push_back(machine(
      "Student", {},
      {machine("id", {StageKind::Create}),
       machine("name", {StageKind::Create}),
       machine("lecturer_part", {StageKind::Transfer, StageKind::Receive}, {}, p("Lecturer")),
       machine("class_part", {StageKind::Transfer, StageKind::Receive}, {}, p("Class"))}));
  m.machines.push_back(
      machine("Lecturer", {}, {machine("name", {StageKind::Release, StageKind::Transfer})}));
  m.machines.push_back(
      machine("Class", {}, {machine("id", {StageKind::Release, StageKind::Transfer})}));
  auto flow = [&](const char* from, const char* to) { m.flows.push_back({p(from), p(to)}); };
  flow("Lecturer.name.release", "Lecturer.name.transfer");
  flow("Lecturer.name.transfer", "Student.lecturer_part.transfer");
  flow("Student.lecturer_part.transfer", "Student.lecturer_part.receive");
  flow("Class.id.release", "Class.id.transfer");
  flow("Class.id.transfer", "Student.class_part.transfer");
  flow("Student.class_part.transfer", "Student.class_part.receive");
  return m;
}

inline ClassSpec author_spec() {
  ClassSpec spec;
  spec.name = "Author";
  spec.attributes = {{"name", "String"}, {"email", "String"}, {"gender", "char"}};
  return spec;
}

// One machine with all five stages and every arrow the grammar allows.
inline Model full_grammar_machine() {
  Model m;
  m.machines.push_back(machine("M", {StageKind::Create, StageKind::Process, StageKind::Receive,
                                     StageKind::Release, StageKind::Transfer}));
  for (auto [from, to] : intra_flow_grammar)
    m.flows.push_back({p("M").with_stage(from), p("M").with_stage(to)});
  return m;
}

// ---------------------------------------------------------------------------
// Random grammar-conformant models

struct RandomModelOptions {
  bool with_events = true;
  bool with_programs = true;
};

inline Model random_model(std::mt19937& rng, const RandomModelOptions& opts = {}) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };

  Model m;
  int top_count = 1 + pick(3);
  int name_counter = 0;
  std::function<Machine(int)> build = [&](int depth) {
    Machine node;
    node.name = "m" + std::to_string(name_counter++);
    for (StageKind k : all_stage_kinds)
      if (pick(2)) node.stages.insert(k);
    if (pick(4) == 0) node.metadata["note"] = "n" + std::to_string(pick(10));
    if (depth < 2) {
      int kids = pick(3);
      for (int i = 0; i < kids; ++i) node.children.push_back(build(depth + 1));
    }
    if (pick(5) == 0) {
      Machine store;
      store.name = "store";
      store.stages = {StageKind::Transfer, StageKind::Receive, StageKind::Release};
      node.children.push_back(std::move(store));
    }
    return node;
  };
  for (int i = 0; i < top_count; ++i) m.machines.push_back(build(0));

  // owner annotations between distinct top-level machines
  if (top_count > 1 && !m.machines[0].children.empty() && pick(2))
    m.machines[0].children[0].of_owner = Path{{m.machines[1].name}, {}};

  // collect every machine path
  std::vector<std::pair<Path, const Machine*>> all;
  std::function<void(const Machine&, const Path&)> walk = [&](const Machine& node, const Path& at) {
    all.emplace_back(at, &node);
    for (const Machine& c : node.children) walk(c, at.child(c.name));
  };
  for (const Machine& top : m.machines) walk(top, Path{{top.name}, {}});

  std::set<std::pair<Path, Path>> used;
  int flow_attempts = 3 + pick(8);
  for (int i = 0; i < flow_attempts; ++i) {
    auto& [mp, node] = all[static_cast<std::size_t>(pick(static_cast<int>(all.size())))];
    if (pick(3) < 2) {  // intra-machine flow along the grammar
      std::vector<std::pair<StageKind, StageKind>> choices;
      for (auto [a, b] : intra_flow_grammar)
        if (node->stages.count(a) && node->stages.count(b)) choices.push_back({a, b});
      if (choices.empty()) continue;
      auto [a, b] = choices[static_cast<std::size_t>(pick(static_cast<int>(choices.size())))];
      Path from = mp.with_stage(a), to = mp.with_stage(b);
      if (used.insert({from, to}).second) m.flows.push_back({from, to});
    } else {  // transfer-to-transfer between distinct machines
      auto& [mp2, node2] = all[static_cast<std::size_t>(pick(static_cast<int>(all.size())))];
      if (mp == mp2) continue;
      if (!node->stages.count(StageKind::Transfer) || !node2->stages.count(StageKind::Transfer))
        continue;
      Path from = mp.with_stage(StageKind::Transfer), to = mp2.with_stage(StageKind::Transfer);
      if (used.insert({from, to}).second) m.flows.push_back({from, to});
    }
  }

  std::set<std::pair<Path, Path>> used_triggers;
  int trigger_attempts = pick(4);
  for (int i = 0; i < trigger_attempts; ++i) {
    auto& [mp, node] = all[static_cast<std::size_t>(pick(static_cast<int>(all.size())))];
    auto& [mp2, node2] = all[static_cast<std::size_t>(pick(static_cast<int>(all.size())))];
    if (node->stages.empty() || node2->stages.empty()) continue;
    auto stage_of = [&](const Machine& machine_node, const Path& at) {
      std::vector<StageKind> stages(machine_node.stages.begin(), machine_node.stages.end());
      return at.with_stage(stages[static_cast<std::size_t>(pick(static_cast<int>(stages.size())))]);
    };
    Path from = stage_of(*node, mp), to = stage_of(*node2, mp2);
    if (from == to) continue;
    if (used_triggers.insert({from, to}).second) m.triggers.push_back({from, to});
  }

  if (opts.with_events) {
    int event_count = pick(4);
    for (int i = 0; i < event_count; ++i) {
      auto& [mp, node] = all[static_cast<std::size_t>(pick(static_cast<int>(all.size())))];
      if (node->stages.empty()) continue;
      Event e;
      e.id = "E" + std::to_string(m.events.size() + 1);
      if (pick(2)) e.label = "event " + std::to_string(i);
      e.region.push_back(mp);
      for (StageKind k : node->stages)
        if (pick(2)) e.region.push_back(mp.with_stage(k));
      canonicalize_region(e.region);
      if (pick(3) == 0) e.time = "t" + std::to_string(pick(100));
      if (pick(4) == 0) e.meta = "intensity=" + std::to_string(pick(10));
      m.events.push_back(std::move(e));
    }
    for (std::size_t a = 0; a + 1 < m.events.size(); ++a)
      for (std::size_t b = a + 1; b < m.events.size(); ++b)
        if (pick(3) == 0) m.chronology.insert({m.events[a].id, m.events[b].id});
  }

  if (opts.with_programs && !m.events.empty()) {
    Program prog;
    prog.name = "P1";
    int stmt_count = 1 + pick(3);
    for (int i = 0; i < stmt_count; ++i) {
      const std::string& id = m.events[static_cast<std::size_t>(
          pick(static_cast<int>(m.events.size())))].id;
      if (pick(3) == 0)
        prog.body.push_back(Stmt::repeat(pick(3), {Stmt::fire(id)}));
      else
        prog.body.push_back(Stmt::fire(id));
    }
    m.programs.push_back(std::move(prog));
  }
  return m;
}

}  // namespace fixtures
