#pragma once

// The bridge between class specifications and models.
//
// from_class emits the attribute pattern: a grand machine whose Create stage
// is the constructor, and per attribute a sub-machine with an input chain
// (transfer, receive, process for the type check), a type-descriptor machine
// holding the declared type, and a store machine. Setting a value runs the
// input chain, fetches the type description for comparison, and on success
// the process stage triggers storage; getting releases the stored value back
// out through the attribute's transfer. The constructor triggers each
// attribute's create, which initializes the store to null.
//
// to_class inverts it strictly: it extracts the candidate class and accepts
// only when regeneration reproduces the model exactly. No guessing.
//
// from_hierarchy / to_hierarchy model inheritance as behavior flow: a method
// machine (create, release, transfer) in its owning class, and per subclass
// an inherited-behavior machine (transfer, receive) fed by the previous link
// in the chain.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tmkit/class_spec.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Normalization

// Checks the spec invariants, fills in the constructor and any missing
// setters/getters, and orders methods canonically: constructor first, then
// setter/getter per attribute in declaration order.
inline ClassSpec normalize_class(const ClassSpec& spec) {
  if (spec.name.empty()) throw Error("INVALID_SPEC", "class needs a name");
  std::set<std::string> attr_names;
  for (const Attribute& a : spec.attributes) {
    if (!attr_names.insert(a.name).second)
      throw Error("INVALID_SPEC", "duplicate attribute: " + a.name);
    if (!known_attribute_type(a.type))
      throw Error("INVALID_SPEC",
                  "unknown attribute type '" + a.type + "' for " + a.name +
                      " (expected String, char, or int)");
  }

  ClassSpec out;
  out.name = spec.name;
  out.attributes = spec.attributes;
  out.superclass = spec.superclass;

  const Method* ctor = nullptr;
  std::map<std::string, const Method*> setters;
  std::map<std::string, const Method*> getters;
  for (const Method& m : spec.methods) {
    switch (m.kind) {
      case MethodKind::Constructor:
        if (ctor) throw Error("INVALID_SPEC", "more than one constructor");
        if (m.name != spec.name)
          throw Error("INVALID_SPEC", "constructor must bear the class name");
        ctor = &m;
        break;
      case MethodKind::Setter:
      case MethodKind::Getter: {
        if (!spec.find_attribute(m.attr))
          throw Error("INVALID_SPEC",
                      "method " + m.name + " references unknown attribute '" + m.attr + "'");
        auto& slot = (m.kind == MethodKind::Setter ? setters : getters)[m.attr];
        if (slot) throw Error("INVALID_SPEC", "duplicate accessor for attribute " + m.attr);
        slot = &m;
        break;
      }
      case MethodKind::Plain:
        throw Error("INVALID_SPEC",
                    "plain method '" + m.name + "' does not fit the attribute pattern");
    }
  }

  out.methods.push_back(Method{spec.name, MethodKind::Constructor, ""});
  for (const Attribute& a : spec.attributes) {
    const Method* s = setters.count(a.name) ? setters[a.name] : nullptr;
    const Method* g = getters.count(a.name) ? getters[a.name] : nullptr;
    out.methods.push_back(Method{s ? s->name : setter_name(a.name), MethodKind::Setter, a.name});
    out.methods.push_back(Method{g ? g->name : getter_name(a.name), MethodKind::Getter, a.name});
  }
  return out;
}

// ---------------------------------------------------------------------------
// from_class

inline Model from_class(const ClassSpec& raw_spec) {
  ClassSpec spec = normalize_class(raw_spec);
  if (spec.superclass)
    throw Error("INVALID_SPEC", "the attribute pattern models a single class; use from_hierarchy");

  Model model;
  Machine grand;
  grand.name = spec.name;
  grand.stages = {StageKind::Create};
  Path grand_path{{spec.name}, {}};

  std::vector<Flow> flows;
  std::vector<Trigger> triggers;
  for (const Attribute& attr : spec.attributes) {
    Machine a;
    a.name = attr.name;
    a.stages = {StageKind::Create, StageKind::Process, StageKind::Receive,
                StageKind::Release, StageKind::Transfer};

    Machine typedesc;
    typedesc.name = "typedesc";
    typedesc.stages = {StageKind::Release, StageKind::Transfer};
    typedesc.metadata["type"] = attr.type;
    a.children.push_back(std::move(typedesc));

    Machine store;
    store.name = "store";
    store.stages = {StageKind::Transfer, StageKind::Receive, StageKind::Release};
    a.children.push_back(std::move(store));

    grand.children.push_back(std::move(a));

    Path ap = grand_path.child(attr.name);
    Path td = ap.child("typedesc");
    Path st = ap.child("store");

    // null initialization out of the attribute's create
    flows.push_back({ap.with_stage(StageKind::Create), ap.with_stage(StageKind::Release)});
    flows.push_back({ap.with_stage(StageKind::Release), ap.with_stage(StageKind::Transfer)});
    // input chain for set values
    flows.push_back({ap.with_stage(StageKind::Transfer), ap.with_stage(StageKind::Receive)});
    flows.push_back({ap.with_stage(StageKind::Receive), ap.with_stage(StageKind::Process)});
    // the type description is fetched for the comparison
    flows.push_back({td.with_stage(StageKind::Release), td.with_stage(StageKind::Transfer)});
    flows.push_back({td.with_stage(StageKind::Transfer), ap.with_stage(StageKind::Transfer)});
    // set path into the store
    flows.push_back({ap.with_stage(StageKind::Transfer), st.with_stage(StageKind::Transfer)});
    flows.push_back({st.with_stage(StageKind::Transfer), st.with_stage(StageKind::Receive)});
    // get path back out
    flows.push_back({st.with_stage(StageKind::Release), st.with_stage(StageKind::Transfer)});
    flows.push_back({st.with_stage(StageKind::Transfer), ap.with_stage(StageKind::Transfer)});

    // constructor initializes the attribute; a type-checked value is stored
    triggers.push_back({grand_path.with_stage(StageKind::Create), ap.with_stage(StageKind::Create)});
    triggers.push_back({ap.with_stage(StageKind::Process), st.with_stage(StageKind::Receive)});
  }

  model.machines.push_back(std::move(grand));
  model.flows = std::move(flows);
  model.triggers = std::move(triggers);

  // Events E1..E(2n+1): the constructor, then a set/get pair per attribute.
  Event ctor_event;
  ctor_event.id = "E1";
  ctor_event.label = "create constructor";
  ctor_event.kind = EventKind::Ctor;
  ctor_event.region.push_back(grand_path.with_stage(StageKind::Create));
  for (const Attribute& attr : spec.attributes)
    ctor_event.region.push_back(grand_path.child(attr.name).with_stage(StageKind::Create));
  canonicalize_region(ctor_event.region);
  model.events.push_back(std::move(ctor_event));

  for (std::size_t i = 0; i < spec.attributes.size(); ++i) {
    const Attribute& attr = spec.attributes[i];
    Path ap = grand_path.child(attr.name);
    Path td = ap.child("typedesc");
    Path st = ap.child("store");

    Event set_event;
    set_event.id = "E" + std::to_string(2 * i + 2);
    set_event.label = spec.methods[1 + 2 * i].name;
    set_event.kind = EventKind::Set;
    set_event.attr = attr.name;
    set_event.region = {ap.with_stage(StageKind::Transfer), ap.with_stage(StageKind::Receive),
                        ap.with_stage(StageKind::Process), td.with_stage(StageKind::Release),
                        td.with_stage(StageKind::Transfer), st.with_stage(StageKind::Transfer),
                        st.with_stage(StageKind::Receive)};
    canonicalize_region(set_event.region);
    model.events.push_back(std::move(set_event));

    Event get_event;
    get_event.id = "E" + std::to_string(2 * i + 3);
    get_event.label = spec.methods[2 + 2 * i].name;
    get_event.kind = EventKind::Get;
    get_event.attr = attr.name;
    get_event.region = {st.with_stage(StageKind::Release), st.with_stage(StageKind::Transfer),
                        ap.with_stage(StageKind::Transfer)};
    canonicalize_region(get_event.region);
    model.events.push_back(std::move(get_event));
  }

  // The constructor precedes everything; each setter precedes its getter.
  for (std::size_t i = 1; i < model.events.size(); ++i)
    model.chronology.insert({"E1", model.events[i].id});
  for (std::size_t i = 0; i < spec.attributes.size(); ++i)
    model.chronology.insert({"E" + std::to_string(2 * i + 2), "E" + std::to_string(2 * i + 3)});

  return model;
}

// ---------------------------------------------------------------------------
// to_class

namespace detail {

inline bool same_static_and_event_structure(const Model& a, const Model& b) {
  return a.machines == b.machines && a.flows == b.flows && a.triggers == b.triggers &&
         a.events == b.events && a.chronology == b.chronology;
}

}  // namespace detail

// Recovers the class a model was generated from. Attribute types come from
// the type-descriptor contents, methods from the event tags. Strict: if
// regenerating the candidate does not reproduce the model exactly (programs
// aside), the model is not class shaped.
inline ClassSpec to_class(const Model& model) {
  const char* reject = "model does not match the generated class pattern";
  if (model.machines.size() != 1) throw Error("NOT_CLASS_SHAPED", reject);
  const Machine& grand = model.machines.front();

  ClassSpec spec;
  spec.name = grand.name;
  for (const Machine& a : grand.children) {
    const Machine* typedesc = a.find_child("typedesc");
    if (!typedesc || !typedesc->metadata.count("type"))
      throw Error("NOT_CLASS_SHAPED", reject);
    spec.attributes.push_back(Attribute{a.name, typedesc->metadata.at("type")});
    if (!known_attribute_type(spec.attributes.back().type))
      throw Error("NOT_CLASS_SHAPED", reject);
  }

  // Methods are the templates of the generated events.
  if (model.events.size() != 1 + 2 * spec.attributes.size())
    throw Error("NOT_CLASS_SHAPED", reject);
  spec.methods.push_back(Method{spec.name, MethodKind::Constructor, ""});
  for (std::size_t i = 0; i < spec.attributes.size(); ++i) {
    const Event& set_event = model.events[1 + 2 * i];
    const Event& get_event = model.events[2 + 2 * i];
    if (set_event.kind != EventKind::Set || get_event.kind != EventKind::Get)
      throw Error("NOT_CLASS_SHAPED", reject);
    spec.methods.push_back(Method{set_event.label, MethodKind::Setter, set_event.attr});
    spec.methods.push_back(Method{get_event.label, MethodKind::Getter, get_event.attr});
  }

  Model regenerated;
  try {
    regenerated = from_class(spec);
  } catch (const Error&) {
    throw Error("NOT_CLASS_SHAPED", reject);
  }
  if (!detail::same_static_and_event_structure(regenerated, model))
    throw Error("NOT_CLASS_SHAPED", reject);
  return spec;
}

// ---------------------------------------------------------------------------
// from_hierarchy

namespace detail {

inline constexpr const char* inherited_suffix = "_inherited";

inline std::string inherited_name(const std::string& method) {
  return method + inherited_suffix;
}

// Methods visible on a class: the ancestors' methods from the root down,
// then its own, in declaration order.
inline std::vector<std::string> visible_methods(
    const std::map<std::string, const ClassSpec*>& by_name, const std::string& name) {
  std::vector<std::string> chain;
  std::string at = name;
  std::set<std::string> seen;
  while (true) {
    if (!seen.insert(at).second)
      throw Error("INHERITANCE_CYCLE", "inheritance cycle through " + at);
    chain.push_back(at);
    const ClassSpec* spec = by_name.at(at);
    if (!spec->superclass) break;
    auto it = by_name.find(*spec->superclass);
    if (it == by_name.end())
      throw Error("UNKNOWN_SUPERCLASS", "unknown superclass: " + *spec->superclass);
    at = it->first;
  }
  std::vector<std::string> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const Method& m : by_name.at(*it)->methods) out.push_back(m.name);
  return out;
}

}  // namespace detail

// Builds the inheritance-as-flow model: one machine per class, one behavior
// machine per method, and per subclass an inherited-behavior machine fed by
// the previous link in the chain.
inline Model from_hierarchy(const std::vector<ClassSpec>& specs) {
  std::map<std::string, const ClassSpec*> by_name;
  for (const ClassSpec& s : specs) {
    if (s.name.empty()) throw Error("INVALID_SPEC", "class needs a name");
    if (!by_name.emplace(s.name, &s).second)
      throw Error("INVALID_SPEC", "duplicate class name: " + s.name);
    if (!s.attributes.empty())
      throw Error("INVALID_SPEC",
                  "hierarchy view models behavior only; class " + s.name + " has attributes");
    std::set<std::string> names;
    for (const Method& m : s.methods) {
      if (m.kind != MethodKind::Plain)
        throw Error("INVALID_SPEC", "hierarchy methods must be plain: " + m.name);
      if (m.name.size() > 10 &&
          m.name.compare(m.name.size() - 10, 10, detail::inherited_suffix) == 0)
        throw Error("INVALID_SPEC", "method name suffix '_inherited' is reserved: " + m.name);
      if (!names.insert(m.name).second)
        throw Error("INVALID_SPEC", "duplicate method: " + m.name);
    }
  }
  for (const ClassSpec& s : specs)
    if (s.superclass && !by_name.count(*s.superclass))
      throw Error("UNKNOWN_SUPERCLASS", "unknown superclass: " + *s.superclass);

  Model model;
  for (const ClassSpec& s : specs) {
    Machine k;
    k.name = s.name;
    Path kp{{s.name}, {}};
    for (const Method& m : s.methods) {
      Machine behavior;
      behavior.name = m.name;
      behavior.stages = {StageKind::Create, StageKind::Release, StageKind::Transfer};
      k.children.push_back(std::move(behavior));
      Path bp = kp.child(m.name);
      model.flows.push_back({bp.with_stage(StageKind::Create), bp.with_stage(StageKind::Release)});
      model.flows.push_back({bp.with_stage(StageKind::Release), bp.with_stage(StageKind::Transfer)});
    }
    if (s.superclass) {
      const std::string& super = *s.superclass;
      for (const std::string& method : detail::visible_methods(by_name, super)) {
        std::string behavior_name = detail::inherited_name(method);
        Machine inherited;
        inherited.name = behavior_name;
        inherited.stages = {StageKind::Transfer, StageKind::Receive};
        k.children.push_back(std::move(inherited));
        Path ip = kp.child(behavior_name);

        bool owned_by_super = false;
        for (const Method& m : by_name.at(super)->methods)
          if (m.name == method) owned_by_super = true;
        Path source = Path{{super}, {}}.child(owned_by_super ? method
                                                             : detail::inherited_name(method));
        model.flows.push_back(
            {source.with_stage(StageKind::Transfer), ip.with_stage(StageKind::Transfer)});
        model.flows.push_back(
            {ip.with_stage(StageKind::Transfer), ip.with_stage(StageKind::Receive)});
      }
    }
    model.machines.push_back(std::move(k));
  }
  return model;
}

// ---------------------------------------------------------------------------
// to_hierarchy

// Reads the class forest back: extends edges come from the inherited-behavior
// flows, method ownership from where the behavior machine has a Create stage.
// Strict like to_class.
inline std::vector<ClassSpec> to_hierarchy(const Model& model) {
  const char* reject = "model does not match the generated hierarchy pattern";
  static const std::set<StageKind> behavior_stages = {StageKind::Create, StageKind::Release,
                                                      StageKind::Transfer};
  static const std::set<StageKind> inherited_stages = {StageKind::Transfer, StageKind::Receive};

  std::vector<ClassSpec> specs;
  std::map<std::string, std::size_t> index_of;
  for (const Machine& k : model.machines) {
    if (!k.stages.empty()) throw Error("NOT_HIERARCHY_SHAPED", reject);
    ClassSpec spec;
    spec.name = k.name;
    for (const Machine& c : k.children) {
      if (c.stages == behavior_stages) {
        spec.methods.push_back(Method{c.name, MethodKind::Plain, ""});
      } else if (c.stages != inherited_stages ||
                 c.name.size() <= 10 ||
                 c.name.compare(c.name.size() - 10, 10, detail::inherited_suffix) != 0) {
        throw Error("NOT_HIERARCHY_SHAPED", reject);
      }
    }
    index_of[spec.name] = specs.size();
    specs.push_back(std::move(spec));
  }

  for (const Flow& f : model.flows) {
    if (f.from.machine() == f.to.machine()) continue;  // behavior-internal chains
    if (f.to.segments.size() != 2 || f.from.segments.size() != 2)
      throw Error("NOT_HIERARCHY_SHAPED", reject);
    const std::string& target_class = f.to.segments.front();
    const std::string& source_class = f.from.segments.front();
    auto it = index_of.find(target_class);
    if (it == index_of.end() || !index_of.count(source_class))
      throw Error("NOT_HIERARCHY_SHAPED", reject);
    ClassSpec& spec = specs[it->second];
    if (spec.superclass && *spec.superclass != source_class)
      throw Error("NOT_HIERARCHY_SHAPED", reject);
    spec.superclass = source_class;
  }

  // The extends relation must be a forest.
  for (const ClassSpec& s : specs) {
    std::set<std::string> seen{s.name};
    const ClassSpec* at = &s;
    while (at->superclass) {
      if (!seen.insert(*at->superclass).second)
        throw Error("NOT_HIERARCHY_SHAPED", reject);
      at = &specs[index_of.at(*at->superclass)];
    }
  }

  Model regenerated;
  try {
    regenerated = from_hierarchy(specs);
  } catch (const Error&) {
    throw Error("NOT_HIERARCHY_SHAPED", reject);
  }
  if (regenerated.machines != model.machines || regenerated.flows != model.flows ||
      !model.triggers.empty())
    throw Error("NOT_HIERARCHY_SHAPED", reject);
  return specs;
}

}  // namespace tmkit
