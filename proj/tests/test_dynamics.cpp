#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "fixtures.hpp"
#include "tmkit/tm.hpp"

using namespace tmkit;
using fixtures::p;

namespace {

// The paper-style program: construct, set the name, and when it is "John"
// read it back ten times.
Program paper_program() {
  Program prog;
  prog.name = "P1";
  prog.body.push_back(Stmt::fire("E1"));
  prog.body.push_back(Stmt::fire("E2"));
  Cond cond;
  cond.lhs = p("Author.name");
  cond.rhs = Literal{false, true, "John"};
  std::vector<Stmt> then_block{Stmt::repeat(10, {Stmt::fire("E3")})};
  prog.body.push_back(Stmt::branch(cond, then_block));
  return prog;
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("define_event accepts the constructor region") {
  Model author = from_class(fixtures::author_spec());
  Event e;
  e.id = "X1";
  e.label = "construct";
  e.region = {p("Author.create"), p("Author.name.create")};
  Model out = define_event(author, e);
  CHECK(out.events.size() == author.events.size() + 1);
}

TEST_CASE("define_event rejects bad regions") {
  Model author = from_class(fixtures::author_spec());
  Event empty;
  empty.id = "X1";
  CHECK(error_code([&] { define_event(author, empty); }) == "EMPTY_REGION");

  Event disconnected;
  disconnected.id = "X2";
  disconnected.region = {p("Author.name.create"), p("Author.email.store.release")};
  CHECK(error_code([&] { define_event(author, disconnected); }) == "DISCONNECTED_REGION");

  Event dangling;
  dangling.id = "X3";
  dangling.region = {p("Author.middlename.create")};
  CHECK(error_code([&] { define_event(author, dangling); }) == "UNKNOWN_PATH");

  Event duplicate;
  duplicate.id = "E1";
  duplicate.region = {p("Author.create")};
  CHECK(error_code([&] { define_event(author, duplicate); }) == "DUPLICATE_EVENT");
}

TEST_CASE("regions connect through flows, triggers, and shared machines") {
  Model dog = fixtures::dog_model();
  Event across_trigger;
  across_trigger.id = "X1";
  across_trigger.region = {p("Dog.command.process"), p("Dog.come.create")};
  CHECK(define_event(dog, across_trigger).events.size() == 1);

  Event across_flow;
  across_flow.id = "X2";
  across_flow.region = {p("Owner.command.transfer"), p("Dog.command.transfer")};
  CHECK(define_event(dog, across_flow).events.size() == 1);

  Event same_machine;
  same_machine.id = "X3";
  same_machine.region = {p("Dog.name"), p("Dog.name.transfer"), p("Dog.name.receive")};
  CHECK(define_event(dog, same_machine).events.size() == 1);
}

TEST_CASE("validate_chronology flags cycles and unknown events") {
  Model author = from_class(fixtures::author_spec());
  CHECK(validate_chronology(author).empty());

  Model cyclic = author;
  cyclic.chronology.insert({"E2", "E1"});  // E1 -> E2 already generated
  std::vector<Diagnostic> diags = validate_chronology(cyclic);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "CHRONO_CYCLE");

  Model unknown = author;
  unknown.chronology.insert({"E1", "E9"});
  diags = validate_chronology(unknown);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "UNKNOWN_EVENT");
}

TEST_CASE("expand flattens control flow against the evolving state") {
  Model author = from_class(fixtures::author_spec());
  Program prog = paper_program();

  std::vector<std::string> with_john = expand(author, prog, {{"E2", StoreValue{"John"}}});
  REQUIRE(with_john.size() == 12);
  CHECK(with_john[0] == "E1");
  CHECK(with_john[1] == "E2");
  CHECK(std::count(with_john.begin() + 2, with_john.end(), std::string("E3")) == 10);

  std::vector<std::string> with_jane = expand(author, prog, {{"E2", StoreValue{"Jane"}}});
  CHECK(with_jane == std::vector<std::string>{"E1", "E2"});

  Program empty;
  empty.name = "P0";
  CHECK(expand(author, empty, {}).empty());
}

TEST_CASE("check_actualization uses first occurrences") {
  Model author = from_class(fixtures::author_spec());
  const Chronology& chrono = author.chronology;
  CHECK_FALSE(check_actualization({"E1", "E2", "E3"}, chrono).has_value());
  CHECK_FALSE(check_actualization({}, chrono).has_value());
  CHECK_FALSE(check_actualization({"E1", "E2", "E2", "E3", "E2"}, chrono).has_value());

  auto violation = check_actualization({"E2", "E1"}, chrono);
  REQUIRE(violation.has_value());
  CHECK(violation->required_first == "E1");
  CHECK(violation->preempted_by == "E2");
  CHECK(violation->message() == "E1 before E2 required");

  // precedence acts through the transitive closure
  Chronology chain{{"A", "B"}, {"B", "C"}};
  auto indirect = check_actualization({"C", "A"}, chain);
  REQUIRE(indirect.has_value());
  CHECK(indirect->required_first == "A");
  CHECK(indirect->preempted_by == "C");
}

TEST_CASE("prefixes of accepted sequences stay accepted") {
  Model author = from_class(fixtures::author_spec());
  std::vector<std::string> sequence = {"E1", "E2", "E3", "E4", "E5", "E6", "E7"};
  REQUIRE_FALSE(check_actualization(sequence, author.chronology).has_value());
  for (std::size_t len = 0; len <= sequence.size(); ++len) {
    std::vector<std::string> prefix(sequence.begin(), sequence.begin() + len);
    CHECK_FALSE(check_actualization(prefix, author.chronology).has_value());
  }
}

TEST_CASE("simulate runs the paper program") {
  Model author = from_class(fixtures::author_spec());
  Program prog = paper_program();

  SimResult result = simulate(author, prog, {{"E2", StoreValue{"John"}}});
  REQUIRE(result.trace.size() == 12);
  CHECK(result.final_state.at(p("Author.name.store")) == StoreValue{"John"});
  CHECK(result.final_state.at(p("Author.email.store")) == StoreValue{});
  CHECK(result.final_state.at(p("Author.gender.store")) == StoreValue{});

  CHECK(result.trace[0].event_id == "E1");
  CHECK(result.trace[0].applied);
  CHECK_FALSE(result.trace[0].delta.has_value());
  REQUIRE(result.trace[1].delta.has_value());
  CHECK(result.trace[1].delta->store == p("Author.name.store"));
  CHECK(result.trace[1].delta->old_value == StoreValue{});
  CHECK(result.trace[1].delta->new_value == StoreValue{"John"});
  for (int i = 2; i < 12; ++i) {
    CHECK(result.trace[static_cast<std::size_t>(i)].event_id == "E3");
    REQUIRE(result.trace[static_cast<std::size_t>(i)].output.has_value());
    CHECK(*result.trace[static_cast<std::size_t>(i)].output == StoreValue{"John"});
  }

  SimResult jane = simulate(author, prog, {{"E2", StoreValue{"Jane"}}});
  CHECK(jane.trace.size() == 2);

  // determinism
  CHECK(simulate(author, prog, {{"E2", StoreValue{"John"}}}) == result);
}

TEST_CASE("the trace text is the frozen tab-separated form") {
  Model author = from_class(fixtures::author_spec());
  SimResult result = simulate(author, paper_program(), {{"E2", StoreValue{"John"}}});
  std::string text = trace_to_text(result.trace);
  std::string expected =
      "0\tE1\tapplied\t-\n"
      "1\tE2\tapplied\tAuthor.name.store:null->John\n";
  for (int i = 2; i < 12; ++i) expected += std::to_string(i) + "\tE3\tapplied\tJohn\n";
  CHECK(text == expected);
}

TEST_CASE("set values are type checked against the declared type") {
  Model author = from_class(fixtures::author_spec());
  Program prog;
  prog.name = "P2";
  prog.body = {Stmt::fire("E1"), Stmt::fire("E6")};  // E6 = setGender, char

  SimResult rejected = simulate(author, prog, {{"E6", StoreValue{"hello"}}});
  REQUIRE(rejected.trace.size() == 2);
  CHECK_FALSE(rejected.trace[1].applied);
  CHECK_FALSE(rejected.trace[1].delta.has_value());
  CHECK(rejected.final_state.at(p("Author.gender.store")) == StoreValue{});

  SimResult applied = simulate(author, prog, {{"E6", StoreValue{"f"}}});
  CHECK(applied.trace[1].applied);
  CHECK(applied.final_state.at(p("Author.gender.store")) == StoreValue{"f"});
}

TEST_CASE("value conformance follows the closed type table") {
  CHECK(value_conforms(StoreValue{}, "char"));
  CHECK(value_conforms(StoreValue{}, "int"));
  CHECK(value_conforms(StoreValue{"anything at all"}, "String"));
  CHECK(value_conforms(StoreValue{"x"}, "char"));
  CHECK_FALSE(value_conforms(StoreValue{"xy"}, "char"));
  CHECK(value_conforms(StoreValue{"42"}, "int"));
  CHECK(value_conforms(StoreValue{"-42"}, "int"));
  CHECK(value_conforms(StoreValue{"+7"}, "int"));
  CHECK_FALSE(value_conforms(StoreValue{"4.2"}, "int"));
  CHECK_FALSE(value_conforms(StoreValue{""}, "int"));
  CHECK_FALSE(value_conforms(StoreValue{"-"}, "int"));
}

TEST_CASE("simulate reports missing bindings with the partial trace") {
  Model author = from_class(fixtures::author_spec());
  Program prog;
  prog.name = "P3";
  prog.body = {Stmt::fire("E1"), Stmt::fire("E2")};
  try {
    simulate(author, prog, {});
    FAIL("expected a simulation error");
  } catch (const SimulationError& e) {
    CHECK(e.code() == "MISSING_BINDING");
    CHECK(e.partial_trace().size() == 1);
  }
}

TEST_CASE("simulate aborts on the first chronology violation") {
  Model author = from_class(fixtures::author_spec());
  Program prog;
  prog.name = "P4";
  prog.body = {Stmt::fire("E2"), Stmt::fire("E1")};
  try {
    simulate(author, prog, {{"E2", StoreValue{"John"}}});
    FAIL("expected a simulation error");
  } catch (const SimulationError& e) {
    CHECK(e.code() == "CHRONOLOGY_VIOLATION");
    REQUIRE(e.partial_trace().size() == 1);
    CHECK(e.partial_trace()[0].event_id == "E2");
  }
}

TEST_CASE("the empty program leaves every store null") {
  Model author = from_class(fixtures::author_spec());
  Program empty;
  empty.name = "P0";
  SimResult result = simulate(author, empty, {});
  CHECK(result.trace.empty());
  for (const auto& [path, value] : result.final_state) CHECK(value == StoreValue{});
  CHECK(result.final_state.size() == 3);
}

TEST_CASE("trace projection equals expansion") {
  Model author = from_class(fixtures::author_spec());
  for (const std::string& name : {"John", "Jane"}) {
    Bindings bindings{{"E2", StoreValue{name}}};
    SimResult result = simulate(author, paper_program(), bindings);
    std::vector<std::string> projected;
    for (const Firing& f : result.trace) projected.push_back(f.event_id);
    CHECK(projected == expand(author, paper_program(), bindings));
  }
}

TEST_CASE("a constructor firing resets every store") {
  Model author = from_class(fixtures::author_spec());
  Program prog;
  prog.name = "P5";
  prog.body = {Stmt::fire("E1"), Stmt::fire("E2"), Stmt::fire("E1"), Stmt::fire("E3")};
  SimResult result = simulate(author, prog, {{"E2", StoreValue{"John"}}});
  REQUIRE(result.trace.size() == 4);
  REQUIRE(result.trace[3].output.has_value());
  CHECK(*result.trace[3].output == StoreValue{});  // wiped by the second E1
}
