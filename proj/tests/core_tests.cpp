#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace refinery;
using testsupport::canonical;

TEST_CASE("make_finite_type accepts ordered distinct values") {
  FiniteType answer = make_finite_type("Answer", {"yes", "no"});
  CHECK(answer.size() == 2);
  CHECK(answer.values == std::vector<std::string>{"yes", "no"});
  CHECK(answer.index_of("yes") == 0);
  CHECK(answer.index_of("no") == 1);
  CHECK_FALSE(answer.index_of("maybe"));

  FiniteType unit = make_finite_type("Unit", {"u"});
  CHECK(unit.size() == 1);
}

TEST_CASE("make_finite_type rejects duplicates and emptiness") {
  CHECK_THROWS_AS(make_finite_type("Answer", {"yes", "yes"}), Error);
  CHECK_THROWS_AS(make_finite_type("Empty", {}), Error);
}

TEST_CASE("type enumeration is deterministic across constructions") {
  for (int round = 0; round < 2; ++round) {
    FiniteType t = make_finite_type("BigData", {"d0", "d1", "d2", "d3"});
    for (ValueIndex i = 0; i < t.size(); ++i)
      CHECK(t.symbol(i) == "d" + std::to_string(i));
  }
}

TEST_CASE("slot display names carry the decorations") {
  FiniteType bit = make_finite_type("Bit", {"0", "1"});
  CHECK(state_slot("b", bit).display_name() == "b");
  CHECK(primed_slot("b", bit).display_name() == "b'");
  CHECK(input_slot("q", bit).display_name() == "q?");
  CHECK(output_slot("a", bit).display_name() == "a!");
}

namespace {

Operation build_raw_ignorance() {
  FiniteType big = make_finite_type("BigData", {"d0", "d1", "d2", "d3"});
  FiniteType answer = make_finite_type("Answer", {"yes", "no"});
  std::vector<Slot> slots;
  add_state_pair(slots, "b", big);
  slots.push_back(output_slot("a", answer));
  std::vector<Binding> rows;
  for (const auto& x : big.values)
    for (const auto& v : answer.values)
      rows.push_back(make_binding(slots, {{"b", x}, {"b'", x}, {"a!", v}}));
  return make_operation("RawIgnorance", slots, rows);
}

}  // namespace

TEST_CASE("make_operation builds the full ignorance relation") {
  Operation op = build_raw_ignorance();
  CHECK(op.transitions.size() == 8);  // 2 * |BigData|
  // the hand-built operation coincides with the parsed golden one
  CHECK(op == canonical().operations.at("RawIgnorance"));
}

TEST_CASE("make_operation accepts an empty relation") {
  FiniteType unit = make_finite_type("Unit", {"u"});
  std::vector<Slot> slots;
  add_state_pair(slots, "s", unit);
  Operation op = make_operation("Empty", slots, {});
  CHECK(op.transitions.empty());
}

TEST_CASE("make_operation rejects ill-typed and ill-shaped bindings") {
  FiniteType answer = make_finite_type("Answer", {"yes", "no"});
  FiniteType unit = make_finite_type("Unit", {"u"});
  std::vector<Slot> slots;
  add_state_pair(slots, "s", unit);
  slots.push_back(output_slot("a", answer));

  CHECK_THROWS_WITH_AS(
      make_binding(slots, {{"s", "u"}, {"s'", "u"}, {"a!", "maybe"}}),
      doctest::Contains("maybe"), Error);
  CHECK_THROWS_WITH_AS(make_binding(slots, {{"s", "u"}, {"s'", "u"}}),
                       doctest::Contains("misses"), Error);
  // out-of-range raw binding
  CHECK_THROWS_AS(make_operation("Bad", slots, {Binding{{0, 0, 7}}}), Error);
  // wrong arity
  CHECK_THROWS_AS(make_operation("Bad", slots, {Binding{{0, 0}}}), Error);
}

TEST_CASE("make_operation rejects unpaired state slots") {
  FiniteType unit = make_finite_type("Unit", {"u"});
  CHECK_THROWS_WITH_AS(
      make_operation("Bad", {state_slot("s", unit)}, {}),
      doctest::Contains("unpaired"), Error);
  CHECK_THROWS_WITH_AS(
      make_operation("Bad", {primed_slot("s", unit)}, {}),
      doctest::Contains("unpaired"), Error);
}

TEST_CASE("operations need a state slot") {
  FiniteType answer = make_finite_type("Answer", {"yes", "no"});
  CHECK_THROWS_WITH_AS(make_operation("Bad", {output_slot("a", answer)}, {}),
                       doctest::Contains("state"), Error);
}

namespace {

FunctionTable canonical_clever() {
  return make_function_table(
      "cleverprocessing", canonical().types.at("BigData"),
      canonical().types.at("StructuredData"),
      {{"d0", "d0"}, {"d1", "d0"}, {"d2", "d1"}, {"d3", "d1"}});
}

FunctionTable canonical_answer() {
  return make_function_table("answer", canonical().types.at("StructuredData"),
                             canonical().types.at("Answer"),
                             {{"d0", "yes"}, {"d1", "no"}});
}

}  // namespace

TEST_CASE("eval_function looks up total tables") {
  FunctionTable answer = canonical_answer();
  CHECK(eval_function(answer, "d0") == "yes");
  CHECK(eval_function(answer, "d1") == "no");

  FiniteType ans = canonical().types.at("Answer");
  FunctionTable id = make_function_table("id", ans, ans,
                                         {{"yes", "yes"}, {"no", "no"}});
  CHECK(eval_function(id, "yes") == "yes");

  CHECK_THROWS_WITH_AS(eval_function(answer, "d9"), doctest::Contains("domain"),
                       Error);
}

TEST_CASE("function tables must be total and single-valued") {
  FiniteType big = canonical().types.at("BigData");
  FiniteType ans = canonical().types.at("Answer");
  CHECK_THROWS_WITH_AS(
      make_function_table("partial", big, ans, {{"d0", "yes"}}),
      doctest::Contains("not total"), Error);
  CHECK_THROWS_WITH_AS(
      make_function_table("dup", ans, ans,
                          {{"yes", "yes"}, {"yes", "no"}, {"no", "no"}}),
      doctest::Contains("duplicate"), Error);
}

TEST_CASE("the canonical MachineLearn rows agree with the tables") {
  FunctionTable clever = canonical_clever();
  FunctionTable answer = canonical_answer();
  const Operation& ml = canonical().operations.at("MachineLearn");

  std::vector<Binding> expected;
  for (const auto& b : clever.domain.values) {
    std::string processed = eval_function(clever, b);
    expected.push_back(make_binding(
        ml.slots,
        {{"b", b}, {"b'", processed}, {"a!", eval_function(answer, processed)}}));
  }
  normalize_rows(expected);
  CHECK(ml.transitions == expected);
}

TEST_CASE("every canonical transition satisfies its slot typing") {
  for (const auto& [name, op] : canonical().operations)
    for (const auto& row : op.transitions) {
      REQUIRE(row.values.size() == op.slots.size());
      for (std::size_t i = 0; i < op.slots.size(); ++i)
        CHECK(row.values[i] < op.slots[i].type.size());
    }
}

TEST_CASE("transitions enumerate in sorted order deterministically") {
  const Operation& op = canonical().operations.at("RawIgnorance");
  CHECK(std::is_sorted(op.transitions.begin(), op.transitions.end()));
  Operation again = build_raw_ignorance();
  CHECK(again.transitions == op.transitions);
}

TEST_CASE("witness rendering uses display names and symbols") {
  const Operation& op = canonical().operations.at("AnsOp");
  REQUIRE(op.transitions.size() == 1);
  Witness w = witness_of(op.slots, op.transitions[0]);
  REQUIRE(w.fields.size() == 3);
  CHECK(w.fields[0] == std::pair<std::string, std::string>{"s", "u"});
  CHECK(w.fields[1] == std::pair<std::string, std::string>{"s'", "u"});
  CHECK(w.fields[2] == std::pair<std::string, std::string>{"a!", "yes"});
}

TEST_CASE("rational rendering picks the shortest exact decimal") {
  CHECK(rational_to_string(Rational(93, 100)) == "0.93");
  CHECK(rational_to_string(Rational(1, 2)) == "0.5");
  CHECK(rational_to_string(Rational(3, 8)) == "0.375");
  CHECK(rational_to_string(Rational(1)) == "1");
  CHECK(rational_to_string(Rational(0)) == "0");
  CHECK(rational_to_string(Rational(1, 3)) == "1/3");
  CHECK(rational_to_string(Rational(7, 12)) == "7/12");
  CHECK(fraction_string(Rational(101, 100)) == "101/100");
  CHECK(fraction_string(Rational(2)) == "2");
}

TEST_CASE("rational parsing is exact") {
  CHECK(parse_rational("0.93") == Rational(93, 100));
  CHECK(parse_rational("93/100") == Rational(93, 100));
  CHECK(parse_rational("1") == Rational(1));
  CHECK(parse_rational("007") == Rational(7));
  CHECK_FALSE(parse_rational("1/0"));
  CHECK_FALSE(parse_rational("0.9.3"));
  CHECK_FALSE(parse_rational(""));
  CHECK_FALSE(parse_rational("x"));
}
