#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace refinery;
using testsupport::canonical;

namespace {

const Operation& op(const char* name) { return canonical().operations.at(name); }
const ProbOperation& pop(const char* name) {
  return canonical().prob_operations.at(name);
}

// one-coordinate tuples for standalone distribution tests
Binding tup(ValueIndex v) { return Binding{{v}}; }

constexpr ValueIndex kYes = 0;
constexpr ValueIndex kNo = 1;

}  // namespace

TEST_CASE("mix forms the convex combination") {
  Distribution d = mix(point_distribution(tup(kYes)), Rational(93, 100),
                       point_distribution(tup(kNo)));
  REQUIRE(d.weights.size() == 2);
  CHECK(d.weights[0] == std::pair<Binding, Rational>{tup(kYes), Rational(93, 100)});
  CHECK(d.weights[1] == std::pair<Binding, Rational>{tup(kNo), Rational(7, 100)});
}

TEST_CASE("degenerate mixes collapse") {
  Distribution yes = point_distribution(tup(kYes));
  Distribution no = point_distribution(tup(kNo));
  CHECK(mix(yes, Rational(1), no) == yes);
  CHECK(mix(yes, Rational(0), no) == no);
  CHECK(mix(yes, Rational(1, 2), yes) == yes);
}

TEST_CASE("mix rejects weights outside [0,1]") {
  Distribution yes = point_distribution(tup(kYes));
  CHECK_THROWS_AS(mix(yes, Rational(11, 10), yes), Error);
  CHECK_THROWS_AS(mix(yes, Rational(-1, 10), yes), Error);
}

TEST_CASE("distributions insist on exact unit mass") {
  CHECK_THROWS_WITH_AS(
      make_distribution({{tup(kYes), Rational(93, 100)}, {tup(kNo), Rational(8, 100)}}),
      doctest::Contains("sums to 101/100"), Error);
  CHECK_THROWS_AS(make_distribution({{tup(kYes), Rational(-1, 2)},
                                     {tup(kNo), Rational(3, 2)}}),
                  Error);
  // duplicates merge before validation
  Distribution merged = make_distribution(
      {{tup(kYes), Rational(1, 2)}, {tup(kYes), Rational(1, 2)}});
  CHECK(merged == point_distribution(tup(kYes)));
}

TEST_CASE("demonic choice is a deduplicating union") {
  Distribution yes = point_distribution(tup(kYes));
  Distribution no = point_distribution(tup(kNo));
  auto joined = demonic_join({{yes}, {no}});
  REQUIRE(joined.size() == 2);

  CHECK(demonic_join({joined, joined}) == joined);
  CHECK_THROWS_WITH_AS(demonic_join({}), doctest::Contains("no alternatives"),
                       Error);
}

TEST_CASE("mixing over a demonic set expands distributively") {
  Distribution yes = point_distribution(tup(kYes));
  Distribution no = point_distribution(tup(kNo));
  std::vector<Distribution> hedge = demonic_join({{yes}, {no}});
  std::vector<std::vector<Distribution>> mixed_sets;
  for (const auto& d : hedge)
    mixed_sets.push_back({mix(yes, Rational(93, 100), d)});
  auto expanded = demonic_join(mixed_sets);
  REQUIRE(expanded.size() == 2);
  CHECK(std::count(expanded.begin(), expanded.end(), yes) == 1);
  CHECK(std::count(expanded.begin(), expanded.end(),
                   mix(yes, Rational(93, 100), no)) == 1);
}

TEST_CASE("support_lift of the confident learner is raw ignorance") {
  Operation lifted = support_lift(pop("ML"));
  CHECK(lifted.slots == op("RawIgnorance").slots);
  CHECK(lifted.transitions == op("RawIgnorance").transitions);
}

TEST_CASE("support_lift ignores the weights") {
  CHECK(support_lift(pop("MLHedged")).transitions ==
        support_lift(pop("ML")).transitions);
}

TEST_CASE("support_lift of point distributions is deterministic") {
  ProbOperation pointwise = testsupport::point_embedding(op("MachineLearn"));
  Operation lifted = support_lift(pointwise);
  CHECK(lifted.transitions == op("MachineLearn").transitions);
}

TEST_CASE("point embedding then lifting is the identity on relations") {
  std::mt19937 rng(31);
  for (int i = 0; i < 10; ++i) {
    Operation o = testsupport::random_operation(rng, "P" + std::to_string(i));
    if (o.transitions.empty()) continue;
    Operation back = support_lift(testsupport::point_embedding(o));
    CHECK(back.slots == o.slots);
    CHECK(back.transitions == o.transitions);
  }
}

TEST_CASE("probabilistic choice refines the nondeterministic spec") {
  CheckReport r = check_prob_refinement(op("RawIgnorance"), pop("ML"));
  CHECK(r.pass);
  CHECK(r.check == "check-prob");
  CHECK(check_prob_refinement(op("RawIgnorance"), pop("MLHedged")).pass);
}

TEST_CASE("mass outside the allowed transitions fails with a witness") {
  // b' drifts away from b, which RawIgnorance never allows
  const ProbOperation& ml = pop("ML");
  auto pre_idx = slot_indices(ml.slots, {SlotKind::state, SlotKind::input});
  auto post_idx = slot_indices(ml.slots, {SlotKind::primed_state, SlotKind::output});
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior;
  Binding pre{{0}};        // b = d0
  Binding post{{1, 0}};    // b' = d1, a = yes
  behavior.emplace_back(pre, std::vector<Distribution>{point_distribution(post)});
  ProbOperation drifting = make_prob_operation("Drift", ml.slots, behavior);

  Operation target = make_operation(
      "RawAtD0", op("RawIgnorance").slots,
      {make_binding(op("RawIgnorance").slots,
                    {{"b", "d0"}, {"b'", "d0"}, {"a!", "yes"}})});
  CheckReport r = check_prob_refinement(target, drifting);
  CHECK_FALSE(r.pass);
  CHECK(r.failed_condition == "support-containment");
  REQUIRE(r.witnesses.size() == 1);
  CHECK(r.witnesses[0].fields ==
        std::vector<std::pair<std::string, std::string>>{
            {"b", "d0"}, {"b'", "d1"}, {"a!", "yes"}});
}

TEST_CASE("an uncovered precondition fails applicability") {
  const ProbOperation& ml = pop("ML");
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior(
      ml.behavior.begin(), ml.behavior.begin() + 2);  // drop d2, d3
  ProbOperation partial = make_prob_operation("Partial", ml.slots, behavior);
  CheckReport r = check_prob_refinement(op("RawIgnorance"), partial);
  CHECK_FALSE(r.pass);
  CHECK(r.failed_condition == "applicability");
}

TEST_CASE("the committed answer is a 93 percent refinement") {
  CHECK(refinement_degree(op("Result"), pop("ML")) == Rational(93, 100));
}

TEST_CASE("raw ignorance allows everything the learner does") {
  CHECK(refinement_degree(op("RawIgnorance"), pop("ML")) == Rational(1));
}

TEST_CASE("a confidently wrong learner scores zero") {
  const ProbOperation& ml = pop("ML");
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior;
  for (ValueIndex b = 0; b < 4; ++b)
    behavior.emplace_back(Binding{{b}},
                          std::vector<Distribution>{
                              point_distribution(Binding{{b, kNo}})});
  ProbOperation says_no = make_prob_operation("SaysNo", ml.slots, behavior);
  CHECK(refinement_degree(op("Result"), says_no) == Rational(0));
}

TEST_CASE("degree requires the precondition to be covered") {
  const ProbOperation& ml = pop("ML");
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior(
      ml.behavior.begin(), ml.behavior.begin() + 1);
  ProbOperation partial = make_prob_operation("Partial", ml.slots, behavior);
  CHECK_THROWS_WITH_AS(refinement_degree(op("Result"), partial),
                       doctest::Contains("not covered"), Error);
}

TEST_CASE("degree and containment require shared slots") {
  CHECK_THROWS_WITH_AS(check_prob_refinement(op("AnsOp"), pop("ML")),
                       doctest::Contains("share slots"), Error);
  CHECK_THROWS_WITH_AS(refinement_degree(op("AnsOp"), pop("ML")),
                       doctest::Contains("share slots"), Error);
}

TEST_CASE("degree observes outputs only, not post-states") {
  // Result moves the state (b' = processed) while ML keeps b' = b; the 93%
  // still lands because only a! is observable.
  CHECK(refinement_degree(op("Result"), pop("ML")) == Rational(93, 100));
  CHECK(refinement_degree(op("MachineLearn"), pop("ML")) > Rational(0));
}

namespace {

// single-state pop over AnsOp's slots offering exactly the given distributions
ProbOperation unit_pop(const std::string& name,
                       std::vector<Distribution> dists) {
  const Operation& ans = op("AnsOp");
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior;
  behavior.emplace_back(Binding{{0}}, std::move(dists));
  return make_prob_operation(name, ans.slots, behavior);
}

// post tuples over (s', a!): s' = u, a = v
Binding unit_post(ValueIndex v) { return Binding{{0, v}}; }

}  // namespace

TEST_CASE("degree interpolates affinely under mix at a fixed pre-binding") {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> percent(0, 100);
  for (int i = 0; i < 25; ++i) {
    Distribution d1 = mix(point_distribution(unit_post(kYes)),
                          Rational(percent(rng), 100),
                          point_distribution(unit_post(kNo)));
    Distribution d2 = mix(point_distribution(unit_post(kYes)),
                          Rational(percent(rng), 100),
                          point_distribution(unit_post(kNo)));
    Rational p(percent(rng), 100);

    Rational m1 = refinement_degree(op("AnsOp"), unit_pop("D1", {d1}));
    Rational m2 = refinement_degree(op("AnsOp"), unit_pop("D2", {d2}));
    Rational mixed = refinement_degree(op("AnsOp"), unit_pop("M", {mix(d1, p, d2)}));
    CHECK(mixed == p * m1 + (Rational(1) - p) * m2);
  }
}

TEST_CASE("containment passing implies degree one") {
  CHECK(check_prob_refinement(op("RawIgnorance"), pop("ML")).pass);
  CHECK(refinement_degree(op("RawIgnorance"), pop("ML")) == Rational(1));
  CHECK(check_prob_refinement(op("RawIgnorance"), pop("MLHedged")).pass);
  CHECK(refinement_degree(op("RawIgnorance"), pop("MLHedged")) == Rational(1));
}

TEST_CASE("demonic join only lowers the degree") {
  Distribution confident = mix(point_distribution(unit_post(kYes)),
                               Rational(93, 100),
                               point_distribution(unit_post(kNo)));
  Distribution certain = point_distribution(unit_post(kYes));

  Rational d1 = refinement_degree(op("AnsOp"), unit_pop("S1", {certain}));
  Rational d2 = refinement_degree(op("AnsOp"), unit_pop("S2", {confident}));
  Rational both = refinement_degree(
      op("AnsOp"), unit_pop("U", demonic_join({{certain}, {confident}})));
  CHECK(both == std::min(d1, d2));
  CHECK(both == Rational(93, 100));
}

TEST_CASE("weights stay normalized through random compositions") {
  std::mt19937 rng(123);
  std::uniform_int_distribution<int> percent(0, 100);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<Distribution> pool{point_distribution(unit_post(kYes)),
                                 point_distribution(unit_post(kNo))};
  for (int step = 0; step < 100; ++step) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    if (coin(rng) == 0) {
      Distribution d = mix(pool[pick(rng)], Rational(percent(rng), 100),
                           pool[pick(rng)]);
      pool.push_back(d);
    } else {
      auto joined = demonic_join({{pool[pick(rng)]}, {pool[pick(rng)]}});
      pool.insert(pool.end(), joined.begin(), joined.end());
    }
    Rational total(0);
    for (const auto& [tuple, w] : pool.back().weights) {
      CHECK(w > Rational(0));
      CHECK(w <= Rational(1));
      total += w;
    }
    CHECK(total == Rational(1));
  }
}
