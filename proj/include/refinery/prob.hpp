#pragma once

#include "refinery/schema.hpp"

namespace refinery {

/// A finite probability distribution over (state', outputs) tuples. Weights
/// are exact rationals in (0,1] and sum to 1; entries are sorted by tuple.
struct Distribution {
  std::vector<std::pair<Binding, Rational>> weights;

  bool operator==(const Distribution&) const = default;
};

/// Strict weak order on distributions, for canonical demonic sets.
bool distribution_less(const Distribution& a, const Distribution& b);

/// Merges duplicate tuples, drops exact zeros, validates positivity and that
/// the total mass is exactly 1.
Distribution make_distribution(std::vector<std::pair<Binding, Rational>> entries);

Distribution point_distribution(Binding tuple);

/// Convex mixture: weight(t) = p*d1(t) + (1-p)*d2(t).
Distribution mix(const Distribution& d1, const Rational& p, const Distribution& d2);

/// Demonic choice: the adversary may pick any offered distribution, so the
/// result is the deduplicated union.
std::vector<Distribution> demonic_join(
    const std::vector<std::vector<Distribution>>& sets);

/// Per (state, inputs) binding, a nonempty demonic set of distributions over
/// (state', outputs) bindings.
struct ProbOperation {
  std::string name;
  std::vector<Slot> slots;
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior;

  bool operator==(const ProbOperation&) const = default;
};

ProbOperation make_prob_operation(
    std::string name, std::vector<Slot> slots,
    std::vector<std::pair<Binding, std::vector<Distribution>>> behavior);

/// Forgets probabilities: the relational operation whose transitions are the
/// support tuples of every offered distribution.
Operation support_lift(const ProbOperation& pop);

/// Nondeterminism is refined by probability: passes iff pop is defined on all
/// of aop's precondition and every support tuple there was allowed by aop.
CheckReport check_prob_refinement(const Operation& aop, const ProbOperation& pop);

/// Worst-case mass the demon must concede to outputs the target allows: the
/// minimum over precondition bindings and demonic picks of the probability of
/// hitting a target-allowed output tuple. Observation is at outputs only; the
/// post-state is not visible.
Rational refinement_degree(const Operation& target, const ProbOperation& pop);

}  // namespace refinery
