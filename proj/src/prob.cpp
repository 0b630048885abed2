#include "refinery/prob.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace refinery {

bool distribution_less(const Distribution& a, const Distribution& b) {
  return std::lexicographical_compare(
      a.weights.begin(), a.weights.end(), b.weights.begin(), b.weights.end(),
      [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return x.second < y.second;
      });
}

Distribution make_distribution(std::vector<std::pair<Binding, Rational>> entries) {
  std::map<Binding, Rational> merged;
  for (auto& [tuple, weight] : entries) {
    if (weight < Rational(0))
      throw Error("distribution weight is negative");
    merged[tuple] += weight;
  }
  Distribution d;
  Rational total(0);
  for (auto& [tuple, weight] : merged) {
    if (weight == Rational(0)) continue;
    if (weight > Rational(1)) throw Error("distribution weight exceeds 1");
    total += weight;
    d.weights.emplace_back(tuple, weight);
  }
  if (total != Rational(1))
    throw Error("distribution sums to " + fraction_string(total));
  return d;
}

Distribution point_distribution(Binding tuple) {
  return Distribution{{{std::move(tuple), Rational(1)}}};
}

Distribution mix(const Distribution& d1, const Rational& p, const Distribution& d2) {
  if (p < Rational(0) || p > Rational(1))
    throw Error("mixing weight " + rational_to_string(p) + " is outside [0,1]");
  std::vector<std::pair<Binding, Rational>> entries;
  for (const auto& [tuple, w] : d1.weights) entries.emplace_back(tuple, p * w);
  for (const auto& [tuple, w] : d2.weights)
    entries.emplace_back(tuple, (Rational(1) - p) * w);
  return make_distribution(std::move(entries));
}

std::vector<Distribution> demonic_join(
    const std::vector<std::vector<Distribution>>& sets) {
  if (sets.empty()) throw Error("demonic choice over no alternatives");
  std::vector<Distribution> joined;
  for (const auto& set : sets)
    joined.insert(joined.end(), set.begin(), set.end());
  std::sort(joined.begin(), joined.end(), distribution_less);
  joined.erase(std::unique(joined.begin(), joined.end()), joined.end());
  return joined;
}

ProbOperation make_prob_operation(
    std::string name, std::vector<Slot> slots,
    std::vector<std::pair<Binding, std::vector<Distribution>>> behavior) {
  validate_slots(slots, true);
  bool has_state = false;
  for (const auto& s : slots)
    if (s.kind == SlotKind::state) has_state = true;
  if (!has_state)
    throw Error("prob operation " + name + " needs at least one state slot");

  auto pre_idx = slot_indices(slots, {SlotKind::state, SlotKind::input});
  auto post_idx = slot_indices(slots, {SlotKind::primed_state, SlotKind::output});

  std::map<Binding, std::vector<Distribution>> merged;
  for (auto& [pre, dists] : behavior) {
    if (pre.values.size() != pre_idx.size())
      throw Error("prob operation " + name + ": pre-binding misses a slot");
    for (std::size_t i = 0; i < pre_idx.size(); ++i)
      if (pre.values[i] >= slots[pre_idx[i]].type.size())
        throw Error("prob operation " + name + ": pre value out of range");
    if (dists.empty())
      throw Error("prob operation " + name + ": empty distribution set");
    for (const auto& d : dists)
      for (const auto& [tuple, weight] : d.weights) {
        if (tuple.values.size() != post_idx.size())
          throw Error("prob operation " + name + ": support tuple misses a slot");
        for (std::size_t i = 0; i < post_idx.size(); ++i)
          if (tuple.values[i] >= slots[post_idx[i]].type.size())
            throw Error("prob operation " + name + ": support value out of range");
      }
    auto& bucket = merged[pre];
    bucket.insert(bucket.end(), dists.begin(), dists.end());
  }

  ProbOperation pop;
  pop.name = std::move(name);
  pop.slots = std::move(slots);
  for (auto& [pre, dists] : merged) {
    std::sort(dists.begin(), dists.end(), distribution_less);
    dists.erase(std::unique(dists.begin(), dists.end()), dists.end());
    pop.behavior.emplace_back(pre, std::move(dists));
  }
  return pop;
}

namespace {

// positions of pre/post sublists inside the full slot list
struct SlotSplit {
  std::vector<std::size_t> pre;
  std::vector<std::size_t> post;
};

SlotSplit split_slots(const std::vector<Slot>& slots) {
  return SlotSplit{
      slot_indices(slots, {SlotKind::state, SlotKind::input}),
      slot_indices(slots, {SlotKind::primed_state, SlotKind::output})};
}

Binding combine(const std::vector<Slot>& slots, const SlotSplit& split,
                const Binding& pre, const Binding& post) {
  Binding full;
  full.values.assign(slots.size(), 0);
  for (std::size_t i = 0; i < split.pre.size(); ++i)
    full.values[split.pre[i]] = pre.values[i];
  for (std::size_t i = 0; i < split.post.size(); ++i)
    full.values[split.post[i]] = post.values[i];
  return full;
}

const std::vector<Distribution>* lookup(
    const ProbOperation& pop, const Binding& pre) {
  auto it = std::lower_bound(
      pop.behavior.begin(), pop.behavior.end(), pre,
      [](const auto& entry, const Binding& key) { return entry.first < key; });
  if (it == pop.behavior.end() || it->first != pre) return nullptr;
  return &it->second;
}

}  // namespace

Operation support_lift(const ProbOperation& pop) {
  auto split = split_slots(pop.slots);
  std::vector<Binding> rows;
  for (const auto& [pre, dists] : pop.behavior)
    for (const auto& d : dists)
      for (const auto& [tuple, weight] : d.weights)
        rows.push_back(combine(pop.slots, split, pre, tuple));
  return make_operation(pop.name, pop.slots, std::move(rows));
}

CheckReport check_prob_refinement(const Operation& aop, const ProbOperation& pop) {
  static const std::string kCheck = "check-prob";
  if (aop.slots != pop.slots)
    throw Error(aop.name + " and " + pop.name + " do not share slots");

  ProjectedRelation pre_a = precondition(aop);
  for (const auto& row : pre_a.rows)
    if (!lookup(pop, row))
      return fail_report(kCheck, "applicability", {witness_of(pre_a.slots, row)});

  std::set<Binding> pre_a_rows(pre_a.rows.begin(), pre_a.rows.end());
  Operation lifted = support_lift(pop);
  auto pre_idx = slot_indices(lifted.slots, {SlotKind::state, SlotKind::input});
  for (const auto& row : lifted.transitions) {
    if (!pre_a_rows.contains(project(row, pre_idx))) continue;
    if (!contains_row(aop.transitions, row))
      return fail_report(kCheck, "support-containment",
                         {witness_of(lifted.slots, row)});
  }
  return pass_report(kCheck);
}

Rational refinement_degree(const Operation& target, const ProbOperation& pop) {
  if (target.slots != pop.slots)
    throw Error(target.name + " and " + pop.name + " do not share slots");

  ProjectedRelation pre_t = precondition(target);
  for (const auto& row : pre_t.rows)
    if (!lookup(pop, row))
      throw Error("precondition of " + target.name + " is not covered by " +
                  pop.name);

  auto split = split_slots(target.slots);
  auto post_out = slot_indices(target.slots, {SlotKind::output});
  // positions of output slots within the post sublist
  std::vector<std::size_t> out_in_post;
  for (std::size_t i = 0; i < split.post.size(); ++i)
    if (target.slots[split.post[i]].kind == SlotKind::output)
      out_in_post.push_back(i);

  Rational degree(1);
  for (const auto& pre : pre_t.rows) {
    // output tuples the target allows at this pre-binding
    std::set<Binding> allowed;
    for (const auto& row : target.transitions) {
      if (project(row, split.pre) != pre) continue;
      allowed.insert(project(row, post_out));
    }
    for (const auto& dist : *lookup(pop, pre)) {
      Rational mass(0);
      for (const auto& [tuple, weight] : dist.weights)
        if (allowed.contains(project(tuple, out_in_post))) mass += weight;
      degree = std::min(degree, mass);
    }
  }
  return degree;
}

}  // namespace refinery
