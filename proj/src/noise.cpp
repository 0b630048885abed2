#include "refinery/noise.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace refinery {

NoiseModel make_noise_model(
    std::string name, FiniteType signal, FiniteType noise,
    const std::vector<std::array<std::string, 3>>& rows) {
  std::vector<std::optional<ValueIndex>> cells(signal.size() * noise.size());
  for (const auto& [s, n, result] : rows) {
    auto si = signal.index_of(s);
    if (!si) throw Error("noise model " + name + ": " + s + " is not in " +
                         signal.name);
    auto ni = noise.index_of(n);
    if (!ni) throw Error("noise model " + name + ": " + n + " is not in " +
                         noise.name);
    auto ri = signal.index_of(result);
    if (!ri) throw Error("noise model " + name + ": " + result +
                         " is not in " + signal.name);
    auto& cell = cells[*si * noise.size() + *ni];
    if (cell) throw Error("noise model " + name + ": duplicate entry for (" +
                          s + ", " + n + ")");
    cell = *ri;
  }
  std::vector<ValueIndex> table;
  table.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i])
      throw Error("noise model " + name + " is not total: missing (" +
                  signal.values[i / noise.size()] + ", " +
                  noise.values[i % noise.size()] + ")");
    table.push_back(*cells[i]);
  }
  return NoiseModel{std::move(name), std::move(signal), std::move(noise),
                    std::move(table)};
}

CheckReport check_absorption(const NoiseModel& m) {
  static const std::string kCheck = "noise-check";
  for (ValueIndex a = 0; a < m.signal.size(); ++a)
    for (ValueIndex x = 0; x < m.noise.size(); ++x)
      for (ValueIndex y = 0; y < m.noise.size(); ++y) {
        ValueIndex twice = m.out(m.out(a, x), y);
        bool absorbed = false;
        for (ValueIndex z = 0; z < m.noise.size(); ++z)
          if (m.out(a, z) == twice) { absorbed = true; break; }
        if (!absorbed)
          return fail_report(kCheck, "absorption",
                             {Witness{{{"a", m.signal.values[a]},
                                       {"x", m.noise.values[x]},
                                       {"y", m.noise.values[y]}}}});
      }
  return pass_report(kCheck);
}

namespace {

std::set<ValueIndex> orbit_indices(const NoiseModel& m, ValueIndex a) {
  std::set<ValueIndex> orbit;
  for (ValueIndex x = 0; x < m.noise.size(); ++x) orbit.insert(m.out(a, x));
  return orbit;
}

}  // namespace

std::vector<std::string> noise_orbit(const NoiseModel& m, std::string_view a) {
  auto ai = m.signal.index_of(a);
  if (!ai)
    throw Error(std::string(a) + " is not in " + m.signal.name);
  std::vector<std::string> out;
  for (ValueIndex v : orbit_indices(m, *ai)) out.push_back(m.signal.values[v]);
  return out;
}

BuiltOot build_oot(const NoiseModel& m) {
  std::vector<Slot> slots{input_slot("ot", m.signal), output_slot("oo", m.signal)};
  std::vector<Binding> pairs;
  for (ValueIndex o = 0; o < m.signal.size(); ++o)
    for (ValueIndex t : orbit_indices(m, o))
      pairs.push_back(Binding{{t, o}});
  IOTransformer oot = make_io_transformer("oot-" + m.name, std::move(slots),
                                          std::move(pairs));
  TransformerProperties props = transformer_properties(oot);
  return BuiltOot{std::move(oot), props};
}

CheckReport check_noisy_refinement(const Operation& aop, const Operation& cop,
                                   const NoiseModel& m) {
  static const std::string kCheck = "check-noisy";

  auto non_output = [](const Operation& op) {
    auto idx = slot_indices(op.slots,
                            {SlotKind::state, SlotKind::primed_state, SlotKind::input});
    std::vector<Slot> slots;
    for (auto i : idx) slots.push_back(op.slots[i]);
    return slots;
  };
  if (non_output(aop) != non_output(cop))
    throw Error(aop.name + " and " + cop.name +
                " do not share state and input slots");
  auto single_signal_output = [&](const Operation& op) {
    auto outs = io_signatures(op).outputs;
    if (outs.size() != 1 || outs[0].type != m.signal)
      throw Error(op.name + " must have a single output of type " +
                  m.signal.name);
  };
  single_signal_output(aop);
  single_signal_output(cop);

  if (auto pre_gap = [&] {
        ProjectedRelation pre_a = precondition(aop);
        ProjectedRelation pre_c = precondition(cop);
        for (const auto& row : pre_a.rows)
          if (!contains_row(pre_c.rows, row))
            return std::optional<Witness>(witness_of(pre_a.slots, row));
        return std::optional<Witness>();
      }())
    return fail_report(kCheck, "applicability", {*pre_gap});

  // noise-match: the concrete output must be some abstract output with noise
  // added, transition-wise over the shared (state, inputs, state') part
  auto a_core = slot_indices(
      aop.slots, {SlotKind::state, SlotKind::primed_state, SlotKind::input});
  auto c_core = slot_indices(
      cop.slots, {SlotKind::state, SlotKind::primed_state, SlotKind::input});
  auto a_out = slot_indices(aop.slots, {SlotKind::output});
  auto c_out = slot_indices(cop.slots, {SlotKind::output});

  ProjectedRelation pre_a = precondition(aop);
  std::set<Binding> pre_a_rows(pre_a.rows.begin(), pre_a.rows.end());
  auto pre_idx_c = slot_indices(cop.slots, {SlotKind::state, SlotKind::input});

  std::optional<CheckReport> noise_mismatch;
  for (const auto& c_row : cop.transitions) {
    if (!pre_a_rows.contains(project(c_row, pre_idx_c))) continue;
    Binding core = project(c_row, c_core);
    ValueIndex concrete_out = c_row.values[c_out[0]];
    bool matched = false;
    for (const auto& a_row : aop.transitions) {
      if (project(a_row, a_core) != core) continue;
      if (orbit_indices(m, a_row.values[a_out[0]]).contains(concrete_out)) {
        matched = true;
        break;
      }
    }
    if (!matched) {
      noise_mismatch = fail_report(kCheck, "noise-match",
                                   {witness_of(cop.slots, c_row)});
      break;
    }
  }
  if (noise_mismatch) return *noise_mismatch;

  // original output transformers must map each modified output back to one
  // original output; report the ambiguity otherwise
  BuiltOot oot = build_oot(m);
  if (!oot.properties.functional) {
    auto in_idx = slot_indices(oot.transformer.slots, {SlotKind::input});
    std::map<Binding, Binding> first_seen;
    for (const auto& pair : oot.transformer.pairs) {
      Binding in = project(pair, in_idx);
      auto [it, inserted] = first_seen.emplace(in, pair);
      if (!inserted && it->second != pair)
        return fail_report(kCheck, "oot-functionality",
                           {witness_of(oot.transformer.slots, it->second),
                            witness_of(oot.transformer.slots, pair)});
    }
  }
  return pass_report(kCheck);
}

}  // namespace refinery
