#include "refinery/schema.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace refinery {

Signature signature_of(const Operation& op) { return Signature{op.slots}; }

IoSignature io_signatures(const Operation& op) {
  IoSignature sig;
  for (const auto& s : op.slots) {
    if (s.kind == SlotKind::input) sig.inputs.push_back(s);
    if (s.kind == SlotKind::output) sig.outputs.push_back(s);
  }
  return sig;
}

IOTransformer make_io_transformer(std::string name, std::vector<Slot> slots,
                                  std::vector<Binding> pairs) {
  validate_slots(slots, false);
  for (const auto& row : pairs) {
    if (row.values.size() != slots.size())
      throw Error("transformer " + name + ": pair misses a slot");
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (row.values[i] >= slots[i].type.size())
        throw Error("transformer " + name + ": value out of range for slot " +
                    slots[i].display_name());
  }
  normalize_rows(pairs);
  return IOTransformer{std::move(name), std::move(slots), std::move(pairs)};
}

IOTransformer converse(const IOTransformer& t) {
  IOTransformer flipped = t;
  for (auto& s : flipped.slots)
    s.kind = s.kind == SlotKind::input ? SlotKind::output : SlotKind::input;
  return flipped;
}

namespace {

// (base name, type) keys sorted by name, for exact-match comparisons
std::vector<std::pair<std::string, FiniteType>> name_type_keys(
    const std::vector<Slot>& slots) {
  std::vector<std::pair<std::string, FiniteType>> keys;
  keys.reserve(slots.size());
  for (const auto& s : slots) keys.emplace_back(s.name, s.type);
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return keys;
}

}  // namespace

bool is_output_transformer(const IOTransformer& t, const Operation& s) {
  std::vector<Slot> t_inputs;
  for (const auto& slot : t.slots)
    if (slot.kind == SlotKind::input) t_inputs.push_back(slot);
  return name_type_keys(t_inputs) == name_type_keys(io_signatures(s).outputs);
}

TransformerProperties transformer_properties(const IOTransformer& t) {
  auto in_idx = slot_indices(t.slots, {SlotKind::input});
  auto out_idx = slot_indices(t.slots, {SlotKind::output});

  std::map<Binding, std::set<Binding>> images;
  std::map<Binding, std::set<Binding>> preimages;
  for (const auto& row : t.pairs) {
    Binding in = project(row, in_idx);
    Binding out = project(row, out_idx);
    images[in].insert(out);
    preimages[out].insert(in);
  }

  std::vector<Slot> in_slots;
  for (std::size_t i : in_idx) in_slots.push_back(t.slots[i]);

  TransformerProperties props;
  props.total = true;
  for (const auto& tuple : all_tuples(in_slots))
    if (!images.contains(tuple)) { props.total = false; break; }
  props.functional = std::all_of(images.begin(), images.end(),
                                 [](const auto& kv) { return kv.second.size() <= 1; });
  props.injective = std::all_of(preimages.begin(), preimages.end(),
                                [](const auto& kv) { return kv.second.size() <= 1; });
  return props;
}

ProjectedRelation precondition(const Operation& op) {
  auto pre_idx = slot_indices(op.slots, {SlotKind::state, SlotKind::input});
  ProjectedRelation rel;
  for (std::size_t i : pre_idx) rel.slots.push_back(op.slots[i]);
  rel.rows.reserve(op.transitions.size());
  for (const auto& row : op.transitions) rel.rows.push_back(project(row, pre_idx));
  normalize_rows(rel.rows);
  return rel;
}

Operation pipe(const Operation& s, const IOTransformer& t) {
  if (!is_output_transformer(t, s))
    throw Error("pipe: " + t.name + " is not an output transformer for " + s.name);

  auto kept_idx = slot_indices(
      s.slots, {SlotKind::state, SlotKind::primed_state, SlotKind::input});
  auto s_out_idx = slot_indices(s.slots, {SlotKind::output});
  auto t_in_idx = slot_indices(t.slots, {SlotKind::input});
  auto t_out_idx = slot_indices(t.slots, {SlotKind::output});

  // align t's input positions with s's output slots by base name
  std::vector<std::size_t> aligned_t_in;
  for (std::size_t oi : s_out_idx) {
    for (std::size_t ti : t_in_idx)
      if (t.slots[ti].name == s.slots[oi].name) {
        aligned_t_in.push_back(ti);
        break;
      }
  }

  std::vector<Slot> result_slots;
  for (std::size_t i : kept_idx) result_slots.push_back(s.slots[i]);
  for (std::size_t i : t_out_idx) result_slots.push_back(t.slots[i]);

  // intermediate output tuple -> t output tuples
  std::multimap<Binding, Binding> successors;
  for (const auto& pair : t.pairs)
    successors.emplace(project(pair, aligned_t_in), project(pair, t_out_idx));

  std::vector<Binding> rows;
  for (const auto& row : s.transitions) {
    Binding intermediate = project(row, s_out_idx);
    auto [lo, hi] = successors.equal_range(intermediate);
    for (auto it = lo; it != hi; ++it) {
      Binding combined = project(row, kept_idx);
      combined.values.insert(combined.values.end(), it->second.values.begin(),
                             it->second.values.end());
      rows.push_back(std::move(combined));
    }
  }
  normalize_rows(rows);
  return make_operation(s.name + ">>" + t.name, std::move(result_slots),
                        std::move(rows));
}

IOTransformer identity_output_transformer(const Operation& s) {
  auto outputs = io_signatures(s).outputs;
  std::vector<Slot> slots;
  for (const auto& o : outputs) slots.push_back(input_slot(o.name, o.type));
  for (const auto& o : outputs) slots.push_back(o);

  std::vector<Binding> pairs;
  for (const auto& tuple : all_tuples(outputs)) {
    Binding row = tuple;
    row.values.insert(row.values.end(), tuple.values.begin(), tuple.values.end());
    pairs.push_back(std::move(row));
  }
  return make_io_transformer("identity", std::move(slots), std::move(pairs));
}

}  // namespace refinery
