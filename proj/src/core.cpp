#include "refinery/core.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace refinery {

std::optional<ValueIndex> FiniteType::index_of(std::string_view symbol) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] == symbol) return static_cast<ValueIndex>(i);
  return std::nullopt;
}

FiniteType make_finite_type(std::string name, std::vector<std::string> values) {
  if (values.empty())
    throw Error("type " + name + ": value list is empty");
  std::set<std::string> seen;
  for (const auto& v : values)
    if (!seen.insert(v).second)
      throw Error("type " + name + ": duplicate value " + v);
  return FiniteType{std::move(name), std::move(values)};
}

std::string Slot::display_name() const {
  switch (kind) {
    case SlotKind::state: return name;
    case SlotKind::primed_state: return name + "'";
    case SlotKind::input: return name + "?";
    case SlotKind::output: return name + "!";
  }
  return name;
}

Slot state_slot(std::string name, FiniteType type) {
  return Slot{std::move(name), SlotKind::state, std::move(type)};
}
Slot primed_slot(std::string name, FiniteType type) {
  return Slot{std::move(name), SlotKind::primed_state, std::move(type)};
}
Slot input_slot(std::string name, FiniteType type) {
  return Slot{std::move(name), SlotKind::input, std::move(type)};
}
Slot output_slot(std::string name, FiniteType type) {
  return Slot{std::move(name), SlotKind::output, std::move(type)};
}

void add_state_pair(std::vector<Slot>& slots, std::string name, FiniteType type) {
  slots.push_back(state_slot(name, type));
  slots.push_back(primed_slot(std::move(name), std::move(type)));
}

void validate_slots(std::span<const Slot> slots, bool allow_state) {
  std::set<std::string> names;
  for (const auto& s : slots) {
    if (s.name.empty()) throw Error("slot with empty name");
    if (s.type.values.empty())
      throw Error("slot " + s.display_name() + " has an empty type");
    if (!names.insert(s.display_name()).second)
      throw Error("duplicate slot " + s.display_name());
    if (!allow_state &&
        (s.kind == SlotKind::state || s.kind == SlotKind::primed_state))
      throw Error("state slot " + s.display_name() + " not allowed here");
  }
  // state and primed slots come in matching pairs
  for (const auto& s : slots) {
    if (s.kind == SlotKind::state || s.kind == SlotKind::primed_state) {
      SlotKind partner_kind = s.kind == SlotKind::state ? SlotKind::primed_state
                                                        : SlotKind::state;
      bool found = false;
      for (const auto& p : slots)
        if (p.kind == partner_kind && p.name == s.name && p.type == s.type)
          found = true;
      if (!found)
        throw Error("unpaired " +
                    std::string(s.kind == SlotKind::state ? "state" : "primed")
                    + " slot " + s.display_name());
    }
  }
}

Binding make_binding(const std::vector<Slot>& slots,
                     const std::vector<std::pair<std::string, std::string>>& assignments) {
  std::map<std::string, std::string> by_name;
  for (const auto& [name, value] : assignments)
    if (!by_name.emplace(name, value).second)
      throw Error("slot " + name + " assigned twice");

  Binding row;
  row.values.reserve(slots.size());
  for (const auto& slot : slots) {
    auto it = by_name.find(slot.display_name());
    if (it == by_name.end())
      throw Error("binding misses slot " + slot.display_name());
    auto idx = slot.type.index_of(it->second);
    if (!idx)
      throw Error("value " + it->second + " is not in type " + slot.type.name +
                  " (slot " + slot.display_name() + ")");
    row.values.push_back(*idx);
    by_name.erase(it);
  }
  if (!by_name.empty())
    throw Error("binding assigns unknown slot " + by_name.begin()->first);
  return row;
}

Operation make_operation(std::string name, std::vector<Slot> slots,
                         std::vector<Binding> transitions) {
  validate_slots(slots, true);
  bool has_state = false;
  for (const auto& s : slots)
    if (s.kind == SlotKind::state) has_state = true;
  if (!has_state)
    throw Error("operation " + name + " needs at least one state slot");

  for (const auto& row : transitions) {
    if (row.values.size() != slots.size())
      throw Error("operation " + name + ": binding misses a slot");
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (row.values[i] >= slots[i].type.size())
        throw Error("operation " + name + ": value out of range for slot " +
                    slots[i].display_name());
  }
  normalize_rows(transitions);
  return Operation{std::move(name), std::move(slots), std::move(transitions)};
}

FunctionTable make_function_table(
    std::string name, FiniteType domain, FiniteType codomain,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::vector<std::optional<ValueIndex>> slots(domain.size());
  for (const auto& [arg, image] : entries) {
    auto d = domain.index_of(arg);
    if (!d) throw Error("table " + name + ": " + arg + " is not in " + domain.name);
    auto c = codomain.index_of(image);
    if (!c) throw Error("table " + name + ": " + image + " is not in " + codomain.name);
    if (slots[*d]) throw Error("table " + name + ": duplicate entry for " + arg);
    slots[*d] = *c;
  }
  std::vector<ValueIndex> filled;
  filled.reserve(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (!slots[i])
      throw Error("table " + name + " is not total: missing " + domain.values[i]);
    filled.push_back(*slots[i]);
  }
  return FunctionTable{std::move(name), std::move(domain), std::move(codomain),
                       std::move(filled)};
}

std::string eval_function(const FunctionTable& table, std::string_view arg) {
  auto idx = table.domain.index_of(arg);
  if (!idx)
    throw Error("table " + table.name + ": " + std::string(arg) +
                " is outside domain " + table.domain.name);
  return table.codomain.values[table.entries[*idx]];
}

CheckReport pass_report(std::string check) {
  CheckReport r;
  r.check = std::move(check);
  r.pass = true;
  return r;
}

CheckReport fail_report(std::string check, std::string condition,
                        std::vector<Witness> witnesses) {
  CheckReport r;
  r.check = std::move(check);
  r.pass = false;
  r.failed_condition = std::move(condition);
  r.witnesses = std::move(witnesses);
  return r;
}

std::vector<std::size_t> slot_indices(std::span<const Slot> slots,
                                      std::initializer_list<SlotKind> kinds) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slots.size(); ++i)
    for (SlotKind k : kinds)
      if (slots[i].kind == k) out.push_back(i);
  return out;
}

Binding project(const Binding& row, std::span<const std::size_t> indices) {
  Binding out;
  out.values.reserve(indices.size());
  for (std::size_t i : indices) out.values.push_back(row.values.at(i));
  return out;
}

void normalize_rows(std::vector<Binding>& rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

bool contains_row(const std::vector<Binding>& sorted_rows, const Binding& row) {
  return std::binary_search(sorted_rows.begin(), sorted_rows.end(), row);
}

std::vector<Binding> all_tuples(std::span<const Slot> slots) {
  std::vector<Binding> out;
  Binding current;
  current.values.assign(slots.size(), 0);
  while (true) {
    out.push_back(current);
    // odometer step, last slot fastest
    std::size_t i = slots.size();
    while (i > 0) {
      --i;
      if (++current.values[i] < slots[i].type.size()) break;
      current.values[i] = 0;
      if (i == 0) return out;
    }
    if (slots.empty()) return out;
  }
}

Witness witness_of(std::span<const Slot> slots, const Binding& row) {
  Witness w;
  w.fields.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i)
    w.fields.emplace_back(slots[i].display_name(),
                          slots[i].type.values.at(row.values.at(i)));
  return w;
}

}  // namespace refinery
