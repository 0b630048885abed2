#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "refinery/rational.hpp"

namespace refinery {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ValueIndex = std::uint32_t;

/// A named, ordered, nonempty set of symbolic values. Declaration order is
/// the total order used for all deterministic enumeration.
struct FiniteType {
  std::string name;
  std::vector<std::string> values;

  bool operator==(const FiniteType&) const = default;

  std::size_t size() const { return values.size(); }
  std::optional<ValueIndex> index_of(std::string_view symbol) const;
  const std::string& symbol(ValueIndex i) const { return values.at(i); }
};

FiniteType make_finite_type(std::string name, std::vector<std::string> values);

enum class SlotKind { state, primed_state, input, output };

/// One typed observation channel of a schema. The base name is stored
/// undecorated; the surface decoration (', ?, !) follows from the kind.
struct Slot {
  std::string name;
  SlotKind kind;
  FiniteType type;

  bool operator==(const Slot&) const = default;

  std::string display_name() const;
};

Slot state_slot(std::string name, FiniteType type);
Slot primed_slot(std::string name, FiniteType type);
Slot input_slot(std::string name, FiniteType type);
Slot output_slot(std::string name, FiniteType type);

/// Appends the state slot and its primed partner.
void add_state_pair(std::vector<Slot>& slots, std::string name, FiniteType type);

/// One row of a schema's relational semantics: value indices parallel to the
/// owning slot list.
struct Binding {
  std::vector<ValueIndex> values;

  auto operator<=>(const Binding&) const = default;
};

/// Validates that every slot is assigned exactly once with a value of its
/// type; assignments are (display name, symbol) pairs.
Binding make_binding(const std::vector<Slot>& slots,
                     const std::vector<std::pair<std::string, std::string>>& assignments);

/// A relation over (state, inputs) -> (state', outputs). Transitions are kept
/// sorted and duplicate-free.
struct Operation {
  std::string name;
  std::vector<Slot> slots;
  std::vector<Binding> transitions;

  bool operator==(const Operation&) const = default;
};

Operation make_operation(std::string name, std::vector<Slot> slots,
                         std::vector<Binding> transitions);

/// A total function table between two finite types.
struct FunctionTable {
  std::string name;
  FiniteType domain;
  FiniteType codomain;
  std::vector<ValueIndex> entries;  // entries[i] = codomain index of domain value i

  bool operator==(const FunctionTable&) const = default;
};

FunctionTable make_function_table(
    std::string name, FiniteType domain, FiniteType codomain,
    const std::vector<std::pair<std::string, std::string>>& entries);

std::string eval_function(const FunctionTable& table, std::string_view arg);

/// A counterexample row rendered as (display name, symbol) pairs.
struct Witness {
  std::vector<std::pair<std::string, std::string>> fields;

  bool operator==(const Witness&) const = default;
};

/// Shared result shape of every checker.
struct CheckReport {
  std::string check;
  bool pass = false;
  std::optional<std::string> failed_condition;
  std::vector<Witness> witnesses;
  std::optional<Rational> degree;

  bool operator==(const CheckReport&) const = default;
};

CheckReport pass_report(std::string check);
CheckReport fail_report(std::string check, std::string condition,
                        std::vector<Witness> witnesses = {});

// Slot and row utilities shared by all checkers.

std::vector<std::size_t> slot_indices(std::span<const Slot> slots,
                                      std::initializer_list<SlotKind> kinds);

Binding project(const Binding& row, std::span<const std::size_t> indices);

/// Sorts and deduplicates rows in place.
void normalize_rows(std::vector<Binding>& rows);

/// Membership test on sorted rows.
bool contains_row(const std::vector<Binding>& sorted_rows, const Binding& row);

/// All value-index tuples over the given slots in lexicographic order.
std::vector<Binding> all_tuples(std::span<const Slot> slots);

Witness witness_of(std::span<const Slot> slots, const Binding& row);

/// Rejects duplicate display names, unpaired state/primed slots and empty
/// value sets. Used by every slot-carrying constructor.
void validate_slots(std::span<const Slot> slots, bool allow_state);

}  // namespace refinery
