#include "refinery/refinement.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace refinery {

namespace {

std::vector<Slot> slots_of_kind(const Operation& op, SlotKind kind) {
  std::vector<Slot> out;
  for (const auto& s : op.slots)
    if (s.kind == kind) out.push_back(s);
  return out;
}

std::vector<std::pair<std::string, FiniteType>> sorted_keys(
    const std::vector<Slot>& slots) {
  std::vector<std::pair<std::string, FiniteType>> keys;
  for (const auto& s : slots) keys.emplace_back(s.display_name(), s.type);
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return keys;
}

// Def. 1 preamble: same state, and the concrete operation introduces no
// inputs of its own.
void validate_refinement_pair(const Operation& aop, const Operation& cop) {
  auto a_states = slot_indices(aop.slots, {SlotKind::state, SlotKind::primed_state});
  auto c_states = slot_indices(cop.slots, {SlotKind::state, SlotKind::primed_state});
  std::vector<Slot> a_sp, c_sp;
  for (auto i : a_states) a_sp.push_back(aop.slots[i]);
  for (auto i : c_states) c_sp.push_back(cop.slots[i]);
  if (sorted_keys(a_sp) != sorted_keys(c_sp))
    throw Error(aop.name + " and " + cop.name + " do not operate on the same state");

  auto a_in = io_signatures(aop).inputs;
  for (const auto& ci : io_signatures(cop).inputs) {
    bool matched = false;
    for (const auto& ai : a_in)
      if (ai.name == ci.name && ai.type == ci.type) matched = true;
    if (!matched)
      throw Error(cop.name + " has input " + ci.display_name() +
                  " that " + aop.name + " lacks");
  }
}

void validate_output_space(const IOTransformer& ot, const Operation& cop) {
  std::vector<Slot> t_out;
  for (const auto& s : ot.slots)
    if (s.kind == SlotKind::output) t_out.push_back(s);
  if (sorted_keys(t_out) != sorted_keys(io_signatures(cop).outputs))
    throw Error("outputs of transformer " + ot.name +
                " do not match outputs of " + cop.name);
}

// display name -> position
std::map<std::string, std::size_t> position_map(const std::vector<Slot>& slots) {
  std::map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < slots.size(); ++i) m[slots[i].display_name()] = i;
  return m;
}

// First abstract precondition row whose projection is missing from the
// concrete precondition, if any.
std::optional<Witness> applicability_violation(const Operation& aop,
                                               const Operation& cop) {
  ProjectedRelation pre_a = precondition(aop);
  ProjectedRelation pre_c = precondition(cop);
  auto a_pos = position_map(pre_a.slots);

  std::vector<std::size_t> from_a;
  for (const auto& cs : pre_c.slots) from_a.push_back(a_pos.at(cs.display_name()));

  for (const auto& row : pre_a.rows) {
    Binding projected = project(row, from_a);
    if (!contains_row(pre_c.rows, projected))
      return witness_of(pre_a.slots, row);
  }
  return std::nullopt;
}

}  // namespace

CheckReport check_output_refinement(const Operation& aop, const Operation& cop,
                                    const IOTransformer& ot) {
  static const std::string kCheck = "check-output";
  validate_refinement_pair(aop, cop);
  validate_output_space(ot, cop);

  if (!is_output_transformer(ot, aop))
    return fail_report(kCheck, "output-transformer");

  auto in_idx = slot_indices(ot.slots, {SlotKind::input});
  auto props = transformer_properties(ot);
  if (!props.total) {
    std::vector<Slot> in_slots;
    for (auto i : in_idx) in_slots.push_back(ot.slots[i]);
    std::set<Binding> covered;
    for (const auto& pair : ot.pairs) covered.insert(project(pair, in_idx));
    for (const auto& tuple : all_tuples(in_slots))
      if (!covered.contains(tuple))
        return fail_report(kCheck, "totality", {witness_of(in_slots, tuple)});
  }
  if (!props.injective) {
    auto out_idx = slot_indices(ot.slots, {SlotKind::output});
    std::map<Binding, Binding> first_seen;  // output tuple -> full pair
    for (const auto& pair : ot.pairs) {
      Binding out = project(pair, out_idx);
      auto [it, inserted] = first_seen.emplace(out, pair);
      if (!inserted && project(it->second, in_idx) != project(pair, in_idx))
        return fail_report(kCheck, "injectivity",
                           {witness_of(ot.slots, it->second),
                            witness_of(ot.slots, pair)});
    }
  }

  if (auto w = applicability_violation(aop, cop))
    return fail_report(kCheck, "applicability", {*w});

  // correctness: pre AOp && COp  =>  AOp >> OT, quantified over cop's
  // transitions extended by any inputs only aop carries
  Operation piped = pipe(aop, ot);
  ProjectedRelation pre_a = precondition(aop);
  std::set<Binding> pre_a_rows(pre_a.rows.begin(), pre_a.rows.end());

  auto c_pos = position_map(cop.slots);
  std::vector<Slot> extra_inputs;
  for (const auto& ai : io_signatures(aop).inputs)
    if (!c_pos.contains(ai.display_name())) extra_inputs.push_back(ai);
  auto extra_pos = position_map(extra_inputs);

  // value source for a slot shared with cop or introduced as an extra input
  auto value_of = [&](const Slot& slot, const Binding& c_row,
                      const Binding& extension) {
    if (auto it = c_pos.find(slot.display_name()); it != c_pos.end())
      return c_row.values[it->second];
    return extension.values[extra_pos.at(slot.display_name())];
  };

  for (const auto& c_row : cop.transitions) {
    for (const auto& extension : all_tuples(extra_inputs)) {
      Binding pre_row;
      for (const auto& slot : pre_a.slots)
        pre_row.values.push_back(value_of(slot, c_row, extension));
      if (!pre_a_rows.contains(pre_row)) continue;

      Binding piped_row;
      for (const auto& slot : piped.slots)
        piped_row.values.push_back(value_of(slot, c_row, extension));
      if (!contains_row(piped.transitions, piped_row))
        return fail_report(kCheck, "correctness",
                           {witness_of(piped.slots, piped_row)});
    }
  }
  return pass_report(kCheck);
}

namespace {

bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] != i + n - k) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

TransformerSearch search_output_transformer(const Operation& aop,
                                            const Operation& cop,
                                            std::uint64_t budget) {
  if (budget == 0) throw Error("search budget must be positive");
  validate_refinement_pair(aop, cop);

  auto a_out = io_signatures(aop).outputs;
  auto c_out = io_signatures(cop).outputs;
  std::vector<Slot> c_slots;
  for (const auto& o : a_out) c_slots.push_back(input_slot(o.name, o.type));
  for (const auto& o : c_out) c_slots.push_back(o);

  // applicability does not depend on the candidate
  if (applicability_violation(aop, cop))
    return TransformerSearch{SearchOutcome::proven_absent, std::nullopt, 0};

  std::vector<Binding> xs = all_tuples(a_out);
  std::vector<Binding> ys = all_tuples(c_out);
  const std::size_t cells = xs.size() * ys.size();

  auto candidate = [&](const std::vector<std::size_t>& comb) {
    std::vector<Binding> pairs;
    pairs.reserve(comb.size());
    for (std::size_t cell : comb) {
      Binding row = xs[cell / ys.size()];
      const Binding& y = ys[cell % ys.size()];
      row.values.insert(row.values.end(), y.values.begin(), y.values.end());
      pairs.push_back(std::move(row));
    }
    return make_io_transformer("ot", c_slots, std::move(pairs));
  };

  std::uint64_t examined = 0;
  for (std::size_t k = 0; k <= cells; ++k) {
    std::vector<std::size_t> comb(k);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    while (true) {
      if (examined == budget)
        return TransformerSearch{SearchOutcome::budget_exhausted, std::nullopt,
                                 examined};
      ++examined;
      IOTransformer t = candidate(comb);
      if (check_output_refinement(aop, cop, t).pass)
        return TransformerSearch{SearchOutcome::found, std::move(t), examined};
      if (k == 0 || !next_combination(comb, cells)) break;
    }
  }
  return TransformerSearch{SearchOutcome::proven_absent, std::nullopt, examined};
}

AbstractionCheck check_output_abstraction(const Operation& aop,
                                          const Operation& cop,
                                          std::uint64_t budget) {
  static const std::string kCheck = "check-abstraction";
  TransformerSearch search = search_output_transformer(aop, cop, budget);
  AbstractionCheck result;
  result.outcome = search.outcome;
  switch (search.outcome) {
    case SearchOutcome::found:
      result.report = pass_report(kCheck);
      result.transformer = std::move(search.transformer);
      break;
    case SearchOutcome::proven_absent:
      result.report = fail_report(kCheck, "no-transformer");
      break;
    case SearchOutcome::budget_exhausted:
      result.report = fail_report(kCheck, "budget-exhausted");
      break;
  }
  return result;
}

RetrieveRelation make_retrieve(
    std::string name, FiniteType abstract_type, FiniteType concrete_type,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::pair<ValueIndex, ValueIndex>> indexed;
  for (const auto& [a, c] : pairs) {
    auto ai = abstract_type.index_of(a);
    if (!ai) throw Error("retrieve " + name + ": " + a + " is not in " +
                         abstract_type.name);
    auto ci = concrete_type.index_of(c);
    if (!ci) throw Error("retrieve " + name + ": " + c + " is not in " +
                         concrete_type.name);
    indexed.emplace_back(*ai, *ci);
  }
  std::sort(indexed.begin(), indexed.end());
  indexed.erase(std::unique(indexed.begin(), indexed.end()), indexed.end());
  return RetrieveRelation{std::move(name), std::move(abstract_type),
                          std::move(concrete_type), std::move(indexed)};
}

RetrieveRelation identity_retrieve(const FiniteType& type) {
  RetrieveRelation r{"identity", type, type, {}};
  for (ValueIndex i = 0; i < type.size(); ++i) r.pairs.emplace_back(i, i);
  return r;
}

RetrieveRelation universal_retrieve(const FiniteType& abstract_type,
                                    const FiniteType& concrete_type) {
  RetrieveRelation r{"universal", abstract_type, concrete_type, {}};
  for (ValueIndex a = 0; a < abstract_type.size(); ++a)
    for (ValueIndex c = 0; c < concrete_type.size(); ++c)
      r.pairs.emplace_back(a, c);
  return r;
}

DataType make_datatype(std::string name, FiniteType state,
                       std::optional<std::vector<std::string>> init_symbols,
                       std::vector<Operation> ops) {
  if (ops.empty()) throw Error("datatype " + name + " declares no operation");

  std::vector<ValueIndex> init;
  if (init_symbols) {
    for (const auto& sym : *init_symbols) {
      auto idx = state.index_of(sym);
      if (!idx)
        throw Error("datatype " + name + ": init value " + sym +
                    " is not in " + state.name);
      init.push_back(*idx);
    }
    std::sort(init.begin(), init.end());
    init.erase(std::unique(init.begin(), init.end()), init.end());
  } else {
    for (ValueIndex i = 0; i < state.size(); ++i) init.push_back(i);
  }

  for (const auto& op : ops) {
    auto st = slot_indices(op.slots, {SlotKind::state});
    if (st.size() != 1)
      throw Error("datatype " + name + ": operation " + op.name +
                  " must have exactly one state slot");
    const FiniteType& slot_type = op.slots[st[0]].type;
    for (const auto& v : state.values)
      if (!slot_type.index_of(v))
        throw Error("datatype " + name + ": state value " + v +
                    " is not in slot type " + slot_type.name);
    // closure: steps from declared states stay inside the declared space
    auto primed = slot_indices(op.slots, {SlotKind::primed_state});
    for (const auto& row : op.transitions) {
      const std::string& pre_sym = slot_type.values[row.values[st[0]]];
      if (!state.index_of(pre_sym)) continue;
      const std::string& post_sym =
          op.slots[primed[0]].type.values[row.values[primed[0]]];
      if (!state.index_of(post_sym))
        throw Error("datatype " + name + " is not closed under " + op.name +
                    ": " + pre_sym + " steps to " + post_sym);
    }
  }
  return DataType{std::move(name), std::move(state), std::move(init),
                  std::move(ops)};
}

namespace {

// Transition of a datatype operation, state coordinates translated into the
// declared state space.
struct Step {
  ValueIndex pre = 0;
  ValueIndex post = 0;
  Binding inputs;
  Binding outputs;

  auto operator<=>(const Step&) const = default;
};

std::vector<Step> effective_steps(const DataType& dt, const Operation& op) {
  auto st = slot_indices(op.slots, {SlotKind::state});
  auto primed = slot_indices(op.slots, {SlotKind::primed_state});
  auto in_idx = slot_indices(op.slots, {SlotKind::input});
  auto out_idx = slot_indices(op.slots, {SlotKind::output});
  const FiniteType& slot_type = op.slots[st[0]].type;

  std::vector<Step> steps;
  for (const auto& row : op.transitions) {
    auto pre = dt.state.index_of(slot_type.values[row.values[st[0]]]);
    if (!pre) continue;
    auto post = dt.state.index_of(slot_type.values[row.values[primed[0]]]);
    steps.push_back(Step{*pre, *post, project(row, in_idx), project(row, out_idx)});
  }
  std::sort(steps.begin(), steps.end());
  return steps;
}

Witness sim_witness(const DataType& adt, const DataType& cdt,
                    const Operation& cop, ValueIndex a, ValueIndex c,
                    const Step* step) {
  Witness w;
  w.fields.emplace_back("a", adt.state.values[a]);
  w.fields.emplace_back("c", cdt.state.values[c]);
  if (step) {
    auto in_idx = slot_indices(cop.slots, {SlotKind::input});
    for (std::size_t i = 0; i < in_idx.size(); ++i)
      w.fields.emplace_back(cop.slots[in_idx[i]].display_name(),
                            cop.slots[in_idx[i]].type.values[step->inputs.values[i]]);
    w.fields.emplace_back("c'", cdt.state.values[step->post]);
    auto out_idx = slot_indices(cop.slots, {SlotKind::output});
    for (std::size_t i = 0; i < out_idx.size(); ++i)
      w.fields.emplace_back(cop.slots[out_idx[i]].display_name(),
                            cop.slots[out_idx[i]].type.values[step->outputs.values[i]]);
  }
  return w;
}

}  // namespace

CheckReport check_downward_simulation(const DataType& adt, const DataType& cdt,
                                      const RetrieveRelation& retrieve) {
  static const std::string kCheck = "check-data";
  if (retrieve.abstract_type != adt.state || retrieve.concrete_type != cdt.state)
    throw Error("retrieve " + retrieve.name + " is not typed over " +
                adt.state.name + " and " + cdt.state.name);
  if (adt.ops.size() != cdt.ops.size())
    throw Error("datatypes " + adt.name + " and " + cdt.name +
                " declare different numbers of operations");
  for (std::size_t i = 0; i < adt.ops.size(); ++i) {
    if (io_signatures(adt.ops[i]).outputs != io_signatures(cdt.ops[i]).outputs)
      throw Error("operations " + adt.ops[i].name + " and " + cdt.ops[i].name +
                  " differ in output slots");
    if (io_signatures(adt.ops[i]).inputs != io_signatures(cdt.ops[i]).inputs)
      throw Error("operations " + adt.ops[i].name + " and " + cdt.ops[i].name +
                  " differ in input slots");
  }

  std::set<std::pair<ValueIndex, ValueIndex>> coupled(retrieve.pairs.begin(),
                                                      retrieve.pairs.end());

  // initialization: every concrete initial state retrieves to some abstract one
  for (ValueIndex c : cdt.init) {
    bool matched = false;
    for (ValueIndex a : adt.init)
      if (coupled.contains({a, c})) { matched = true; break; }
    if (!matched)
      return fail_report(kCheck, "initialization",
                         {Witness{{{"c", cdt.state.values[c]}}}});
  }

  for (std::size_t opi = 0; opi < adt.ops.size(); ++opi) {
    auto a_steps = effective_steps(adt, adt.ops[opi]);
    auto c_steps = effective_steps(cdt, cdt.ops[opi]);

    std::set<std::pair<ValueIndex, Binding>> pre_a;
    for (const auto& s : a_steps) pre_a.insert({s.pre, s.inputs});
    std::set<std::pair<ValueIndex, Binding>> pre_c;
    for (const auto& s : c_steps) pre_c.insert({s.pre, s.inputs});

    // applicability: abstract definedness carries over along the retrieve
    for (const auto& [a, c] : retrieve.pairs) {
      for (const auto& [pa, inputs] : pre_a) {
        if (pa != a) continue;
        if (!pre_c.contains({c, inputs})) {
          Witness w;
          w.fields.emplace_back("a", adt.state.values[a]);
          w.fields.emplace_back("c", cdt.state.values[c]);
          auto in_idx = slot_indices(cdt.ops[opi].slots, {SlotKind::input});
          for (std::size_t i = 0; i < in_idx.size(); ++i)
            w.fields.emplace_back(
                cdt.ops[opi].slots[in_idx[i]].display_name(),
                cdt.ops[opi].slots[in_idx[i]].type.values[inputs.values[i]]);
          return fail_report(kCheck, "applicability", {w});
        }
      }
    }
  }

  for (std::size_t opi = 0; opi < adt.ops.size(); ++opi) {
    auto a_steps = effective_steps(adt, adt.ops[opi]);
    auto c_steps = effective_steps(cdt, cdt.ops[opi]);

    std::set<std::pair<ValueIndex, Binding>> pre_a;
    for (const auto& s : a_steps) pre_a.insert({s.pre, s.inputs});

    // correctness: every concrete step is matched by an abstract step with
    // the same observable outputs and coupled post-states
    for (const auto& [a, c] : retrieve.pairs) {
      for (const auto& cs : c_steps) {
        if (cs.pre != c) continue;
        if (!pre_a.contains({a, cs.inputs})) continue;
        bool matched = false;
        for (const auto& as : a_steps) {
          if (as.pre != a || as.inputs != cs.inputs || as.outputs != cs.outputs)
            continue;
          if (coupled.contains({as.post, cs.post})) { matched = true; break; }
        }
        if (!matched)
          return fail_report(kCheck, "correctness",
                             {sim_witness(adt, cdt, cdt.ops[opi], a, c, &cs)});
      }
    }
  }
  return pass_report(kCheck);
}

}  // namespace refinery
