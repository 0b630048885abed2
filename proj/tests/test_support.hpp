#pragma once

// Shared fixtures for the test suites: golden-file loading, seeded random
// generators for small models, and naive brute-force oracles kept independent
// of the library's implementation paths.

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "refinery/dsl.hpp"
#include "refinery/noise.hpp"
#include "refinery/prob.hpp"
#include "refinery/refinement.hpp"

namespace testsupport {

using namespace refinery;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string specs_dir() { return SPECS_DIR; }

inline Workspace load_workspace(const std::string& name) {
  ParseResult parsed = parse_spec(read_file(specs_dir() + "/" + name));
  if (!parsed.ok()) {
    std::string detail;
    for (const auto& d : parsed.diagnostics)
      detail += "\n  " + format_diagnostic(d);
    throw std::runtime_error(name + " does not parse:" + detail);
  }
  return *parsed.workspace;
}

inline const Workspace& canonical() {
  static Workspace ws = load_workspace("canonical.rfn");
  return ws;
}

// ---- random model generators (seeded, reproducible) ----

inline FiniteType random_type(std::mt19937& rng, const std::string& name,
                              int max_size) {
  std::uniform_int_distribution<int> size_dist(1, max_size);
  int n = size_dist(rng);
  std::vector<std::string> values;
  for (int i = 0; i < n; ++i) values.push_back(name + "v" + std::to_string(i));
  return make_finite_type(name, values);
}

/// Random subset of the full tuple space as the transition set.
inline std::vector<Binding> random_rows(std::mt19937& rng,
                                        const std::vector<Slot>& slots,
                                        double density) {
  std::bernoulli_distribution keep(density);
  std::vector<Binding> rows;
  for (const auto& tuple : all_tuples(slots))
    if (keep(rng)) rows.push_back(tuple);
  return rows;
}

/// One state pair, sometimes an input, one or two outputs, random rows.
inline Operation random_operation(std::mt19937& rng, const std::string& name) {
  std::vector<Slot> slots;
  add_state_pair(slots, "x", random_type(rng, name + "S", 3));
  std::bernoulli_distribution coin(0.5);
  if (coin(rng)) slots.push_back(input_slot("q", random_type(rng, name + "I", 2)));
  slots.push_back(output_slot("y", random_type(rng, name + "O", 3)));
  if (coin(rng)) slots.push_back(output_slot("z", random_type(rng, name + "P", 2)));
  return make_operation(name, slots, random_rows(rng, slots, 0.5));
}

inline IOTransformer random_transformer(std::mt19937& rng, const std::string& name) {
  std::vector<Slot> slots;
  std::uniform_int_distribution<int> count(1, 2);
  int ins = count(rng), outs = count(rng);
  for (int i = 0; i < ins; ++i)
    slots.push_back(input_slot("a" + std::to_string(i),
                               random_type(rng, name + "A" + std::to_string(i), 3)));
  for (int i = 0; i < outs; ++i)
    slots.push_back(output_slot("b" + std::to_string(i),
                                random_type(rng, name + "B" + std::to_string(i), 3)));
  return make_io_transformer(name, slots, random_rows(rng, slots, 0.4));
}

inline NoiseModel random_noise_model(std::mt19937& rng, const std::string& name) {
  FiniteType signal = random_type(rng, name + "Sig", 4);
  FiniteType noise = random_type(rng, name + "Noi", 3);
  std::uniform_int_distribution<std::size_t> pick(0, signal.size() - 1);
  std::vector<std::array<std::string, 3>> rows;
  for (const auto& s : signal.values)
    for (const auto& n : noise.values)
      rows.push_back({s, n, signal.values[pick(rng)]});
  return make_noise_model(name, signal, noise, rows);
}

// ---- brute-force oracles ----

/// Naive totality/injectivity/functionality by scanning the pair list per
/// tuple, no maps or projections shared with the library path.
inline TransformerProperties oracle_transformer_properties(const IOTransformer& t) {
  std::vector<Slot> ins, outs;
  std::vector<std::size_t> in_pos, out_pos;
  for (std::size_t i = 0; i < t.slots.size(); ++i) {
    if (t.slots[i].kind == SlotKind::input) { ins.push_back(t.slots[i]); in_pos.push_back(i); }
    if (t.slots[i].kind == SlotKind::output) { outs.push_back(t.slots[i]); out_pos.push_back(i); }
  }
  auto matches = [](const Binding& row, const std::vector<std::size_t>& pos,
                    const Binding& tuple) {
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (row.values[pos[i]] != tuple.values[i]) return false;
    return true;
  };

  TransformerProperties props;
  props.total = true;
  props.functional = true;
  props.injective = true;
  for (const auto& x : all_tuples(ins)) {
    std::vector<Binding> images;
    for (const auto& row : t.pairs) {
      if (!matches(row, in_pos, x)) continue;
      Binding image;
      for (std::size_t p : out_pos) image.values.push_back(row.values[p]);
      bool seen = false;
      for (const auto& existing : images)
        if (existing == image) seen = true;
      if (!seen) images.push_back(image);
    }
    if (images.empty()) props.total = false;
    if (images.size() > 1) props.functional = false;
  }
  for (const auto& y : all_tuples(outs)) {
    std::vector<Binding> sources;
    for (const auto& row : t.pairs) {
      if (!matches(row, out_pos, y)) continue;
      Binding source;
      for (std::size_t p : in_pos) source.values.push_back(row.values[p]);
      bool seen = false;
      for (const auto& existing : sources)
        if (existing == source) seen = true;
      if (!seen) sources.push_back(source);
    }
    if (sources.size() > 1) props.injective = false;
  }
  return props;
}

struct OracleVerdict {
  bool pass = true;
  std::string condition;
};

/// Downward simulation by naive quantifier enumeration over symbols.
inline OracleVerdict oracle_downward_simulation(const DataType& adt,
                                                const DataType& cdt,
                                                const RetrieveRelation& r) {
  auto related = [&](const std::string& a, const std::string& c) {
    for (const auto& [ai, ci] : r.pairs)
      if (r.abstract_type.values[ai] == a && r.concrete_type.values[ci] == c)
        return true;
    return false;
  };
  auto symbol_rows = [](const DataType& dt, const Operation& op) {
    // (state, inputs..., state', outputs...) as symbols, declared space only
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : op.transitions) {
      std::vector<std::string> pre_state, post_state, ins, outs;
      for (std::size_t i = 0; i < op.slots.size(); ++i) {
        const std::string& sym = op.slots[i].type.values[row.values[i]];
        switch (op.slots[i].kind) {
          case SlotKind::state: pre_state.push_back(sym); break;
          case SlotKind::primed_state: post_state.push_back(sym); break;
          case SlotKind::input: ins.push_back(sym); break;
          case SlotKind::output: outs.push_back(sym); break;
        }
      }
      if (!dt.state.index_of(pre_state[0])) continue;
      std::vector<std::string> flat;
      flat.push_back(pre_state[0]);
      flat.insert(flat.end(), ins.begin(), ins.end());
      flat.push_back(post_state[0]);
      flat.insert(flat.end(), outs.begin(), outs.end());
      rows.push_back(flat);
    }
    return rows;
  };

  for (ValueIndex ci : cdt.init) {
    bool ok = false;
    for (ValueIndex ai : adt.init)
      if (related(adt.state.values[ai], cdt.state.values[ci])) ok = true;
    if (!ok) return {false, "initialization"};
  }

  for (std::size_t opi = 0; opi < adt.ops.size(); ++opi) {
    auto a_rows = symbol_rows(adt, adt.ops[opi]);
    auto c_rows = symbol_rows(cdt, cdt.ops[opi]);
    std::size_t in_count = 0;
    for (const auto& s : adt.ops[opi].slots)
      if (s.kind == SlotKind::input) ++in_count;

    auto inputs_of = [&](const std::vector<std::string>& row) {
      return std::vector<std::string>(row.begin() + 1, row.begin() + 1 + in_count);
    };
    // applicability
    for (const auto& a : adt.state.values)
      for (const auto& c : cdt.state.values) {
        if (!related(a, c)) continue;
        for (const auto& ar : a_rows) {
          if (ar[0] != a) continue;
          bool defined = false;
          for (const auto& cr : c_rows)
            if (cr[0] == c && inputs_of(cr) == inputs_of(ar)) defined = true;
          if (!defined) return {false, "applicability"};
        }
      }
  }

  for (std::size_t opi = 0; opi < adt.ops.size(); ++opi) {
    auto a_rows = symbol_rows(adt, adt.ops[opi]);
    auto c_rows = symbol_rows(cdt, cdt.ops[opi]);
    std::size_t in_count = 0;
    for (const auto& s : adt.ops[opi].slots)
      if (s.kind == SlotKind::input) ++in_count;
    auto inputs_of = [&](const std::vector<std::string>& row) {
      return std::vector<std::string>(row.begin() + 1, row.begin() + 1 + in_count);
    };
    auto outputs_of = [&](const std::vector<std::string>& row) {
      return std::vector<std::string>(row.begin() + 2 + in_count, row.end());
    };
    // correctness
    for (const auto& a : adt.state.values)
      for (const auto& c : cdt.state.values) {
        if (!related(a, c)) continue;
        for (const auto& cr : c_rows) {
          if (cr[0] != c) continue;
          bool abstract_defined = false;
          for (const auto& ar : a_rows)
            if (ar[0] == a && inputs_of(ar) == inputs_of(cr))
              abstract_defined = true;
          if (!abstract_defined) continue;
          bool matched = false;
          for (const auto& ar : a_rows) {
            if (ar[0] != a || inputs_of(ar) != inputs_of(cr)) continue;
            if (outputs_of(ar) != outputs_of(cr)) continue;
            if (related(ar[1 + in_count], cr[1 + in_count])) matched = true;
          }
          if (!matched) return {false, "correctness"};
        }
      }
  }
  return {true, ""};
}

/// Absorption by symbol-level triple enumeration over a rebuilt table.
inline OracleVerdict oracle_absorption(const NoiseModel& m) {
  std::vector<std::pair<std::pair<std::string, std::string>, std::string>> table;
  for (ValueIndex s = 0; s < m.signal.size(); ++s)
    for (ValueIndex n = 0; n < m.noise.size(); ++n)
      table.push_back({{m.signal.values[s], m.noise.values[n]},
                       m.signal.values[m.out(s, n)]});
  auto out = [&](const std::string& s, const std::string& n) {
    for (const auto& [key, result] : table)
      if (key.first == s && key.second == n) return result;
    return std::string();
  };
  for (const auto& a : m.signal.values)
    for (const auto& x : m.noise.values)
      for (const auto& y : m.noise.values) {
        std::string twice = out(out(a, x), y);
        bool ok = false;
        for (const auto& z : m.noise.values)
          if (out(a, z) == twice) ok = true;
        if (!ok) return {false, "absorption"};
      }
  return {true, ""};
}

/// Plain applicability + transition containment, the identity-noise baseline.
inline OracleVerdict oracle_plain_containment(const Operation& aop,
                                              const Operation& cop) {
  ProjectedRelation pre_a = precondition(aop);
  ProjectedRelation pre_c = precondition(cop);
  for (const auto& row : pre_a.rows)
    if (!contains_row(pre_c.rows, row)) return {false, "applicability"};
  auto pre_idx = slot_indices(cop.slots, {SlotKind::state, SlotKind::input});
  for (const auto& row : cop.transitions) {
    bool in_pre = contains_row(pre_a.rows, project(row, pre_idx));
    if (in_pre && !contains_row(aop.transitions, row))
      return {false, "noise-match"};
  }
  return {true, ""};
}

/// Point-distribution embedding of a relational operation.
inline ProbOperation point_embedding(const Operation& op) {
  auto pre_idx = slot_indices(op.slots, {SlotKind::state, SlotKind::input});
  auto post_idx = slot_indices(op.slots, {SlotKind::primed_state, SlotKind::output});
  std::vector<std::pair<Binding, std::vector<Distribution>>> behavior;
  for (const auto& row : op.transitions)
    behavior.emplace_back(project(row, pre_idx),
                          std::vector<Distribution>{
                              point_distribution(project(row, post_idx))});
  return make_prob_operation(op.name, op.slots, std::move(behavior));
}

}  // namespace testsupport
