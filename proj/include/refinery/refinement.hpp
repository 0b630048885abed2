#pragma once

#include <cstdint>

#include "refinery/schema.hpp"

namespace refinery {

/// Coupling relation between an abstract and a concrete state space.
struct RetrieveRelation {
  std::string name;
  FiniteType abstract_type;
  FiniteType concrete_type;
  std::vector<std::pair<ValueIndex, ValueIndex>> pairs;

  bool operator==(const RetrieveRelation&) const = default;
};

RetrieveRelation make_retrieve(
    std::string name, FiniteType abstract_type, FiniteType concrete_type,
    const std::vector<std::pair<std::string, std::string>>& pairs);

RetrieveRelation identity_retrieve(const FiniteType& type);
RetrieveRelation universal_retrieve(const FiniteType& abstract_type,
                                    const FiniteType& concrete_type);

/// A state space with initial states and the operations running over it. The
/// declared state type may be a value subset of an operation's state slot
/// type; transitions are then restricted to the declared space, which must be
/// closed under every operation.
struct DataType {
  std::string name;
  FiniteType state;
  std::vector<ValueIndex> init;  // indices into state.values
  std::vector<Operation> ops;

  bool operator==(const DataType&) const = default;
};

/// init_symbols absent means every state is initial.
DataType make_datatype(std::string name, FiniteType state,
                       std::optional<std::vector<std::string>> init_symbols,
                       std::vector<Operation> ops);

/// Plain output refinement: ot must be a total injective output transformer
/// for aop, preconditions must widen, and every cop step from an abstract
/// precondition must land inside pipe(aop, ot).
CheckReport check_output_refinement(const Operation& aop, const Operation& cop,
                                    const IOTransformer& ot);

enum class SearchOutcome { found, proven_absent, budget_exhausted };

struct TransformerSearch {
  SearchOutcome outcome = SearchOutcome::proven_absent;
  std::optional<IOTransformer> transformer;
  std::uint64_t examined = 0;

  bool found() const { return outcome == SearchOutcome::found; }
};

/// Enumerates candidate relations from aop's output space to cop's output
/// space — pairs ordered by value indices, candidates by increasing pair
/// count — and returns the first one passing check_output_refinement.
/// An exhausted enumeration proves that no transformer exists; running out
/// of budget instead is reported as a distinct outcome.
TransformerSearch search_output_transformer(const Operation& aop,
                                            const Operation& cop,
                                            std::uint64_t budget);

struct AbstractionCheck {
  CheckReport report;
  std::optional<IOTransformer> transformer;  // the witness, on pass
  SearchOutcome outcome = SearchOutcome::proven_absent;
};

/// Output refinement in the direction aop -> cop, established by searching
/// for a witness transformer. Passing means cop's outputs abstract to aop's.
AbstractionCheck check_output_abstraction(const Operation& aop,
                                          const Operation& cop,
                                          std::uint64_t budget);

/// Downward simulation with an explicit retrieve relation: initialization,
/// applicability and correctness, checked by exhaustive enumeration. The two
/// data types must carry the same number of operations; operations are
/// matched positionally and must agree on input and output slots.
CheckReport check_downward_simulation(const DataType& adt, const DataType& cdt,
                                      const RetrieveRelation& retrieve);

}  // namespace refinery
