#pragma once

#include "refinery/core.hpp"

namespace refinery {

/// The slot structure of a schema with all predicate content discarded.
struct Signature {
  std::vector<Slot> slots;

  bool operator==(const Signature&) const = default;
};

Signature signature_of(const Operation& op);

struct IoSignature {
  std::vector<Slot> inputs;
  std::vector<Slot> outputs;

  bool operator==(const IoSignature&) const = default;
};

/// Input and output slots of an operation, in declaration order.
IoSignature io_signatures(const Operation& op);

/// A relation with only inputs and outputs, no state.
struct IOTransformer {
  std::string name;
  std::vector<Slot> slots;
  std::vector<Binding> pairs;

  bool operator==(const IOTransformer&) const = default;
};

IOTransformer make_io_transformer(std::string name, std::vector<Slot> slots,
                                  std::vector<Binding> pairs);

/// Swaps all inputs and outputs; an involution. The pair set is unchanged up
/// to the slot renaming.
IOTransformer converse(const IOTransformer& t);

/// True iff the inputs of t match exactly the outputs of s, compared by base
/// name and type.
bool is_output_transformer(const IOTransformer& t, const Operation& s);

struct TransformerProperties {
  bool total = false;       // every input tuple over the full product is related
  bool injective = false;   // the converse is functional
  bool functional = false;  // each input tuple has at most one image

  bool operator==(const TransformerProperties&) const = default;
};

TransformerProperties transformer_properties(const IOTransformer& t);

/// A relation over a sublist of an operation's slots.
struct ProjectedRelation {
  std::vector<Slot> slots;
  std::vector<Binding> rows;

  bool operator==(const ProjectedRelation&) const = default;
};

/// Projection of the transitions onto state and input slots: where the
/// operation is defined.
ProjectedRelation precondition(const Operation& op);

/// Post-composes s with the output transformer t, hiding the intermediate
/// outputs. Result slots are s's non-output slots followed by t's output
/// slots, names kept verbatim.
Operation pipe(const Operation& s, const IOTransformer& t);

/// The transformer that copies every output tuple of s unchanged. It is a
/// total injective functional output transformer for s.
IOTransformer identity_output_transformer(const Operation& s);

}  // namespace refinery
