#pragma once

#include <array>

#include "refinery/schema.hpp"

namespace refinery {

/// A total table out: SIGNAL x NOISE -> SIGNAL describing how noise
/// obfuscates a signal value.
struct NoiseModel {
  std::string name;
  FiniteType signal;
  FiniteType noise;
  std::vector<ValueIndex> table;  // table[s * |noise| + n] = signal index

  bool operator==(const NoiseModel&) const = default;

  ValueIndex out(ValueIndex s, ValueIndex n) const {
    return table[s * noise.size() + n];
  }
};

/// Rows are (signal, noise, result) symbol triples; the table must be total
/// with no duplicate cell.
NoiseModel make_noise_model(
    std::string name, FiniteType signal, FiniteType noise,
    const std::vector<std::array<std::string, 3>>& rows);

/// Absorption axiom: adding noise twice equals adding it once — for all a, x,
/// y there is a z with out(out(a,x),y) = out(a,z).
CheckReport check_absorption(const NoiseModel& m);

/// The obfuscations of a signal value: { out(a, x) | x in NOISE }, returned
/// in signal declaration order.
std::vector<std::string> noise_orbit(const NoiseModel& m, std::string_view a);

struct BuiltOot {
  IOTransformer transformer;
  TransformerProperties properties;
};

/// The original output transformer of the model: input ot?, output oo!, with
/// (t, o) paired iff t = out(o, x) for some noise x. Noisy output refinement
/// wants this functional from modified to original output; the attached
/// properties record whether it is.
BuiltOot build_oot(const NoiseModel& m);

/// Refinement modulo addition of noise to outputs: preconditions must widen
/// and every concrete step from an abstract precondition must match an
/// abstract step up to noise on the single SIGNAL output. A non-functional
/// original output transformer downgrades an otherwise clean pass to
/// failed-condition oot-functionality.
CheckReport check_noisy_refinement(const Operation& aop, const Operation& cop,
                                   const NoiseModel& m);

}  // namespace refinery
