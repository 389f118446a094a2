#pragma once

#include "skewar/baseline_gaussian.hpp"
#include "skewar/identifier.hpp"

#include <iosfwd>
#include <string>
#include <variant>

namespace skewar {

// Versioned text checkpoint of a filter state.
//
//   skewar-state 1
//   kind skew|gaussian
//   n_ar <int>
//   n_z <int>
//   x <n_ar>
//   <values...>
//   P_sqrt <rows> <cols>         (lower Cholesky factor of P)
//   <row-major values, one row per line>
//   DeltaHat <rows> <cols>      (skew only)
//   V <rows> <cols>             (skew only)
//   Psi <rows> <cols>
//   nu <value>
//   end
//
// Numbers are written with 17 significant digits, so a write/read cycle is
// exact.
using AnyFilterState = std::variant<FilterState, GaussianFilterState>;

void write_snapshot(std::ostream& out, const FilterState& state);
void write_snapshot(std::ostream& out, const GaussianFilterState& state);

// Throws ValidationError with the offending line number on malformed input.
AnyFilterState read_snapshot(std::istream& in);

std::string to_snapshot_string(const AnyFilterState& state);

}  // namespace skewar
