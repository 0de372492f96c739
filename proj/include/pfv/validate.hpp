// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_VALIDATE_HPP
#define PFV_VALIDATE_HPP

#include <vector>

#include "pfv/ast.hpp"

namespace pfv::dsl {

// Semantic well-formedness beyond the grammar. Returns one diagnostic per
// violated invariant; empty means the spec is ready for layout resolution,
// generation and diffing. Violations are data, not failures.
//
// Checked invariants:
//   - at least one field; no empty bodies
//   - identifier scoping: references resolve to fields declared earlier on
//     the same path; no duplicate names along a path
//   - expressions well-typed; byte-array fields never referenced
//   - integer widths within 1..64
//   - variant discriminators are earlier unsigned-integer fields of width
//     <= 16 bits; arm tags distinct and within the discriminator range
//   - byte-array fields begin on byte boundaries; conditional bodies and
//     variant arms cover whole bytes; the format covers whole bytes
//   - byte-array length expressions are non-negative on every environment
//     satisfying the earlier constraints (decided by bounded enumeration,
//     with deterministic sampling above the cutoff; only concrete
//     counterexamples are reported)
std::vector<Diagnostic> validate_spec(const FormatSpec& spec);

}  // namespace pfv::dsl

#endif
