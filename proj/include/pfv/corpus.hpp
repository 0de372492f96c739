// SPDX-License-Identifier: Apache-2.0
//
// Native reference checker for the BFD corpus: implements exactly the
// validation behavior of the reference parsing module (version, detect
// multiplier and length-field checks; deliberately no authentication
// handling), so tests can compare the module, the code-side spec and this
// function against each other.

#ifndef PFV_CORPUS_HPP
#define PFV_CORPUS_HPP

#include <span>

#include "pfv/packets.hpp"

namespace pfv::corpus {

gen::CheckResult reference_bfd_check(std::span<const std::uint8_t> bytes);

// Constraint ids of the code-side fixture, shared vocabulary with the
// fixture spec (content hashes of the normalized expressions).
const std::string& version_constraint_id();
const std::string& detect_mult_constraint_id();
const std::string& min_length_constraint_id();
const std::string& length_bound_constraint_id();

}  // namespace pfv::corpus

#endif
