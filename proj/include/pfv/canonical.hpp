// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_CANONICAL_HPP
#define PFV_CANONICAL_HPP

#include <string>
#include <string_view>

#include <json.hpp>

#include "pfv/ast.hpp"
#include "pfv/parse.hpp"

namespace pfv::dsl {

inline constexpr int kSpecSchemaVersion = 1;

nlohmann::json expr_to_json(const Expr& e);
ExprPtr expr_from_json(const nlohmann::json& j);

nlohmann::json spec_to_json(const FormatSpec& spec);

// Deterministic canonical text: sorted keys, two-space indent, trailing
// newline. Byte-identical for structurally equal specs.
std::string serialize_canonical(const FormatSpec& spec);

FormatSpec spec_from_json(const nlohmann::json& j);  // throws pfv::Error("schema", ...)
ParseResult spec_from_json_text(std::string_view text);

// Content digest of the canonical form.
std::string spec_digest(const FormatSpec& spec);

}  // namespace pfv::dsl

#endif
