// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_PARSE_HPP
#define PFV_PARSE_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "pfv/ast.hpp"

namespace pfv::dsl {

struct ParseResult {
    std::optional<FormatSpec> spec;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return spec.has_value() && !has_errors(diagnostics); }
};

// Parses PFS source text. Input starting with '{' is treated as the
// canonical JSON form and routed through the JSON decoder, so canonical
// output round-trips through this same entry point.
ParseResult parse_spec(std::string_view text);

// Expression-only entry point (used by tests and fixtures). Performs no
// scope resolution; every identifier is assumed to be an integer field.
struct ExprParseResult {
    ExprPtr expr;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return expr != nullptr && !has_errors(diagnostics); }
};
ExprParseResult parse_expr(std::string_view text);

}  // namespace pfv::dsl

#endif
