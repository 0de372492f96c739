// SPDX-License-Identifier: Apache-2.0
//
// Path enumeration and layout resolution. A "path" fixes every branch of a
// FormatSpec (guard outcomes and variant arms); most of the toolkit works
// per path: the generator picks one, the differ aligns them pairwise and
// the validator checks invariants on each.

#ifndef PFV_LAYOUT_HPP
#define PFV_LAYOUT_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pfv/ast.hpp"
#include "pfv/eval.hpp"

namespace pfv::dsl {

struct PathChoice {
    enum class Kind { Guard, Variant };
    Kind kind = Kind::Guard;
    const Section* section = nullptr;
    bool guard_value = false;  // Guard
    bool is_default = false;   // Variant
    std::uint64_t tag = 0;     // Variant, when !is_default
};

struct ResolvedPath {
    std::vector<PathChoice> choices;
    std::string label;
};

// Every syntactic path through the spec: each guard both ways, each variant
// arm (plus the default arm when present). Throws pfv::Error("paths") when
// the count exceeds cap.
std::vector<ResolvedPath> enumerate_paths(const FormatSpec& spec, std::size_t cap = 4096);

// Evaluation order within one record section: fields interleaved with
// free-standing checks at their anchors.
using RecordOp = std::variant<const FieldDef*, const AnchoredConstraint*>;
std::vector<RecordOp> record_ops(const Section& record);

struct PlacedField {
    const FieldDef* def = nullptr;
    std::string path;                      // structural location, e.g. "if(a == 1)/auth_type"
    std::uint64_t static_bit_offset = 0;   // fixed-width bits preceding this field
    int dyn_prefix = 0;                    // dynamic-length fields preceding this field
};

struct PlacedCheck {
    const Constraint* constraint = nullptr;
    std::string path;
    bool from_field = false;
    std::string field_name;  // owning field when from_field
};

struct FlatOp {
    enum class Kind { Field, Check };
    Kind kind = Kind::Field;
    PlacedField field;
    PlacedCheck check;
};

struct FlatPath {
    ResolvedPath path;
    std::vector<FlatOp> ops;
    std::uint64_t static_bits = 0;
    int dyn_fields = 0;
};

FlatPath flatten_path(const FormatSpec& spec, const ResolvedPath& path);

class LayoutError : public pfv::Error {
public:
    explicit LayoutError(const std::string& message) : pfv::Error("layout", message) {}
};

struct LayoutRow {
    std::string field;
    std::uint64_t bit_offset = 0;
    std::uint64_t bit_width = 0;
};

// Resolves the concrete layout for one environment. env must determine
// every guard and discriminator on the taken path; byte-array lengths are
// evaluated over env plus total_len when the expression needs it.
std::vector<LayoutRow> resolve_layout(const FormatSpec& spec, const Env& env,
                                      std::optional<std::uint64_t> total_len = std::nullopt);

}  // namespace pfv::dsl

#endif
