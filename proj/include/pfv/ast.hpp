// SPDX-License-Identifier: Apache-2.0
//
// Abstract syntax for the packet format specification language (PFS).
// A FormatSpec is the unified intermediate representation shared by the
// checker, the generators, the differ and the agent pipeline.

#ifndef PFV_AST_HPP
#define PFV_AST_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pfv::dsl {

struct SourceSpan {
    int line = 0;
    int col = 0;
    int end_line = 0;
    int end_col = 0;
};

enum class BinOp { Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, And, Or };

const char* bin_op_text(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expression tree over field references, integer literals and the
// total-length builtin. Immutable; nodes are shared freely.
struct Expr {
    enum class Kind { IntLit, FieldRef, TotalLen, Binary, Not };

    Kind kind = Kind::IntLit;
    std::uint64_t int_value = 0;  // IntLit
    std::string field;            // FieldRef
    BinOp op = BinOp::Eq;         // Binary
    ExprPtr lhs, rhs;             // Binary; Not uses lhs only
    SourceSpan span;
};

ExprPtr make_int(std::uint64_t v);
ExprPtr make_field(std::string name);
ExprPtr make_total_len();
ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_not(ExprPtr arg);

// Fully parenthesized normalized rendering; the basis for constraint ids
// and canonical serialization of expressions.
std::string expr_text(const Expr& e);
inline std::string expr_text(const ExprPtr& e) { return expr_text(*e); }

bool expr_equal(const Expr& a, const Expr& b);

void collect_field_refs(const Expr& e, std::set<std::string>& out);
bool expr_uses_total_len(const Expr& e);

// Boolean expression attached to a field, a guard, or the spec itself.
// The id is a content hash of the normalized expression text, so it is
// stable across re-extraction of the same constraint.
struct Constraint {
    std::string id;
    ExprPtr expr;
    SourceSpan span;
};

Constraint make_constraint(ExprPtr expr);
std::string constraint_id(const Expr& expr);

struct FieldType {
    enum class Kind { UInt, Bytes };
    Kind kind = Kind::UInt;
    int bits = 0;      // UInt: 1..64
    ExprPtr length;    // Bytes: byte count expression over earlier fields / total_len
};

struct FieldDef {
    std::string name;
    FieldType type;
    std::vector<Constraint> constraints;
    SourceSpan span;
};

struct Section;

struct VariantArm {
    std::uint64_t tag = 0;
    std::vector<Section> body;
};

// A free-standing `where` inside a record; evaluated after the first
// `after_field` fields of the record have been decoded.
struct AnchoredConstraint {
    std::size_t after_field = 0;
    Constraint constraint;
};

// kind == Record: ordered fields plus anchored spec-level constraints.
// kind == Conditional: guard + body sections (body present when guard holds).
// kind == Variant: discriminator field reference, tag-keyed arms, optional
// default arm. Unmatched tags without a default reject structurally.
struct Section {
    enum class Kind { Record, Conditional, Variant };

    Kind kind = Kind::Record;

    // Record
    std::vector<FieldDef> fields;
    std::vector<AnchoredConstraint> checks;

    // Conditional
    Constraint guard;
    std::vector<Section> body;

    // Variant
    std::string discriminator;
    std::vector<VariantArm> arms;
    std::optional<std::vector<Section>> default_arm;

    SourceSpan span;
};

struct GlobalConstraintRef {
    std::string path;  // structural path of the anchor point
    const Constraint* constraint = nullptr;
};

struct FormatSpec {
    std::string name;
    std::vector<Section> sections;

    // Flattened view of every free-standing `where` in the tree.
    std::vector<GlobalConstraintRef> global_constraints() const;
};

bool spec_equal(const FormatSpec& a, const FormatSpec& b);

struct SpecStats {
    std::size_t field_names = 0;
    std::size_t field_types = 0;
    std::size_t constraints = 0;
};

// Declaration counts over the whole tree (fields count once per
// declaration; constraints include attached and free-standing ones).
SpecStats spec_stats(const FormatSpec& spec);

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string code;     // stable kebab-case diagnostic code
    std::string message;
    SourceSpan span;
};

std::string render_diagnostics(const std::vector<Diagnostic>& diags);
bool has_errors(const std::vector<Diagnostic>& diags);

}  // namespace pfv::dsl

#endif
