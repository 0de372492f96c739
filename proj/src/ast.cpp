// SPDX-License-Identifier: Apache-2.0

#include "pfv/ast.hpp"

#include <sstream>

#include "pfv/util.hpp"

namespace pfv::dsl {

const char* bin_op_text(BinOp op) {
    switch (op) {
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::And: return "and";
        case BinOp::Or: return "or";
    }
    return "?";
}

ExprPtr make_int(std::uint64_t v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::IntLit;
    e->int_value = v;
    return e;
}

ExprPtr make_field(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::FieldRef;
    e->field = std::move(name);
    return e;
}

ExprPtr make_total_len() {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::TotalLen;
    return e;
}

ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

ExprPtr make_not(ExprPtr arg) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Not;
    e->lhs = std::move(arg);
    return e;
}

std::string expr_text(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::IntLit: return std::to_string(e.int_value);
        case Expr::Kind::FieldRef: return e.field;
        case Expr::Kind::TotalLen: return "total_len";
        case Expr::Kind::Not: return "(not " + expr_text(*e.lhs) + ")";
        case Expr::Kind::Binary:
            return "(" + expr_text(*e.lhs) + " " + bin_op_text(e.op) + " " +
                   expr_text(*e.rhs) + ")";
    }
    return "?";
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::IntLit: return a.int_value == b.int_value;
        case Expr::Kind::FieldRef: return a.field == b.field;
        case Expr::Kind::TotalLen: return true;
        case Expr::Kind::Not: return expr_equal(*a.lhs, *b.lhs);
        case Expr::Kind::Binary:
            return a.op == b.op && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
    }
    return false;
}

void collect_field_refs(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::FieldRef: out.insert(e.field); break;
        case Expr::Kind::Not: collect_field_refs(*e.lhs, out); break;
        case Expr::Kind::Binary:
            collect_field_refs(*e.lhs, out);
            collect_field_refs(*e.rhs, out);
            break;
        default: break;
    }
}

bool expr_uses_total_len(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::TotalLen: return true;
        case Expr::Kind::Not: return expr_uses_total_len(*e.lhs);
        case Expr::Kind::Binary:
            return expr_uses_total_len(*e.lhs) || expr_uses_total_len(*e.rhs);
        default: return false;
    }
}

std::string constraint_id(const Expr& expr) { return "k" + digest_hex(expr_text(expr)); }

Constraint make_constraint(ExprPtr expr) {
    Constraint c;
    c.id = constraint_id(*expr);
    c.expr = std::move(expr);
    return c;
}

static bool field_type_equal(const FieldType& a, const FieldType& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == FieldType::Kind::UInt) return a.bits == b.bits;
    return expr_equal(*a.length, *b.length);
}

static bool constraint_equal(const Constraint& a, const Constraint& b) {
    return a.id == b.id && expr_equal(*a.expr, *b.expr);
}

static bool section_equal(const Section& a, const Section& b);

static bool body_equal(const std::vector<Section>& a, const std::vector<Section>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!section_equal(a[i], b[i])) return false;
    return true;
}

static bool section_equal(const Section& a, const Section& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Section::Kind::Record: {
            if (a.fields.size() != b.fields.size()) return false;
            for (std::size_t i = 0; i < a.fields.size(); ++i) {
                if (a.fields[i].name != b.fields[i].name) return false;
                if (!field_type_equal(a.fields[i].type, b.fields[i].type)) return false;
                if (a.fields[i].constraints.size() != b.fields[i].constraints.size())
                    return false;
                for (std::size_t j = 0; j < a.fields[i].constraints.size(); ++j)
                    if (!constraint_equal(a.fields[i].constraints[j], b.fields[i].constraints[j]))
                        return false;
            }
            if (a.checks.size() != b.checks.size()) return false;
            for (std::size_t i = 0; i < a.checks.size(); ++i) {
                if (a.checks[i].after_field != b.checks[i].after_field) return false;
                if (!constraint_equal(a.checks[i].constraint, b.checks[i].constraint))
                    return false;
            }
            return true;
        }
        case Section::Kind::Conditional:
            return constraint_equal(a.guard, b.guard) && body_equal(a.body, b.body);
        case Section::Kind::Variant: {
            if (a.discriminator != b.discriminator) return false;
            if (a.arms.size() != b.arms.size()) return false;
            for (std::size_t i = 0; i < a.arms.size(); ++i) {
                if (a.arms[i].tag != b.arms[i].tag) return false;
                if (!body_equal(a.arms[i].body, b.arms[i].body)) return false;
            }
            if (a.default_arm.has_value() != b.default_arm.has_value()) return false;
            if (a.default_arm && !body_equal(*a.default_arm, *b.default_arm)) return false;
            return true;
        }
    }
    return false;
}

bool spec_equal(const FormatSpec& a, const FormatSpec& b) {
    return a.name == b.name && body_equal(a.sections, b.sections);
}

static void walk_globals(const std::vector<Section>& body, const std::string& prefix,
                         std::vector<GlobalConstraintRef>& out);

static void walk_globals_section(const Section& s, const std::string& prefix,
                                 std::vector<GlobalConstraintRef>& out) {
    switch (s.kind) {
        case Section::Kind::Record:
            for (const auto& ac : s.checks) {
                std::string anchor = ac.after_field == 0
                                         ? std::string("^")
                                         : s.fields[ac.after_field - 1].name;
                out.push_back({prefix + "where@" + anchor, &ac.constraint});
            }
            break;
        case Section::Kind::Conditional:
            walk_globals(s.body, prefix + "if(" + expr_text(*s.guard.expr) + ")/", out);
            break;
        case Section::Kind::Variant: {
            std::string base = prefix + "switch(" + s.discriminator + ")/";
            for (const auto& arm : s.arms)
                walk_globals(arm.body, base + "case(" + std::to_string(arm.tag) + ")/", out);
            if (s.default_arm) walk_globals(*s.default_arm, base + "default/", out);
            break;
        }
    }
}

static void walk_globals(const std::vector<Section>& body, const std::string& prefix,
                         std::vector<GlobalConstraintRef>& out) {
    for (const auto& s : body) walk_globals_section(s, prefix, out);
}

std::vector<GlobalConstraintRef> FormatSpec::global_constraints() const {
    std::vector<GlobalConstraintRef> out;
    walk_globals(sections, "", out);
    return out;
}

static void stats_body(const std::vector<Section>& body, SpecStats& st);

static void stats_section(const Section& s, SpecStats& st) {
    switch (s.kind) {
        case Section::Kind::Record:
            for (const auto& f : s.fields) {
                ++st.field_names;
                ++st.field_types;
                st.constraints += f.constraints.size();
            }
            st.constraints += s.checks.size();
            break;
        case Section::Kind::Conditional: stats_body(s.body, st); break;
        case Section::Kind::Variant:
            for (const auto& arm : s.arms) stats_body(arm.body, st);
            if (s.default_arm) stats_body(*s.default_arm, st);
            break;
    }
}

static void stats_body(const std::vector<Section>& body, SpecStats& st) {
    for (const auto& s : body) stats_section(s, st);
}

SpecStats spec_stats(const FormatSpec& spec) {
    SpecStats st;
    stats_body(spec.sections, st);
    return st;
}

std::string render_diagnostics(const std::vector<Diagnostic>& diags) {
    std::ostringstream out;
    for (const auto& d : diags) {
        out << (d.severity == Diagnostic::Severity::Error ? "error" : "warning");
        out << "[" << d.code << "]";
        if (d.span.line > 0) out << " at " << d.span.line << ":" << d.span.col;
        out << ": " << d.message << "\n";
    }
    return out.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::Error) return true;
    return false;
}

}  // namespace pfv::dsl
