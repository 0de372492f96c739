// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities: fixture loading and structural field renaming.

#ifndef PFV_TESTS_HELPERS_HPP
#define PFV_TESTS_HELPERS_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pfv/ast.hpp"
#include "pfv/parse.hpp"
#include "pfv/util.hpp"
#include "pfv/validate.hpp"

namespace pfv_tests {

inline std::filesystem::path source_root() { return PFV_SOURCE_ROOT; }

inline pfv::dsl::FormatSpec load_spec_file(const std::filesystem::path& p) {
    auto r = pfv::dsl::parse_spec(pfv::read_file(p));
    if (!r.ok())
        throw pfv::Error("fixture", p.string() + ":\n" +
                                        pfv::dsl::render_diagnostics(r.diagnostics));
    auto diags = pfv::dsl::validate_spec(*r.spec);
    if (pfv::dsl::has_errors(diags))
        throw pfv::Error("fixture",
                         p.string() + ":\n" + pfv::dsl::render_diagnostics(diags));
    return *r.spec;
}

inline std::vector<std::filesystem::path> small_fixture_files() {
    std::vector<std::filesystem::path> out;
    for (const auto& e :
         std::filesystem::directory_iterator(source_root() / "fixtures"))
        if (e.path().extension() == ".pfs") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::filesystem::path> all_fixture_files() {
    auto out = small_fixture_files();
    out.push_back(source_root() / "corpus" / "specs" / "codespec.pfs");
    out.push_back(source_root() / "corpus" / "specs" / "docspec.pfs");
    return out;
}

// Consistently renames every field (declarations, references, and variant
// discriminators). Constraint ids are recomputed along the way, as they hash
// the renamed expressions.
inline pfv::dsl::ExprPtr rename_expr(const pfv::dsl::ExprPtr& e,
                                     const std::map<std::string, std::string>& m) {
    using namespace pfv::dsl;
    switch (e->kind) {
        case Expr::Kind::IntLit:
        case Expr::Kind::TotalLen: return e;
        case Expr::Kind::FieldRef: {
            auto it = m.find(e->field);
            return make_field(it != m.end() ? it->second : e->field);
        }
        case Expr::Kind::Not: return make_not(rename_expr(e->lhs, m));
        case Expr::Kind::Binary:
            return make_binary(e->op, rename_expr(e->lhs, m), rename_expr(e->rhs, m));
    }
    return e;
}

inline void rename_body(std::vector<pfv::dsl::Section>& body,
                        const std::map<std::string, std::string>& m) {
    using namespace pfv::dsl;
    for (auto& s : body) {
        switch (s.kind) {
            case Section::Kind::Record:
                for (auto& f : s.fields) {
                    auto it = m.find(f.name);
                    if (it != m.end()) f.name = it->second;
                    if (f.type.kind == FieldType::Kind::Bytes)
                        f.type.length = rename_expr(f.type.length, m);
                    for (auto& c : f.constraints) c = make_constraint(rename_expr(c.expr, m));
                }
                for (auto& ac : s.checks)
                    ac.constraint = make_constraint(rename_expr(ac.constraint.expr, m));
                break;
            case Section::Kind::Conditional:
                s.guard = make_constraint(rename_expr(s.guard.expr, m));
                rename_body(s.body, m);
                break;
            case Section::Kind::Variant: {
                auto it = m.find(s.discriminator);
                if (it != m.end()) s.discriminator = it->second;
                for (auto& arm : s.arms) rename_body(arm.body, m);
                if (s.default_arm) rename_body(*s.default_arm, m);
                break;
            }
        }
    }
}

inline pfv::dsl::FormatSpec rename_all_fields(const pfv::dsl::FormatSpec& spec,
                                              const std::string& suffix) {
    using namespace pfv::dsl;
    std::map<std::string, std::string> m;
    std::function<void(const std::vector<Section>&)> collect =
        [&](const std::vector<Section>& body) {
            for (const auto& s : body) switch (s.kind) {
                    case Section::Kind::Record:
                        for (const auto& f : s.fields) m[f.name] = f.name + suffix;
                        break;
                    case Section::Kind::Conditional: collect(s.body); break;
                    case Section::Kind::Variant:
                        for (const auto& a : s.arms) collect(a.body);
                        if (s.default_arm) collect(*s.default_arm);
                        break;
                }
        };
    collect(spec.sections);
    FormatSpec out = spec;
    rename_body(out.sections, m);
    return out;
}

}  // namespace pfv_tests

#endif
