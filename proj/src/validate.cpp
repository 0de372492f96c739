// SPDX-License-Identifier: Apache-2.0

#include "pfv/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pfv/layout.hpp"
#include "pfv/rng.hpp"
#include "pfv/util.hpp"

namespace pfv::dsl {

namespace {

constexpr std::uint64_t kExhaustiveBitCap = 20;   // joint domains up to 2^20 enumerate
constexpr std::size_t kSampleCount = 1 << 16;
constexpr int kSyntheticTotalLenBits = 16;
constexpr std::uint64_t kSampleSeed = 0x70667620766c6421ULL;

struct Checker {
    const FormatSpec& spec;
    std::vector<Diagnostic> diags;

    void error(const std::string& code, const std::string& msg, SourceSpan span = {}) {
        diags.push_back({Diagnostic::Severity::Error, code, msg, span});
    }

    // ---- structural pass: names, types, widths, variants, alignment ----

    struct Scope {
        std::map<std::string, const FieldDef*> names;
        Scope* parent = nullptr;
        const FieldDef* find(const std::string& n) const {
            for (const Scope* s = this; s; s = s->parent) {
                auto it = s->names.find(n);
                if (it != s->names.end()) return it->second;
            }
            return nullptr;
        }
    };

    std::set<std::string> all_names;

    void collect_names(const std::vector<Section>& body) {
        for (const auto& s : body) switch (s.kind) {
                case Section::Kind::Record:
                    for (const auto& f : s.fields) all_names.insert(f.name);
                    break;
                case Section::Kind::Conditional: collect_names(s.body); break;
                case Section::Kind::Variant:
                    for (const auto& a : s.arms) collect_names(a.body);
                    if (s.default_arm) collect_names(*s.default_arm);
                    break;
            }
    }

    void check_expr_refs(const Expr& e, const Scope& scope, bool integer_ctx,
                         SourceSpan span) {
        std::set<std::string> refs;
        collect_field_refs(e, refs);
        for (const auto& r : refs) {
            const FieldDef* f = scope.find(r);
            if (!f) {
                if (all_names.count(r))
                    error("forward-reference",
                          "'" + r + "' is referenced before it is declared", span);
                else
                    error("undefined-field", "'" + r + "' does not name a field", span);
            } else if (f->type.kind == FieldType::Kind::Bytes) {
                error("opaque-field-ref",
                      "byte-array field '" + r + "' cannot be used in an expression", span);
            }
        }
        (void)integer_ctx;
    }

    enum class VType { Int, Bool, Broken };

    VType infer(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::IntLit:
            case Expr::Kind::FieldRef:
            case Expr::Kind::TotalLen: return VType::Int;
            case Expr::Kind::Not: {
                if (infer(*e.lhs) != VType::Bool) return VType::Broken;
                return VType::Bool;
            }
            case Expr::Kind::Binary: {
                VType a = infer(*e.lhs), b = infer(*e.rhs);
                if (a == VType::Broken || b == VType::Broken) return VType::Broken;
                switch (e.op) {
                    case BinOp::And:
                    case BinOp::Or:
                        return (a == VType::Bool && b == VType::Bool) ? VType::Bool
                                                                      : VType::Broken;
                    case BinOp::Add:
                    case BinOp::Sub:
                    case BinOp::Mul:
                        return (a == VType::Int && b == VType::Int) ? VType::Int
                                                                    : VType::Broken;
                    default:
                        return (a == VType::Int && b == VType::Int) ? VType::Bool
                                                                    : VType::Broken;
                }
            }
        }
        return VType::Broken;
    }

    void require_bool(const Constraint& c, const Scope& scope) {
        check_expr_refs(*c.expr, scope, false, c.span);
        VType t = infer(*c.expr);
        if (t != VType::Bool)
            error("type-error", "constraint is not boolean: " + expr_text(*c.expr), c.span);
    }

    // Returns subtree static width mod 8; checks nested bodies.
    std::uint64_t structural_block(const std::vector<Section>& body, Scope& scope,
                                   std::uint64_t mod_in) {
        std::uint64_t mod = mod_in;
        for (const auto& s : body) {
            switch (s.kind) {
                case Section::Kind::Record: {
                    std::size_t check_idx = 0;
                    for (std::size_t k = 0; k <= s.fields.size(); ++k) {
                        while (check_idx < s.checks.size() &&
                               s.checks[check_idx].after_field == k) {
                            require_bool(s.checks[check_idx].constraint, scope);
                            ++check_idx;
                        }
                        if (k == s.fields.size()) break;
                        const FieldDef& f = s.fields[k];
                        if (!is_identifier(f.name))
                            error("bad-name", "'" + f.name + "' is not an identifier",
                                  f.span);
                        if (f.name == "total_len")
                            error("reserved-name", "'total_len' is reserved", f.span);
                        if (scope.find(f.name))
                            error("duplicate-field",
                                  "field '" + f.name + "' is already declared on this path",
                                  f.span);
                        if (f.type.kind == FieldType::Kind::UInt) {
                            if (f.type.bits < 1 || f.type.bits > 64)
                                error("width-out-of-range",
                                      "field '" + f.name + "' has width " +
                                          std::to_string(f.type.bits),
                                      f.span);
                            else
                                mod = (mod + static_cast<std::uint64_t>(f.type.bits)) % 8;
                        } else {
                            if (!f.type.length) {
                                error("schema-error",
                                      "byte-array field '" + f.name + "' has no length",
                                      f.span);
                            } else {
                                check_expr_refs(*f.type.length, scope, true, f.span);
                                if (infer(*f.type.length) != VType::Int)
                                    error("type-error",
                                          "length of '" + f.name +
                                              "' is not an integer expression",
                                          f.span);
                            }
                            if (mod != 0)
                                error("misaligned-bytes-field",
                                      "byte-array field '" + f.name +
                                          "' does not start on a byte boundary",
                                      f.span);
                        }
                        scope.names[f.name] = &f;
                        for (const auto& c : f.constraints) require_bool(c, scope);
                    }
                    break;
                }
                case Section::Kind::Conditional: {
                    require_bool(s.guard, scope);
                    if (s.body.empty())
                        error("empty-section", "conditional body is empty", s.span);
                    Scope inner{{}, &scope};
                    std::uint64_t body_mod = structural_block(s.body, inner, mod);
                    if (body_mod != mod)
                        error("section-not-byte-aligned",
                              "conditional body does not cover whole bytes", s.span);
                    break;
                }
                case Section::Kind::Variant: {
                    const FieldDef* disc = scope.find(s.discriminator);
                    if (!disc) {
                        error("undefined-field",
                              "discriminator '" + s.discriminator +
                                  "' does not name an earlier field",
                              s.span);
                    } else if (disc->type.kind != FieldType::Kind::UInt) {
                        error("discriminator-not-integer",
                              "discriminator '" + s.discriminator +
                                  "' must be an unsigned integer field",
                              s.span);
                    } else if (disc->type.bits > 16) {
                        error("discriminator-too-wide",
                              "discriminator '" + s.discriminator + "' is " +
                                  std::to_string(disc->type.bits) +
                                  " bits wide; at most 16 allowed",
                              s.span);
                    }
                    std::set<std::uint64_t> tags;
                    for (const auto& arm : s.arms) {
                        if (!tags.insert(arm.tag).second)
                            error("variant-duplicate-tag",
                                  "duplicate arm tag " + std::to_string(arm.tag), s.span);
                        if (disc && disc->type.kind == FieldType::Kind::UInt &&
                            disc->type.bits >= 1 && disc->type.bits <= 64) {
                            std::uint64_t max =
                                disc->type.bits == 64
                                    ? ~0ULL
                                    : ((1ULL << disc->type.bits) - 1);
                            if (arm.tag > max)
                                error("tag-out-of-range",
                                      "arm tag " + std::to_string(arm.tag) +
                                          " cannot be represented in " +
                                          std::to_string(disc->type.bits) + " bits",
                                      s.span);
                        }
                        if (arm.body.empty())
                            error("empty-section",
                                  "arm " + std::to_string(arm.tag) + " has an empty body",
                                  s.span);
                        Scope inner{{}, &scope};
                        std::uint64_t arm_mod = structural_block(arm.body, inner, mod);
                        if (arm_mod != mod)
                            error("section-not-byte-aligned",
                                  "arm " + std::to_string(arm.tag) +
                                      " does not cover whole bytes",
                                  s.span);
                    }
                    if (s.default_arm) {
                        if (s.default_arm->empty())
                            error("empty-section", "default arm has an empty body", s.span);
                        Scope inner{{}, &scope};
                        std::uint64_t arm_mod = structural_block(*s.default_arm, inner, mod);
                        if (arm_mod != mod)
                            error("section-not-byte-aligned",
                                  "default arm does not cover whole bytes", s.span);
                    }
                    break;
                }
            }
        }
        return mod;
    }

    // ---- per-path semantic pass: byte lengths non-negative ----

    void length_nonneg_checks() {
        std::vector<ResolvedPath> paths;
        try {
            paths = enumerate_paths(spec);
        } catch (const pfv::Error& e) {
            error("path-explosion", e.what());
            return;
        }
        std::set<const FieldDef*> done;
        for (const auto& p : paths) {
            FlatPath flat;
            try {
                flat = flatten_path(spec, p);
            } catch (const pfv::Error&) {
                return;  // structural errors already reported
            }
            std::map<std::string, int> widths;  // declared integer fields so far
            std::vector<const Constraint*> earlier;
            for (const auto& op : flat.ops) {
                if (op.kind == FlatOp::Kind::Check) {
                    earlier.push_back(op.check.constraint);
                    continue;
                }
                const FieldDef* f = op.field.def;
                if (f->type.kind == FieldType::Kind::Bytes && f->type.length &&
                    done.insert(f).second) {
                    check_length_expr(*f, widths, earlier);
                }
                if (f->type.kind == FieldType::Kind::UInt)
                    widths[f->name] = f->type.bits;
            }
        }
    }

    void check_length_expr(const FieldDef& f, const std::map<std::string, int>& widths,
                           const std::vector<const Constraint*>& earlier) {
        // Transitive closure of variables coupled to the length expression
        // through earlier constraints.
        std::set<std::string> vars;
        collect_field_refs(*f.type.length, vars);
        bool uses_total = expr_uses_total_len(*f.type.length);
        std::vector<const Constraint*> context;
        bool grew = true;
        std::set<const Constraint*> used;
        while (grew) {
            grew = false;
            for (const Constraint* c : earlier) {
                if (used.count(c)) continue;
                std::set<std::string> crefs;
                collect_field_refs(*c->expr, crefs);
                bool overlaps = expr_uses_total_len(*c->expr) && uses_total;
                for (const auto& r : crefs)
                    if (vars.count(r)) overlaps = true;
                if (!overlaps) continue;
                used.insert(c);
                context.push_back(c);
                grew = true;
                for (const auto& r : crefs)
                    if (vars.insert(r).second) {}
                if (expr_uses_total_len(*c->expr)) uses_total = true;
            }
        }

        std::vector<std::pair<std::string, int>> domain;
        for (const auto& v : vars) {
            auto it = widths.find(v);
            if (it == widths.end()) return;  // scope errors already reported
            domain.emplace_back(v, it->second);
        }
        std::uint64_t total_bits = uses_total ? kSyntheticTotalLenBits : 0;
        for (const auto& [_, w] : domain) total_bits += static_cast<std::uint64_t>(w);

        auto try_env = [&](const Env& env, std::uint64_t total_len) -> bool {
            for (const Constraint* c : context)
                if (!evaluate_bool(*c->expr, env, total_len)) return true;  // vacuous
            Value v = evaluate_int(*f.type.length, env, total_len);
            if (v < 0) {
                std::string detail;
                for (const auto& [name, _] : env)
                    detail += " " + name + "=" + std::to_string(env.at(name));
                if (uses_total) detail += " total_len=" + std::to_string(total_len);
                error("negative-length",
                      "length of '" + f.name + "' can be negative, e.g. with" + detail,
                      f.span);
                return false;
            }
            return true;
        };

        auto max_of = [](int bits) -> std::uint64_t {
            return bits >= 64 ? ~0ULL : ((1ULL << bits) - 1);
        };

        if (total_bits <= kExhaustiveBitCap) {
            std::vector<std::uint64_t> vals(domain.size(), 0);
            std::uint64_t total_max = uses_total ? max_of(kSyntheticTotalLenBits) : 0;
            for (std::uint64_t t = 0;; ++t) {
                Env env;
                for (std::size_t i = 0; i < domain.size(); ++i)
                    env[domain[i].first] = vals[i];
                if (!try_env(env, t)) return;
                if (t >= total_max) {
                    std::size_t i = 0;
                    for (; i < vals.size(); ++i) {
                        if (vals[i] < max_of(domain[i].second)) {
                            ++vals[i];
                            break;
                        }
                        vals[i] = 0;
                    }
                    if (i == vals.size()) break;
                    t = ~0ULL;  // restart total_len loop (wraps to 0)
                }
            }
            return;
        }

        Rng rng(kSampleSeed ^ fnv1a64(f.name));
        for (std::size_t s = 0; s < kSampleCount; ++s) {
            Env env;
            for (const auto& [name, bits] : domain) env[name] = rng.below(max_of(bits) + 1);
            std::uint64_t t = uses_total ? rng.below(max_of(kSyntheticTotalLenBits) + 1) : 0;
            if (!try_env(env, t)) return;
        }
        // Boundary combinations.
        std::vector<std::vector<std::uint64_t>> choices;
        for (const auto& [_, bits] : domain) {
            std::uint64_t m = max_of(bits);
            std::set<std::uint64_t> b{0, 1, m, m > 0 ? m - 1 : 0};
            choices.emplace_back(b.begin(), b.end());
        }
        if (uses_total) {
            std::uint64_t m = max_of(kSyntheticTotalLenBits);
            choices.push_back({0, 1, m - 1, m});
        }
        std::size_t combos = 1;
        for (const auto& c : choices) {
            combos *= c.size();
            if (combos > 65536) return;  // rely on sampling alone
        }
        std::vector<std::size_t> idx(choices.size(), 0);
        for (;;) {
            Env env;
            std::uint64_t t = 0;
            for (std::size_t i = 0; i < domain.size(); ++i)
                env[domain[i].first] = choices[i][idx[i]];
            if (uses_total) t = choices.back()[idx.back()];
            if (!try_env(env, t)) return;
            std::size_t i = 0;
            for (; i < idx.size(); ++i) {
                if (++idx[i] < choices[i].size()) break;
                idx[i] = 0;
            }
            if (i == idx.size()) break;
        }
    }

    void run() {
        if (!is_identifier(spec.name))
            error("bad-name", "format name '" + spec.name + "' is not an identifier");
        collect_names(spec.sections);
        if (all_names.empty()) {
            error("empty-record", "format '" + spec.name + "' declares no fields");
            return;
        }
        Scope top;
        std::uint64_t end_mod = structural_block(spec.sections, top, 0);
        if (end_mod != 0)
            error("section-not-byte-aligned", "format does not cover whole bytes");
        if (!has_errors(diags)) length_nonneg_checks();
    }
};

}  // namespace

std::vector<Diagnostic> validate_spec(const FormatSpec& spec) {
    Checker checker{spec, {}, {}};
    checker.run();
    return std::move(checker.diags);
}

}  // namespace pfv::dsl
