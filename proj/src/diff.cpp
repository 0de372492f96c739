// SPDX-License-Identifier: Apache-2.0

#include "pfv/diff.hpp"

#include <algorithm>
#include <sstream>

#include "pfv/canonical.hpp"
#include "pfv/layout.hpp"
#include "pfv/packets.hpp"
#include "pfv/rng.hpp"
#include "pfv/util.hpp"
#include "pfv/validate.hpp"

using nlohmann::json;

namespace pfv::diff {

using dsl::Constraint;
using dsl::Env;
using dsl::ExprPtr;
using dsl::FieldDef;
using dsl::FieldType;
using dsl::FlatOp;
using dsl::FlatPath;
using dsl::FormatSpec;
using dsl::ResolvedPath;

const char* kind_text(DiscrepancyKind k) {
    switch (k) {
        case DiscrepancyKind::TypeMismatch: return "TYPE_MISMATCH";
        case DiscrepancyKind::MissingFieldInCode: return "MISSING_FIELD_IN_CODE";
        case DiscrepancyKind::MissingFieldInDoc: return "MISSING_FIELD_IN_DOC";
        case DiscrepancyKind::ConstraintMissingInCode: return "CONSTRAINT_MISSING_IN_CODE";
        case DiscrepancyKind::ConstraintMissingInDoc: return "CONSTRAINT_MISSING_IN_DOC";
        case DiscrepancyKind::ConstraintConflict: return "CONSTRAINT_CONFLICT";
    }
    return "?";
}

std::optional<DiscrepancyKind> kind_from_text(const std::string& s) {
    for (DiscrepancyKind k :
         {DiscrepancyKind::TypeMismatch, DiscrepancyKind::MissingFieldInCode,
          DiscrepancyKind::MissingFieldInDoc, DiscrepancyKind::ConstraintMissingInCode,
          DiscrepancyKind::ConstraintMissingInDoc, DiscrepancyKind::ConstraintConflict})
        if (s == kind_text(k)) return k;
    return std::nullopt;
}

const char* relation_text(EquivRelation r) {
    switch (r) {
        case EquivRelation::Equivalent: return "equivalent";
        case EquivRelation::FirstImpliesSecond: return "first-implies-second";
        case EquivRelation::SecondImpliesFirst: return "second-implies-first";
        case EquivRelation::Incomparable: return "incomparable";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// constraint equivalence over bounded domains
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kExhaustiveBitCap = 20;
constexpr std::size_t kSampleCount = 1 << 16;
constexpr int kDefaultTotalLenBits = 16;
constexpr std::uint64_t kEquivSeed = 0x65717569765f7631ULL;

std::uint64_t bits_max(int bits) { return bits >= 64 ? ~0ULL : ((1ULL << bits) - 1); }

struct Domain {
    std::vector<std::pair<std::string, int>> vars;  // name, bits (total_len included)
    bool uses_total = false;
    std::uint64_t total_bits = 0;

    static Domain build(const std::vector<ExprPtr>& exprs,
                        const std::map<std::string, int>& widths) {
        Domain d;
        std::set<std::string> names;
        bool total = false;
        for (const auto& e : exprs) {
            dsl::collect_field_refs(*e, names);
            if (dsl::expr_uses_total_len(*e)) total = true;
        }
        for (const auto& n : names) {
            auto it = widths.find(n);
            int bits = it != widths.end() ? it->second : 64;
            d.vars.emplace_back(n, bits);
        }
        if (total) {
            auto it = widths.find("total_len");
            d.vars.emplace_back("total_len",
                                it != widths.end() ? it->second : kDefaultTotalLenBits);
            d.uses_total = true;
        }
        for (const auto& [_, b] : d.vars) d.total_bits += static_cast<std::uint64_t>(b);
        return d;
    }

    Env to_env(const std::vector<std::uint64_t>& vals, std::uint64_t& total_out) const {
        Env env;
        total_out = 0;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (uses_total && i + 1 == vars.size())
                total_out = vals[i];
            else
                env[vars[i].first] = vals[i];
        }
        return env;
    }
};

// Visits assignments; the visitor returns false to stop early.
template <typename F>
void enumerate_domain(const Domain& d, F&& visit) {
    std::vector<std::uint64_t> vals(d.vars.size(), 0);
    for (;;) {
        if (!visit(vals)) return;
        std::size_t i = 0;
        for (; i < vals.size(); ++i) {
            if (vals[i] < bits_max(d.vars[i].second)) {
                ++vals[i];
                break;
            }
            vals[i] = 0;
        }
        if (i == vals.size()) return;
    }
}

template <typename F>
void sample_domain(const Domain& d, std::uint64_t seed, F&& visit) {
    Rng rng(seed);
    std::vector<std::uint64_t> vals(d.vars.size(), 0);
    for (std::size_t s = 0; s < kSampleCount; ++s) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            vals[i] = rng.below(bits_max(d.vars[i].second) + 1);
        if (!visit(vals)) return;
    }
    // All combinations of per-variable boundary values.
    std::vector<std::vector<std::uint64_t>> choices;
    std::size_t combos = 1;
    for (const auto& [_, bits] : d.vars) {
        std::uint64_t m = bits_max(bits);
        std::set<std::uint64_t> b{0, 1, m > 0 ? m - 1 : 0, m};
        choices.emplace_back(b.begin(), b.end());
        combos *= choices.back().size();
        if (combos > (1u << 16)) return;
    }
    if (choices.empty()) return;
    std::vector<std::size_t> idx(choices.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < idx.size(); ++i) vals[i] = choices[i][idx[i]];
        if (!visit(vals)) return;
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < choices[i].size()) break;
            idx[i] = 0;
        }
        if (i == idx.size()) return;
    }
}

bool eval_or_false(const ExprPtr& e, const Env& env, std::uint64_t total) {
    try {
        return dsl::evaluate_bool(*e, env, total);
    } catch (const dsl::EvalError&) {
        return false;
    }
}

}  // namespace

EquivResult constraints_equivalent(const ExprPtr& c1, const ExprPtr& c2,
                                   const std::map<std::string, int>& widths) {
    EquivResult result;
    if (dsl::expr_text(*c1) == dsl::expr_text(*c2)) {
        result.relation = EquivRelation::Equivalent;
        result.exhaustive = true;
        return result;
    }

    Domain d = Domain::build({c1, c2}, widths);

    auto visit = [&](const std::vector<std::uint64_t>& vals) -> bool {
        std::uint64_t total = 0;
        Env env = d.to_env(vals, total);
        bool a = eval_or_false(c1, env, total);
        bool b = eval_or_false(c2, env, total);
        if (a && !b && !result.first_not_second) {
            result.first_not_second = env;
            if (d.uses_total) (*result.first_not_second)["total_len"] = total;
        }
        if (b && !a && !result.second_not_first) {
            result.second_not_first = env;
            if (d.uses_total) (*result.second_not_first)["total_len"] = total;
        }
        return !(result.first_not_second && result.second_not_first);
    };

    if (d.total_bits <= kExhaustiveBitCap) {
        result.exhaustive = true;
        enumerate_domain(d, visit);
    } else {
        result.exhaustive = false;
        sample_domain(d, kEquivSeed, visit);
    }

    if (!result.first_not_second && !result.second_not_first)
        result.relation = EquivRelation::Equivalent;
    else if (!result.first_not_second)
        result.relation = EquivRelation::FirstImpliesSecond;
    else if (!result.second_not_first)
        result.relation = EquivRelation::SecondImpliesFirst;
    else
        result.relation = EquivRelation::Incomparable;
    return result;
}

// ---------------------------------------------------------------------------
// alignment
// ---------------------------------------------------------------------------

namespace {

std::optional<std::uint64_t> const_byte_len(const ExprPtr& e) {
    std::set<std::string> refs;
    dsl::collect_field_refs(*e, refs);
    if (!refs.empty() || dsl::expr_uses_total_len(*e)) return std::nullopt;
    try {
        dsl::Value v = dsl::evaluate_int(*e, {}, 0);
        if (v < 0 || v > dsl::Value(1ULL << 24)) return std::nullopt;
        return v.convert_to<std::uint64_t>();
    } catch (const dsl::EvalError&) {
        return std::nullopt;
    }
}

struct PathField {
    FieldKey key;
    const FieldDef* def = nullptr;
    std::uint64_t off = 0;  // static bit offset
    int dyn = 0;            // dynamic fields before this one
    bool dynamic = false;   // length not a constant
    std::uint64_t width = 0;  // static width in bits (0 when dynamic)

    std::pair<int, std::uint64_t> pos() const { return {dyn, off}; }
};

struct SideConstraint {
    const Constraint* c = nullptr;
    std::string path;   // anchor location
    std::string owner;  // owning field name when attached
    std::map<std::string, FieldKey> ref_keys;
    std::set<std::size_t> on_paths;
};

struct SideInfo {
    const FormatSpec* spec = nullptr;
    std::vector<ResolvedPath> paths;
    std::vector<std::vector<PathField>> fields;  // per path
    std::vector<SideConstraint> constraints;
};

SideInfo summarize(const FormatSpec& spec) {
    SideInfo info;
    info.spec = &spec;
    info.paths = dsl::enumerate_paths(spec);
    std::map<const Constraint*, std::size_t> seen;
    for (std::size_t pi = 0; pi < info.paths.size(); ++pi) {
        FlatPath flat = dsl::flatten_path(spec, info.paths[pi]);
        std::vector<PathField> fields;
        std::map<std::string, FieldKey> scope;
        std::uint64_t dyn_off = 0;
        (void)dyn_off;
        for (const auto& op : flat.ops) {
            if (op.kind == FlatOp::Kind::Field) {
                const FieldDef* f = op.field.def;
                PathField pf;
                pf.key = {op.field.path, f->name};
                pf.def = f;
                pf.off = op.field.static_bit_offset;
                pf.dyn = op.field.dyn_prefix;
                if (f->type.kind == FieldType::Kind::UInt) {
                    pf.width = static_cast<std::uint64_t>(f->type.bits);
                } else if (auto n = const_byte_len(f->type.length)) {
                    pf.width = 8 * *n;
                } else {
                    pf.dynamic = true;
                }
                scope[f->name] = pf.key;
                fields.push_back(std::move(pf));
            } else {
                const Constraint* c = op.check.constraint;
                auto it = seen.find(c);
                if (it == seen.end()) {
                    SideConstraint sc;
                    sc.c = c;
                    sc.path = op.check.path;
                    sc.owner = op.check.field_name;
                    std::set<std::string> refs;
                    dsl::collect_field_refs(*c->expr, refs);
                    for (const auto& r : refs) {
                        auto sit = scope.find(r);
                        if (sit != scope.end()) sc.ref_keys[r] = sit->second;
                    }
                    sc.on_paths.insert(pi);
                    seen[c] = info.constraints.size();
                    info.constraints.push_back(std::move(sc));
                } else {
                    info.constraints[it->second].on_paths.insert(pi);
                }
            }
        }
        info.fields.push_back(std::move(fields));
    }
    return info;
}

// Discriminator placement on a path, for joint-path compatibility.
struct VariantPin {
    std::pair<int, std::uint64_t> pos{0, 0};
    std::uint64_t bits = 0;
    bool is_default = false;
    std::uint64_t tag = 0;
    std::vector<std::uint64_t> all_tags;
};

// Guard outcome keyed by a position-normalized rendering of the guard
// expression, so identical guards over identically-placed fields pair up
// across the two sides regardless of field names.
struct GuardPin {
    std::string signature;
    bool value = false;
};

struct PathPins {
    std::vector<VariantPin> variants;
    std::vector<GuardPin> guards;
};

std::string position_signature(const dsl::Expr& e,
                               const std::map<std::string, const PathField*>& place) {
    switch (e.kind) {
        case dsl::Expr::Kind::IntLit: return std::to_string(e.int_value);
        case dsl::Expr::Kind::TotalLen: return "total_len";
        case dsl::Expr::Kind::FieldRef: {
            auto it = place.find(e.field);
            if (it == place.end()) return "?";
            return "@" + std::to_string(it->second->dyn) + "." +
                   std::to_string(it->second->off) + "+" +
                   std::to_string(it->second->width);
        }
        case dsl::Expr::Kind::Not:
            return "(not " + position_signature(*e.lhs, place) + ")";
        case dsl::Expr::Kind::Binary:
            return "(" + position_signature(*e.lhs, place) + " " +
                   dsl::bin_op_text(e.op) + " " + position_signature(*e.rhs, place) + ")";
    }
    return "?";
}

PathPins path_pins(const SideInfo& side, std::size_t pi) {
    PathPins pins;
    std::map<std::string, const PathField*> place;
    for (const auto& pf : side.fields[pi]) place[pf.key.name] = &pf;
    for (const auto& choice : side.paths[pi].choices) {
        if (choice.kind == dsl::PathChoice::Kind::Variant) {
            VariantPin pin;
            auto it = place.find(choice.section->discriminator);
            if (it != place.end()) {
                pin.pos = it->second->pos();
                pin.bits = it->second->width;
            }
            pin.is_default = choice.is_default;
            pin.tag = choice.tag;
            for (const auto& arm : choice.section->arms) pin.all_tags.push_back(arm.tag);
            pins.variants.push_back(std::move(pin));
        } else {
            pins.guards.push_back(
                {position_signature(*choice.section->guard.expr, place),
                 choice.guard_value});
        }
    }
    return pins;
}

bool paths_compatible(const PathPins& a, const PathPins& b) {
    for (const auto& pa : a.variants)
        for (const auto& pb : b.variants) {
            if (pa.pos != pb.pos || pa.bits != pb.bits) continue;
            // Same discriminator position: the chosen value sets must overlap.
            if (!pa.is_default && !pb.is_default && pa.tag != pb.tag) return false;
            if (pa.is_default && !pb.is_default &&
                std::find(pa.all_tags.begin(), pa.all_tags.end(), pb.tag) !=
                    pa.all_tags.end())
                return false;
            if (pb.is_default && !pa.is_default &&
                std::find(pb.all_tags.begin(), pb.all_tags.end(), pa.tag) !=
                    pb.all_tags.end())
                return false;
        }
    for (const auto& ga : a.guards)
        for (const auto& gb : b.guards)
            if (ga.signature == gb.signature && ga.signature.find('?') ==
                                                    std::string::npos &&
                ga.value != gb.value)
                return false;
    return true;
}

struct GroupPlace {
    FieldKey key;
    const FieldDef* def = nullptr;
    std::uint64_t rel_off = 0;
    std::uint64_t bits = 0;
    bool is_uint = false;
    bool dynamic = false;
};

struct GroupDetail {
    std::vector<GroupPlace> code, doc;
    bool width_mismatch = false;

    std::string signature() const {
        std::string s;
        for (const auto& p : code) s += "c:" + p.key.path + "|";
        s += "/";
        for (const auto& p : doc) s += "d:" + p.key.path + "|";
        if (width_mismatch) s += "!";
        return s;
    }
};

struct JointTile {
    std::vector<GroupDetail> groups;
    std::vector<FieldKey> um_code, um_doc;
};

JointTile tile(const std::vector<PathField>& A, const std::vector<PathField>& B) {
    JointTile out;
    std::size_t i = 0, j = 0;
    auto place = [](const PathField& f, std::uint64_t base) {
        return GroupPlace{f.key, f.def, f.off - base, f.width,
                          f.def->type.kind == FieldType::Kind::UInt, f.dynamic};
    };
    while (i < A.size() && j < B.size()) {
        const PathField& a = A[i];
        const PathField& b = B[j];
        if (a.pos() != b.pos()) {
            if (a.pos() < b.pos()) {
                out.um_code.push_back(a.key);
                ++i;
            } else {
                out.um_doc.push_back(b.key);
                ++j;
            }
            continue;
        }
        if (a.dynamic || b.dynamic) {
            if (a.dynamic && b.dynamic) {
                GroupDetail g;
                g.code.push_back(place(a, a.off));
                g.doc.push_back(place(b, b.off));
                out.groups.push_back(std::move(g));
                ++i;
                ++j;
            } else if (a.dynamic) {
                out.um_doc.push_back(b.key);
                ++j;
            } else {
                out.um_code.push_back(a.key);
                ++i;
            }
            continue;
        }
        std::uint64_t base = a.off;
        GroupDetail g;
        g.code.push_back(place(a, base));
        g.doc.push_back(place(b, base));
        std::uint64_t end_a = a.off + a.width;
        std::uint64_t end_b = b.off + b.width;
        ++i;
        ++j;
        while (end_a != end_b) {
            if (end_a < end_b) {
                if (i < A.size() && !A[i].dynamic && A[i].dyn == a.dyn &&
                    A[i].off == end_a) {
                    g.code.push_back(place(A[i], base));
                    end_a += A[i].width;
                    ++i;
                } else {
                    g.width_mismatch = true;
                    break;
                }
            } else {
                if (j < B.size() && !B[j].dynamic && B[j].dyn == b.dyn &&
                    B[j].off == end_b) {
                    g.doc.push_back(place(B[j], base));
                    end_b += B[j].width;
                    ++j;
                } else {
                    g.width_mismatch = true;
                    break;
                }
            }
        }
        out.groups.push_back(std::move(g));
    }
    for (; i < A.size(); ++i) out.um_code.push_back(A[i].key);
    for (; j < B.size(); ++j) out.um_doc.push_back(B[j].key);
    return out;
}

struct AlignmentDetail {
    std::vector<GroupDetail> groups;  // unique
    std::vector<FieldKey> unmatched_code, unmatched_doc;
    std::map<FieldKey, std::set<std::size_t>> code_field_group, doc_field_group;
    std::vector<std::pair<std::size_t, std::size_t>> joints;  // (code path, doc path)
    // groups present on a given joint, by index
    std::map<std::pair<std::size_t, std::size_t>, std::set<std::size_t>> joint_groups;
};

AlignmentDetail align_detail(const SideInfo& code, const SideInfo& doc) {
    AlignmentDetail out;
    std::map<std::string, std::size_t> seen;
    std::set<FieldKey> matched_code, matched_doc;
    std::map<FieldKey, std::string> unmatched_code_occ, unmatched_doc_occ;

    std::vector<PathPins> code_pins, doc_pins;
    for (std::size_t i = 0; i < code.paths.size(); ++i)
        code_pins.push_back(path_pins(code, i));
    for (std::size_t j = 0; j < doc.paths.size(); ++j)
        doc_pins.push_back(path_pins(doc, j));

    for (std::size_t i = 0; i < code.paths.size(); ++i) {
        for (std::size_t j = 0; j < doc.paths.size(); ++j) {
            if (!paths_compatible(code_pins[i], doc_pins[j])) continue;
            out.joints.emplace_back(i, j);
            JointTile t = tile(code.fields[i], doc.fields[j]);
            std::set<std::size_t>& joint_set = out.joint_groups[{i, j}];
            for (auto& g : t.groups) {
                std::string sig = g.signature();
                auto it = seen.find(sig);
                std::size_t gi;
                if (it == seen.end()) {
                    gi = out.groups.size();
                    seen[sig] = gi;
                    out.groups.push_back(std::move(g));
                } else {
                    gi = it->second;
                }
                joint_set.insert(gi);
                for (const auto& p : out.groups[gi].code) {
                    matched_code.insert(p.key);
                    out.code_field_group[p.key].insert(gi);
                }
                for (const auto& p : out.groups[gi].doc) {
                    matched_doc.insert(p.key);
                    out.doc_field_group[p.key].insert(gi);
                }
            }
            for (const auto& k : t.um_code) unmatched_code_occ.emplace(k, "");
            for (const auto& k : t.um_doc) unmatched_doc_occ.emplace(k, "");
        }
    }
    for (const auto& [k, _] : unmatched_code_occ)
        if (!matched_code.count(k)) out.unmatched_code.push_back(k);
    for (const auto& [k, _] : unmatched_doc_occ)
        if (!matched_doc.count(k)) out.unmatched_doc.push_back(k);
    std::sort(out.unmatched_code.begin(), out.unmatched_code.end());
    std::sort(out.unmatched_doc.begin(), out.unmatched_doc.end());
    return out;
}

}  // namespace

Alignment align_fields(const FormatSpec& code, const FormatSpec& doc) {
    SideInfo ci = summarize(code);
    SideInfo di = summarize(doc);
    AlignmentDetail detail = align_detail(ci, di);
    Alignment out;
    for (const auto& g : detail.groups) {
        AlignmentGroup pub;
        for (const auto& p : g.code) pub.code_fields.push_back(p.key);
        for (const auto& p : g.doc) pub.doc_fields.push_back(p.key);
        pub.width_mismatch = g.width_mismatch;
        out.groups.push_back(std::move(pub));
    }
    out.unmatched_code = detail.unmatched_code;
    out.unmatched_doc = detail.unmatched_doc;
    return out;
}

// ---------------------------------------------------------------------------
// diff_specs
// ---------------------------------------------------------------------------

namespace {

std::string field_decl_text(const FieldDef& f) {
    if (f.type.kind == FieldType::Kind::UInt)
        return f.name + ": u" + std::to_string(f.type.bits);
    return f.name + ": bytes[" + dsl::expr_text(*f.type.length) + "]";
}

std::string group_side_text(const std::vector<GroupPlace>& side) {
    std::string out;
    for (const auto& p : side) {
        if (!out.empty()) out += " + ";
        out += field_decl_text(*p.def);
    }
    return out.empty() ? "(nothing)" : out;
}

// Rewrites expressions into a shared variable space so constraints from the
// two sides become comparable. Fields matched 1:1 or inside a tiling group
// map to synthetic atom variables keyed by the group; unmatched fields map
// to side-local variables.
struct AtomSpace {
    struct Atom {
        std::string var;
        std::uint64_t rel_off = 0;
        int bits = 0;
    };
    // group index -> atoms (finest partition of the group's bit range)
    std::map<std::size_t, std::vector<Atom>> group_atoms;
    std::map<std::string, int> widths;

    void build(const std::vector<GroupDetail>& groups) {
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const GroupDetail& g = groups[gi];
            bool dyn = false;
            for (const auto& p : g.code) dyn |= p.dynamic;
            for (const auto& p : g.doc) dyn |= p.dynamic;
            if (dyn || g.width_mismatch) continue;
            std::set<std::uint64_t> bounds;
            for (const auto& p : g.code) {
                bounds.insert(p.rel_off);
                bounds.insert(p.rel_off + p.bits);
            }
            for (const auto& p : g.doc) {
                bounds.insert(p.rel_off);
                bounds.insert(p.rel_off + p.bits);
            }
            std::vector<Atom> atoms;
            auto it = bounds.begin();
            std::uint64_t prev = *it++;
            std::size_t k = 0;
            for (; it != bounds.end(); ++it, ++k) {
                Atom a;
                a.var = "g" + std::to_string(gi) + "_a" + std::to_string(k);
                a.rel_off = prev;
                a.bits = static_cast<int>(*it - prev);
                widths[a.var] = a.bits;
                atoms.push_back(a);
                prev = *it;
            }
            group_atoms[gi] = std::move(atoms);
        }
    }

    // Expression over atom variables covering [off, off+bits) of group gi.
    // Atom widths are recorded into `out_widths`.
    ExprPtr field_expr(std::size_t gi, std::uint64_t off, std::uint64_t bits,
                       std::map<std::string, int>& out_widths) const {
        auto it = group_atoms.find(gi);
        if (it == group_atoms.end()) return nullptr;
        ExprPtr acc;
        for (const auto& a : it->second) {
            if (a.rel_off < off || a.rel_off + a.bits > off + bits) continue;
            out_widths[a.var] = a.bits;
            ExprPtr ref = dsl::make_field(a.var);
            if (!acc) {
                acc = ref;
            } else {
                acc = dsl::make_binary(dsl::BinOp::Add,
                                       dsl::make_binary(dsl::BinOp::Mul, acc,
                                                        dsl::make_int(1ULL << a.bits)),
                                       ref);
            }
        }
        return acc;
    }
};

struct Differ {
    const FormatSpec& code_spec;
    const FormatSpec& doc_spec;
    DiffOptions opts;

    SideInfo code = summarize(code_spec);
    SideInfo doc = summarize(doc_spec);
    AlignmentDetail detail = align_detail(code, doc);
    AtomSpace atoms;
    std::vector<Discrepancy> out;
    std::map<std::string, bool> implication_cache;

    const std::map<FieldKey, std::set<std::size_t>>& field_groups(Side s) const {
        return s == Side::Code ? detail.code_field_group : detail.doc_field_group;
    }

    // Group chosen for a field reference: the first group containing it.
    std::optional<std::size_t> group_of(Side s, const FieldKey& k) const {
        const auto& m = field_groups(s);
        auto it = m.find(k);
        if (it == m.end() || it->second.empty()) return std::nullopt;
        return *it->second.begin();
    }

    // Rewrite a constraint into atom space. Returns nullptr when a referenced
    // field has no aligned group (unmatched on the other side).
    ExprPtr rewrite(Side side, const SideConstraint& sc, const ExprPtr& e,
                    std::map<std::string, int>& widths, bool* all_matched) const {
        switch (e->kind) {
            case dsl::Expr::Kind::IntLit:
            case dsl::Expr::Kind::TotalLen: return e;
            case dsl::Expr::Kind::FieldRef: {
                auto kit = sc.ref_keys.find(e->field);
                if (kit == sc.ref_keys.end()) {
                    if (all_matched) *all_matched = false;
                    return e;
                }
                auto gi = group_of(side, kit->second);
                if (gi) {
                    const auto& places =
                        side == Side::Code ? detail.groups[*gi].code : detail.groups[*gi].doc;
                    for (const auto& p : places)
                        if (p.key == kit->second) {
                            ExprPtr r = atoms.field_expr(*gi, p.rel_off, p.bits, widths);
                            if (r) return r;
                        }
                }
                if (all_matched) *all_matched = false;
                std::string var = (side == Side::Code ? "uc:" : "ud:") + kit->second.path;
                widths[var] = 64;
                for (const auto& pf_list : (side == Side::Code ? code.fields : doc.fields))
                    for (const auto& pf : pf_list)
                        if (pf.key == kit->second && pf.def->type.kind == FieldType::Kind::UInt)
                            widths[var] = pf.def->type.bits;
                return dsl::make_field(var);
            }
            case dsl::Expr::Kind::Not: {
                ExprPtr a = rewrite(side, sc, e->lhs, widths, all_matched);
                return dsl::make_not(a);
            }
            case dsl::Expr::Kind::Binary: {
                ExprPtr l = rewrite(side, sc, e->lhs, widths, all_matched);
                ExprPtr r = rewrite(side, sc, e->rhs, widths, all_matched);
                return dsl::make_binary(e->op, l, r);
            }
        }
        return e;
    }

    // Touched groups of a constraint (via its referenced fields).
    std::set<std::size_t> touched_groups(Side side, const SideConstraint& sc) const {
        std::set<std::size_t> gs;
        for (const auto& [_, key] : sc.ref_keys) {
            auto gi = group_of(side, key);
            if (gi) gs.insert(*gi);
        }
        return gs;
    }

    bool refs_all_matched(Side side, const SideConstraint& sc) const {
        for (const auto& [_, key] : sc.ref_keys)
            if (!group_of(side, key)) return false;
        return true;
    }

    // conj(other side constraints touching sc's groups, on a compatible
    // path) implies sc?
    bool implied_on_all_joints(Side side, const SideConstraint& sc) {
        Side other = side == Side::Code ? Side::Doc : Side::Code;
        const SideInfo& own_info = side == Side::Code ? code : doc;
        const SideInfo& other_info = side == Side::Code ? doc : code;
        (void)own_info;
        std::set<std::size_t> my_groups = touched_groups(side, sc);
        if (my_groups.empty()) return false;

        bool any_joint = false;
        for (const auto& [ci_path, dj_path] : detail.joints) {
            std::size_t own_path = side == Side::Code ? ci_path : dj_path;
            std::size_t other_path = side == Side::Code ? dj_path : ci_path;
            if (!sc.on_paths.count(own_path)) continue;
            // Only joints where every referenced group is actually aligned.
            const auto& jg = detail.joint_groups.at({ci_path, dj_path});
            bool aligned_here = true;
            for (std::size_t g : my_groups)
                if (!jg.count(g)) aligned_here = false;
            if (!aligned_here) continue;
            any_joint = true;

            std::vector<const SideConstraint*> conj;
            for (const auto& oc : other_info.constraints) {
                if (!oc.on_paths.count(other_path)) continue;
                std::set<std::size_t> ogs = touched_groups(other, oc);
                bool touches = false;
                for (std::size_t g : ogs)
                    if (my_groups.count(g)) touches = true;
                if (touches) conj.push_back(&oc);
            }

            std::map<std::string, int> widths;
            bool matched = true;
            ExprPtr target = rewrite(side, sc, sc.c->expr, widths, &matched);
            ExprPtr conj_expr;
            for (const SideConstraint* oc : conj) {
                ExprPtr r = rewrite(other, *oc, oc->c->expr, widths, nullptr);
                conj_expr = conj_expr ? dsl::make_binary(dsl::BinOp::And, conj_expr, r) : r;
            }
            if (!conj_expr)
                conj_expr = dsl::make_binary(dsl::BinOp::Eq, dsl::make_int(0),
                                             dsl::make_int(0));  // true

            std::string cache_key = dsl::expr_text(*conj_expr) + " => " +
                                    dsl::expr_text(*target);
            auto it = implication_cache.find(cache_key);
            bool implied;
            if (it != implication_cache.end()) {
                implied = it->second;
            } else {
                EquivResult r = constraints_equivalent(conj_expr, target, widths);
                implied = r.relation == EquivRelation::Equivalent ||
                          r.relation == EquivRelation::FirstImpliesSecond;
                implication_cache[cache_key] = implied;
            }
            if (!implied) return false;
        }
        return any_joint;
    }

    // Shares a compatible joint path with the other constraint?
    bool share_joint(Side side, const SideConstraint& sc, const SideConstraint& oc) const {
        for (const auto& [ci_path, dj_path] : detail.joints) {
            std::size_t own = side == Side::Code ? ci_path : dj_path;
            std::size_t oth = side == Side::Code ? dj_path : ci_path;
            if (sc.on_paths.count(own) && oc.on_paths.count(oth)) return true;
        }
        return false;
    }

    // Mutually unsatisfiable with some constraint on the other side?
    // Claimed only when the joint domain is exhaustively enumerable.
    std::optional<std::string> conflict_partner(Side side, const SideConstraint& sc) {
        Side other = side == Side::Code ? Side::Doc : Side::Code;
        const SideInfo& other_info = side == Side::Code ? doc : code;
        std::set<std::size_t> my_groups = touched_groups(side, sc);
        for (const auto& oc : other_info.constraints) {
            std::set<std::size_t> ogs = touched_groups(other, oc);
            bool touches = false;
            for (std::size_t g : ogs)
                if (my_groups.count(g)) touches = true;
            if (!touches) continue;
            if (!share_joint(side, sc, oc)) continue;

            std::map<std::string, int> widths;
            ExprPtr a = rewrite(side, sc, sc.c->expr, widths, nullptr);
            ExprPtr b = rewrite(other, oc, oc.c->expr, widths, nullptr);
            ExprPtr both = dsl::make_binary(dsl::BinOp::And, a, b);
            ExprPtr fals =
                dsl::make_binary(dsl::BinOp::Eq, dsl::make_int(0), dsl::make_int(1));
            EquivResult r = constraints_equivalent(both, fals, widths);
            if (!r.exhaustive) continue;
            if (r.relation != EquivRelation::Equivalent) continue;
            // both == false everywhere; require each side individually sat
            EquivResult sat_a = constraints_equivalent(a, fals, widths);
            EquivResult sat_b = constraints_equivalent(b, fals, widths);
            if (sat_a.relation == EquivRelation::Equivalent ||
                sat_b.relation == EquivRelation::Equivalent)
                continue;
            return dsl::expr_text(*oc.c->expr);
        }
        return std::nullopt;
    }

    void field_discrepancies() {
        for (std::size_t gi = 0; gi < detail.groups.size(); ++gi) {
            const GroupDetail& g = detail.groups[gi];
            auto klass = [](const std::vector<GroupPlace>& side) -> std::string {
                bool any_uint = false, any_bytes = false;
                for (const auto& p : side) (p.is_uint ? any_uint : any_bytes) = true;
                if (any_uint && any_bytes) return "mixed";
                return any_uint ? "uint" : "bytes";
            };
            bool mismatch = g.width_mismatch || klass(g.code) != klass(g.doc);
            if (!mismatch) continue;
            Discrepancy d;
            d.kind = DiscrepancyKind::TypeMismatch;
            d.code_location = g.code.front().key.path;
            d.doc_location = g.doc.front().key.path;
            d.code_detail = group_side_text(g.code);
            d.doc_detail = group_side_text(g.doc);
            out.push_back(std::move(d));
        }
        for (const auto& k : detail.unmatched_doc) {
            Discrepancy d;
            d.kind = DiscrepancyKind::MissingFieldInCode;
            d.doc_location = k.path;
            d.doc_detail = field_decl_text(*find_def(doc, k));
            d.code_detail = "no field at the aligned position";
            out.push_back(std::move(d));
        }
        for (const auto& k : detail.unmatched_code) {
            Discrepancy d;
            d.kind = DiscrepancyKind::MissingFieldInDoc;
            d.code_location = k.path;
            d.code_detail = field_decl_text(*find_def(code, k));
            d.doc_detail = "no field at the aligned position";
            out.push_back(std::move(d));
        }
    }

    static const FieldDef* find_def(const SideInfo& side, const FieldKey& k) {
        for (const auto& fields : side.fields)
            for (const auto& pf : fields)
                if (pf.key == k) return pf.def;
        return nullptr;
    }

    void constraint_discrepancies() {
        std::set<const Constraint*> conflicted;

        for (const auto& sc : doc.constraints) {
            auto partner = conflict_partner(Side::Doc, sc);
            if (partner) {
                Discrepancy d;
                d.kind = DiscrepancyKind::ConstraintConflict;
                d.doc_location = sc.path;
                d.doc_detail = dsl::expr_text(*sc.c->expr);
                d.code_detail = *partner;
                d.constraint_id = sc.c->id;
                if (opts.witnesses) d.witness = conflict_witness(sc);
                out.push_back(std::move(d));
                conflicted.insert(sc.c);
            }
        }

        for (const auto& sc : doc.constraints) {
            if (conflicted.count(sc.c)) continue;
            bool implied = refs_all_matched(Side::Doc, sc) &&
                           implied_on_all_joints(Side::Doc, sc);
            if (implied) continue;
            Discrepancy d;
            d.kind = DiscrepancyKind::ConstraintMissingInCode;
            d.doc_location = sc.path;
            d.doc_detail = dsl::expr_text(*sc.c->expr) + " [" + sc.c->id + "]";
            d.code_detail = "not implied by the code-side constraints on the aligned group";
            d.constraint_id = sc.c->id;
            if (opts.witnesses) d.witness = witness_missing_in_code(sc);
            out.push_back(std::move(d));
        }

        for (const auto& sc : code.constraints) {
            bool implied = refs_all_matched(Side::Code, sc) &&
                           implied_on_all_joints(Side::Code, sc);
            if (implied) continue;
            // Conflicts are reported once, from the doc side.
            bool is_conflict = false;
            for (const auto& d : out)
                if (d.kind == DiscrepancyKind::ConstraintConflict &&
                    d.code_detail == dsl::expr_text(*sc.c->expr))
                    is_conflict = true;
            if (is_conflict) continue;
            Discrepancy d;
            d.kind = DiscrepancyKind::ConstraintMissingInDoc;
            d.code_location = sc.path;
            d.code_detail = dsl::expr_text(*sc.c->expr) + " [" + sc.c->id + "]";
            d.doc_detail = "not implied by the doc-side constraints on the aligned group";
            d.constraint_id = sc.c->id;
            if (opts.witnesses) d.witness = witness_missing_in_doc(sc);
            out.push_back(std::move(d));
        }
    }

    bool flips(const std::vector<std::uint8_t>& bytes, Side accepted_by) const {
        gen::CheckResult cr_code = gen::check_packet(code_spec, bytes);
        gen::CheckResult cr_doc = gen::check_packet(doc_spec, bytes);
        bool code_ok = cr_code.verdict == gen::Verdict::Accept;
        bool doc_ok = cr_doc.verdict == gen::Verdict::Accept;
        return accepted_by == Side::Code ? (code_ok && !doc_ok) : (doc_ok && !code_ok);
    }

    std::optional<Witness> witness_missing_in_code(const SideConstraint& sc) {
        Rng rng(opts.witness_seed ^ fnv1a64(sc.c->id) ^ fnv1a64(sc.path));
        for (std::size_t pi : sc.on_paths) {
            for (int b = 0; b < opts.witness_budget; ++b) {
                auto bytes = gen::sample_packet(doc_spec, doc.paths[pi], rng, {}, sc.c);
                if (!bytes) break;
                if (flips(*bytes, Side::Code)) return Witness{std::move(*bytes), Side::Code};
            }
        }
        return std::nullopt;
    }

    std::optional<Witness> witness_missing_in_doc(const SideConstraint& sc) {
        Rng rng(opts.witness_seed ^ fnv1a64(sc.c->id) ^ 0xd0cULL);

        // Express the code constraint over doc fields when the alignment
        // permits, then generate doc packets that violate it.
        std::map<std::string, int> dummy;
        bool expressible = true;
        ExprPtr over_doc = rewrite_onto_doc(sc, sc.c->expr, &expressible);
        for (std::size_t pi = 0; pi < doc.paths.size(); ++pi) {
            for (int b = 0; b < opts.witness_budget / 8 + 1; ++b) {
                std::optional<std::vector<std::uint8_t>> bytes;
                if (expressible && over_doc) {
                    std::vector<ExprPtr> extra{dsl::make_not(over_doc)};
                    bytes = gen::sample_packet(doc_spec, doc.paths[pi], rng, extra, nullptr);
                } else {
                    bytes = gen::sample_packet(doc_spec, doc.paths[pi], rng, {}, nullptr);
                }
                if (!bytes) break;
                if (flips(*bytes, Side::Doc)) return Witness{std::move(*bytes), Side::Doc};
            }
        }
        (void)dummy;
        return std::nullopt;
    }

    std::optional<Witness> conflict_witness(const SideConstraint& sc) {
        Rng rng(opts.witness_seed ^ fnv1a64(sc.c->id) ^ 0xc0fULL);
        for (std::size_t pi : sc.on_paths) {
            for (int b = 0; b < opts.witness_budget / 8 + 1; ++b) {
                auto bytes = gen::sample_packet(doc_spec, doc.paths[pi], rng, {}, nullptr);
                if (!bytes) break;
                if (flips(*bytes, Side::Doc)) return Witness{std::move(*bytes), Side::Doc};
            }
        }
        return std::nullopt;
    }

    // Maps a code-side expression onto doc field names: every referenced code
    // field must tile exactly into doc fields of its group.
    ExprPtr rewrite_onto_doc(const SideConstraint& sc, const ExprPtr& e, bool* ok) const {
        switch (e->kind) {
            case dsl::Expr::Kind::IntLit:
            case dsl::Expr::Kind::TotalLen: return e;
            case dsl::Expr::Kind::FieldRef: {
                auto kit = sc.ref_keys.find(e->field);
                if (kit == sc.ref_keys.end()) {
                    *ok = false;
                    return e;
                }
                auto gi = group_of(Side::Code, kit->second);
                if (!gi) {
                    *ok = false;
                    return e;
                }
                const GroupDetail& g = detail.groups[*gi];
                const GroupPlace* me = nullptr;
                for (const auto& p : g.code)
                    if (p.key == kit->second) me = &p;
                if (!me) {
                    *ok = false;
                    return e;
                }
                // Doc fields tiling [me->rel_off, +bits), in order.
                std::vector<const GroupPlace*> cover;
                std::uint64_t cursor = me->rel_off;
                for (const auto& p : g.doc) {
                    if (p.rel_off == cursor && p.rel_off + p.bits <= me->rel_off + me->bits) {
                        cover.push_back(&p);
                        cursor = p.rel_off + p.bits;
                    }
                }
                if (cursor != me->rel_off + me->bits || cover.empty()) {
                    *ok = false;
                    return e;
                }
                ExprPtr acc;
                for (const auto* p : cover) {
                    ExprPtr ref = dsl::make_field(p->key.name);
                    if (!acc) {
                        acc = ref;
                    } else {
                        acc = dsl::make_binary(
                            dsl::BinOp::Add,
                            dsl::make_binary(dsl::BinOp::Mul, acc,
                                             dsl::make_int(1ULL << p->bits)),
                            ref);
                    }
                }
                return acc;
            }
            case dsl::Expr::Kind::Not: return dsl::make_not(rewrite_onto_doc(sc, e->lhs, ok));
            case dsl::Expr::Kind::Binary:
                return dsl::make_binary(e->op, rewrite_onto_doc(sc, e->lhs, ok),
                                        rewrite_onto_doc(sc, e->rhs, ok));
        }
        return e;
    }

    ValidationReport run() {
        atoms.build(detail.groups);
        field_discrepancies();
        constraint_discrepancies();

        std::stable_sort(out.begin(), out.end(), [](const Discrepancy& a,
                                                    const Discrepancy& b) {
            auto key = [](const Discrepancy& d) {
                return std::make_tuple(d.doc_location + d.code_location,
                                       static_cast<int>(d.kind),
                                       d.constraint_id.value_or(""));
            };
            return key(a) < key(b);
        });

        ValidationReport report;
        report.code_name = code_spec.name;
        report.doc_name = doc_spec.name;
        report.code_digest = dsl::spec_digest(code_spec);
        report.doc_digest = dsl::spec_digest(doc_spec);
        report.discrepancies = std::move(out);
        for (DiscrepancyKind k :
             {DiscrepancyKind::TypeMismatch, DiscrepancyKind::MissingFieldInCode,
              DiscrepancyKind::MissingFieldInDoc, DiscrepancyKind::ConstraintMissingInCode,
              DiscrepancyKind::ConstraintMissingInDoc, DiscrepancyKind::ConstraintConflict})
            report.summary[kind_text(k)] = 0;
        for (const auto& d : report.discrepancies) ++report.summary[kind_text(d.kind)];
        return report;
    }
};

}  // namespace

ValidationReport diff_specs(const FormatSpec& code, const FormatSpec& doc,
                            const DiffOptions& opts) {
    {
        auto dc = dsl::validate_spec(code);
        auto dd = dsl::validate_spec(doc);
        if (dsl::has_errors(dc) || dsl::has_errors(dd))
            throw Error("precondition", "diff_specs requires validated specs");
    }
    Differ differ{code, doc, opts};
    return differ.run();
}

// ---------------------------------------------------------------------------
// serialization and rendering
// ---------------------------------------------------------------------------

json report_to_json(const ValidationReport& report) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["code_spec"] = {{"name", report.code_name}, {"digest", report.code_digest}};
    j["doc_spec"] = {{"name", report.doc_name}, {"digest", report.doc_digest}};
    json ds = json::array();
    for (const auto& d : report.discrepancies) {
        json dj;
        dj["kind"] = kind_text(d.kind);
        dj["code_location"] = d.code_location;
        dj["doc_location"] = d.doc_location;
        dj["code_detail"] = d.code_detail;
        dj["doc_detail"] = d.doc_detail;
        dj["constraint_id"] = d.constraint_id ? json(*d.constraint_id) : json(nullptr);
        if (d.witness) {
            dj["witness"] = {{"bytes", hex_encode(d.witness->bytes)},
                             {"accepted_by",
                              d.witness->accepted_by == Side::Code ? "code" : "doc"}};
        } else {
            dj["witness"] = nullptr;
        }
        ds.push_back(std::move(dj));
    }
    j["discrepancies"] = std::move(ds);
    j["summary"] = report.summary;
    return j;
}

ValidationReport report_from_json(const json& j) {
    ValidationReport report;
    report.code_name = j.at("code_spec").at("name").get<std::string>();
    report.code_digest = j.at("code_spec").at("digest").get<std::string>();
    report.doc_name = j.at("doc_spec").at("name").get<std::string>();
    report.doc_digest = j.at("doc_spec").at("digest").get<std::string>();
    for (const auto& dj : j.at("discrepancies")) {
        Discrepancy d;
        auto k = kind_from_text(dj.at("kind").get<std::string>());
        if (!k) throw Error("schema", "unknown discrepancy kind");
        d.kind = *k;
        d.code_location = dj.at("code_location").get<std::string>();
        d.doc_location = dj.at("doc_location").get<std::string>();
        d.code_detail = dj.at("code_detail").get<std::string>();
        d.doc_detail = dj.at("doc_detail").get<std::string>();
        if (!dj.at("constraint_id").is_null())
            d.constraint_id = dj.at("constraint_id").get<std::string>();
        if (dj.contains("witness") && !dj.at("witness").is_null()) {
            Witness w;
            auto bytes = hex_decode(dj.at("witness").at("bytes").get<std::string>());
            if (!bytes) throw Error("schema", "bad witness hex");
            w.bytes = std::move(*bytes);
            w.accepted_by = dj.at("witness").at("accepted_by").get<std::string>() == "code"
                                ? Side::Code
                                : Side::Doc;
            d.witness = std::move(w);
        }
        report.discrepancies.push_back(std::move(d));
    }
    for (const auto& [k, v] : j.at("summary").items())
        report.summary[k] = v.get<std::size_t>();
    return report;
}

std::vector<CatalogEntry> load_catalog(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    std::vector<CatalogEntry> out;
    for (const auto& ej : j.at("entries")) {
        CatalogEntry e;
        e.id = ej.at("id").get<std::string>();
        e.status = ej.value("status", "known");
        e.description = ej.at("description").get<std::string>();
        e.expect_kind = ej.at("expect").at("kind").get<std::string>();
        e.path_contains = ej.at("expect").value("path_contains", "");
        e.detail_contains = ej.at("expect").value("detail_contains", "");
        out.push_back(std::move(e));
    }
    return out;
}

std::map<std::string, std::vector<std::size_t>> catalog_coverage(
    const ValidationReport& report, const std::vector<CatalogEntry>& entries) {
    std::map<std::string, std::vector<std::size_t>> out;
    for (const auto& e : entries) {
        auto& hits = out[e.id];
        for (std::size_t i = 0; i < report.discrepancies.size(); ++i) {
            const Discrepancy& d = report.discrepancies[i];
            if (kind_text(d.kind) != e.expect_kind) continue;
            std::string paths = d.code_location + "\n" + d.doc_location;
            if (!e.path_contains.empty() && paths.find(e.path_contains) == std::string::npos)
                continue;
            std::string details = d.code_detail + "\n" + d.doc_detail;
            if (!e.detail_contains.empty() &&
                details.find(e.detail_contains) == std::string::npos)
                continue;
            hits.push_back(i);
        }
    }
    return out;
}

std::string render_text(const ValidationReport& report,
                        const std::vector<CatalogEntry>* catalog) {
    std::ostringstream os;
    os << "validation report: " << report.code_name << " (code) vs " << report.doc_name
       << " (doc)\n";
    os << "code digest: " << report.code_digest << "\n";
    os << "doc digest:  " << report.doc_digest << "\n\n";

    auto render_one = [&](const Discrepancy& d, const char* indent) {
        os << indent << "[" << kind_text(d.kind) << "]";
        if (!d.doc_location.empty()) os << " doc:" << d.doc_location;
        if (!d.code_location.empty()) os << " code:" << d.code_location;
        os << "\n";
        os << indent << "    doc side:  " << d.doc_detail << "\n";
        os << indent << "    code side: " << d.code_detail << "\n";
        if (d.witness) {
            os << indent << "    witness: " << d.witness->bytes.size()
               << " bytes accepted by "
               << (d.witness->accepted_by == Side::Code ? "code" : "doc") << ", hex "
               << hex_encode(d.witness->bytes) << "\n";
        }
    };

    std::set<std::size_t> mapped;
    if (catalog) {
        auto cov = catalog_coverage(report, *catalog);
        std::size_t covered = 0;
        for (const auto& e : *catalog)
            if (!cov[e.id].empty()) ++covered;
        os << "catalog coverage: " << covered << "/" << catalog->size() << "\n";
        for (const auto& e : *catalog) {
            os << "  [" << e.id << "][" << e.status << "] " << e.description << " -> "
               << cov[e.id].size() << " discrepanc" << (cov[e.id].size() == 1 ? "y" : "ies")
               << "\n";
            for (std::size_t i : cov[e.id]) {
                render_one(report.discrepancies[i], "      ");
                mapped.insert(i);
            }
        }
        os << "\n";
    }

    std::size_t rest = 0;
    for (std::size_t i = 0; i < report.discrepancies.size(); ++i)
        if (!mapped.count(i)) ++rest;
    os << (catalog ? "other discrepancies" : "discrepancies") << " (" << rest << "):\n";
    for (std::size_t i = 0; i < report.discrepancies.size(); ++i)
        if (!mapped.count(i)) render_one(report.discrepancies[i], "  ");

    os << "\nsummary:";
    for (const auto& [k, v] : report.summary) os << " " << k << "=" << v;
    os << "\n";
    return os.str();
}

}  // namespace pfv::diff
