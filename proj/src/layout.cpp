// SPDX-License-Identifier: Apache-2.0

#include "pfv/layout.hpp"

#include <algorithm>

namespace pfv::dsl {

std::vector<RecordOp> record_ops(const Section& record) {
    std::vector<RecordOp> out;
    std::size_t check_idx = 0;
    // Checks are stored in source order; anchors are non-decreasing.
    for (std::size_t k = 0; k <= record.fields.size(); ++k) {
        while (check_idx < record.checks.size() &&
               record.checks[check_idx].after_field == k) {
            out.emplace_back(&record.checks[check_idx]);
            ++check_idx;
        }
        if (k < record.fields.size()) out.emplace_back(&record.fields[k]);
    }
    return out;
}

namespace {

std::string choice_suffix(const PathChoice& c) {
    if (c.kind == PathChoice::Kind::Guard)
        return "if(" + expr_text(*c.section->guard.expr) + ")=" + (c.guard_value ? "1" : "0");
    if (c.is_default) return "switch(" + c.section->discriminator + ")=default";
    return "switch(" + c.section->discriminator + ")=" + std::to_string(c.tag);
}

using SectionQueue = std::vector<const Section*>;

SectionQueue splice(const SectionQueue& queue, std::size_t idx,
                    const std::vector<Section>& body) {
    SectionQueue next;
    next.reserve(queue.size() + body.size());
    for (const auto& s : body) next.push_back(&s);
    next.insert(next.end(), queue.begin() + static_cast<std::ptrdiff_t>(idx) + 1,
                queue.end());
    return next;
}

void enum_rec(const SectionQueue& queue, std::size_t idx, std::vector<PathChoice>& acc,
              std::vector<ResolvedPath>& out, std::size_t cap) {
    if (out.size() > cap) throw pfv::Error("paths", "too many resolved paths");
    if (idx == queue.size()) {
        ResolvedPath p;
        p.choices = acc;
        for (const auto& c : acc) {
            if (!p.label.empty()) p.label += "/";
            p.label += choice_suffix(c);
        }
        if (p.label.empty()) p.label = ".";
        out.push_back(std::move(p));
        return;
    }
    const Section* s = queue[idx];
    switch (s->kind) {
        case Section::Kind::Record:
            enum_rec(queue, idx + 1, acc, out, cap);
            break;
        case Section::Kind::Conditional: {
            PathChoice c;
            c.kind = PathChoice::Kind::Guard;
            c.section = s;
            c.guard_value = true;
            acc.push_back(c);
            enum_rec(splice(queue, idx, s->body), 0, acc, out, cap);
            acc.back().guard_value = false;
            enum_rec(queue, idx + 1, acc, out, cap);
            acc.pop_back();
            break;
        }
        case Section::Kind::Variant: {
            for (const auto& arm : s->arms) {
                PathChoice c;
                c.kind = PathChoice::Kind::Variant;
                c.section = s;
                c.tag = arm.tag;
                acc.push_back(c);
                enum_rec(splice(queue, idx, arm.body), 0, acc, out, cap);
                acc.pop_back();
            }
            if (s->default_arm) {
                PathChoice c;
                c.kind = PathChoice::Kind::Variant;
                c.section = s;
                c.is_default = true;
                acc.push_back(c);
                enum_rec(splice(queue, idx, *s->default_arm), 0, acc, out, cap);
                acc.pop_back();
            }
            break;
        }
    }
}

struct Flattener {
    const ResolvedPath& path;
    std::size_t choice_idx = 0;
    FlatPath result;

    const PathChoice& take(const Section* s) {
        if (choice_idx >= path.choices.size() || path.choices[choice_idx].section != s)
            throw pfv::Error("paths", "path does not match spec structure");
        return path.choices[choice_idx++];
    }

    void block(const std::vector<Section>& body, const std::string& prefix) {
        for (const auto& s : body) section(s, prefix);
    }

    void section(const Section& s, const std::string& prefix) {
        switch (s.kind) {
            case Section::Kind::Record: {
                for (const RecordOp& op : record_ops(s)) {
                    if (std::holds_alternative<const FieldDef*>(op)) {
                        const FieldDef* f = std::get<const FieldDef*>(op);
                        FlatOp fo;
                        fo.kind = FlatOp::Kind::Field;
                        fo.field.def = f;
                        fo.field.path = prefix + f->name;
                        fo.field.static_bit_offset = result.static_bits;
                        fo.field.dyn_prefix = result.dyn_fields;
                        result.ops.push_back(fo);
                        if (f->type.kind == FieldType::Kind::UInt)
                            result.static_bits += static_cast<std::uint64_t>(f->type.bits);
                        else
                            ++result.dyn_fields;
                        for (const auto& c : f->constraints) {
                            FlatOp co;
                            co.kind = FlatOp::Kind::Check;
                            co.check.constraint = &c;
                            co.check.path = prefix + f->name;
                            co.check.from_field = true;
                            co.check.field_name = f->name;
                            result.ops.push_back(co);
                        }
                    } else {
                        const AnchoredConstraint* ac = std::get<const AnchoredConstraint*>(op);
                        FlatOp co;
                        co.kind = FlatOp::Kind::Check;
                        co.check.constraint = &ac->constraint;
                        co.check.path = prefix + "where";
                        co.check.from_field = false;
                        result.ops.push_back(co);
                    }
                }
                break;
            }
            case Section::Kind::Conditional: {
                const PathChoice& c = take(&s);
                if (c.guard_value)
                    block(s.body, prefix + "if(" + expr_text(*s.guard.expr) + ")/");
                break;
            }
            case Section::Kind::Variant: {
                const PathChoice& c = take(&s);
                std::string base = prefix + "switch(" + s.discriminator + ")/";
                if (c.is_default) {
                    block(*s.default_arm, base + "default/");
                } else {
                    for (const auto& arm : s.arms)
                        if (arm.tag == c.tag) {
                            block(arm.body, base + "case(" + std::to_string(arm.tag) + ")/");
                            break;
                        }
                }
                break;
            }
        }
    }
};

}  // namespace

std::vector<ResolvedPath> enumerate_paths(const FormatSpec& spec, std::size_t cap) {
    SectionQueue queue;
    queue.reserve(spec.sections.size());
    for (const auto& s : spec.sections) queue.push_back(&s);
    std::vector<ResolvedPath> out;
    std::vector<PathChoice> acc;
    enum_rec(queue, 0, acc, out, cap);
    return out;
}

FlatPath flatten_path(const FormatSpec& spec, const ResolvedPath& path) {
    Flattener fl{path, 0, {}};
    fl.result.path = path;
    fl.block(spec.sections, "");
    if (fl.choice_idx != path.choices.size())
        throw pfv::Error("paths", "path has surplus choices for this spec");
    return fl.result;
}

namespace {

struct LayoutWalker {
    const Env& env;
    std::optional<std::uint64_t> total_len;
    std::vector<LayoutRow> rows;
    std::uint64_t offset = 0;

    std::uint64_t eval_len(const Expr& e) {
        if (expr_uses_total_len(e) && !total_len)
            throw LayoutError("length expression needs total_len: " + expr_text(e));
        Value v;
        try {
            v = evaluate_int(e, env, total_len.value_or(0));
        } catch (const EvalError& err) {
            throw LayoutError(std::string("cannot evaluate length expression: ") +
                              err.what());
        }
        if (v < 0)
            throw LayoutError("length expression is negative: " + expr_text(e));
        if (v > Value(1) << 32) throw LayoutError("length expression is implausibly large");
        return v.convert_to<std::uint64_t>();
    }

    void block(const std::vector<Section>& body) {
        for (const auto& s : body) section(s);
    }

    void section(const Section& s) {
        switch (s.kind) {
            case Section::Kind::Record:
                for (const auto& f : s.fields) {
                    LayoutRow row;
                    row.field = f.name;
                    row.bit_offset = offset;
                    if (f.type.kind == FieldType::Kind::UInt) {
                        row.bit_width = static_cast<std::uint64_t>(f.type.bits);
                    } else {
                        if (offset % 8 != 0)
                            throw LayoutError("byte-array field '" + f.name +
                                              "' does not start on a byte boundary");
                        row.bit_width = 8 * eval_len(*f.type.length);
                    }
                    offset += row.bit_width;
                    rows.push_back(std::move(row));
                }
                break;
            case Section::Kind::Conditional: {
                bool taken;
                try {
                    taken = evaluate_bool(*s.guard.expr, env, total_len.value_or(0));
                } catch (const EvalError& err) {
                    throw LayoutError(std::string("guard is unresolved: ") + err.what());
                }
                if (taken) block(s.body);
                break;
            }
            case Section::Kind::Variant: {
                auto it = env.find(s.discriminator);
                if (it == env.end())
                    throw LayoutError("variant discriminator '" + s.discriminator +
                                      "' is unresolved");
                const std::vector<Section>* chosen = nullptr;
                for (const auto& arm : s.arms)
                    if (arm.tag == it->second) {
                        chosen = &arm.body;
                        break;
                    }
                if (!chosen && s.default_arm) chosen = &*s.default_arm;
                if (!chosen)
                    throw LayoutError("no arm matches " + s.discriminator + " = " +
                                      std::to_string(it->second));
                block(*chosen);
                break;
            }
        }
    }
};

}  // namespace

std::vector<LayoutRow> resolve_layout(const FormatSpec& spec, const Env& env,
                                      std::optional<std::uint64_t> total_len) {
    LayoutWalker w{env, total_len, {}, 0};
    w.block(spec.sections);
    if (w.offset % 8 != 0)
        throw LayoutError("resolved layout is not a whole number of bytes");
    return std::move(w.rows);
}

}  // namespace pfv::dsl
