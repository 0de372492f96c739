// SPDX-License-Identifier: Apache-2.0

#include "pfv/packets.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include "pfv/eval.hpp"
#include "pfv/util.hpp"

using nlohmann::json;

namespace pfv::gen {

using dsl::BinOp;
using dsl::Constraint;
using dsl::Env;
using dsl::Expr;
using dsl::ExprPtr;
using dsl::FieldDef;
using dsl::FieldType;
using dsl::FlatOp;
using dsl::FlatPath;
using dsl::FormatSpec;
using dsl::ResolvedPath;
using dsl::Section;

// ---------------------------------------------------------------------------
// check_packet
// ---------------------------------------------------------------------------

namespace {

struct BitReader {
    std::span<const std::uint8_t> bytes;
    std::uint64_t bit = 0;

    std::uint64_t total_bits() const { return 8 * static_cast<std::uint64_t>(bytes.size()); }
    bool have(std::uint64_t n) const { return bit + n <= total_bits(); }

    std::uint64_t take(int width) {
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            std::uint64_t b = (bytes[bit >> 3] >> (7 - (bit & 7))) & 1;
            v = (v << 1) | b;
            ++bit;
        }
        return v;
    }
};

struct Decoder {
    const FormatSpec& spec;
    BitReader in;
    CheckResult result;

    bool reject_structural(const std::string& tag) {
        result.verdict = Verdict::Reject;
        result.structural = tag;
        return false;
    }

    bool reject_constraint(const Constraint& c) {
        result.verdict = Verdict::Reject;
        result.failed_constraint = c.id;
        return false;
    }

    bool eval_check(const Constraint& c) {
        bool ok;
        try {
            ok = dsl::evaluate_constraint(c, result.decoded,
                                          static_cast<std::uint64_t>(in.bytes.size()));
        } catch (const dsl::EvalError&) {
            return reject_structural("spec-error");
        }
        if (!ok) return reject_constraint(c);
        return true;
    }

    bool field(const FieldDef& f) {
        if (f.type.kind == FieldType::Kind::UInt) {
            if (!in.have(static_cast<std::uint64_t>(f.type.bits)))
                return reject_structural("underrun");
            result.decoded[f.name] = in.take(f.type.bits);
        } else {
            if (in.bit % 8 != 0) return reject_structural("misaligned");
            dsl::Value len;
            try {
                len = dsl::evaluate_int(*f.type.length, result.decoded,
                                        static_cast<std::uint64_t>(in.bytes.size()));
            } catch (const dsl::EvalError&) {
                return reject_structural("spec-error");
            }
            if (len < 0) return reject_structural("negative-length");
            if (len > dsl::Value(in.bytes.size()))
                return reject_structural("underrun");
            std::uint64_t n = len.convert_to<std::uint64_t>();
            if (!in.have(8 * n)) return reject_structural("underrun");
            std::size_t start = in.bit / 8;
            result.decoded_bytes[f.name] =
                std::vector<std::uint8_t>(in.bytes.begin() + start,
                                          in.bytes.begin() + start + n);
            in.bit += 8 * n;
        }
        for (const auto& c : f.constraints)
            if (!eval_check(c)) return false;
        return true;
    }

    bool block(const std::vector<Section>& body) {
        for (const auto& s : body)
            if (!section(s)) return false;
        return true;
    }

    bool section(const Section& s) {
        switch (s.kind) {
            case Section::Kind::Record:
                for (const dsl::RecordOp& op : dsl::record_ops(s)) {
                    if (std::holds_alternative<const FieldDef*>(op)) {
                        if (!field(*std::get<const FieldDef*>(op))) return false;
                    } else {
                        if (!eval_check(std::get<const dsl::AnchoredConstraint*>(op)->constraint))
                            return false;
                    }
                }
                return true;
            case Section::Kind::Conditional: {
                bool taken;
                try {
                    taken = dsl::evaluate_bool(*s.guard.expr, result.decoded,
                                               static_cast<std::uint64_t>(in.bytes.size()));
                } catch (const dsl::EvalError&) {
                    return reject_structural("spec-error");
                }
                return taken ? block(s.body) : true;
            }
            case Section::Kind::Variant: {
                auto it = result.decoded.find(s.discriminator);
                if (it == result.decoded.end()) return reject_structural("spec-error");
                for (const auto& arm : s.arms)
                    if (arm.tag == it->second) return block(arm.body);
                if (s.default_arm) return block(*s.default_arm);
                return reject_structural("no-arm");
            }
        }
        return reject_structural("spec-error");
    }

    CheckResult run() {
        result.verdict = Verdict::Accept;
        if (!block(spec.sections)) return std::move(result);
        if (in.bit != in.total_bits()) {
            result.verdict = Verdict::Reject;
            result.structural = "overrun";
        }
        return std::move(result);
    }
};

}  // namespace

CheckResult check_packet(const FormatSpec& spec, std::span<const std::uint8_t> bytes) {
    Decoder d{spec, BitReader{bytes, 0}, {}};
    return d.run();
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

namespace {

struct BitWriter {
    std::vector<std::uint8_t> bytes;
    std::uint64_t bit = 0;

    void put(std::uint64_t v, int width) {
        for (int i = width - 1; i >= 0; --i) {
            if (bit % 8 == 0) bytes.push_back(0);
            std::uint64_t b = (v >> i) & 1;
            bytes.back() |= static_cast<std::uint8_t>(b << (7 - (bit & 7)));
            ++bit;
        }
    }

    void put_bytes(std::span<const std::uint8_t> data) {
        bytes.insert(bytes.end(), data.begin(), data.end());
        bit += 8 * data.size();
    }
};

std::uint64_t width_max(int bits) { return bits >= 64 ? ~0ULL : ((1ULL << bits) - 1); }

void split_and(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (e->kind == Expr::Kind::Binary && e->op == BinOp::And) {
        split_and(e->lhs, out);
        split_and(e->rhs, out);
        return;
    }
    out.push_back(e);
}

struct SimpleAtom {
    std::string field;
    BinOp op = BinOp::Eq;
    dsl::Value value;
};

bool to_constant(const ExprPtr& e, dsl::Value& out) {
    std::set<std::string> refs;
    dsl::collect_field_refs(*e, refs);
    if (!refs.empty() || dsl::expr_uses_total_len(*e)) return false;
    try {
        out = dsl::evaluate_int(*e, {}, 0);
    } catch (const dsl::EvalError&) {
        return false;
    }
    return true;
}

BinOp flip(BinOp op) {
    switch (op) {
        case BinOp::Lt: return BinOp::Gt;
        case BinOp::Le: return BinOp::Ge;
        case BinOp::Gt: return BinOp::Lt;
        case BinOp::Ge: return BinOp::Le;
        default: return op;  // ==, != are symmetric
    }
}

BinOp negate_cmp(BinOp op) {
    switch (op) {
        case BinOp::Eq: return BinOp::Ne;
        case BinOp::Ne: return BinOp::Eq;
        case BinOp::Lt: return BinOp::Ge;
        case BinOp::Le: return BinOp::Gt;
        case BinOp::Gt: return BinOp::Le;
        case BinOp::Ge: return BinOp::Lt;
        default: return op;
    }
}

// Matches `field CMP const` / `const CMP field` (optionally under a single
// `not`). These feed interval propagation; everything else is residual.
std::optional<SimpleAtom> match_simple(const ExprPtr& e) {
    if (e->kind == Expr::Kind::Not) {
        auto inner = match_simple(e->lhs);
        if (!inner) return std::nullopt;
        inner->op = negate_cmp(inner->op);
        return inner;
    }
    if (e->kind != Expr::Kind::Binary) return std::nullopt;
    switch (e->op) {
        case BinOp::Eq:
        case BinOp::Ne:
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: break;
        default: return std::nullopt;
    }
    SimpleAtom atom;
    if (e->lhs->kind == Expr::Kind::FieldRef && to_constant(e->rhs, atom.value)) {
        atom.field = e->lhs->field;
        atom.op = e->op;
        return atom;
    }
    if (e->rhs->kind == Expr::Kind::FieldRef && to_constant(e->lhs, atom.value)) {
        atom.field = e->rhs->field;
        atom.op = flip(e->op);
        return atom;
    }
    return std::nullopt;
}

struct IntPlan {
    const FieldDef* def = nullptr;
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    std::set<std::uint64_t> excluded;
    std::vector<std::string> sources;  // constraint texts that narrowed this plan
    std::vector<std::uint64_t> allowed;  // precomputed when the range is small
    bool impossible = false;
};

struct ByteFieldPlan {
    const FieldDef* def = nullptr;
    std::size_t order = 0;  // position among all fields
};

struct Residual {
    ExprPtr expr;
    bool uses_total = false;
};

class PathSampler {
public:
    PathSampler(const FormatSpec& spec, const ResolvedPath& path, const GenOptions& opts)
        : spec_(spec), opts_(opts), flat_(dsl::flatten_path(spec, path)) {}

    // target: constraint that must come out false; extras: expressions that
    // must hold in addition to the spec's own constraints.
    void configure(const Constraint* target, const std::vector<ExprPtr>& extras) {
        plans_.clear();
        byte_fields_.clear();
        residuals_.clear();
        index_.clear();
        impossible_ = false;
        blocking_.clear();

        std::size_t order = 0;
        for (const auto& op : flat_.ops) {
            if (op.kind != FlatOp::Kind::Field) continue;
            const FieldDef* f = op.field.def;
            if (f->type.kind == FieldType::Kind::UInt) {
                IntPlan plan;
                plan.def = f;
                plan.lo = 0;
                plan.hi = width_max(f->type.bits);
                index_[f->name] = plans_.size();
                plans_.push_back(std::move(plan));
            } else {
                byte_fields_.push_back({f, order});
            }
            ++order;
        }

        for (const auto& op : flat_.ops) {
            if (op.kind != FlatOp::Kind::Check) continue;
            const Constraint* c = op.check.constraint;
            if (c == target) {
                add_violated(c->expr);
            } else {
                add_required(c->expr);
            }
        }
        for (const auto& choice : flat_.path.choices) {
            if (choice.kind == dsl::PathChoice::Kind::Variant) {
                if (!choice.is_default) {
                    apply_atom({choice.section->discriminator, BinOp::Eq,
                                dsl::Value(choice.tag)},
                               "arm selection");
                } else {
                    // default arm: discriminator must not match any tag
                    for (const auto& arm : choice.section->arms)
                        apply_atom({choice.section->discriminator, BinOp::Ne,
                                    dsl::Value(arm.tag)},
                                   "default arm selection");
                }
            } else {
                const ExprPtr& g = choice.section->guard.expr;
                if (choice.guard_value)
                    add_required(g);
                else
                    add_violated(g);
            }
        }
        for (const auto& e : extras) add_required(e);

        for (auto& plan : plans_) {
            if (plan.impossible) {
                impossible_ = true;
                for (const auto& s : plan.sources) blocking_.push_back(s);
                continue;
            }
            std::uint64_t span = plan.hi - plan.lo;
            if (span <= 4096) {
                for (std::uint64_t v = plan.lo;; ++v) {
                    if (!plan.excluded.count(v)) plan.allowed.push_back(v);
                    if (v == plan.hi) break;
                }
                if (plan.allowed.empty()) {
                    impossible_ = true;
                    for (const auto& s : plan.sources) blocking_.push_back(s);
                }
            }
        }
    }

    bool impossible() const { return impossible_; }
    const std::vector<std::string>& blocking() const { return blocking_; }
    const FlatPath& flat() const { return flat_; }
    void prefer_min_total(bool v) { prefer_min_total_ = v; }

    std::vector<std::string> constraint_texts() const {
        std::vector<std::string> out;
        for (const auto& op : flat_.ops)
            if (op.kind == FlatOp::Kind::Check)
                out.push_back(dsl::expr_text(*op.check.constraint->expr));
        return out;
    }

    std::optional<std::vector<std::uint8_t>> try_once(Rng& rng) {
        if (impossible_) return std::nullopt;
        Env env;
        for (auto& plan : plans_) {
            std::uint64_t v;
            if (!plan.allowed.empty()) {
                v = plan.allowed[rng.below(plan.allowed.size())];
            } else {
                bool found = false;
                v = 0;
                for (int t = 0; t < 32 && !found; ++t) {
                    v = rng.in_range(plan.lo, plan.hi);
                    found = !plan.excluded.count(v);
                }
                if (!found) return std::nullopt;
            }
            env[plan.def->name] = v;
        }

        for (const auto& r : residuals_) {
            if (r.uses_total) continue;
            try {
                if (!dsl::evaluate_bool(*r.expr, env, 0)) return std::nullopt;
            } catch (const dsl::EvalError&) {
                return std::nullopt;
            }
        }

        // Resolve byte-array lengths, then the total length.
        std::uint64_t static_bytes = flat_.static_bits / 8;
        std::vector<std::uint64_t> lens(byte_fields_.size(), 0);
        std::uint64_t total = 0;

        bool any_total = false;
        for (const auto& bf : byte_fields_)
            if (dsl::expr_uses_total_len(*bf.def->type.length)) any_total = true;

        auto lens_for = [&](std::uint64_t cand, std::vector<std::uint64_t>& out) -> bool {
            std::uint64_t sum = 0;
            for (std::size_t i = 0; i < byte_fields_.size(); ++i) {
                dsl::Value v;
                try {
                    v = dsl::evaluate_int(*byte_fields_[i].def->type.length, env, cand);
                } catch (const dsl::EvalError&) {
                    return false;
                }
                if (v < 0 || v > dsl::Value(opts_.total_len_slack + static_bytes))
                    return false;
                out[i] = v.convert_to<std::uint64_t>();
                sum += out[i];
            }
            return static_bytes + sum == cand;
        };

        auto residual_total_ok = [&](std::uint64_t cand) -> bool {
            for (const auto& r : residuals_) {
                if (!r.uses_total) continue;
                try {
                    if (!dsl::evaluate_bool(*r.expr, env, cand)) return false;
                } catch (const dsl::EvalError&) {
                    return false;
                }
            }
            return true;
        };

        if (!any_total) {
            std::uint64_t sum = 0;
            for (std::size_t i = 0; i < byte_fields_.size(); ++i) {
                dsl::Value v;
                try {
                    v = dsl::evaluate_int(*byte_fields_[i].def->type.length, env, 0);
                } catch (const dsl::EvalError&) {
                    return std::nullopt;
                }
                if (v < 0 || v > dsl::Value(opts_.total_len_slack + static_bytes))
                    return std::nullopt;
                lens[i] = v.convert_to<std::uint64_t>();
                sum += lens[i];
            }
            total = static_bytes + sum;
            if (!residual_total_ok(total)) return std::nullopt;
        } else {
            // Byte lengths are (in practice) affine in total_len, so the
            // consistency equation static + sum(len_i(c)) == c is solved
            // from two probes instead of scanning candidate totals.
            auto lens_signed = [&](std::uint64_t cand, std::vector<long long>& out) -> bool {
                for (std::size_t i = 0; i < byte_fields_.size(); ++i) {
                    dsl::Value v;
                    try {
                        v = dsl::evaluate_int(*byte_fields_[i].def->type.length, env, cand);
                    } catch (const dsl::EvalError&) {
                        return false;
                    }
                    if (v < dsl::Value(-(1LL << 40)) || v > dsl::Value(1LL << 40))
                        return false;
                    out[i] = v.convert_to<long long>();
                }
                return true;
            };
            std::uint64_t c0 = static_bytes;
            std::vector<long long> la(byte_fields_.size()), lb(byte_fields_.size());
            if (!lens_signed(c0, la) || !lens_signed(c0 + 1, lb)) return std::nullopt;

            long long slope_sum = 0;
            std::uint64_t c_low = c0;
            std::uint64_t c_high = c0 + opts_.total_len_slack;
            for (std::size_t i = 0; i < byte_fields_.size(); ++i) {
                long long s = lb[i] - la[i];
                slope_sum += s;
                if (s == 0) {
                    if (la[i] < 0) return std::nullopt;
                } else if (s > 0) {
                    if (la[i] < 0) {
                        std::uint64_t need = static_cast<std::uint64_t>((-la[i] + s - 1) / s);
                        c_low = std::max(c_low, c0 + need);
                    }
                } else {
                    if (la[i] < 0) return std::nullopt;
                    std::uint64_t room = static_cast<std::uint64_t>(la[i] / (-s));
                    c_high = std::min(c_high, c0 + room);
                }
            }
            long long residue = static_cast<long long>(static_bytes) -
                                static_cast<long long>(c0);
            for (long long l : la) residue += l;

            std::vector<std::uint64_t> candidates;
            std::vector<std::uint64_t> tmp(byte_fields_.size(), 0);
            auto admit = [&](std::uint64_t cand) {
                if (cand < c_low || cand > c_high) return;
                if (!lens_for(cand, tmp)) return;
                if (!residual_total_ok(cand)) return;
                candidates.push_back(cand);
            };
            if (slope_sum == 1) {
                if (residue == 0) {
                    std::uint64_t scanned = 0;
                    for (std::uint64_t c = c_low;
                         c <= c_high && candidates.size() < opts_.candidate_spread &&
                         scanned < 1024;
                         ++c, ++scanned)
                        admit(c);
                }
            } else {
                long long denom = 1 - slope_sum;
                if (residue % denom == 0) {
                    long long d = residue / denom;
                    if (d >= 0) admit(c0 + static_cast<std::uint64_t>(d));
                }
            }
            if (candidates.empty()) return std::nullopt;
            total = prefer_min_total_ ? candidates.front()
                                      : candidates[rng.below(candidates.size())];
            lens_for(total, lens);
        }

        BitWriter out;
        std::size_t byte_idx = 0;
        std::size_t order = 0;
        for (const auto& op : flat_.ops) {
            if (op.kind != FlatOp::Kind::Field) continue;
            const FieldDef* f = op.field.def;
            if (f->type.kind == FieldType::Kind::UInt) {
                out.put(env[f->name], f->type.bits);
            } else {
                std::vector<std::uint8_t> content(lens[byte_idx]);
                for (auto& b : content) b = rng.byte();
                out.put_bytes(content);
                ++byte_idx;
            }
            ++order;
        }
        (void)order;
        return out.bytes;
    }

private:
    void add_required(const ExprPtr& e) {
        std::vector<ExprPtr> atoms;
        split_and(e, atoms);
        for (const auto& a : atoms) {
            if (auto simple = match_simple(a)) {
                apply_atom(*simple, dsl::expr_text(*a));
            } else {
                residuals_.push_back({a, dsl::expr_uses_total_len(*a)});
            }
        }
    }

    void add_violated(const ExprPtr& e) {
        // A conjunction is violated by violating any conjunct; negating the
        // whole expression keeps the choice with the sampler.
        if (auto simple = match_simple(e)) {
            SimpleAtom neg = *simple;
            neg.op = negate_cmp(neg.op);
            apply_atom(neg, "not " + dsl::expr_text(*e));
            return;
        }
        ExprPtr negated = dsl::make_not(e);
        residuals_.push_back({negated, dsl::expr_uses_total_len(*e)});
    }

    void apply_atom(const SimpleAtom& atom, const std::string& source) {
        auto it = index_.find(atom.field);
        if (it == index_.end()) {
            // Reference to a field not on this path (or opaque): keep as a
            // residual so sampling fails instead of silently ignoring it.
            residuals_.push_back({dsl::make_binary(atom.op, dsl::make_field(atom.field),
                                                   make_value_expr(atom.value)),
                                  false});
            return;
        }
        IntPlan& plan = plans_[it->second];
        plan.sources.push_back(source);
        const dsl::Value& v = atom.value;
        dsl::Value lo(plan.lo), hi(plan.hi);
        switch (atom.op) {
            case BinOp::Eq:
                if (v < lo || v > hi) {
                    plan.impossible = true;
                    return;
                }
                plan.lo = plan.hi = v.convert_to<std::uint64_t>();
                break;
            case BinOp::Ne:
                if (v >= lo && v <= hi) plan.excluded.insert(v.convert_to<std::uint64_t>());
                break;
            case BinOp::Lt:
                if (v <= lo) {
                    plan.impossible = true;
                    return;
                }
                if (v <= hi) plan.hi = (v - 1).convert_to<std::uint64_t>();
                break;
            case BinOp::Le:
                if (v < lo) {
                    plan.impossible = true;
                    return;
                }
                if (v < hi) plan.hi = v.convert_to<std::uint64_t>();
                break;
            case BinOp::Gt:
                if (v >= hi) {
                    plan.impossible = true;
                    return;
                }
                if (v >= lo) plan.lo = (v + 1).convert_to<std::uint64_t>();
                break;
            case BinOp::Ge:
                if (v > hi) {
                    plan.impossible = true;
                    return;
                }
                if (v > lo) plan.lo = v.convert_to<std::uint64_t>();
                break;
            default: break;
        }
        if (plan.lo > plan.hi) plan.impossible = true;
        if (plan.impossible) return;
        if (plan.excluded.size() > plan.hi - plan.lo) {
            bool any = false;
            for (std::uint64_t x = plan.lo; x <= plan.hi; ++x)
                if (!plan.excluded.count(x)) {
                    any = true;
                    break;
                }
            if (!any) plan.impossible = true;
        }
    }

    static ExprPtr make_value_expr(const dsl::Value& v) {
        return dsl::make_int(v < 0 ? 0 : v.convert_to<std::uint64_t>());
    }

    const FormatSpec& spec_;
    GenOptions opts_;
    FlatPath flat_;
    std::vector<IntPlan> plans_;
    std::vector<ByteFieldPlan> byte_fields_;
    std::vector<Residual> residuals_;
    std::map<std::string, std::size_t> index_;
    bool impossible_ = false;
    bool prefer_min_total_ = false;
    std::vector<std::string> blocking_;
};

}  // namespace

std::optional<std::vector<std::uint8_t>> sample_packet(
    const FormatSpec& spec, const ResolvedPath& path, Rng& rng,
    const std::vector<ExprPtr>& extra, const Constraint* violate, const GenOptions& opts) {
    PathSampler sampler(spec, path, opts);
    sampler.configure(violate, extra);
    if (sampler.impossible()) return std::nullopt;
    for (int attempt = 0; attempt < opts.retry_budget; ++attempt) {
        if (auto bytes = sampler.try_once(rng)) return bytes;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

std::vector<TestPacket> generate_positive(const FormatSpec& spec, std::uint64_t seed,
                                          std::size_t n, const GenOptions& opts) {
    if (n < 1) throw GenerationError("n must be at least 1");
    std::vector<ResolvedPath> paths = dsl::enumerate_paths(spec);

    std::vector<std::unique_ptr<PathSampler>> samplers;
    std::vector<bool> dead(paths.size(), false);
    std::vector<std::string> blocking;
    for (const auto& p : paths) {
        auto s = std::make_unique<PathSampler>(spec, p, opts);
        s->configure(nullptr, {});
        samplers.push_back(std::move(s));
    }

    std::vector<TestPacket> out;
    Rng root(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = root.fork(i);
        bool emitted = false;
        for (std::size_t probe = 0; probe < paths.size() && !emitted; ++probe) {
            std::size_t pi = (i + probe) % paths.size();
            if (dead[pi]) continue;
            PathSampler& sampler = *samplers[pi];
            if (sampler.impossible()) {
                dead[pi] = true;
                for (const auto& b : sampler.blocking()) blocking.push_back(b);
                continue;
            }
            for (int attempt = 0; attempt < opts.retry_budget; ++attempt) {
                auto bytes = sampler.try_once(rng);
                if (!bytes) continue;
                CheckResult cr = check_packet(spec, *bytes);
                if (cr.verdict != Verdict::Accept) continue;
                TestPacket p;
                p.id = i;
                p.bytes = std::move(*bytes);
                p.expectation = Verdict::Accept;
                p.seed = seed;
                out.push_back(std::move(p));
                emitted = true;
                break;
            }
            if (!emitted) {
                dead[pi] = true;
                for (const auto& t : sampler.constraint_texts()) blocking.push_back(t);
            }
        }
        if (!emitted) {
            std::sort(blocking.begin(), blocking.end());
            blocking.erase(std::unique(blocking.begin(), blocking.end()), blocking.end());
            std::string msg = "no satisfying packet found; blocking constraints:";
            for (const auto& b : blocking) msg += " " + b;
            throw GenerationError(msg, blocking);
        }
    }
    return out;
}

namespace {

struct NegativeTarget {
    enum class Kind { Constraint, Truncate, Extend, LengthCorrupt };
    Kind kind = Kind::Constraint;
    const Constraint* constraint = nullptr;
    std::size_t path_index = 0;
    std::string path_str;
};

}  // namespace

NegativeGen generate_negative(const FormatSpec& spec, std::uint64_t seed, std::size_t n,
                              const GenOptions& opts) {
    if (n < 1) throw GenerationError("n must be at least 1");
    std::vector<ResolvedPath> paths = dsl::enumerate_paths(spec);

    std::vector<FlatPath> flats;
    flats.reserve(paths.size());
    for (const auto& p : paths) flats.push_back(dsl::flatten_path(spec, p));

    // One target per distinct constraint id, on the first path carrying it;
    // structural mutations close the plan.
    std::vector<NegativeTarget> targets;
    std::set<std::string> seen;
    for (std::size_t pi = 0; pi < flats.size(); ++pi) {
        for (const auto& op : flats[pi].ops) {
            if (op.kind != FlatOp::Kind::Check) continue;
            const Constraint* c = op.check.constraint;
            if (!seen.insert(c->id).second) continue;
            targets.push_back({NegativeTarget::Kind::Constraint, c, pi, op.check.path});
        }
    }
    targets.push_back({NegativeTarget::Kind::Truncate, nullptr, 0, ""});
    targets.push_back({NegativeTarget::Kind::Extend, nullptr, 0, ""});
    targets.push_back({NegativeTarget::Kind::LengthCorrupt, nullptr, 0, ""});

    NegativeGen result;
    std::set<std::size_t> skipped_targets;
    std::map<std::size_t, std::unique_ptr<PathSampler>> target_samplers;
    Rng root(seed ^ 0x9e3779b97f4a7c15ULL);

    // Mutations start from an accepted packet with no trailing slack, so
    // removing or corrupting bytes actually perturbs the structure.
    std::vector<std::unique_ptr<PathSampler>> base_samplers;
    for (const auto& p : paths) {
        auto s = std::make_unique<PathSampler>(spec, p, opts);
        s->configure(nullptr, {});
        s->prefer_min_total(true);
        base_samplers.push_back(std::move(s));
    }
    std::size_t base_rotor = 0;
    auto make_base = [&](Rng& rng) -> std::optional<std::vector<std::uint8_t>> {
        for (std::size_t probe = 0; probe < paths.size(); ++probe) {
            PathSampler& sampler = *base_samplers[(base_rotor + probe) % paths.size()];
            if (sampler.impossible()) continue;
            for (int attempt = 0; attempt < opts.retry_budget; ++attempt) {
                auto b = sampler.try_once(rng);
                if (!b) continue;
                if (check_packet(spec, *b).verdict != Verdict::Accept) continue;
                ++base_rotor;
                return b;
            }
        }
        ++base_rotor;
        return std::nullopt;
    };

    // First integer field feeding a byte-array length on some path, at a
    // static offset so we can re-encode it in place.
    auto find_length_field = [&]() -> std::optional<std::pair<std::string, int>> {
        for (const auto& flat : flats) {
            std::set<std::string> length_refs;
            for (const auto& op : flat.ops) {
                if (op.kind != FlatOp::Kind::Field) continue;
                const FieldDef* f = op.field.def;
                if (f->type.kind == FieldType::Kind::Bytes && f->type.length)
                    dsl::collect_field_refs(*f->type.length, length_refs);
            }
            for (const auto& op : flat.ops) {
                if (op.kind != FlatOp::Kind::Field) continue;
                const FieldDef* f = op.field.def;
                if (f->type.kind == FieldType::Kind::UInt && length_refs.count(f->name) &&
                    op.field.dyn_prefix == 0)
                    return std::make_pair(f->name, f->type.bits);
            }
        }
        return std::nullopt;
    };

    auto set_field_bits = [&](std::vector<std::uint8_t>& bytes, std::uint64_t bit_offset,
                              int width, std::uint64_t value) {
        for (int i = 0; i < width; ++i) {
            std::uint64_t bit = bit_offset + static_cast<std::uint64_t>(i);
            std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - (bit & 7)));
            bool on = (value >> (width - 1 - i)) & 1;
            if (on)
                bytes[bit >> 3] |= mask;
            else
                bytes[bit >> 3] &= static_cast<std::uint8_t>(~mask);
        }
    };

    std::uint64_t next_id = 0;
    std::size_t ti = 0;
    std::size_t stuck = 0;
    while (result.packets.size() < n && stuck < targets.size()) {
        std::size_t t = ti % targets.size();
        ++ti;
        if (skipped_targets.count(t)) {
            ++stuck;
            continue;
        }
        const NegativeTarget& target = targets[t];
        Rng rng = root.fork(next_id * 131 + t);

        std::optional<TestPacket> packet;
        std::string skip_reason;

        switch (target.kind) {
            case NegativeTarget::Kind::Constraint: {
                auto it = target_samplers.find(t);
                if (it == target_samplers.end()) {
                    auto s =
                        std::make_unique<PathSampler>(spec, paths[target.path_index], opts);
                    s->configure(target.constraint, {});
                    it = target_samplers.emplace(t, std::move(s)).first;
                }
                PathSampler& sampler = *it->second;
                std::optional<std::vector<std::uint8_t>> bytes;
                bool shadowed = false;
                for (int attempt = 0; attempt < opts.retry_budget && !bytes; ++attempt) {
                    auto b = sampler.try_once(rng);
                    if (!b) continue;
                    CheckResult cr = check_packet(spec, *b);
                    if (cr.verdict == Verdict::Reject &&
                        cr.failed_constraint == target.constraint->id) {
                        bytes = std::move(b);
                    } else {
                        shadowed = true;
                    }
                }
                if (!bytes) {
                    skip_reason = shadowed
                                      ? "violation is shadowed by structure or other constraints"
                                      : "not individually negatable within budget";
                    break;
                }
                TestPacket p;
                p.bytes = std::move(*bytes);
                p.expectation = Verdict::Reject;
                p.target_constraint = target.constraint->id;
                p.seed = seed;
                packet = std::move(p);
                break;
            }
            case NegativeTarget::Kind::Truncate: {
                for (int attempt = 0; attempt < 32 && !packet; ++attempt) {
                    auto base = make_base(rng);
                    if (!base || base->empty()) continue;
                    std::vector<std::uint8_t> mutated(base->begin(), base->end() - 1);
                    if (check_packet(spec, mutated).verdict != Verdict::Reject) continue;
                    TestPacket p;
                    p.bytes = std::move(mutated);
                    p.expectation = Verdict::Reject;
                    p.mutation = "truncate";
                    p.seed = seed;
                    packet = std::move(p);
                }
                if (!packet) skip_reason = "truncation never rejected";
                break;
            }
            case NegativeTarget::Kind::Extend: {
                for (int attempt = 0; attempt < 32 && !packet; ++attempt) {
                    auto base = make_base(rng);
                    if (!base) continue;
                    std::vector<std::uint8_t> mutated = *base;
                    mutated.push_back(rng.byte());
                    if (check_packet(spec, mutated).verdict != Verdict::Reject) continue;
                    TestPacket p;
                    p.bytes = std::move(mutated);
                    p.expectation = Verdict::Reject;
                    p.mutation = "extend";
                    p.seed = seed;
                    packet = std::move(p);
                }
                if (!packet) skip_reason = "spec tolerates trailing bytes";
                break;
            }
            case NegativeTarget::Kind::LengthCorrupt: {
                auto lf = find_length_field();
                if (!lf) {
                    skip_reason = "no length field to corrupt";
                    break;
                }
                for (int attempt = 0; attempt < 32 && !packet; ++attempt) {
                    auto base = make_base(rng);
                    if (!base) continue;
                    // Locate the field's bit offset on the base packet's
                    // actual path via decode.
                    CheckResult cr = check_packet(spec, *base);
                    if (cr.verdict != Verdict::Accept || !cr.decoded.count(lf->first))
                        continue;
                    std::optional<std::uint64_t> offset;
                    for (const auto& flat : flats) {
                        for (const auto& op : flat.ops)
                            if (op.kind == FlatOp::Kind::Field &&
                                op.field.def->name == lf->first &&
                                op.field.dyn_prefix == 0)
                                offset = op.field.static_bit_offset;
                        if (offset) break;
                    }
                    if (!offset) break;
                    std::vector<std::uint8_t> mutated = *base;
                    std::uint64_t corrupt = width_max(lf->second);
                    if (cr.decoded[lf->first] == corrupt) corrupt = 0;
                    set_field_bits(mutated, *offset, lf->second, corrupt);
                    if (check_packet(spec, mutated).verdict != Verdict::Reject) continue;
                    TestPacket p;
                    p.bytes = std::move(mutated);
                    p.expectation = Verdict::Reject;
                    p.mutation = "length-corrupt";
                    p.seed = seed;
                    packet = std::move(p);
                }
                if (!packet) skip_reason = "length corruption never rejected";
                break;
            }
        }

        if (packet) {
            packet->id = next_id++;
            result.packets.push_back(std::move(*packet));
            stuck = 0;
        } else {
            skipped_targets.insert(t);
            result.skipped.push_back(
                {target.constraint ? target.constraint->id : "",
                 target.kind == NegativeTarget::Kind::Constraint
                     ? target.path_str
                     : std::string(target.kind == NegativeTarget::Kind::Truncate
                                       ? "truncate"
                                       : target.kind == NegativeTarget::Kind::Extend
                                             ? "extend"
                                             : "length-corrupt"),
                 skip_reason});
            ++stuck;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// corpus file format
// ---------------------------------------------------------------------------

json packet_to_json(const TestPacket& p) {
    json j;
    j["id"] = p.id;
    j["bytes"] = hex_encode(p.bytes);
    j["expectation"] = verdict_text(p.expectation);
    j["target_constraint"] = p.target_constraint ? json(*p.target_constraint) : json(nullptr);
    j["mutation"] = p.mutation ? json(*p.mutation) : json(nullptr);
    j["seed"] = p.seed;
    return j;
}

TestPacket packet_from_json(const json& j) {
    TestPacket p;
    p.id = j.at("id").get<std::uint64_t>();
    auto bytes = hex_decode(j.at("bytes").get<std::string>());
    if (!bytes) throw Error("corpus", "invalid hex in packet record");
    p.bytes = std::move(*bytes);
    std::string e = j.at("expectation").get<std::string>();
    if (e == "accept")
        p.expectation = Verdict::Accept;
    else if (e == "reject")
        p.expectation = Verdict::Reject;
    else
        throw Error("corpus", "invalid expectation: " + e);
    if (j.contains("target_constraint") && !j.at("target_constraint").is_null())
        p.target_constraint = j.at("target_constraint").get<std::string>();
    if (j.contains("mutation") && !j.at("mutation").is_null())
        p.mutation = j.at("mutation").get<std::string>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (p.expectation == Verdict::Reject && !p.target_constraint && !p.mutation)
        throw Error("corpus", "reject packet lacks target_constraint and mutation");
    return p;
}

void write_packets_jsonl(const std::filesystem::path& path,
                         std::span<const TestPacket> packets) {
    std::string out;
    for (const auto& p : packets) out += packet_to_json(p).dump() + "\n";
    write_file(path, out);
}

std::vector<TestPacket> read_packets_jsonl(const std::filesystem::path& path) {
    std::vector<TestPacket> out;
    for (const auto& line : split_lines(read_file(path))) {
        std::string t = trim(line);
        if (t.empty()) continue;
        out.push_back(packet_from_json(json::parse(t)));
    }
    return out;
}

}  // namespace pfv::gen
