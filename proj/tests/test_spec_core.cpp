// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "pfv/canonical.hpp"
#include "pfv/eval.hpp"
#include "pfv/layout.hpp"
#include "pfv/parse.hpp"
#include "pfv/rng.hpp"
#include "pfv/validate.hpp"

using namespace pfv;
using namespace pfv::dsl;

namespace {

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    for (const auto& d : diags)
        if (d.code == code) return true;
    return false;
}

FormatSpec parse_ok(const std::string& src) {
    ParseResult r = parse_spec(src);
    INFO(render_diagnostics(r.diagnostics));
    REQUIRE(r.ok());
    return *r.spec;
}

}  // namespace

TEST_CASE("minimal well-formed spec") {
    FormatSpec s = parse_ok("format v { vers: u3 where vers == 1; diag: u5; }");
    SpecStats st = spec_stats(s);
    CHECK(st.field_names == 2);
    CHECK(st.constraints == 1);
    CHECK(validate_spec(s).empty());
}

TEST_CASE("empty record is rejected") {
    ParseResult r = parse_spec("format empty {}");
    CHECK(!r.ok());
    CHECK(has_code(r.diagnostics, "empty-record"));
}

TEST_CASE("distinct diagnostic codes per error class") {
    SUBCASE("lexical error") {
        ParseResult r = parse_spec("format v { x: u8 where x == 1$; }");
        CHECK(has_code(r.diagnostics, "lex-error"));
    }
    SUBCASE("unknown operator") {
        ParseResult r = parse_spec("format v { x: u8 where x = 1; }");
        CHECK(has_code(r.diagnostics, "unknown-operator"));
    }
    SUBCASE("forward reference is undefined at use") {
        ParseResult r = parse_spec("format v { x: u8 where y == 1; y: u8; }");
        CHECK(has_code(r.diagnostics, "undefined-field"));
    }
    SUBCASE("duplicate field name") {
        ParseResult r = parse_spec("format v { x: u8; x: u8; }");
        CHECK(has_code(r.diagnostics, "duplicate-field"));
    }
    SUBCASE("diagnostics carry locations") {
        ParseResult r = parse_spec("format v {\n  x: u8 where x = 1;\n}");
        REQUIRE(!r.diagnostics.empty());
        CHECK(r.diagnostics[0].span.line == 2);
    }
}

TEST_CASE("constraint evaluation") {
    auto eval1 = [](const std::string& expr, Env env, std::uint64_t total_len = 0) {
        ExprParseResult r = parse_expr(expr);
        REQUIRE(r.ok());
        return evaluate_bool(*r.expr, env, total_len);
    };

    CHECK(eval1("vers == 1", {{"vers", 1}}));
    CHECK_FALSE(eval1("length >= 24", {{"length", 23}}));
    CHECK_FALSE(eval1("detect_mult != 0", {{"detect_mult", 0}}));
    CHECK(eval1("a + b * 2 == 7", {{"a", 1}, {"b", 3}}));
    CHECK(eval1("not (x == 0) and (x < 10 or x == 99)", {{"x", 3}}));
    CHECK(eval1("length == total_len", {{"length", 24}}, 24));

    SUBCASE("unbound reference names the missing field") {
        ExprParseResult r = parse_expr("missing == 1");
        REQUIRE(r.ok());
        try {
            evaluate_bool(*r.expr, {}, 0);
            FAIL("expected EvalError");
        } catch (const EvalError& e) {
            CHECK(e.missing_field() == "missing");
        }
    }

    SUBCASE("arithmetic is exact at 64-bit extremes") {
        // (2^64-1) * (2^64-1) must not wrap: the product is far above the
        // largest 64-bit literal.
        ExprParseResult r = parse_expr("a * b > 18446744073709551615");
        REQUIRE(r.ok());
        Env env{{"a", ~0ULL}, {"b", ~0ULL}};
        CHECK(evaluate_bool(*r.expr, env, 0));
        ExprParseResult r2 = parse_expr("a - b < 1");
        REQUIRE(r2.ok());
        CHECK(evaluate_bool(*r2.expr, {{"a", 0}, {"b", 1}}, 0));  // negative, exact
    }
}

TEST_CASE("evaluator totality on random well-typed constraints") {
    // Random constraint trees over a small env; evaluation must terminate
    // and produce a bool (never throw) when every reference is bound.
    Rng rng(42);
    std::vector<std::string> fields = {"a", "b", "c"};

    std::function<ExprPtr(int, bool)> gen = [&](int depth, bool want_bool) -> ExprPtr {
        if (want_bool) {
            if (depth <= 0 || rng.below(4) == 0) {
                static const BinOp cmps[] = {BinOp::Eq, BinOp::Ne, BinOp::Lt,
                                             BinOp::Le, BinOp::Gt, BinOp::Ge};
                return make_binary(cmps[rng.below(6)], gen(depth - 1, false),
                                   gen(depth - 1, false));
            }
            switch (rng.below(3)) {
                case 0: return make_not(gen(depth - 1, true));
                case 1:
                    return make_binary(BinOp::And, gen(depth - 1, true), gen(depth - 1, true));
                default:
                    return make_binary(BinOp::Or, gen(depth - 1, true), gen(depth - 1, true));
            }
        }
        if (depth <= 0 || rng.below(3) == 0) {
            switch (rng.below(3)) {
                case 0: return make_int(rng.below(1000));
                case 1: return make_field(fields[rng.below(fields.size())]);
                default: return make_total_len();
            }
        }
        static const BinOp ariths[] = {BinOp::Add, BinOp::Sub, BinOp::Mul};
        return make_binary(ariths[rng.below(3)], gen(depth - 1, false), gen(depth - 1, false));
    };

    for (int i = 0; i < 500; ++i) {
        ExprPtr e = gen(5, true);
        Env env{{"a", rng.next()}, {"b", rng.below(100)}, {"c", rng.next()}};
        bool v = evaluate_bool(*e, env, rng.below(65536));
        (void)v;
    }
}

TEST_CASE("canonical serialization") {
    const char* src1 =
        "format v {\n"
        "  # leading comment\n"
        "  x: u8 where x == 0x10;   # hex literal\n"
        "  y: u8;\n"
        "}\n";
    const char* src2 = "format v { x: u8 where x == 16; y: u8; }";

    FormatSpec a = parse_ok(src1);
    FormatSpec b = parse_ok(src2);

    SUBCASE("whitespace, comments and literal base do not matter") {
        CHECK(serialize_canonical(a) == serialize_canonical(b));
    }
    SUBCASE("round-trip through canonical text") {
        std::string canon = serialize_canonical(a);
        ParseResult back = parse_spec(canon);
        REQUIRE(back.ok());
        CHECK(spec_equal(*back.spec, a));
        CHECK(serialize_canonical(*back.spec) == canon);  // idempotent
    }
    SUBCASE("deterministic") {
        CHECK(serialize_canonical(a) == serialize_canonical(a));
        CHECK(spec_digest(a) == spec_digest(b));
    }
}

TEST_CASE("round-trip preserves structure for a branchy spec") {
    const char* src =
        "format branchy {\n"
        "  n: u8;\n"
        "  kind: u4;\n"
        "  pad: u4;\n"
        "  where n <= 8;\n"
        "  if (n == 1) { extra: u8 where extra != 0; }\n"
        "  switch (kind) {\n"
        "    case 0: { lo: u8; }\n"
        "    case 1: { hi: u8 where hi >= 128; }\n"
        "    default: { any: u8; }\n"
        "  }\n"
        "  body: bytes[n];\n"
        "}\n";
    FormatSpec s = parse_ok(src);
    CHECK(validate_spec(s).empty());
    ParseResult back = parse_spec(serialize_canonical(s));
    REQUIRE(back.ok());
    CHECK(spec_equal(*back.spec, s));

    SpecStats st = spec_stats(s);
    CHECK(st.field_names == 8);
    CHECK(st.constraints == 3);
    CHECK(s.global_constraints().size() == 1);
}

TEST_CASE("validator invariants") {
    SUBCASE("clean spec yields no diagnostics") {
        FormatSpec s = parse_ok("format ok { t: u8; switch (t) { case 1: { v: u8; } } }");
        CHECK(validate_spec(s).empty());
    }
    SUBCASE("discriminator too wide") {
        FormatSpec s =
            parse_ok("format w { t: u32; switch (t) { case 1: { v: u8; } } }");
        auto diags = validate_spec(s);
        CHECK(has_code(diags, "discriminator-too-wide"));
    }
    SUBCASE("forward reference in a length expression") {
        // Constructed programmatically: the parser would reject the source
        // outright, but validate_spec must catch the same invariant.
        FormatSpec s = parse_ok("format f { n: u8; body: bytes[n]; tail: u8; }");
        auto& rec = s.sections.at(0);
        rec.fields[1].type.length = make_field("tail");
        auto diags = validate_spec(s);
        CHECK(has_code(diags, "forward-reference"));
    }
    SUBCASE("duplicate tags") {
        ParseResult r = parse_spec(
            "format d { t: u8; switch (t) { case 1: { a: u8; } case 1: { b: u8; } } }");
        CHECK(has_code(r.diagnostics, "variant-duplicate-tag"));
    }
    SUBCASE("tag outside discriminator range") {
        FormatSpec s = parse_ok("format d { t: u2; switch (t) { case 9: { a: u8; } } }");
        CHECK(has_code(validate_spec(s), "tag-out-of-range"));
    }
    SUBCASE("byte-array must start byte aligned") {
        FormatSpec s = parse_ok("format m { x: u4; b: bytes[2]; y: u4; }");
        CHECK(has_code(validate_spec(s), "misaligned-bytes-field"));
    }
    SUBCASE("arm bodies must cover whole bytes") {
        FormatSpec s = parse_ok(
            "format a { t: u8; switch (t) { case 0: { x: u4; } case 1: { y: u8; } } }");
        CHECK(has_code(validate_spec(s), "section-not-byte-aligned"));
    }
    SUBCASE("length expression may not go negative") {
        FormatSpec s = parse_ok("format n { n: u8; body: bytes[n - 3]; }");
        CHECK(has_code(validate_spec(s), "negative-length"));
        FormatSpec ok = parse_ok("format n { n: u8 where n >= 3; body: bytes[n - 3]; }");
        CHECK(validate_spec(ok).empty());
    }
    SUBCASE("opaque fields cannot be referenced") {
        ParseResult r = parse_spec("format o { b: bytes[4]; x: u8 where b == 1; }");
        CHECK(has_code(r.diagnostics, "opaque-field-ref"));
    }
}

TEST_CASE("layout resolution") {
    SUBCASE("single byte field") {
        FormatSpec s = parse_ok("format one { x: u8; }");
        auto rows = resolve_layout(s, {});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].field == "x");
        CHECK(rows[0].bit_offset == 0);
        CHECK(rows[0].bit_width == 8);
    }
    SUBCASE("unresolved discriminator is an error") {
        FormatSpec s = parse_ok("format u { t: u8; switch (t) { case 0: { x: u8; } } }");
        CHECK_THROWS_AS(resolve_layout(s, {}), LayoutError);
    }
    SUBCASE("offsets are cumulative and gap-free") {
        FormatSpec s = parse_ok(
            "format c { a: u3; b: u5; c: u16; d: bytes[2]; e: u32; }");
        auto rows = resolve_layout(s, {});
        std::uint64_t expect = 0;
        for (const auto& r : rows) {
            CHECK(r.bit_offset == expect);
            expect += r.bit_width;
        }
        CHECK(expect % 8 == 0);
    }
    SUBCASE("guard selects body") {
        FormatSpec s = parse_ok("format g { a: u8; if (a == 1) { x: u8; } }");
        CHECK(resolve_layout(s, {{"a", 1}}).size() == 2);
        CHECK(resolve_layout(s, {{"a", 0}}).size() == 1);
    }
}

TEST_CASE("path enumeration covers guards and arms") {
    FormatSpec s = parse_ok(
        "format p { a: u1; pad: u7; t: u8;\n"
        "  if (a == 1) { switch (t) { case 0: { x: u8; } case 1: { y: u8; } } }\n"
        "}");
    auto paths = enumerate_paths(s);
    CHECK(paths.size() == 3);  // guard false, guard true x 2 arms
    std::set<std::string> labels;
    for (const auto& p : paths) labels.insert(p.label);
    CHECK(labels.size() == 3);
}
