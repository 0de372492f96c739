// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "helpers.hpp"
#include "pfv/diff.hpp"
#include "pfv/packets.hpp"
#include "pfv/parse.hpp"

using namespace pfv;
using namespace pfv::dsl;
using namespace pfv::diff;
using pfv_tests::load_spec_file;
using pfv_tests::rename_all_fields;
using pfv_tests::source_root;

namespace {

ExprPtr expr(const std::string& text) {
    auto r = parse_expr(text);
    REQUIRE(r.ok());
    return r.expr;
}

FormatSpec spec_of(const std::string& src) {
    auto r = parse_spec(src);
    INFO(render_diagnostics(r.diagnostics));
    REQUIRE(r.ok());
    return *r.spec;
}

std::size_t count_kind(const ValidationReport& r, DiscrepancyKind k) {
    std::size_t n = 0;
    for (const auto& d : r.discrepancies)
        if (d.kind == k) ++n;
    return n;
}

}  // namespace

TEST_CASE("constraint equivalence over 8-bit domains") {
    std::map<std::string, int> u8{{"x", 8}};
    std::map<std::string, int> two{{"x", 8}, {"y", 8}};

    struct Case {
        const char* c1;
        const char* c2;
        EquivRelation want;
        const std::map<std::string, int>* widths;
    };
    const Case cases[] = {
        {"x != 0", "x >= 1", EquivRelation::Equivalent, &u8},
        {"x > 24", "x >= 24", EquivRelation::FirstImpliesSecond, &u8},
        {"x == 1", "x == 1", EquivRelation::Equivalent, &u8},
        {"x >= 24", "x > 24", EquivRelation::SecondImpliesFirst, &u8},
        {"x == 0", "x == 1", EquivRelation::Incomparable, &u8},
        {"x <= 255", "x >= 0", EquivRelation::Equivalent, &u8},
        {"x < 10", "x <= 9", EquivRelation::Equivalent, &u8},
        {"x >= 1 and x <= 9", "x != 0", EquivRelation::FirstImpliesSecond, &u8},
        {"not (x == 0)", "x >= 1", EquivRelation::Equivalent, &u8},
        {"x == 3", "x >= 3 and x <= 3", EquivRelation::Equivalent, &u8},
        {"x * 2 == 4", "x == 2", EquivRelation::Equivalent, &u8},
        {"x + 1 == 10", "x == 9", EquivRelation::Equivalent, &u8},
        {"x != 5", "x == 5", EquivRelation::Incomparable, &u8},
        {"x > 100", "x != 0", EquivRelation::FirstImpliesSecond, &u8},
        {"x >= 128", "x > 127", EquivRelation::Equivalent, &u8},
        {"x - 1 >= 1", "x >= 2", EquivRelation::Equivalent, &u8},
        {"x == 0 or x == 1", "x <= 1", EquivRelation::Equivalent, &u8},
        {"x <= 1", "x == 0", EquivRelation::SecondImpliesFirst, &u8},
        {"x < y", "y > x", EquivRelation::Equivalent, &two},
        {"x < y", "x <= y", EquivRelation::FirstImpliesSecond, &two},
        {"x == y", "x <= y and y <= x", EquivRelation::Equivalent, &two},
        {"x == 200 and x == 7", "x == 1 and x == 2", EquivRelation::Equivalent, &u8},
    };

    std::size_t checked = 0;
    for (const auto& c : cases) {
        CAPTURE(c.c1);
        CAPTURE(c.c2);
        EquivResult r = constraints_equivalent(expr(c.c1), expr(c.c2), *c.widths);
        CHECK(r.relation == c.want);
        CHECK(r.exhaustive);
        if (c.want == EquivRelation::Incomparable) {
            REQUIRE(r.first_not_second);
            REQUIRE(r.second_not_first);
        }
        ++checked;
    }
    CHECK(checked >= 20);

    SUBCASE("one-way implication carries the counterexample") {
        EquivResult r = constraints_equivalent(expr("x > 24"), expr("x >= 24"), u8);
        REQUIRE(r.second_not_first);
        CHECK(r.second_not_first->at("x") == 24);
    }

    SUBCASE("domains beyond the cutoff are sampled") {
        std::map<std::string, int> wide{{"length", 8}};
        EquivResult r = constraints_equivalent(expr("length <= total_len"),
                                               expr("length < total_len + 1"), wide);
        CHECK(r.relation == EquivRelation::Equivalent);
        CHECK_FALSE(r.exhaustive);
    }
}

TEST_CASE("alignment is offset based") {
    SUBCASE("renamed specs pair fully") {
        FormatSpec a = spec_of("format a { x: u8; y: u16; z: u8; }");
        FormatSpec b = spec_of("format b { one: u8; two: u16; three: u8; }");
        Alignment al = align_fields(a, b);
        CHECK(al.groups.size() == 3);
        CHECK(al.unmatched_code.empty());
        CHECK(al.unmatched_doc.empty());
        for (const auto& g : al.groups) {
            CHECK(g.code_fields.size() == 1);
            CHECK(g.doc_fields.size() == 1);
            CHECK_FALSE(g.width_mismatch);
        }
    }

    SUBCASE("coarse field groups with a run of finer fields") {
        FormatSpec code = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
        FormatSpec doc = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
        Alignment al = align_fields(code, doc);

        bool flags_group = false;
        for (const auto& g : al.groups) {
            if (g.code_fields.size() == 1 && g.code_fields[0].name == "flags") {
                REQUIRE(g.doc_fields.size() == 7);
                CHECK(g.doc_fields.front().name == "sta");
                CHECK(g.doc_fields.back().name == "m");
                CHECK_FALSE(g.width_mismatch);
                flags_group = true;
            }
        }
        CHECK(flags_group);

        // Every auth-section field exists only on the doc side.
        std::set<std::string> missing;
        for (const auto& k : al.unmatched_doc) missing.insert(k.name);
        for (const char* f : {"auth_type", "auth_len", "sp_auth_key_id", "sp_password",
                              "md5_digest", "met_sha1_hash"})
            CHECK(missing.count(f));
        CHECK(al.unmatched_code.empty());
    }
}

TEST_CASE("diff of the BFD fixture pair") {
    FormatSpec code = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    FormatSpec doc = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
    ValidationReport report = diff_specs(code, doc);

    SUBCASE("summary counts equal list tallies") {
        std::map<std::string, std::size_t> tally;
        for (const auto& [k, v] : report.summary) tally[k] = 0;
        for (const auto& d : report.discrepancies) ++tally[kind_text(d.kind)];
        CHECK(tally == report.summary);
    }

    SUBCASE("m flag rule is missing in code") {
        bool found = false;
        for (const auto& d : report.discrepancies)
            if (d.kind == DiscrepancyKind::ConstraintMissingInCode &&
                d.doc_detail.find("(m == 0)") != std::string::npos) {
                found = true;
                REQUIRE(d.witness);
                CHECK(d.witness->accepted_by == Side::Code);
            }
        CHECK(found);
    }

    SUBCASE("auth section arms are missing in code") {
        std::size_t auth_missing = 0;
        for (const auto& d : report.discrepancies)
            if (d.kind == DiscrepancyKind::MissingFieldInCode &&
                d.doc_location.find("auth") != std::string::npos)
                ++auth_missing;
        CHECK(auth_missing == 20);  // header pair + 18 arm fields
        CHECK(count_kind(report, DiscrepancyKind::MissingFieldInDoc) == 0);
    }

    SUBCASE("detect-mult and minimum length rules are missing in doc") {
        std::set<std::string> missing_in_doc;
        for (const auto& d : report.discrepancies)
            if (d.kind == DiscrepancyKind::ConstraintMissingInDoc)
                missing_in_doc.insert(d.code_detail.substr(0, d.code_detail.find(" [")));
        CHECK(missing_in_doc ==
              std::set<std::string>{"(detect_mult != 0)", "(length >= 24)"});
    }

    SUBCASE("no spurious kinds") {
        CHECK(count_kind(report, DiscrepancyKind::TypeMismatch) == 0);
        CHECK(count_kind(report, DiscrepancyKind::ConstraintConflict) == 0);
        CHECK(count_kind(report, DiscrepancyKind::ConstraintMissingInCode) == 7);
        CHECK(count_kind(report, DiscrepancyKind::ConstraintMissingInDoc) == 2);
    }

    SUBCASE("witnesses flip verdicts") {
        std::size_t with_witness = 0;
        for (const auto& d : report.discrepancies) {
            if (!d.witness) continue;
            ++with_witness;
            bool code_ok =
                gen::check_packet(code, d.witness->bytes).verdict == gen::Verdict::Accept;
            bool doc_ok =
                gen::check_packet(doc, d.witness->bytes).verdict == gen::Verdict::Accept;
            if (d.witness->accepted_by == Side::Code) {
                CHECK(code_ok);
                CHECK_FALSE(doc_ok);
            } else {
                CHECK(doc_ok);
                CHECK_FALSE(code_ok);
            }
        }
        CHECK(with_witness >= 8);  // m==0, 6 auth constraints, detect_mult
    }

    SUBCASE("json round-trip") {
        auto j = report_to_json(report);
        ValidationReport back = report_from_json(j);
        CHECK(report_to_json(back) == j);
    }
}

TEST_CASE("self-diff is empty for every fixture") {
    for (const auto& p : pfv_tests::all_fixture_files()) {
        CAPTURE(p.string());
        FormatSpec s = load_spec_file(p);
        ValidationReport r = diff_specs(s, s, {.witnesses = false});
        CHECK(r.discrepancies.empty());
    }
}

TEST_CASE("renaming fields changes nothing") {
    FormatSpec code = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    FormatSpec doc = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
    FormatSpec doc_renamed = rename_all_fields(doc, "_rx");

    SUBCASE("a spec and its renaming are indistinguishable") {
        ValidationReport r = diff_specs(doc, doc_renamed, {.witnesses = false});
        CHECK(r.discrepancies.empty());
    }
    SUBCASE("diff against renamed doc yields the same kinds") {
        ValidationReport a = diff_specs(code, doc, {.witnesses = false});
        ValidationReport b = diff_specs(code, doc_renamed, {.witnesses = false});
        CHECK(a.summary == b.summary);
    }
}

TEST_CASE("diff symmetry") {
    FormatSpec code = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    FormatSpec doc = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
    ValidationReport ab = diff_specs(code, doc, {.witnesses = false});
    ValidationReport ba = diff_specs(doc, code, {.witnesses = false});

    auto swap_kind = [](DiscrepancyKind k) {
        switch (k) {
            case DiscrepancyKind::MissingFieldInCode:
                return DiscrepancyKind::MissingFieldInDoc;
            case DiscrepancyKind::MissingFieldInDoc:
                return DiscrepancyKind::MissingFieldInCode;
            case DiscrepancyKind::ConstraintMissingInCode:
                return DiscrepancyKind::ConstraintMissingInDoc;
            case DiscrepancyKind::ConstraintMissingInDoc:
                return DiscrepancyKind::ConstraintMissingInCode;
            default: return k;
        }
    };
    std::multiset<std::string> a, b;
    for (const auto& d : ab.discrepancies)
        a.insert(std::string(kind_text(swap_kind(d.kind))) + "|" + d.doc_location + "|" +
                 d.code_location);
    for (const auto& d : ba.discrepancies)
        b.insert(std::string(kind_text(d.kind)) + "|" + d.code_location + "|" +
                 d.doc_location);
    CHECK(a == b);
}

TEST_CASE("type mismatches") {
    SUBCASE("width difference") {
        FormatSpec a = spec_of("format a { x: u16; }");
        FormatSpec b = spec_of("format b { y: u32; }");
        ValidationReport r = diff_specs(a, b, {.witnesses = false});
        CHECK(count_kind(r, DiscrepancyKind::TypeMismatch) == 1);
    }
    SUBCASE("encoding difference") {
        FormatSpec a = spec_of("format a { x: u8; }");
        FormatSpec b = spec_of("format b { y: bytes[1]; }");
        ValidationReport r = diff_specs(a, b, {.witnesses = false});
        CHECK(count_kind(r, DiscrepancyKind::TypeMismatch) == 1);
    }
    SUBCASE("equal tiling is not a mismatch") {
        FormatSpec a = spec_of("format a { x: u8; }");
        FormatSpec b = spec_of("format b { hi: u4; lo: u4; }");
        ValidationReport r = diff_specs(a, b, {.witnesses = false});
        CHECK(r.discrepancies.empty());
    }
}

TEST_CASE("constraint conflict") {
    FormatSpec a = spec_of("format a { x: u8 where x == 1; }");
    FormatSpec b = spec_of("format b { y: u8 where y == 2; }");
    ValidationReport r = diff_specs(a, b);
    REQUIRE(count_kind(r, DiscrepancyKind::ConstraintConflict) == 1);
    CHECK(count_kind(r, DiscrepancyKind::ConstraintMissingInCode) == 0);
    CHECK(count_kind(r, DiscrepancyKind::ConstraintMissingInDoc) == 0);
    for (const auto& d : r.discrepancies)
        if (d.kind == DiscrepancyKind::ConstraintConflict) {
            REQUIRE(d.witness);
            CHECK(d.witness->accepted_by == Side::Doc);
        }
}

TEST_CASE("catalog rendering") {
    FormatSpec code = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    FormatSpec doc = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
    ValidationReport r = diff_specs(code, doc, {.witnesses = false});
    std::string text = render_text(r, nullptr);
    CHECK(text.find("CONSTRAINT_MISSING_IN_CODE") != std::string::npos);
    CHECK(text.find("summary:") != std::string::npos);
}
