// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: nine end-to-end criteria over the BFD corpus and the
// fixture specs, one pass/fail line each. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "helpers.hpp"
#include "pfv/agents.hpp"
#include "pfv/canonical.hpp"
#include "pfv/corpus.hpp"
#include "pfv/diff.hpp"
#include "pfv/harness.hpp"
#include "pfv/pipeline.hpp"
#include "pfv/rng.hpp"

using namespace pfv;
using pfv_tests::all_fixture_files;
using pfv_tests::load_spec_file;
using pfv_tests::rename_all_fields;
using pfv_tests::source_root;

namespace {

struct CheckFailure {
    std::string message;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw CheckFailure{message};
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::string tpl =
            (std::filesystem::temp_directory_path() / "pfv-acc-XXXXXX").string();
        std::vector<char> buf(tpl.begin(), tpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw Error("acceptance", "mkdtemp failed");
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

constexpr const char* kBuildCmd = "cc -O2 -o {output} {sources}";

std::filesystem::path build_module_from(const harness::Workspace& ws,
                                        const std::filesystem::path& source) {
    const_cast<harness::Workspace&>(ws).write_source("module.c", read_file(source));
    harness::BuildResult r = harness::build_module(ws, {"module.c"});
    require(r.ok, "module build failed:\n" + r.diagnostics);
    return r.executable;
}

// --- criterion 1: replay validate covers the whole bug catalog ---

void criterion_bug_catalog() {
    auto t0 = std::chrono::steady_clock::now();
    TempDir tmp;
    std::string cmd = std::string(PFV_CLI_PATH) + " validate --config " +
                      (source_root() / "corpus/config.replay.ini").string() + " --out " +
                      (tmp.path / "out").string() + " > " +
                      (tmp.path / "stdout.txt").string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    require(WIFEXITED(rc) && WEXITSTATUS(rc) == 2,
            "validate must exit 2 when discrepancies are found");

    std::string report_json = read_file(tmp.path / "out/report.json");
    require(report_json == read_file(source_root() / "corpus/golden/report.json"),
            "report.json does not match the golden report");

    auto report = diff::report_from_json(nlohmann::json::parse(report_json));
    auto catalog = diff::load_catalog(source_root() / "corpus/catalog.json");
    require(catalog.size() == 9, "catalog must have 9 entries");
    auto coverage = diff::catalog_coverage(report, catalog);
    for (const auto& e : catalog)
        require(!coverage[e.id].empty(), "catalog entry " + e.id + " is not covered");

    auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - t0);
    require(elapsed.count() < 120, "validate took " + std::to_string(elapsed.count()) +
                                       "s, budget is 120s");
}

// --- criterion 2: code spec extraction reproduces the reference counts ---

void criterion_codespec_counts() {
    agents::ReplayBackend backend(source_root() / "corpus/transcripts");
    harness::Workspace ws(kBuildCmd);
    auto exe = build_module_from(ws, source_root() / "corpus/module/bfd_module.c");
    std::map<std::string, std::string> sources{
        {"bfd_module.c", read_file(source_root() / "corpus/module/bfd_module.c")}};
    agents::AgentOptions opts;
    opts.prompt_dir = source_root() / "prompts";
    agents::SpecExtraction code =
        agents::extract_codespec(sources, exe, backend, opts);

    dsl::SpecStats st = dsl::spec_stats(code.spec);
    require(st.field_names == 11,
            "expected 11 field names, got " + std::to_string(st.field_names));
    require(st.field_types == 11,
            "expected 11 field types, got " + std::to_string(st.field_types));
    require(st.constraints == 4,
            "expected 4 constraints, got " + std::to_string(st.constraints));

    auto fixture = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    require(dsl::serialize_canonical(code.spec) == dsl::serialize_canonical(fixture),
            "extracted spec is not canonical-form-equal to the fixture");
    require(dsl::serialize_canonical(code.spec) ==
                read_file(source_root() / "corpus/golden/codespec.canonical.json"),
            "canonical form does not match the golden file");
}

// --- criterion 3: self-diff empty, renaming changes nothing ---

void criterion_false_positive_discipline() {
    auto fixtures = all_fixture_files();
    require(fixtures.size() >= 5, "need at least 5 fixture specs");
    for (const auto& p : fixtures) {
        dsl::FormatSpec s = load_spec_file(p);
        diff::ValidationReport r = diff::diff_specs(s, s, {.witnesses = false});
        require(r.discrepancies.empty(),
                "self-diff of " + p.filename().string() + " is not empty");

        dsl::FormatSpec renamed = rename_all_fields(s, "_rn");
        diff::ValidationReport rr = diff::diff_specs(s, renamed, {.witnesses = false});
        require(rr.discrepancies.empty(),
                "renaming changed the diff for " + p.filename().string());
    }
    dsl::FormatSpec code = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    dsl::FormatSpec doc = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
    auto base = diff::diff_specs(code, doc, {.witnesses = false});
    auto ren = diff::diff_specs(code, rename_all_fields(doc, "_rn"), {.witnesses = false});
    require(base.summary == ren.summary, "renaming changed discrepancy counts");
}

// --- criterion 4: generator soundness ---

void criterion_generator_soundness() {
    auto fixtures = all_fixture_files();
    require(fixtures.size() >= 10, "need at least 10 fixture specs, have " +
                                       std::to_string(fixtures.size()));
    for (const auto& p : fixtures) {
        dsl::FormatSpec spec = load_spec_file(p);
        auto positives = gen::generate_positive(spec, 0xacce97, 256);
        require(positives.size() == 256, "short positive batch for " + p.string());
        for (const auto& packet : positives)
            require(gen::check_packet(spec, packet.bytes).verdict == gen::Verdict::Accept,
                    "positive rejected for " + p.filename().string() + ": " +
                        hex_encode(packet.bytes));

        dsl::SpecStats st = dsl::spec_stats(spec);
        gen::NegativeGen negatives = gen::generate_negative(spec, 0xacce98, st.constraints + 3);
        for (const auto& packet : negatives.packets) {
            gen::CheckResult cr = gen::check_packet(spec, packet.bytes);
            require(cr.verdict == gen::Verdict::Reject,
                    "negative accepted for " + p.filename().string());
            if (packet.target_constraint)
                require(cr.failed_constraint == *packet.target_constraint,
                        "wrong first failure for " + p.filename().string() + ": " +
                            hex_encode(packet.bytes));
        }
    }
}

// --- criterion 5: exhaustive oracle equivalence on small specs ---

void criterion_small_scale_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    std::size_t covered = 0;
    for (const char* name : {"tiny8", "pair8", "flags8", "two16", "variant16", "cond16"}) {
        dsl::FormatSpec spec =
            load_spec_file(source_root() / "fixtures" / (std::string(name) + ".pfs"));
        harness::Workspace ws(kBuildCmd);
        auto exe = build_module_from(
            ws, source_root() / "fixtures/modules" / (std::string(name) + ".c"));
        harness::MismatchReport report = harness::semantic_check_exhaustive(spec, exe);
        require(report.clean(), std::string(name) + ": " + report.summary());
        require(report.packets_run >= 257, std::string(name) + ": domain not exhausted");
        ++covered;
    }
    require(covered == 6, "expected six fixed-width fixtures");
    auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - t0);
    require(elapsed.count() < 60, "exhaustive runs took " +
                                      std::to_string(elapsed.count()) + "s, budget is 60s");
}

// --- criterion 6: constraint equivalence oracle ---

void criterion_equivalence_oracle() {
    using diff::EquivRelation;
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
        {"x >= 24", "x > 24", EquivRelation::SecondImpliesFirst, &u8},
        {"x == 1", "x == 1", EquivRelation::Equivalent, &u8},
        {"x == 0", "x == 1", EquivRelation::Incomparable, &u8},
        {"x < 10", "x <= 9", EquivRelation::Equivalent, &u8},
        {"x <= 255", "x >= 0", EquivRelation::Equivalent, &u8},
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
    std::size_t n = 0;
    for (const auto& c : cases) {
        auto e1 = dsl::parse_expr(c.c1);
        auto e2 = dsl::parse_expr(c.c2);
        require(e1.ok() && e2.ok(), "expression parse failure");
        diff::EquivResult r = diff::constraints_equivalent(e1.expr, e2.expr, *c.widths);
        require(r.relation == c.want, std::string("misclassified: ") + c.c1 + " vs " + c.c2 +
                                          " -> " + diff::relation_text(r.relation));
        require(r.exhaustive, std::string("not exhaustive: ") + c.c1);
        ++n;
    }
    require(n >= 20, "need at least 20 pairs");
}

// --- criterion 7: retrieval closure anchors ---

void criterion_retrieval_closure() {
    retrieval::SourceIndex index = retrieval::index_repo(source_root() / "corpus/repo");
    retrieval::ContextBundle a = retrieval::closure_from_entry(index, "bfd_recv_cb");
    retrieval::ContextBundle b = retrieval::closure_from_entry(index, "bfd_recv_cb");

    auto has = [&](const retrieval::ContextBundle& bundle, const char* name,
                   retrieval::SymbolKind kind) {
        for (const auto& e : bundle.entries)
            if (e.name == name && e.kind == kind) return true;
        return false;
    };
    require(has(a, "bfd_pkt", retrieval::SymbolKind::Type),
            "closure lacks the bfd_pkt type");
    require(has(a, "BFD_GETVER", retrieval::SymbolKind::Macro),
            "closure lacks the BFD_GETVER macro");
    require(a.entries.size() == b.entries.size(), "closure is not deterministic");
    for (std::size_t i = 0; i < a.entries.size(); ++i)
        require(a.entries[i].name == b.entries[i].name &&
                    a.entries[i].begin == b.entries[i].begin,
                "closure order differs across runs");
}

// --- criterion 8: round-trip and whole-pipeline determinism ---

void criterion_round_trip_determinism() {
    for (const auto& p : all_fixture_files()) {
        dsl::FormatSpec s = load_spec_file(p);
        std::string canon = dsl::serialize_canonical(s);
        dsl::ParseResult back = dsl::parse_spec(canon);
        require(back.ok(), "canonical form fails to parse for " + p.string());
        require(dsl::spec_equal(*back.spec, s),
                "round-trip changed " + p.filename().string());
        require(dsl::serialize_canonical(*back.spec) == canon,
                "canonicalization is not idempotent for " + p.filename().string());
    }

    TempDir tmp;
    PipelineConfig cfg = load_config(source_root() / "corpus/config.replay.ini");
    cfg.out = tmp.path / "a";
    run_pipeline(cfg);
    cfg.out = tmp.path / "b";
    run_pipeline(cfg);
    std::map<std::string, std::string> da, db;
    for (const auto& e : std::filesystem::recursive_directory_iterator(tmp.path / "a"))
        if (e.is_regular_file())
            da[std::filesystem::relative(e.path(), tmp.path / "a").generic_string()] =
                digest_hex(read_file(e.path()));
    for (const auto& e : std::filesystem::recursive_directory_iterator(tmp.path / "b"))
        if (e.is_regular_file())
            db[std::filesystem::relative(e.path(), tmp.path / "b").generic_string()] =
                digest_hex(read_file(e.path()));
    require(!da.empty() && da == db, "replay artifact trees differ between runs");
}

// --- criterion 9: harness protocol conformance ---

void criterion_harness_protocol() {
    harness::Workspace ws(kBuildCmd);
    auto exe = build_module_from(ws, source_root() / "corpus/module/bfd_module.c");

    Rng rng(0xf022);
    std::vector<gen::TestPacket> packets;
    constexpr std::size_t kMaxFrame = 65536;
    for (std::uint64_t i = 0; i < 200; ++i) {
        gen::TestPacket p;
        p.id = i;
        std::size_t len;
        if (i == 0)
            len = 0;  // zero-length frame
        else if (i == 1)
            len = kMaxFrame;  // maximum-length frame
        else
            len = rng.below(512);
        p.bytes.resize(len);
        for (auto& b : p.bytes) b = rng.byte();
        packets.push_back(std::move(p));
    }
    harness::RunOptions opts;
    opts.packet_timeout = std::chrono::seconds(5);
    auto verdicts = harness::run_module(exe, packets, opts);
    require(verdicts.size() == packets.size(), "missing verdicts");
    for (const auto& v : verdicts)
        require(v.verdict == harness::ModuleVerdict::Accept ||
                    v.verdict == harness::ModuleVerdict::Reject,
                "reference module produced " +
                    std::string(harness::module_verdict_text(v.verdict)));

    // Agreement with the native reference checker on the same batch.
    dsl::FormatSpec codespec = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    for (std::size_t i = 0; i < packets.size(); ++i) {
        bool module_ok = verdicts[i].verdict == harness::ModuleVerdict::Accept;
        bool native_ok =
            corpus::reference_bfd_check(packets[i].bytes).verdict == gen::Verdict::Accept;
        bool spec_ok =
            gen::check_packet(codespec, packets[i].bytes).verdict == gen::Verdict::Accept;
        require(module_ok == native_ok && native_ok == spec_ok,
                "module, native checker and spec disagree on packet " +
                    std::to_string(i));
    }

    // A deliberately broken stub must surface protocol errors / crashes.
    harness::Workspace ws_garbage(kBuildCmd);
    auto garbage = build_module_from(ws_garbage, source_root() / "fixtures/modules/garbage.c");
    auto gv = harness::run_module(garbage, {packets.data(), 3});
    for (const auto& v : gv)
        require(v.verdict == harness::ModuleVerdict::ProtocolError,
                "garbage stub must yield protocol-error");

    harness::Workspace ws_crash(kBuildCmd);
    auto crasher = build_module_from(ws_crash, source_root() / "fixtures/modules/crasher.c");
    auto cv = harness::run_module(crasher, {packets.data(), 3});
    for (const auto& v : cv)
        require(v.verdict == harness::ModuleVerdict::Crash,
                "crashing stub must yield crash verdicts");
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* label;
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "bug-catalog coverage (replay validate, golden report, < 2 min)",
         criterion_bug_catalog},
        {2, "code spec extraction: 11 fields, 11 types, 4 constraints, fixture-equal",
         criterion_codespec_counts},
        {3, "false-positive discipline: self-diff empty, rename-invariant",
         criterion_false_positive_discipline},
        {4, "generator soundness: 256 positives + per-constraint negatives, 100%",
         criterion_generator_soundness},
        {5, "small-scale oracle equivalence: exhaustive module agreement, < 60 s",
         criterion_small_scale_oracle},
        {6, "constraint-equivalence oracle: 20+ hand-picked pairs",
         criterion_equivalence_oracle},
        {7, "retrieval closure: bfd_pkt and BFD_GETVER anchors, deterministic",
         criterion_retrieval_closure},
        {8, "round-trip and replay determinism: byte-identical artifact trees",
         criterion_round_trip_determinism},
        {9, "harness protocol conformance: fuzz clean, broken stubs flagged",
         criterion_harness_protocol},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        try {
            c.run();
            std::cout << "PASS criterion " << c.number << ": " << c.label << "\n";
        } catch (const CheckFailure& f) {
            ++failures;
            std::cout << "FAIL criterion " << c.number << ": " << c.label << " ["
                      << f.message << "]\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "FAIL criterion " << c.number << ": " << c.label
                      << " [exception: " << e.what() << "]\n";
        }
    }
    if (failures == 0) std::cout << "all 9 acceptance criteria passed\n";
    return failures;
}
