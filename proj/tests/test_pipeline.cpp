// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>

#include "helpers.hpp"
#include "pfv/config.hpp"
#include "pfv/diff.hpp"
#include "pfv/harness.hpp"
#include "pfv/pipeline.hpp"

using namespace pfv;
using pfv_tests::source_root;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::string tpl =
            (std::filesystem::temp_directory_path() / "pfv-pipe-XXXXXX").string();
        std::vector<char> buf(tpl.begin(), tpl.end());
        buf.push_back('\0');
        REQUIRE(mkdtemp(buf.data()));
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& cwd = {}) {
    TempDir scratch;
    std::filesystem::path out = scratch.path / "cli-output.txt";
    std::string cmd;
    if (!cwd.empty()) cmd += "cd " + cwd.string() + " && ";
    cmd += std::string(PFV_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.output = read_file(out);
    return r;
}

std::map<std::string, std::string> tree_digest(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[std::filesystem::relative(e.path(), root).generic_string()] =
                digest_hex(read_file(e.path()));
    return out;
}

PipelineConfig corpus_config(const std::filesystem::path& out) {
    PipelineConfig cfg = load_config(source_root() / "corpus/config.replay.ini");
    cfg.out = out;
    return cfg;
}

}  // namespace

TEST_CASE("config loading") {
    PipelineConfig cfg = load_config(source_root() / "corpus/config.replay.ini");
    CHECK(cfg.entry == "bfd_recv_cb");
    CHECK(cfg.backend == "replay");
    CHECK(cfg.seed == 1);
    CHECK(std::filesystem::exists(cfg.repo));
    CHECK(std::filesystem::exists(cfg.document));
    CHECK(std::filesystem::exists(cfg.replay_dir));

    SUBCASE("unknown keys are rejected") {
        TempDir tmp;
        write_file(tmp.path / "bad.ini", "yolo = 1\n");
        CHECK_THROWS_AS(load_config(tmp.path / "bad.ini"), Error);
    }
    SUBCASE("replay mode requires transcripts") {
        TempDir tmp;
        write_file(tmp.path / "bad.ini", "backend = replay\n");
        CHECK_THROWS_AS(load_config(tmp.path / "bad.ini"), Error);
    }
    SUBCASE("http mode requires endpoint and model") {
        TempDir tmp;
        write_file(tmp.path / "bad.ini", "backend = http\n");
        CHECK_THROWS_AS(load_config(tmp.path / "bad.ini"), Error);
    }
}

TEST_CASE("replay pipeline matches the golden artifacts") {
    TempDir tmp;
    PipelineOutcome outcome = run_pipeline(corpus_config(tmp.path / "out"));
    CHECK(outcome.exit_code == 2);
    CHECK(outcome.report.discrepancies.size() == 29);

    for (const char* name : {"codespec.canonical.json", "docspec.canonical.json",
                             "report.json", "report.txt"}) {
        CAPTURE(name);
        CHECK(read_file(tmp.path / "out" / name) ==
              read_file(source_root() / "corpus/golden" / name));
    }

    SUBCASE("catalog is fully covered") {
        auto catalog = diff::load_catalog(source_root() / "corpus/catalog.json");
        auto coverage = diff::catalog_coverage(outcome.report, catalog);
        REQUIRE(catalog.size() == 9);
        for (const auto& e : catalog) {
            CAPTURE(e.id);
            CHECK(!coverage[e.id].empty());
        }
    }

    SUBCASE("the manifest covers every artifact") {
        auto manifest = nlohmann::json::parse(read_file(tmp.path / "out/manifest.json"));
        std::set<std::string> listed;
        for (const auto& a : manifest.at("artifacts"))
            listed.insert(a.at("path").get<std::string>());
        CHECK(listed.count("report.json"));
        CHECK(listed.count("codespec.pfs"));
        CHECK(listed.count("module/bfd_module.c"));
        CHECK(listed.count("packets/code.positive.jsonl"));
        CHECK(listed.count("transcripts/codespec.jsonl"));
        for (const auto& p : listed)
            CHECK(std::filesystem::exists(tmp.path / "out" / p));
    }
}

TEST_CASE("two replay runs produce byte-identical artifact trees") {
    TempDir tmp;
    run_pipeline(corpus_config(tmp.path / "a"));
    run_pipeline(corpus_config(tmp.path / "b"));
    auto da = tree_digest(tmp.path / "a");
    auto db = tree_digest(tmp.path / "b");
    REQUIRE(da.size() == db.size());
    CHECK(da == db);
}

TEST_CASE("a missing entry function halts stage 1 with a partial manifest") {
    TempDir tmp;
    PipelineConfig cfg = corpus_config(tmp.path / "out");
    cfg.entry = "not_a_function";
    CHECK_THROWS_AS(run_pipeline(cfg), Error);
    CHECK(std::filesystem::exists(tmp.path / "out/manifest.json"));
}

TEST_CASE("cli validate in replay mode") {
    TempDir tmp;
    CliResult r = run_cli("validate --config " +
                          (source_root() / "corpus/config.replay.ini").string() +
                          " --out " + (tmp.path / "out").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("catalog coverage: 9/9") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.path / "out/report.json"));

    SUBCASE("writes stay inside the output directory") {
        std::set<std::string> entries;
        for (const auto& e : std::filesystem::directory_iterator(tmp.path))
            entries.insert(e.path().filename().string());
        CHECK(entries == std::set<std::string>{"out"});
    }
}

TEST_CASE("cli diff of identical specs exits zero") {
    std::string spec = (source_root() / "corpus/specs/docspec.pfs").string();
    CliResult r = run_cli("diff --code " + spec + " --doc " + spec);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("discrepancies (0)") != std::string::npos);
}

TEST_CASE("cli diff of the fixture pair exits two") {
    CliResult r = run_cli("diff --code " +
                          (source_root() / "corpus/specs/codespec.pfs").string() +
                          " --doc " + (source_root() / "corpus/specs/docspec.pfs").string() +
                          " --catalog " + (source_root() / "corpus/catalog.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("catalog coverage: 9/9") != std::string::npos);
}

TEST_CASE("cli validate with a bad entry exits one") {
    // A copy of the corpus config with the entry function renamed away;
    // paths are rewritten to absolute since they resolve against the
    // config file location.
    TempDir tmp;
    std::string broken = read_file(source_root() / "corpus/config.replay.ini");
    auto fix = [&](const std::string& key, const std::string& value) {
        auto pos = broken.find(key + " = ");
        REQUIRE(pos != std::string::npos);
        auto end = broken.find('\n', pos);
        broken.replace(pos, end - pos, key + " = " + value);
    };
    fix("repo", (source_root() / "corpus/repo").string());
    fix("document", (source_root() / "corpus/rfc/rfc5880_excerpt.txt").string());
    fix("replay_dir", (source_root() / "corpus/transcripts").string());
    fix("catalog", (source_root() / "corpus/catalog.json").string());
    fix("prompts", (source_root() / "prompts").string());
    fix("entry", "missing_fn");
    write_file(tmp.path / "broken.ini", broken);
    CliResult r = run_cli("validate --config " + (tmp.path / "broken.ini").string() +
                          " --out " + (tmp.path / "out").string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("missing_fn") != std::string::npos);
}

TEST_CASE("cli gen-tests and run-harness round trip") {
    TempDir tmp;
    CliResult g = run_cli("gen-tests --spec " +
                          (source_root() / "corpus/specs/codespec.pfs").string() +
                          " --seed 5 --count 6 --out " + tmp.path.string());
    CHECK(g.exit_code == 0);
    REQUIRE(std::filesystem::exists(tmp.path / "positive.jsonl"));
    REQUIRE(std::filesystem::exists(tmp.path / "negative.jsonl"));

    harness::Workspace ws("cc -O2 -o {output} {sources}");
    ws.write_source("m.c", read_file(source_root() / "corpus/module/bfd_module.c"));
    auto build = harness::build_module(ws, {"m.c"});
    REQUIRE(build.ok);

    CliResult h = run_cli("run-harness --module " + build.executable.string() +
                          " --packets " + (tmp.path / "positive.jsonl").string());
    CHECK(h.exit_code == 0);
    std::size_t accepts = 0;
    for (const auto& line : split_lines(h.output))
        if (line.find("\"accept\"") != std::string::npos) ++accepts;
    CHECK(accepts == 6);
}

TEST_CASE("cli report re-renders a stored report") {
    CliResult r = run_cli("report --in " +
                          (source_root() / "corpus/golden/report.json").string() +
                          " --catalog " + (source_root() / "corpus/catalog.json").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("catalog coverage: 9/9") != std::string::npos);
    CHECK(r.output == read_file(source_root() / "corpus/golden/report.txt"));
}

TEST_CASE("cli index") {
    TempDir tmp;
    CliResult r = run_cli("index --repo " + (source_root() / "corpus/repo").string() +
                          " --out " + tmp.path.string());
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(read_file(tmp.path / "index.json"));
    CHECK(j.at("symbols").contains("bfd_recv_cb"));
    CHECK(j.at("symbols").contains("BFD_GETVER"));
}
