// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "pfv/agents.hpp"
#include "pfv/canonical.hpp"
#include "pfv/config.hpp"

using namespace pfv;
using namespace pfv::agents;
using pfv_tests::load_spec_file;
using pfv_tests::source_root;

namespace {

AgentOptions corpus_options() {
    AgentOptions opts;
    opts.prompt_dir = source_root() / "prompts";
    return opts;
}

std::filesystem::path corpus_transcripts() { return source_root() / "corpus/transcripts"; }

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::string tpl =
            (std::filesystem::temp_directory_path() / "pfv-test-XXXXXX").string();
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

}  // namespace

TEST_CASE("document chunking") {
    SUBCASE("numbered headings split sections") {
        std::string doc =
            "intro prose\nmore prose\n"
            "1. First\nbody a\n"
            "1.1. Nested\nbody b\n"
            "2. Second\nbody c\n";
        auto chunks = chunk_document(doc);
        REQUIRE(chunks.size() == 4);
        CHECK(chunks[0].find("intro") != std::string::npos);
        CHECK(chunks[1].find("1. First") == 0);
        CHECK(chunks[2].find("1.1. Nested") == 0);
        CHECK(chunks[3].find("2. Second") == 0);
    }
    SUBCASE("oversized sections are windowed with overlap") {
        std::string big = "3. Big\n" + std::string(9000, 'x');
        auto chunks = chunk_document(big, 4000, 200);
        REQUIRE(chunks.size() >= 3);
        for (const auto& c : chunks) CHECK(c.size() <= 4000);
        // consecutive windows share the overlap region
        std::string tail = chunks[0].substr(chunks[0].size() - 200);
        CHECK(chunks[1].compare(0, 200, tail) == 0);
    }
    SUBCASE("the corpus document yields one chunk per section plus the intro") {
        auto chunks =
            chunk_document(read_file(source_root() / "corpus/rfc/rfc5880_excerpt.txt"));
        REQUIRE(chunks.size() == 5);
        CHECK(chunks[1].find("4.1.") != std::string::npos);
        CHECK(chunks[4].find("4.4.") != std::string::npos);
    }
}

TEST_CASE("queue backend runs dry with an error") {
    QueueBackend q;
    q.push("s", ModelResponse{"one", std::nullopt});
    CHECK(q.complete("s", {}, {}).text == "one");
    CHECK_THROWS_AS(q.complete("s", {}, {}), Error);
}

TEST_CASE("replayed isolation reproduces the reference module") {
    retrieval::SourceIndex index = retrieval::index_repo(source_root() / "corpus/repo");
    ReplayBackend backend(corpus_transcripts());
    harness::Workspace ws("cc -O2 -o {output} {sources}");
    IsolationResult iso = run_isolation(index, "bfd_recv_cb", backend, ws, corpus_options());

    REQUIRE(iso.sources.count("bfd_module.c"));
    CHECK(iso.sources.at("bfd_module.c") ==
          read_file(source_root() / "corpus/module/bfd_module.c"));
    CHECK(std::filesystem::exists(iso.executable));

    bool has_pkt = false, has_getver = false;
    for (const auto& e : iso.bundle.entries) {
        if (e.name == "bfd_pkt" && e.kind == retrieval::SymbolKind::Type) has_pkt = true;
        if (e.name == "BFD_GETVER" && e.kind == retrieval::SymbolKind::Macro)
            has_getver = true;
    }
    CHECK(has_pkt);
    CHECK(has_getver);

    SUBCASE("the audit log reconstructs the module write") {
        bool found = false;
        for (const auto& ev : iso.audit) {
            if (ev.tool != "write_module") continue;
            found = true;
            CHECK(ev.args.at("files").at("bfd_module.c").get<std::string>() ==
                  iso.sources.at("bfd_module.c"));
        }
        CHECK(found);
    }
}

TEST_CASE("replayed codespec extraction hits the fixture exactly") {
    ReplayBackend backend(corpus_transcripts());
    harness::Workspace ws("cc -O2 -o {output} {sources}");
    ws.write_source("bfd_module.c", read_file(source_root() / "corpus/module/bfd_module.c"));
    auto build = harness::build_module(ws, {"bfd_module.c"});
    REQUIRE(build.ok);

    std::map<std::string, std::string> sources{
        {"bfd_module.c", read_file(source_root() / "corpus/module/bfd_module.c")}};
    SpecExtraction code =
        extract_codespec(sources, build.executable, backend, corpus_options());

    dsl::SpecStats st = dsl::spec_stats(code.spec);
    CHECK(st.field_names == 11);
    CHECK(st.field_types == 11);
    CHECK(st.constraints == 4);

    auto fixture = load_spec_file(source_root() / "corpus/specs/codespec.pfs");
    CHECK(dsl::spec_equal(code.spec, fixture));
    CHECK(dsl::serialize_canonical(code.spec) == dsl::serialize_canonical(fixture));
}

TEST_CASE("replayed docspec extraction hits the fixture exactly") {
    ReplayBackend backend(corpus_transcripts());
    SpecExtraction doc =
        extract_docspec(read_file(source_root() / "corpus/rfc/rfc5880_excerpt.txt"),
                        backend, corpus_options());
    dsl::SpecStats st = dsl::spec_stats(doc.spec);
    CHECK(st.field_names == 37);
    auto fixture = load_spec_file(source_root() / "corpus/specs/docspec.pfs");
    CHECK(dsl::spec_equal(doc.spec, fixture));
}

TEST_CASE("replay is deterministic") {
    auto run_once = [&]() {
        ReplayBackend backend(corpus_transcripts());
        return extract_docspec(read_file(source_root() / "corpus/rfc/rfc5880_excerpt.txt"),
                               backend, corpus_options())
            .source_text;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("replay detects drift and truncation") {
    TempDir tmp;
    for (const auto& e : std::filesystem::directory_iterator(corpus_transcripts()))
        write_file(tmp.path / e.path().filename(), read_file(e.path()));

    SUBCASE("tampered digest aborts") {
        auto file = tmp.path / "docspec.chunk0.jsonl";
        std::string content = read_file(file);
        auto pos = content.find("\"digest\":\"");
        REQUIRE(pos != std::string::npos);
        content[pos + 10] = content[pos + 10] == 'f' ? '0' : 'f';
        write_file(file, content);

        ReplayBackend backend(tmp.path);
        try {
            extract_docspec(read_file(source_root() / "corpus/rfc/rfc5880_excerpt.txt"),
                            backend, corpus_options());
            FAIL("expected drift error");
        } catch (const Error& e) {
            CHECK(e.kind() == "drift");
        }
    }

    SUBCASE("a changed input drifts the request digest") {
        ReplayBackend backend(tmp.path);
        std::string edited =
            read_file(source_root() / "corpus/rfc/rfc5880_excerpt.txt") + "\nextra line\n";
        try {
            extract_docspec(edited, backend, corpus_options());
            FAIL("expected drift error");
        } catch (const Error& e) {
            CHECK(e.kind() == "drift");
        }
    }

    SUBCASE("truncated transcript runs out") {
        auto file = tmp.path / "codespec.jsonl";
        auto lines = split_lines(read_file(file));
        std::string shorter;
        for (std::size_t i = 0; i + 2 < lines.size(); ++i) shorter += lines[i] + "\n";
        write_file(file, shorter);

        ReplayBackend backend(tmp.path);
        harness::Workspace ws("cc -O2 -o {output} {sources}");
        ws.write_source("bfd_module.c",
                        read_file(source_root() / "corpus/module/bfd_module.c"));
        auto build = harness::build_module(ws, {"bfd_module.c"});
        REQUIRE(build.ok);
        std::map<std::string, std::string> sources{{"bfd_module.c", "x"}};
        sources["bfd_module.c"] =
            read_file(source_root() / "corpus/module/bfd_module.c");
        try {
            extract_codespec(sources, build.executable, backend, corpus_options());
            FAIL("expected drift error");
        } catch (const Error& e) {
            CHECK(e.kind() == "drift");
        }
    }
}

TEST_CASE("budget zero fails immediately") {
    retrieval::SourceIndex index = retrieval::index_repo(source_root() / "corpus/repo");
    ReplayBackend backend(corpus_transcripts());
    harness::Workspace ws("cc -O2 -o {output} {sources}");
    AgentOptions opts = corpus_options();
    opts.isolation_budget = 0;
    try {
        run_isolation(index, "bfd_recv_cb", backend, ws, opts);
        FAIL("expected budget error");
    } catch (const Error& e) {
        CHECK(e.kind() == "budget");
    }
}

TEST_CASE("document preconditions") {
    QueueBackend q;
    AgentOptions opts = corpus_options();
    SUBCASE("empty document") {
        CHECK_THROWS_AS(extract_docspec("   \n  ", q, opts), Error);
    }
    SUBCASE("prose-only document yields an empty-spec error") {
        q.push("docspec.chunk0", ModelResponse{"NO_FORMAT", std::nullopt});
        try {
            extract_docspec("nothing but prose here\n", q, opts);
            FAIL("expected empty-spec error");
        } catch (const Error& e) {
            CHECK(e.kind() == "empty-spec");
        }
    }
}

TEST_CASE("semantic loop flags a stub module that accepts everything") {
    harness::Workspace ws("cc -O2 -o {output} {sources}");
    ws.write_source("module.c",
                    read_file(source_root() / "fixtures/modules/accept_all.c"));
    auto build = harness::build_module(ws, {"module.c"});
    REQUIRE(build.ok);

    QueueBackend q;
    const char* spec_text = "format one { x: u8 where x == 1; }\n";
    q.push("codespec", ModelResponse{spec_text, std::nullopt});
    q.push("codespec", ModelResponse{spec_text, std::nullopt});

    AgentOptions opts = corpus_options();
    opts.semantic_budget = 2;
    opts.positives = 4;
    std::map<std::string, std::string> sources{{"module.c", "stub"}};
    try {
        extract_codespec(sources, build.executable, q, opts);
        FAIL("expected budget error");
    } catch (const Error& e) {
        CHECK(e.kind() == "budget");
        CHECK(std::string(e.what()).find("false accepts") != std::string::npos);
    }
}

TEST_CASE("http backend speaks the chat completion protocol") {
    httplib::Server server;
    std::atomic<int> calls{0};
    std::string seen_auth, seen_body;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    ++calls;
                    seen_auth = req.get_header_value("Authorization");
                    seen_body = req.body;
                    if (calls == 1) {
                        res.set_content(
                            R"({"choices":[{"message":{"content":null,"tool_calls":[)"
                            R"({"function":{"name":"lookup","arguments":"{\"symbol\":\"bfd_pkt\"}"}}]}}]})",
                            "application/json");
                    } else {
                        res.set_content(
                            R"({"choices":[{"message":{"content":"done"}}]})",
                            "application/json");
                    }
                });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.model = "test-model";
    cfg.api_key = "sekrit";
    HttpBackend backend(cfg);

    nlohmann::json messages = nlohmann::json::array(
        {nlohmann::json{{"role", "user"}, {"content", "hello"}}});
    ModelResponse r1 = backend.complete("s", messages, nlohmann::json::array());
    REQUIRE(r1.tool_call);
    CHECK(r1.tool_call->name == "lookup");
    CHECK(r1.tool_call->args.at("symbol") == "bfd_pkt");
    CHECK(seen_auth == "Bearer sekrit");
    auto body = nlohmann::json::parse(seen_body);
    CHECK(body.at("temperature") == 0);
    CHECK(body.at("model") == "test-model");

    ModelResponse r2 = backend.complete("s", messages, nlohmann::json::array());
    CHECK_FALSE(r2.tool_call);
    CHECK(r2.text == "done");

    server.stop();
    t.join();
}
