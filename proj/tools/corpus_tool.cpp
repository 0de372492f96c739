// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the committed BFD corpus artifacts:
//
//   corpus_tool transcripts   rebuild corpus/transcripts/*.jsonl by driving
//                             the agent pipeline with scripted responses
//   corpus_tool goldens       rerun the replay pipeline and refresh
//                             corpus/golden/
//
// Run from the repository root after changing fixtures, then commit the
// results.

#include <iostream>

#include "pfv/agents.hpp"
#include "pfv/canonical.hpp"
#include "pfv/config.hpp"
#include "pfv/pipeline.hpp"
#include "pfv/util.hpp"

using namespace pfv;

namespace {

agents::ModelResponse text_turn(const std::string& text) {
    agents::ModelResponse r;
    r.text = text;
    return r;
}

agents::ModelResponse tool_turn(const std::string& name, nlohmann::json args) {
    agents::ModelResponse r;
    r.tool_call = agents::ToolCall{name, std::move(args)};
    return r;
}

// Doc-side fold intermediates. Each stage parses and validates on its own;
// the last stage is the committed fixture itself.
const char* kDocStageMandatory = R"(format bfd_doc {
  vers: u3 where vers == 1;
  diag: u5;
  sta: u2;
  p: u1;
  f: u1;
  c: u1;
  a: u1;
  d: u1;
  m: u1 where m == 0;
  detect_mult: u8;
  length: u8 where length <= total_len;
  my_discriminator: u32;
  your_discriminator: u32;
  desired_min_tx_interval: u32;
  required_min_rx_interval: u32;
  required_min_echo_rx_interval: u32;
  trailer: bytes[total_len - length];
}
)";

const char* kDocStageSimplePassword = R"(format bfd_doc {
  vers: u3 where vers == 1;
  diag: u5;
  sta: u2;
  p: u1;
  f: u1;
  c: u1;
  a: u1;
  d: u1;
  m: u1 where m == 0;
  detect_mult: u8;
  length: u8 where length <= total_len;
  my_discriminator: u32;
  your_discriminator: u32;
  desired_min_tx_interval: u32;
  required_min_rx_interval: u32;
  required_min_echo_rx_interval: u32;
  if (a == 1) {
    auth_type: u8;
    auth_len: u8;
    switch (auth_type) {
      case 1: {
        where auth_len >= 4, auth_len <= 19;
        sp_auth_key_id: u8;
        sp_password: bytes[auth_len - 3];
      }
    }
  }
  trailer: bytes[total_len - length];
}
)";

const char* kDocStageMd5 = R"(format bfd_doc {
  vers: u3 where vers == 1;
  diag: u5;
  sta: u2;
  p: u1;
  f: u1;
  c: u1;
  a: u1;
  d: u1;
  m: u1 where m == 0;
  detect_mult: u8;
  length: u8 where length <= total_len;
  my_discriminator: u32;
  your_discriminator: u32;
  desired_min_tx_interval: u32;
  required_min_rx_interval: u32;
  required_min_echo_rx_interval: u32;
  if (a == 1) {
    auth_type: u8;
    auth_len: u8;
    switch (auth_type) {
      case 1: {
        where auth_len >= 4, auth_len <= 19;
        sp_auth_key_id: u8;
        sp_password: bytes[auth_len - 3];
      }
      case 2: {
        where auth_len == 24;
        md5_auth_key_id: u8;
        md5_reserved: u8;
        md5_sequence_number: u32;
        md5_digest: bytes[16];
      }
      case 3: {
        where auth_len == 24;
        met_md5_auth_key_id: u8;
        met_md5_reserved: u8;
        met_md5_sequence_number: u32;
        met_md5_digest: bytes[16];
      }
    }
  }
  trailer: bytes[total_len - length];
}
)";

// Code-side extraction turns: a draft with a syntax slip, a draft that
// over-constrains the diagnostic field and misses the version check, then
// the committed fixture.
const char* kCodeDraftSyntaxError = R"(format bfd_code {
  vers: u3 where vers = 1;
  diag: u5;
  flags: u8;
  detect_mult: u8 where detect_mult != 0;
  length: u8 where length >= 24, length <= total_len;
  my_discriminator: u32;
  your_discriminator: u32;
  desired_min_tx_interval: u32;
  required_min_rx_interval: u32;
  required_min_echo_rx_interval: u32;
  trailer: bytes[total_len - 24];
}
)";

const char* kCodeDraftSemanticError = R"(format bfd_code {
  vers: u3;
  diag: u5 where diag <= 8;
  flags: u8;
  detect_mult: u8 where detect_mult != 0;
  length: u8 where length >= 24, length <= total_len;
  my_discriminator: u32;
  your_discriminator: u32;
  desired_min_tx_interval: u32;
  required_min_rx_interval: u32;
  required_min_echo_rx_interval: u32;
  trailer: bytes[total_len - 24];
}
)";

int make_transcripts() {
    PipelineConfig cfg = load_config("corpus/config.replay.ini");
    std::string module_source = read_file("corpus/module/bfd_module.c");
    std::string codespec_text = read_file("corpus/specs/codespec.pfs");
    std::string docspec_text = read_file("corpus/specs/docspec.pfs");
    std::string rfc = read_file(cfg.document);

    auto chunks = agents::chunk_document(rfc);
    if (chunks.size() != 5) {
        std::cerr << "expected 5 document chunks (intro + 4 sections), got "
                  << chunks.size() << "\n";
        return 1;
    }

    agents::QueueBackend script;

    // stage 1: retrieval then module construction
    script.push("isolation.analysis", tool_turn("lookup", {{"symbol", "bfd_recv_cb"}}));
    script.push("isolation.analysis", tool_turn("expand", {{"symbol", "bfd_recv_cb"}}));
    script.push("isolation.analysis", tool_turn("lookup", {{"symbol", "bfd_pkt"}}));
    script.push("isolation.analysis", tool_turn("lookup", {{"symbol", "BFD_GETVER"}}));
    script.push("isolation.analysis", tool_turn("lookup", {{"symbol", "BFD_VERSION"}}));
    script.push("isolation.analysis", tool_turn("lookup", {{"symbol", "BFD_PKT_LEN"}}));
    script.push("isolation.analysis", tool_turn("lookup", {{"symbol", "bfd_recv_ipv4"}}));
    script.push("isolation.analysis",
                text_turn("The parser validates four properties of the buffer: the "
                          "frame must carry at least BFD_PKT_LEN bytes, the version "
                          "bits of the first byte must equal BFD_VERSION, the detect "
                          "multiplier byte must be nonzero, and the length byte must "
                          "be at least BFD_PKT_LEN without exceeding the frame "
                          "length. The receive helpers and session lookup do not "
                          "touch packet contents."));
    script.push("isolation.builder",
                tool_turn("write_module",
                          {{"files", {{"bfd_module.c", module_source}}}}));

    // stage 2: code spec with one syntax and one semantic refinement round
    script.push("codespec", text_turn(kCodeDraftSyntaxError));
    script.push("codespec", text_turn(kCodeDraftSemanticError));
    script.push("codespec", text_turn(codespec_text));

    // stage 3: doc spec folded section by section
    script.push("docspec.chunk0", text_turn("NO_FORMAT"));
    std::string mandatory_with_slip = kDocStageMandatory;
    auto slip = mandatory_with_slip.find("m == 0");
    mandatory_with_slip.replace(slip, 6, "m = 0");
    script.push("docspec.chunk1", text_turn(mandatory_with_slip));
    script.push("docspec.chunk1", text_turn(kDocStageMandatory));
    script.push("docspec.chunk2", text_turn(kDocStageSimplePassword));
    script.push("docspec.chunk3", text_turn(kDocStageMd5));
    script.push("docspec.chunk4", text_turn(docspec_text));

    std::filesystem::remove_all(cfg.replay_dir);
    agents::RecordingBackend recorder(script, cfg.replay_dir);

    agents::AgentOptions opts;
    opts.isolation_budget = cfg.budget_isolation;
    opts.syntax_budget = cfg.budget_syntax;
    opts.semantic_budget = cfg.budget_semantic;
    opts.seed = cfg.seed;
    opts.positives = cfg.positives;
    opts.prompt_dir = cfg.prompts;

    retrieval::SourceIndex index = retrieval::index_repo(cfg.repo);
    harness::Workspace ws(cfg.build_command, cfg.build_timeout, cfg.packet_timeout);
    agents::IsolationResult iso =
        agents::run_isolation(index, cfg.entry, recorder, ws, opts);
    agents::SpecExtraction code =
        agents::extract_codespec(iso.sources, iso.executable, recorder, opts);
    agents::SpecExtraction doc = agents::extract_docspec(rfc, recorder, opts);

    auto expect_code = dsl::parse_spec(codespec_text);
    auto expect_doc = dsl::parse_spec(docspec_text);
    if (!dsl::spec_equal(code.spec, *expect_code.spec) ||
        !dsl::spec_equal(doc.spec, *expect_doc.spec)) {
        std::cerr << "extracted specs do not match the fixtures\n";
        return 1;
    }
    std::cout << "wrote transcripts under " << cfg.replay_dir << "\n";
    return 0;
}

int make_goldens() {
    PipelineConfig cfg = load_config("corpus/config.replay.ini");
    cfg.out = "corpus/.golden-tmp";
    std::filesystem::remove_all(cfg.out);
    PipelineOutcome outcome = run_pipeline(cfg);
    std::filesystem::create_directories("corpus/golden");
    for (const char* name : {"codespec.canonical.json", "docspec.canonical.json",
                             "report.json", "report.txt"})
        write_file(std::filesystem::path("corpus/golden") / name,
                   read_file(cfg.out / name));
    std::filesystem::remove_all(cfg.out);
    std::cout << "wrote corpus/golden (exit code would be " << outcome.exit_code << ", "
              << outcome.report.discrepancies.size() << " discrepancies)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: corpus_tool transcripts|goldens\n";
        return 2;
    }
    std::string cmd = argv[1];
    try {
        if (cmd == "transcripts") return make_transcripts();
        if (cmd == "goldens") return make_goldens();
    } catch (const std::exception& e) {
        std::cerr << "corpus_tool: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "unknown command: " << cmd << "\n";
    return 2;
}
