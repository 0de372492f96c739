// SPDX-License-Identifier: Apache-2.0

#include "pfv/pipeline.hpp"

#include <algorithm>
#include <cstdlib>

#include "pfv/agents.hpp"
#include "pfv/canonical.hpp"
#include "pfv/packets.hpp"
#include "pfv/util.hpp"

using nlohmann::json;

namespace pfv {

namespace {

std::unique_ptr<agents::ModelBackend> make_backend(const PipelineConfig& cfg) {
    if (cfg.backend == "replay") return std::make_unique<agents::ReplayBackend>(cfg.replay_dir);
    agents::HttpBackendConfig hc;
    hc.endpoint = cfg.endpoint;
    hc.model = cfg.model;
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) hc.api_key = key;
    if (hc.api_key.empty())
        throw Error("config",
                    "http backend needs credentials in $" + cfg.api_key_env);
    return std::make_unique<agents::HttpBackend>(hc);
}

void persist_packets(const std::filesystem::path& dir, const std::string& stem,
                     const dsl::FormatSpec& spec, std::uint64_t seed,
                     std::size_t positives) {
    auto pos = gen::generate_positive(spec, seed, positives);
    gen::write_packets_jsonl(dir / (stem + ".positive.jsonl"), pos);
    dsl::SpecStats st = dsl::spec_stats(spec);
    auto neg = gen::generate_negative(spec, seed, st.constraints + 3);
    gen::write_packets_jsonl(dir / (stem + ".negative.jsonl"), neg.packets);
}

}  // namespace

void write_manifest(const std::filesystem::path& out_dir) {
    json artifacts = json::array();
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(out_dir))
        for (const auto& e : std::filesystem::recursive_directory_iterator(out_dir))
            if (e.is_regular_file() && e.path().filename() != "manifest.json")
                files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        artifacts.push_back(
            json{{"path", std::filesystem::relative(f, out_dir).generic_string()},
                 {"digest", digest_hex(read_file(f))}});
    }
    json manifest{{"schema_version", 1}, {"artifacts", artifacts}};
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.entry.empty()) throw Error("config", "entry function not configured");

    std::filesystem::path out = cfg.out;
    std::filesystem::create_directories(out);

    try {
        agents::AgentOptions opts;
        opts.isolation_budget = cfg.budget_isolation;
        opts.syntax_budget = cfg.budget_syntax;
        opts.semantic_budget = cfg.budget_semantic;
        opts.seed = cfg.seed;
        opts.positives = cfg.positives;
        opts.prompt_dir = cfg.prompts;

        std::unique_ptr<agents::ModelBackend> base = make_backend(cfg);
        std::unique_ptr<agents::RecordingBackend> recorder;
        agents::ModelBackend* backend = base.get();
        if (cfg.backend == "http") {
            // Live sessions are recorded so the run can be replayed later.
            recorder = std::make_unique<agents::RecordingBackend>(*base,
                                                                  out / "transcripts");
            backend = recorder.get();
        }

        // stage 1: isolation
        retrieval::SourceIndex index = retrieval::index_repo(cfg.repo);
        harness::Workspace ws(cfg.build_command, cfg.build_timeout, cfg.packet_timeout);
        agents::IsolationResult iso =
            agents::run_isolation(index, cfg.entry, *backend, ws, opts);
        for (const auto& [name, content] : iso.sources)
            write_file(out / "module" / name, content);
        write_file(out / "bundle.json",
                   retrieval::bundle_to_json(iso.bundle).dump(2) + "\n");

        // stage 2: spec from code
        agents::SpecExtraction code =
            agents::extract_codespec(iso.sources, iso.executable, *backend, opts);
        write_file(out / "codespec.pfs", code.source_text);
        write_file(out / "codespec.canonical.json", dsl::serialize_canonical(code.spec));

        // stage 3: spec from doc
        agents::SpecExtraction doc =
            agents::extract_docspec(read_file(cfg.document), *backend, opts);
        write_file(out / "docspec.pfs", doc.source_text);
        write_file(out / "docspec.canonical.json", dsl::serialize_canonical(doc.spec));

        // generated packet corpora for both specs
        std::filesystem::create_directories(out / "packets");
        persist_packets(out / "packets", "code", code.spec, cfg.seed, cfg.positives);
        persist_packets(out / "packets", "doc", doc.spec, cfg.seed, cfg.positives);

        // stage 4: differential comparison
        diff::DiffOptions dopts;
        dopts.witness_seed = cfg.seed;
        diff::ValidationReport report = diff::diff_specs(code.spec, doc.spec, dopts);
        write_file(out / "report.json", diff::report_to_json(report).dump(2) + "\n");

        std::vector<diff::CatalogEntry> catalog;
        if (!cfg.catalog.empty()) catalog = diff::load_catalog(cfg.catalog);
        write_file(out / "report.txt",
                   diff::render_text(report, catalog.empty() ? nullptr : &catalog));

        // audit log: every tool invocation, including file writes
        std::vector<agents::ToolEvent> audit = iso.audit;
        audit.insert(audit.end(), code.audit.begin(), code.audit.end());
        audit.insert(audit.end(), doc.audit.begin(), doc.audit.end());
        std::string audit_lines;
        for (const auto& e : audit)
            audit_lines += json{{"session", e.session},
                                {"tool", e.tool},
                                {"args", e.args},
                                {"result", e.result}}
                               .dump() +
                           "\n";
        write_file(out / "audit.jsonl", audit_lines);

        // transcripts: recorded in live mode, copied from the replay inputs
        // otherwise, so the output directory is self-contained either way
        if (cfg.backend == "replay") {
            std::filesystem::create_directories(out / "transcripts");
            for (const auto& e : std::filesystem::directory_iterator(cfg.replay_dir))
                if (e.path().extension() == ".jsonl")
                    write_file(out / "transcripts" / e.path().filename(),
                               read_file(e.path()));
        }

        write_manifest(out);

        PipelineOutcome outcome;
        outcome.report = std::move(report);
        outcome.out_dir = out;
        outcome.exit_code = outcome.report.discrepancies.empty() ? 0 : 2;
        return outcome;
    } catch (...) {
        // Leave a manifest of whatever was produced before the failure.
        try {
            write_manifest(out);
        } catch (...) {
        }
        throw;
    }
}

}  // namespace pfv
