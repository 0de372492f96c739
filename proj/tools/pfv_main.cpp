// SPDX-License-Identifier: Apache-2.0
//
// pfv: validate protocol parser implementations against their standards by
// lifting both into packet format specifications and diffing them.

#include <iostream>

#include <CLI11.hpp>

#include "pfv/agents.hpp"
#include "pfv/canonical.hpp"
#include "pfv/pipeline.hpp"
#include "pfv/validate.hpp"
#include "pfv/util.hpp"

using namespace pfv;
using nlohmann::json;

namespace {

dsl::FormatSpec load_spec_or_die(const std::filesystem::path& p) {
    dsl::ParseResult r = dsl::parse_spec(read_file(p));
    std::vector<dsl::Diagnostic> diags = r.diagnostics;
    if (r.spec) {
        auto extra = dsl::validate_spec(*r.spec);
        diags.insert(diags.end(), extra.begin(), extra.end());
    }
    if (!r.spec || dsl::has_errors(diags))
        throw Error("spec", p.string() + ":\n" + dsl::render_diagnostics(diags));
    return *r.spec;
}

void emit(const std::filesystem::path& out, const std::string& name,
          const std::string& content) {
    if (out.empty()) {
        std::cout << content;
    } else {
        write_file(out / name, content);
        std::cout << (out / name).string() << "\n";
    }
}

struct CommonFlags {
    std::string config_path;
    std::string replay_override;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;

    PipelineConfig load() const {
        if (config_path.empty()) throw Error("cli", "--config is required");
        PipelineConfig cfg = load_config(config_path);
        if (!replay_override.empty()) {
            cfg.backend = "replay";
            cfg.replay_dir = replay_override;
        }
        if (!out_override.empty()) cfg.out = out_override;
        if (seed_set) cfg.seed = seed_override;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "pipeline config file");
    cmd->add_option("--replay", flags.replay_override,
                    "replay transcripts from this directory");
    cmd->add_option("--out", flags.out_override, "output directory");
    cmd->add_option("--seed", flags.seed_override, "generation seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
}

agents::AgentOptions agent_options(const PipelineConfig& cfg) {
    agents::AgentOptions opts;
    opts.isolation_budget = cfg.budget_isolation;
    opts.syntax_budget = cfg.budget_syntax;
    opts.semantic_budget = cfg.budget_semantic;
    opts.seed = cfg.seed;
    opts.positives = cfg.positives;
    opts.prompt_dir = cfg.prompts;
    return opts;
}

std::unique_ptr<agents::ModelBackend> backend_for(const PipelineConfig& cfg) {
    if (cfg.backend == "replay")
        return std::make_unique<agents::ReplayBackend>(cfg.replay_dir);
    agents::HttpBackendConfig hc;
    hc.endpoint = cfg.endpoint;
    hc.model = cfg.model;
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) hc.api_key = key;
    if (hc.api_key.empty())
        throw Error("config", "http backend needs credentials in $" + cfg.api_key_env);
    return std::make_unique<agents::HttpBackend>(hc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"packet format validation toolkit"};
    app.require_subcommand(1);

    // --- index ---
    auto* cmd_index = app.add_subcommand("index", "index a source repository");
    std::string index_repo_path;
    std::string index_out;
    cmd_index->add_option("--repo", index_repo_path, "repository root")->required();
    cmd_index->add_option("--out", index_out, "output directory");

    // --- isolate ---
    auto* cmd_isolate =
        app.add_subcommand("isolate", "extract the isolated parsing module (stage 1)");
    CommonFlags isolate_flags;
    add_common(cmd_isolate, isolate_flags);

    // --- spec-from-code ---
    auto* cmd_sfc = app.add_subcommand(
        "spec-from-code", "isolate and extract the code-side spec (stages 1-2)");
    CommonFlags sfc_flags;
    add_common(cmd_sfc, sfc_flags);

    // --- spec-from-doc ---
    auto* cmd_sfd =
        app.add_subcommand("spec-from-doc", "extract the doc-side spec (stage 3)");
    CommonFlags sfd_flags;
    add_common(cmd_sfd, sfd_flags);

    // --- gen-tests ---
    auto* cmd_gen = app.add_subcommand("gen-tests", "generate test packets from a spec");
    std::string gen_spec, gen_out;
    std::uint64_t gen_seed = 1;
    std::size_t gen_count = 64;
    cmd_gen->add_option("--spec", gen_spec, "spec file (.pfs or canonical json)")->required();
    cmd_gen->add_option("--seed", gen_seed, "generation seed");
    cmd_gen->add_option("--count", gen_count, "number of positive packets");
    cmd_gen->add_option("--out", gen_out, "output directory");

    // --- run-harness ---
    auto* cmd_run = app.add_subcommand("run-harness", "run packets through a module");
    std::string run_module_path, run_packets;
    bool run_trace = false;
    cmd_run->add_option("--module", run_module_path, "module executable")->required();
    cmd_run->add_option("--packets", run_packets, "packet corpus (jsonl)")->required();
    cmd_run->add_flag("--trace", run_trace, "enable trace capture");

    // --- diff ---
    auto* cmd_diff = app.add_subcommand("diff", "diff two specs");
    std::string diff_code, diff_doc, diff_catalog, diff_out;
    std::string diff_format = "text";
    cmd_diff->add_option("--code", diff_code, "code-side spec")->required();
    cmd_diff->add_option("--doc", diff_doc, "doc-side spec")->required();
    cmd_diff->add_option("--catalog", diff_catalog, "bug catalog for grouping");
    cmd_diff->add_option("--format", diff_format, "json|text")
        ->check(CLI::IsMember({"json", "text"}));
    cmd_diff->add_option("--out", diff_out, "output directory");

    // --- validate ---
    auto* cmd_validate =
        app.add_subcommand("validate", "run the full pipeline end to end");
    CommonFlags validate_flags;
    add_common(cmd_validate, validate_flags);
    std::string validate_format = "text";
    cmd_validate->add_option("--format", validate_format, "json|text")
        ->check(CLI::IsMember({"json", "text"}));

    // --- report ---
    auto* cmd_report = app.add_subcommand("report", "re-render a report");
    std::string report_in, report_catalog;
    std::string report_format = "text";
    cmd_report->add_option("--in", report_in, "report.json")->required();
    cmd_report->add_option("--catalog", report_catalog, "bug catalog for grouping");
    cmd_report->add_option("--format", report_format, "json|text")
        ->check(CLI::IsMember({"json", "text"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_index) {
            retrieval::SourceIndex index = retrieval::index_repo(index_repo_path);
            json j{{"schema_version", 1},
                   {"root", index.root.string()},
                   {"files", index.files},
                   {"warnings", index.warnings}};
            json symbols = json::object();
            for (const auto& [name, defs] : index.symbols) {
                json list = json::array();
                for (const auto& d : defs)
                    list.push_back(json{{"kind", retrieval::symbol_kind_text(d.kind)},
                                        {"file", d.file},
                                        {"line", d.line}});
                symbols[name] = std::move(list);
            }
            j["symbols"] = std::move(symbols);
            emit(index_out, "index.json", j.dump(2) + "\n");
            return 0;
        }

        if (*cmd_isolate || *cmd_sfc) {
            const CommonFlags& flags = *cmd_isolate ? isolate_flags : sfc_flags;
            PipelineConfig cfg = flags.load();
            auto backend = backend_for(cfg);
            retrieval::SourceIndex index = retrieval::index_repo(cfg.repo);
            harness::Workspace ws(cfg.build_command, cfg.build_timeout,
                                  cfg.packet_timeout);
            agents::IsolationResult iso = agents::run_isolation(
                index, cfg.entry, *backend, ws, agent_options(cfg));
            std::filesystem::create_directories(cfg.out);
            for (const auto& [name, content] : iso.sources)
                write_file(cfg.out / "module" / name, content);
            write_file(cfg.out / "bundle.json",
                       retrieval::bundle_to_json(iso.bundle).dump(2) + "\n");
            std::cout << "module sources under " << (cfg.out / "module").string() << "\n";
            if (*cmd_sfc) {
                agents::SpecExtraction code = agents::extract_codespec(
                    iso.sources, iso.executable, *backend, agent_options(cfg));
                write_file(cfg.out / "codespec.pfs", code.source_text);
                write_file(cfg.out / "codespec.canonical.json",
                           dsl::serialize_canonical(code.spec));
                std::cout << (cfg.out / "codespec.pfs").string() << "\n";
            }
            return 0;
        }

        if (*cmd_sfd) {
            PipelineConfig cfg = sfd_flags.load();
            auto backend = backend_for(cfg);
            agents::SpecExtraction doc = agents::extract_docspec(
                read_file(cfg.document), *backend, agent_options(cfg));
            std::filesystem::create_directories(cfg.out);
            write_file(cfg.out / "docspec.pfs", doc.source_text);
            write_file(cfg.out / "docspec.canonical.json",
                       dsl::serialize_canonical(doc.spec));
            std::cout << (cfg.out / "docspec.pfs").string() << "\n";
            return 0;
        }

        if (*cmd_gen) {
            dsl::FormatSpec spec = load_spec_or_die(gen_spec);
            auto positives = gen::generate_positive(spec, gen_seed, gen_count);
            dsl::SpecStats st = dsl::spec_stats(spec);
            auto negatives = gen::generate_negative(spec, gen_seed, st.constraints + 3);
            std::filesystem::path out = gen_out.empty() ? "." : gen_out;
            gen::write_packets_jsonl(out / "positive.jsonl", positives);
            gen::write_packets_jsonl(out / "negative.jsonl", negatives.packets);
            std::cout << positives.size() << " positives, " << negatives.packets.size()
                      << " negatives";
            if (!negatives.skipped.empty())
                std::cout << " (" << negatives.skipped.size() << " targets skipped)";
            std::cout << "\n";
            return 0;
        }

        if (*cmd_run) {
            auto packets = gen::read_packets_jsonl(run_packets);
            harness::RunOptions opts;
            opts.tracing = run_trace;
            auto verdicts = harness::run_module(run_module_path, packets, opts);
            for (const auto& v : verdicts) {
                json j{{"id", v.packet_id},
                       {"verdict", harness::module_verdict_text(v.verdict)}};
                if (!v.detail.empty()) j["detail"] = v.detail;
                if (v.trace) {
                    json t = json::array();
                    for (const auto& [id, ok] : *v.trace)
                        t.push_back(json{{"check", id}, {"ok", ok}});
                    j["trace"] = std::move(t);
                }
                std::cout << j.dump() << "\n";
            }
            return 0;
        }

        if (*cmd_diff) {
            dsl::FormatSpec code = load_spec_or_die(diff_code);
            dsl::FormatSpec doc = load_spec_or_die(diff_doc);
            diff::ValidationReport report = diff::diff_specs(code, doc);
            std::vector<diff::CatalogEntry> catalog;
            if (!diff_catalog.empty()) catalog = diff::load_catalog(diff_catalog);
            std::string rendered =
                diff_format == "json"
                    ? diff::report_to_json(report).dump(2) + "\n"
                    : diff::render_text(report, catalog.empty() ? nullptr : &catalog);
            emit(diff_out, diff_format == "json" ? "report.json" : "report.txt", rendered);
            return report.discrepancies.empty() ? 0 : 2;
        }

        if (*cmd_validate) {
            PipelineConfig cfg = validate_flags.load();
            PipelineOutcome outcome = run_pipeline(cfg);
            std::cout << read_file(outcome.out_dir /
                                   (validate_format == "json" ? "report.json"
                                                              : "report.txt"));
            return outcome.exit_code;
        }

        if (*cmd_report) {
            diff::ValidationReport report =
                diff::report_from_json(json::parse(read_file(report_in)));
            std::vector<diff::CatalogEntry> catalog;
            if (!report_catalog.empty()) catalog = diff::load_catalog(report_catalog);
            if (report_format == "json")
                std::cout << diff::report_to_json(report).dump(2) << "\n";
            else
                std::cout << diff::render_text(report,
                                               catalog.empty() ? nullptr : &catalog);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "pfv: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
