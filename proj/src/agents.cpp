// SPDX-License-Identifier: Apache-2.0

#include "pfv/agents.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <httplib.h>

#include "pfv/canonical.hpp"
#include "pfv/packets.hpp"
#include "pfv/parse.hpp"
#include "pfv/util.hpp"
#include "pfv/validate.hpp"

using nlohmann::json;

namespace pfv::agents {

json response_to_json(const ModelResponse& r) {
    json j;
    j["text"] = r.text;
    if (r.tool_call)
        j["tool"] = json{{"name", r.tool_call->name}, {"args", r.tool_call->args}};
    else
        j["tool"] = nullptr;
    return j;
}

ModelResponse response_from_json(const json& j) {
    ModelResponse r;
    r.text = j.value("text", "");
    if (j.contains("tool") && !j.at("tool").is_null()) {
        ToolCall call;
        call.name = j.at("tool").at("name").get<std::string>();
        call.args = j.at("tool").value("args", json::object());
        r.tool_call = std::move(call);
    }
    return r;
}

std::string request_digest(const std::string& session, const json& messages,
                           const json& tools) {
    json req{{"session", session}, {"messages", messages}, {"tools", tools}};
    return digest_hex(req.dump());
}

ModelResponse QueueBackend::complete(const std::string& session, const json&, const json&) {
    auto it = queues_.find(session);
    if (it == queues_.end() || it->second.empty())
        throw Error("backend", "no scripted response left for session " + session);
    ModelResponse r = std::move(it->second.front());
    it->second.pop_front();
    return r;
}

ModelResponse ReplayBackend::complete(const std::string& session, const json& messages,
                                      const json& tools) {
    auto it = sessions_.find(session);
    if (it == sessions_.end()) {
        Session s;
        std::filesystem::path file = dir_ / (session + ".jsonl");
        if (!std::filesystem::exists(file))
            throw Error("drift", "no transcript for session " + session + " under " +
                                     dir_.string());
        for (const auto& line : split_lines(read_file(file))) {
            std::string t = trim(line);
            if (t.empty()) continue;
            json j = json::parse(t);
            Entry e;
            e.digest = j.value("digest", "");
            e.response = response_from_json(j.at("response"));
            s.entries.push_back(std::move(e));
        }
        it = sessions_.emplace(session, std::move(s)).first;
    }
    Session& s = it->second;
    if (s.cursor >= s.entries.size())
        throw Error("drift", "transcript exhausted for session " + session + " at turn " +
                                 std::to_string(s.cursor));
    const Entry& e = s.entries[s.cursor++];
    if (strict_ && !e.digest.empty()) {
        std::string got = request_digest(session, messages, tools);
        if (got != e.digest)
            throw Error("drift", "request drift in session " + session + " at turn " +
                                     std::to_string(s.cursor - 1) + ": recorded " +
                                     e.digest + ", live " + got);
    }
    return e.response;
}

ModelResponse RecordingBackend::complete(const std::string& session, const json& messages,
                                         const json& tools) {
    ModelResponse r = inner_.complete(session, messages, tools);
    json line{{"digest", request_digest(session, messages, tools)},
              {"response", response_to_json(r)}};
    std::filesystem::create_directories(dir_);
    std::filesystem::path file = dir_ / (session + ".jsonl");
    std::string existing;
    if (std::filesystem::exists(file)) existing = read_file(file);
    write_file(file, existing + line.dump() + "\n");
    return r;
}

ModelResponse HttpBackend::complete(const std::string&, const json& messages,
                                    const json& tools) {
    httplib::Client client(config_.endpoint);
    client.set_read_timeout(120, 0);
    json body{{"model", config_.model}, {"temperature", 0}, {"messages", messages}};
    if (!tools.empty()) {
        json tool_list = json::array();
        for (const auto& t : tools)
            tool_list.push_back(json{{"type", "function"}, {"function", t}});
        body["tools"] = tool_list;
    }
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res)
        throw Error("backend", "backend request failed: " +
                                   httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error("backend", "backend returned status " + std::to_string(res->status) +
                                   ": " + res->body.substr(0, 200));
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
        throw Error("backend", "malformed backend response");
    const json& message = j["choices"][0]["message"];
    ModelResponse out;
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
        const json& f = message["tool_calls"][0]["function"];
        ToolCall call;
        call.name = f.at("name").get<std::string>();
        json args = json::parse(f.value("arguments", "{}"), nullptr, false);
        call.args = args.is_discarded() ? json::object() : args;
        out.tool_call = std::move(call);
    }
    if (message.contains("content") && message["content"].is_string())
        out.text = message["content"].get<std::string>();
    return out;
}

json audit_to_json(const std::vector<ToolEvent>& events) {
    json out = json::array();
    for (const auto& e : events)
        out.push_back(json{{"session", e.session},
                           {"tool", e.tool},
                           {"args", e.args},
                           {"result", e.result}});
    return out;
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

namespace {

std::string load_template(const std::filesystem::path& prompt_dir, const std::string& name,
                          const std::map<std::string, std::string>& subst) {
    if (prompt_dir.empty())
        throw Error("agent", "prompt directory is not configured");
    std::string text = read_file(prompt_dir / name);
    for (const auto& [key, value] : subst) {
        std::string needle = "{{" + key + "}}";
        for (std::size_t pos = 0; (pos = text.find(needle, pos)) != std::string::npos;
             pos += value.size())
            text.replace(pos, needle.size(), value);
    }
    return text;
}

json msg(const std::string& role, const std::string& content) {
    return json{{"role", role}, {"content", content}};
}

json analysis_tools() {
    return json::array(
        {json{{"name", "lookup"},
              {"description", "fetch the definition of a symbol"},
              {"parameters",
               {{"type", "object"},
                {"properties", {{"symbol", {{"type", "string"}}}}},
                {"required", json::array({"symbol"})}}}},
         json{{"name", "expand"},
              {"description",
               "list unresolved identifiers referenced by a retrieved definition"},
              {"parameters",
               {{"type", "object"},
                {"properties", {{"symbol", {{"type", "string"}}}}},
                {"required", json::array({"symbol"})}}}}});
}

json builder_tools() {
    return json::array(
        {json{{"name", "write_module"},
              {"description", "write module source files into the workspace"},
              {"parameters",
               {{"type", "object"},
                {"properties", {{"files", {{"type", "object"}}}}},
                {"required", json::array({"files"})}}}}});
}

std::string spec_diagnostics(const dsl::ParseResult& pr,
                             const std::optional<dsl::FormatSpec>& spec) {
    std::vector<dsl::Diagnostic> diags = pr.diagnostics;
    if (spec) {
        auto extra = dsl::validate_spec(*spec);
        diags.insert(diags.end(), extra.begin(), extra.end());
    }
    return dsl::render_diagnostics(diags);
}

// One syntax-checked spec out of the session, feeding diagnostics back per
// iteration.
struct SyntaxLoopResult {
    dsl::FormatSpec spec;
    std::string text;
};

std::optional<SyntaxLoopResult> syntax_loop(ModelBackend& backend,
                                            const std::string& session, json& messages,
                                            int budget, std::string& last_diags) {
    for (int i = 0; i < budget; ++i) {
        ModelResponse r = backend.complete(session, messages, json::array());
        if (r.tool_call) {
            messages.push_back(msg("assistant", "(tool call)"));
            messages.push_back(
                msg("user", "reply with the specification source only, not a tool call"));
            continue;
        }
        messages.push_back(msg("assistant", r.text));
        if (trim(r.text) == "NO_FORMAT") {
            SyntaxLoopResult out;
            out.text = "NO_FORMAT";
            return out;
        }
        dsl::ParseResult pr = dsl::parse_spec(r.text);
        if (pr.spec) {
            auto extra = dsl::validate_spec(*pr.spec);
            if (!dsl::has_errors(pr.diagnostics) && !dsl::has_errors(extra))
                return SyntaxLoopResult{*pr.spec, r.text};
        }
        last_diags = spec_diagnostics(pr, pr.spec);
        messages.push_back(
            msg("user", "the specification does not pass the checks:\n" + last_diags +
                            "\nreply with the corrected source only"));
    }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// stage 1: isolation
// ---------------------------------------------------------------------------

IsolationResult run_isolation(const retrieval::SourceIndex& index, const std::string& entry,
                              ModelBackend& backend, harness::Workspace& ws,
                              const AgentOptions& opts) {
    std::vector<retrieval::SymbolDef> entry_defs;
    for (const auto& d : retrieval::lookup_definition(index, entry))
        if (d.kind == retrieval::SymbolKind::Function) entry_defs.push_back(d);
    if (entry_defs.empty()) throw Error("retrieval", "entry function not found: " + entry);
    if (entry_defs.size() > 1) throw Error("retrieval", "entry is ambiguous: " + entry);

    IsolationResult result;
    result.bundle.entries.push_back(entry_defs[0]);
    std::set<std::pair<std::string, retrieval::SymbolKind>> in_bundle{
        {entry, retrieval::SymbolKind::Function}};

    // --- retrieval phase ---
    const std::string analysis_session = "isolation.analysis";
    json messages = json::array();
    messages.push_back(msg("system", load_template(opts.prompt_dir, "isolation_analysis.txt",
                                                   {{"entry", entry},
                                                    {"entry_file", entry_defs[0].file},
                                                    {"entry_source", entry_defs[0].text}})));
    messages.push_back(msg("user", "begin the dependency analysis"));
    json tools = analysis_tools();

    for (int i = 0; i < opts.isolation_budget; ++i) {
        ModelResponse r = backend.complete(analysis_session, messages, tools);
        if (!r.tool_call) {
            messages.push_back(msg("assistant", r.text));
            break;
        }
        const ToolCall& call = *r.tool_call;
        json result_json;
        if (call.name == "lookup") {
            std::string symbol = call.args.value("symbol", "");
            auto defs = retrieval::lookup_definition(index, symbol);
            result_json = json::array();
            for (const auto& d : defs) {
                result_json.push_back(json{{"file", d.file},
                                           {"line", d.line},
                                           {"kind", retrieval::symbol_kind_text(d.kind)},
                                           {"text", d.text}});
                if (in_bundle.insert({d.name, d.kind}).second)
                    result.bundle.entries.push_back(d);
            }
            if (defs.empty()) result_json = json{{"error", "unknown symbol: " + symbol}};
        } else if (call.name == "expand") {
            std::string symbol = call.args.value("symbol", "");
            auto defs = retrieval::lookup_definition(index, symbol);
            if (defs.empty()) {
                result_json = json{{"error", "unknown symbol: " + symbol}};
            } else {
                auto deps = retrieval::expand_dependencies(index, defs[0].text);
                result_json = json{{"references", deps}};
                for (const auto& dep : deps)
                    if (!index.symbols.count(dep)) result.bundle.frontier.insert(dep);
            }
        } else {
            result_json = json{{"error", "unknown tool: " + call.name}};
        }
        result.audit.push_back({analysis_session, call.name, call.args, result_json});
        messages.push_back(msg("assistant", "calling " + call.name));
        messages.push_back(msg("user", "tool result:\n" + result_json.dump(2)));
    }

    // --- construction phase ---
    const std::string builder_session = "isolation.builder";
    json bmessages = json::array();
    bmessages.push_back(msg(
        "system",
        load_template(opts.prompt_dir, "isolation_builder.txt",
                      {{"bundle", retrieval::bundle_to_json(result.bundle).dump(2)}})));
    bmessages.push_back(msg("user", "write the isolated parsing module"));
    json btools = builder_tools();

    std::string last_diag;
    for (int i = 0; i < opts.isolation_budget; ++i) {
        ModelResponse r = backend.complete(builder_session, bmessages, btools);
        if (!r.tool_call) {
            bmessages.push_back(msg("assistant", r.text));
            bmessages.push_back(msg("user", "call write_module with the module sources"));
            continue;
        }
        const ToolCall& call = *r.tool_call;
        bmessages.push_back(msg("assistant", "calling " + call.name));
        if (call.name != "write_module" || !call.args.contains("files")) {
            bmessages.push_back(msg("user", "tool result:\n{\"error\": \"expected "
                                            "write_module with a files object\"}"));
            continue;
        }
        std::map<std::string, std::string> files;
        for (const auto& [name, content] : call.args.at("files").items())
            files[name] = content.get<std::string>();
        for (const auto& [name, content] : files) ws.write_source(name, content);
        result.audit.push_back({builder_session, "write_module", call.args,
                                json{{"written", files.size()}}});

        std::vector<std::string> names;
        for (const auto& [name, _] : files) names.push_back(name);
        harness::BuildResult build = harness::build_module(ws, names);
        result.audit.push_back({builder_session, "build", json{{"sources", names}},
                                json{{"ok", build.ok}, {"exit", build.exit_code}}});
        if (!build.ok) {
            last_diag = build.diagnostics;
            bmessages.push_back(
                msg("user", "the build failed:\n" + build.diagnostics +
                                "\nfix the sources and call write_module again"));
            continue;
        }

        // wire-protocol smoke test: one empty and one one-byte frame
        std::vector<gen::TestPacket> smoke(2);
        smoke[0].id = 0;
        smoke[1].id = 1;
        smoke[1].bytes = {0x00};
        auto verdicts = harness::run_module(build.executable, smoke,
                                            {false, ws.packet_timeout(), 64u << 20});
        bool protocol_ok = true;
        std::string protocol_detail;
        for (const auto& v : verdicts)
            if (v.verdict != harness::ModuleVerdict::Accept &&
                v.verdict != harness::ModuleVerdict::Reject) {
                protocol_ok = false;
                protocol_detail = std::string(harness::module_verdict_text(v.verdict)) +
                                  (v.detail.empty() ? "" : ": " + v.detail);
            }
        result.audit.push_back({builder_session, "smoke",
                                json{{"frames", smoke.size()}},
                                json{{"ok", protocol_ok}, {"detail", protocol_detail}}});
        if (!protocol_ok) {
            last_diag = protocol_detail;
            bmessages.push_back(
                msg("user", "the module violates the wire protocol (" + protocol_detail +
                                "); fix it and call write_module again"));
            continue;
        }

        result.sources = std::move(files);
        result.executable = build.executable;
        return result;
    }
    throw Error("budget", "isolation budget exhausted; last diagnostics:\n" + last_diag);
}

// ---------------------------------------------------------------------------
// stage 2: spec from code
// ---------------------------------------------------------------------------

namespace {

std::string constraint_text_by_id(const dsl::FormatSpec& spec, const std::string& id) {
    std::string found = id;
    std::function<void(const std::vector<dsl::Section>&)> walk =
        [&](const std::vector<dsl::Section>& body) {
            for (const auto& s : body) switch (s.kind) {
                    case dsl::Section::Kind::Record:
                        for (const auto& f : s.fields)
                            for (const auto& c : f.constraints)
                                if (c.id == id) found = dsl::expr_text(*c.expr);
                        for (const auto& ac : s.checks)
                            if (ac.constraint.id == id)
                                found = dsl::expr_text(*ac.constraint.expr);
                        break;
                    case dsl::Section::Kind::Conditional: walk(s.body); break;
                    case dsl::Section::Kind::Variant:
                        for (const auto& a : s.arms) walk(a.body);
                        if (s.default_arm) walk(*s.default_arm);
                        break;
                }
        };
    walk(spec.sections);
    return found;
}

std::string mismatch_feedback(const dsl::FormatSpec& spec,
                              const std::filesystem::path& executable,
                              const harness::MismatchReport& report,
                              std::chrono::milliseconds packet_timeout) {
    std::ostringstream os;
    os << "semantic check failed: " << report.summary() << "\n";

    std::size_t shown = 0;
    if (!report.false_rejects.empty()) {
        // Replay the failing positives with tracing for concrete feedback.
        std::vector<gen::TestPacket> failing;
        for (const auto& [p, v] : report.false_rejects) {
            failing.push_back(p);
            if (failing.size() >= 4) break;
        }
        auto traced = harness::run_module(executable, failing,
                                          {true, packet_timeout, 64u << 20});
        for (std::size_t i = 0; i < failing.size(); ++i) {
            os << "\npositive packet " << hex_encode(failing[i].bytes)
               << " was not accepted (module said "
               << harness::module_verdict_text(traced[i].verdict) << ")\n";
            if (traced[i].trace) {
                os << "  module checks:";
                for (const auto& [id, ok] : *traced[i].trace)
                    os << " " << id << "=" << (ok ? 1 : 0);
                os << "\n";
            }
        }
    }
    for (const auto& [p, v] : report.false_accepts) {
        if (++shown > 4) break;
        os << "\nnegative packet " << hex_encode(p.bytes)
           << " was accepted by the module, but the spec rejects it";
        if (p.target_constraint)
            os << " via constraint " << constraint_text_by_id(spec, *p.target_constraint);
        else if (p.mutation)
            os << " via the " << *p.mutation << " mutation";
        os << "\n";
    }
    os << "\nrevise the specification so it matches the module behavior and reply "
          "with the full corrected source only\n";
    return os.str();
}

}  // namespace

SpecExtraction extract_codespec(const std::map<std::string, std::string>& sources,
                                const std::filesystem::path& executable,
                                ModelBackend& backend, const AgentOptions& opts) {
    if (!std::filesystem::exists(executable))
        throw Error("precondition", "module executable missing: " + executable.string());

    std::string source_blob;
    for (const auto& [name, content] : sources)
        source_blob += "// file: " + name + "\n" + content + "\n";

    const std::string session = "codespec";
    json messages = json::array();
    messages.push_back(msg("system", load_template(opts.prompt_dir, "codespec.txt",
                                                   {{"sources", source_blob}})));
    messages.push_back(msg("user", "derive the format specification"));

    SpecExtraction out;
    std::string last_diags;
    for (int round = 0; round < opts.semantic_budget; ++round) {
        auto parsed = syntax_loop(backend, session, messages, opts.syntax_budget, last_diags);
        if (!parsed)
            throw Error("budget", "syntax budget exhausted; last diagnostics:\n" + last_diags);
        harness::SemanticCheckOptions sc;
        harness::MismatchReport report =
            harness::semantic_check(parsed->spec, executable, opts.seed, opts.positives, sc);
        if (report.clean()) {
            out.spec = parsed->spec;
            out.source_text = parsed->text;
            return out;
        }
        if (round + 1 >= opts.semantic_budget)
            throw Error("budget", "semantic budget exhausted: " + report.summary());
        messages.push_back(msg("user", mismatch_feedback(parsed->spec, executable, report,
                                                         std::chrono::seconds(2))));
    }
    throw Error("budget", "semantic budget exhausted");
}

// ---------------------------------------------------------------------------
// stage 3: spec from document
// ---------------------------------------------------------------------------

std::vector<std::string> chunk_document(const std::string& text, std::size_t max_chars,
                                        std::size_t overlap) {
    std::vector<std::string> lines = split_lines(text);
    auto is_heading = [](const std::string& line) {
        std::size_t i = 0;
        while (i < line.size() && line[i] == ' ') ++i;
        if (i > 3 || i >= line.size() || !std::isdigit(static_cast<unsigned char>(line[i])))
            return false;
        bool digits = false;
        while (i < line.size() &&
               (std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '.')) {
            digits = digits || std::isdigit(static_cast<unsigned char>(line[i]));
            ++i;
        }
        return digits && i < line.size() && line[i] == ' ';
    };

    std::vector<std::string> sections;
    std::string current;
    for (const auto& line : lines) {
        if (is_heading(line) && !trim(current).empty()) {
            sections.push_back(current);
            current.clear();
        }
        current += line + "\n";
    }
    if (!trim(current).empty()) sections.push_back(current);

    std::vector<std::string> chunks;
    for (const auto& s : sections) {
        if (s.size() <= max_chars) {
            chunks.push_back(s);
            continue;
        }
        std::size_t begin = 0;
        while (begin < s.size()) {
            std::size_t len = std::min(max_chars, s.size() - begin);
            chunks.push_back(s.substr(begin, len));
            if (begin + len >= s.size()) break;
            begin += len - std::min(overlap, len - 1);
        }
    }
    return chunks;
}

SpecExtraction extract_docspec(const std::string& document, ModelBackend& backend,
                               const AgentOptions& opts) {
    if (trim(document).empty())
        throw Error("precondition", "document is empty");

    std::vector<std::string> chunks = chunk_document(document);
    std::string spec_text;
    std::string last_diags;

    for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
        std::string session = "docspec.chunk" + std::to_string(ci);
        json messages = json::array();
        messages.push_back(
            msg("system", load_template(opts.prompt_dir, "docspec.txt",
                                        {{"spec", spec_text.empty() ? "(empty)" : spec_text},
                                         {"chunk", chunks[ci]}})));
        messages.push_back(msg("user", "update the specification from this section"));
        auto parsed = syntax_loop(backend, session, messages, opts.syntax_budget, last_diags);
        if (!parsed)
            throw Error("budget", "syntax budget exhausted in chunk " + std::to_string(ci) +
                                      "; last diagnostics:\n" + last_diags);
        if (parsed->text == "NO_FORMAT") continue;
        spec_text = parsed->text;
    }

    if (spec_text.empty())
        throw Error("empty-spec",
                    "document yielded no format content (every chunk reported NO_FORMAT)");

    dsl::ParseResult final_parse = dsl::parse_spec(spec_text);
    if (!final_parse.ok())
        throw Error("agent", "final specification no longer parses");
    SpecExtraction out;
    out.spec = *final_parse.spec;
    out.source_text = spec_text;
    return out;
}

}  // namespace pfv::agents
