// SPDX-License-Identifier: Apache-2.0
//
// The model-backed layer: a pluggable chat backend contract, recorded
// transcripts with strict replay, and the three agent operations (parser
// isolation, spec extraction from code, spec extraction from documents).
// Every backend response is recorded before it is acted on, so a recorded
// session replays byte-identically offline.

#ifndef PFV_AGENTS_HPP
#define PFV_AGENTS_HPP

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfv/ast.hpp"
#include "pfv/harness.hpp"
#include "pfv/retrieval.hpp"

namespace pfv::agents {

struct ToolCall {
    std::string name;
    nlohmann::json args;
};

struct ModelResponse {
    std::string text;
    std::optional<ToolCall> tool_call;
};

nlohmann::json response_to_json(const ModelResponse& r);
ModelResponse response_from_json(const nlohmann::json& j);

// Digest binding a recorded response to the exact request it answered.
std::string request_digest(const std::string& session, const nlohmann::json& messages,
                           const nlohmann::json& tools);

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual ModelResponse complete(const std::string& session,
                                   const nlohmann::json& messages,
                                   const nlohmann::json& tools) = 0;
};

// Scripted responses, keyed by session. Used by tests and by the corpus
// transcript generator.
class QueueBackend : public ModelBackend {
public:
    void push(const std::string& session, ModelResponse r) {
        queues_[session].push_back(std::move(r));
    }
    ModelResponse complete(const std::string& session, const nlohmann::json& messages,
                           const nlohmann::json& tools) override;

private:
    std::map<std::string, std::deque<ModelResponse>> queues_;
};

// Serves recorded transcripts from <dir>/<session>.jsonl. In strict mode a
// request whose digest differs from the recorded one aborts with a drift
// error; records without digests (hand-authored) are accepted as-is.
class ReplayBackend : public ModelBackend {
public:
    explicit ReplayBackend(std::filesystem::path dir, bool strict = true)
        : dir_(std::move(dir)), strict_(strict) {}
    ModelResponse complete(const std::string& session, const nlohmann::json& messages,
                           const nlohmann::json& tools) override;

private:
    struct Entry {
        std::string digest;
        ModelResponse response;
    };
    struct Session {
        std::vector<Entry> entries;
        std::size_t cursor = 0;
    };
    std::filesystem::path dir_;
    bool strict_;
    std::map<std::string, Session> sessions_;
};

// Wraps another backend and appends every turn to <dir>/<session>.jsonl.
class RecordingBackend : public ModelBackend {
public:
    RecordingBackend(ModelBackend& inner, std::filesystem::path dir)
        : inner_(inner), dir_(std::move(dir)) {}
    ModelResponse complete(const std::string& session, const nlohmann::json& messages,
                           const nlohmann::json& tools) override;

private:
    ModelBackend& inner_;
    std::filesystem::path dir_;
};

// Generic JSON-over-HTTP chat completion client; temperature pinned to 0.
struct HttpBackendConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::string model;
    std::string api_key;
    std::string path = "/v1/chat/completions";
};

class HttpBackend : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}
    ModelResponse complete(const std::string& session, const nlohmann::json& messages,
                           const nlohmann::json& tools) override;

private:
    HttpBackendConfig config_;
};

// --- agent operations ---

struct ToolEvent {
    std::string session;
    std::string tool;
    nlohmann::json args;
    nlohmann::json result;
};

nlohmann::json audit_to_json(const std::vector<ToolEvent>& events);

struct AgentOptions {
    int isolation_budget = 8;
    int syntax_budget = 6;
    int semantic_budget = 6;
    std::uint64_t seed = 1;
    std::size_t positives = 64;
    std::filesystem::path prompt_dir;
};

struct IsolationResult {
    std::map<std::string, std::string> sources;  // filename -> content
    std::filesystem::path executable;
    retrieval::ContextBundle bundle;
    std::vector<ToolEvent> audit;
};

// Stage 1: alternates retrieval and module construction until the module
// builds and honors the wire protocol, or the budget runs out.
IsolationResult run_isolation(const retrieval::SourceIndex& index, const std::string& entry,
                              ModelBackend& backend, harness::Workspace& ws,
                              const AgentOptions& opts);

struct SpecExtraction {
    dsl::FormatSpec spec;
    std::string source_text;
    std::vector<ToolEvent> audit;
};

// Stage 2: syntax loop until the spec parses and validates, then semantic
// loop until generated tests match the module, feeding traces and
// violated-constraint analyses back in between.
SpecExtraction extract_codespec(const std::map<std::string, std::string>& sources,
                                const std::filesystem::path& executable,
                                ModelBackend& backend, const AgentOptions& opts);

// Stage 3: fold the document chunk by chunk into one spec; syntax loop per
// chunk, no semantic loop (there is no executable oracle for a document).
SpecExtraction extract_docspec(const std::string& document, ModelBackend& backend,
                               const AgentOptions& opts);

// Chunking by numbered section headings, with a size cap and overlap for
// oversized sections.
std::vector<std::string> chunk_document(const std::string& text, std::size_t max_chars = 4000,
                                        std::size_t overlap = 200);

}  // namespace pfv::agents

#endif
