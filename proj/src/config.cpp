// SPDX-License-Identifier: Apache-2.0

#include "pfv/config.hpp"

#include <charconv>
#include <map>

#include "pfv/util.hpp"

namespace pfv {

void PipelineConfig::validate() const {
    if (backend != "replay" && backend != "http")
        throw Error("config", "backend must be 'replay' or 'http', got '" + backend + "'");
    if (backend == "replay" && replay_dir.empty())
        throw Error("config", "replay mode requires replay_dir");
    if (backend == "http" && (endpoint.empty() || model.empty()))
        throw Error("config", "http mode requires endpoint and model");
    if (build_command.empty()) throw Error("config", "build_command must be set");
}

PipelineConfig load_config(const std::filesystem::path& file) {
    std::map<std::string, std::string> kv;
    int lineno = 0;
    for (const auto& raw : split_lines(read_file(file))) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config", file.string() + ":" + std::to_string(lineno) +
                                      ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!kv.emplace(key, value).second)
            throw Error("config", file.string() + ": duplicate key " + key);
    }

    PipelineConfig cfg;
    std::filesystem::path base = file.has_parent_path()
                                     ? file.parent_path()
                                     : std::filesystem::path(".");
    auto as_path = [&](const std::string& v) -> std::filesystem::path {
        std::filesystem::path p = v;
        return p.is_absolute() ? p : base / p;
    };
    auto as_u64 = [&](const std::string& key, const std::string& v) -> std::uint64_t {
        std::uint64_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
            throw Error("config", "key " + key + " is not an integer: " + v);
        return out;
    };

    for (const auto& [key, value] : kv) {
        if (key == "repo") cfg.repo = as_path(value);
        else if (key == "entry") cfg.entry = value;
        else if (key == "document") cfg.document = as_path(value);
        else if (key == "backend") cfg.backend = value;
        else if (key == "replay_dir") cfg.replay_dir = as_path(value);
        else if (key == "endpoint") cfg.endpoint = value;
        else if (key == "model") cfg.model = value;
        else if (key == "api_key_env") cfg.api_key_env = value;
        else if (key == "seed") cfg.seed = as_u64(key, value);
        else if (key == "positives") cfg.positives = as_u64(key, value);
        else if (key == "budget_isolation") cfg.budget_isolation = static_cast<int>(as_u64(key, value));
        else if (key == "budget_syntax") cfg.budget_syntax = static_cast<int>(as_u64(key, value));
        else if (key == "budget_semantic") cfg.budget_semantic = static_cast<int>(as_u64(key, value));
        else if (key == "build_command") cfg.build_command = value;
        else if (key == "build_timeout_ms") cfg.build_timeout = std::chrono::milliseconds(as_u64(key, value));
        else if (key == "packet_timeout_ms") cfg.packet_timeout = std::chrono::milliseconds(as_u64(key, value));
        else if (key == "out") cfg.out = as_path(value);
        else if (key == "catalog") cfg.catalog = as_path(value);
        else if (key == "prompts") cfg.prompts = as_path(value);
        else throw Error("config", "unknown key: " + key);
    }
    cfg.validate();
    return cfg;
}

}  // namespace pfv
