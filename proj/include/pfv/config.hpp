// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_CONFIG_HPP
#define PFV_CONFIG_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>

namespace pfv {

// Pipeline configuration, loaded from an INI-style key=value file.
// Relative paths are resolved against the config file's directory.
struct PipelineConfig {
    std::filesystem::path repo;
    std::string entry;
    std::filesystem::path document;

    std::string backend = "replay";  // replay | http
    std::filesystem::path replay_dir;
    std::string endpoint;
    std::string model;
    std::string api_key_env = "PFV_API_KEY";

    std::uint64_t seed = 1;
    std::size_t positives = 64;
    int budget_isolation = 8;
    int budget_syntax = 6;
    int budget_semantic = 6;

    std::string build_command = "cc -O2 -o {output} {sources}";
    std::chrono::milliseconds build_timeout{60000};
    std::chrono::milliseconds packet_timeout{2000};

    std::filesystem::path out = "out";
    std::filesystem::path catalog;  // optional
    std::filesystem::path prompts = "prompts";

    // Checks mode-specific requirements; throws pfv::Error("config") on
    // violations.
    void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& file);

}  // namespace pfv

#endif
