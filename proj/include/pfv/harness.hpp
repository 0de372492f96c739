// SPDX-License-Identifier: Apache-2.0
//
// Builds candidate isolated parsing modules in a scratch workspace and runs
// them under the harness wire protocol:
//
//   stdin:  repeated frames of a 4-byte big-endian length N followed by
//           exactly N packet bytes, until end-of-input
//   stdout: one ASCII line per frame, "1" (accept) or "0" (reject)
//   stderr: with tracing enabled, lines "CHECK <id> <0|1>"
//   exit:   status 0 on clean end-of-input
//
// Anything else is a protocol error. Crashes and per-packet timeouts are
// reported as verdicts, never as harness failures.

#ifndef PFV_HARNESS_HPP
#define PFV_HARNESS_HPP

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pfv/ast.hpp"
#include "pfv/packets.hpp"

namespace pfv::harness {

class Workspace {
public:
    // Creates an empty scratch directory under the system temp root.
    explicit Workspace(std::string build_command,
                       std::chrono::milliseconds build_timeout = std::chrono::seconds(60),
                       std::chrono::milliseconds packet_timeout = std::chrono::seconds(2));
    ~Workspace();

    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
    Workspace(Workspace&& other) noexcept;
    Workspace& operator=(Workspace&&) = delete;

    const std::filesystem::path& root() const { return root_; }
    const std::string& build_command() const { return build_command_; }
    std::chrono::milliseconds build_timeout() const { return build_timeout_; }
    std::chrono::milliseconds packet_timeout() const { return packet_timeout_; }

    // Writes a source file; rel must stay inside the workspace root.
    void write_source(const std::string& rel, const std::string& content);

    // Removes the scratch directory and everything under it.
    void remove();

private:
    std::filesystem::path root_;
    std::string build_command_;
    std::chrono::milliseconds build_timeout_;
    std::chrono::milliseconds packet_timeout_;
    bool owned_ = true;
};

struct BuildResult {
    bool ok = false;
    std::filesystem::path executable;
    std::string diagnostics;  // compiler output, verbatim
    int exit_code = 0;
    bool timed_out = false;
};

// Expands {sources} and {output} in the workspace build command and runs it
// inside the workspace. Diagnostics are returned for agent feedback.
BuildResult build_module(const Workspace& ws, const std::vector<std::string>& sources);

enum class ModuleVerdict { Accept, Reject, Crash, Timeout, ProtocolError };

const char* module_verdict_text(ModuleVerdict v);

struct HarnessVerdict {
    std::uint64_t packet_id = 0;
    ModuleVerdict verdict = ModuleVerdict::ProtocolError;
    std::string detail;  // diagnostic detail for crash/timeout/protocol-error
    std::optional<std::vector<std::pair<std::string, bool>>> trace;
};

struct RunOptions {
    bool tracing = false;
    std::chrono::milliseconds packet_timeout = std::chrono::seconds(2);
    std::size_t max_frame = 64u << 20;
};

// One verdict per packet, in order. The module process is kept alive across
// packets and restarted after a crash, timeout or protocol violation.
std::vector<HarnessVerdict> run_module(const std::filesystem::path& executable,
                                       std::span<const gen::TestPacket> packets,
                                       const RunOptions& opts = {});

struct MismatchReport {
    // positives the module did not accept / negatives it did not reject
    std::vector<std::pair<gen::TestPacket, HarnessVerdict>> false_rejects;
    std::vector<std::pair<gen::TestPacket, HarnessVerdict>> false_accepts;
    std::vector<HarnessVerdict> verdicts;
    std::size_t packets_run = 0;

    bool clean() const { return false_rejects.empty() && false_accepts.empty(); }
    std::string summary() const;
};

struct SemanticCheckOptions {
    std::size_t positives = 64;
    gen::GenOptions gen;
    RunOptions run;
};

// Stage-2 semantic check: generated positives must be accepted and
// generated negatives rejected; anything else is a mismatch.
MismatchReport semantic_check(const dsl::FormatSpec& spec,
                              const std::filesystem::path& executable, std::uint64_t seed,
                              std::size_t n, const SemanticCheckOptions& opts = {});

// Exhaustive variant for fixed-width specs: every input up to the widest
// path is enumerated and compared against check_packet.
MismatchReport semantic_check_exhaustive(const dsl::FormatSpec& spec,
                                         const std::filesystem::path& executable,
                                         const RunOptions& opts = {});

}  // namespace pfv::harness

#endif
