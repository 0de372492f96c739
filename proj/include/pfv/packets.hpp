// SPDX-License-Identifier: Apache-2.0
//
// Reference checker and test packet generation. check_packet defines
// ground-truth conformance for a FormatSpec; the generators derive positive
// and negative packets from the same spec via constraint-directed concrete
// sampling (interval propagation for single-field comparisons, rejection
// sampling for the rest).

#ifndef PFV_PACKETS_HPP
#define PFV_PACKETS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfv/ast.hpp"
#include "pfv/layout.hpp"
#include "pfv/rng.hpp"

namespace pfv::gen {

enum class Verdict { Accept, Reject };

inline const char* verdict_text(Verdict v) { return v == Verdict::Accept ? "accept" : "reject"; }

struct CheckResult {
    Verdict verdict = Verdict::Reject;
    // First violated constraint in declaration order, when the reject is
    // constraint-driven.
    std::optional<std::string> failed_constraint;
    // Structural failure tag: underrun, overrun, negative-length, no-arm,
    // misaligned, spec-error.
    std::optional<std::string> structural;
    dsl::Env decoded;
    std::map<std::string, std::vector<std::uint8_t>> decoded_bytes;
};

CheckResult check_packet(const dsl::FormatSpec& spec, std::span<const std::uint8_t> bytes);

struct TestPacket {
    std::uint64_t id = 0;
    std::vector<std::uint8_t> bytes;
    Verdict expectation = Verdict::Accept;
    std::optional<std::string> target_constraint;  // set for constraint-targeted negatives
    std::optional<std::string> mutation;           // truncate | extend | length-corrupt
    std::uint64_t seed = 0;
};

struct GenOptions {
    int retry_budget = 10000;           // sampling attempts per packet
    std::uint64_t total_len_slack = 4096;  // search range for to-end byte fields
    std::size_t candidate_spread = 8;   // consistent total lengths to choose among
};

class GenerationError : public pfv::Error {
public:
    GenerationError(const std::string& message, std::vector<std::string> blocking = {})
        : pfv::Error("generate", message), blocking_(std::move(blocking)) {}
    const std::vector<std::string>& blocking_constraints() const { return blocking_; }

private:
    std::vector<std::string> blocking_;
};

// Exactly n accepted packets; deterministic for a fixed seed; variant arms
// and guard outcomes are cycled round-robin across packets.
std::vector<TestPacket> generate_positive(const dsl::FormatSpec& spec, std::uint64_t seed,
                                          std::size_t n, const GenOptions& opts = {});

struct SkippedNegative {
    std::string constraint_id;
    std::string path;
    std::string reason;
};

struct NegativeGen {
    std::vector<TestPacket> packets;
    std::vector<SkippedNegative> skipped;
};

// Each packet either violates exactly its target constraint (first failure
// in declaration order) or carries a structural mutation. Constraints that
// cannot be violated in isolation are recorded as skipped.
NegativeGen generate_negative(const dsl::FormatSpec& spec, std::uint64_t seed, std::size_t n,
                              const GenOptions& opts = {});

// Sampling hook for witness search: a packet on `path` satisfying every
// spec constraint except `violate` (made false when non-null), plus all
// `extra` boolean expressions. Returns nothing when the budget runs out.
std::optional<std::vector<std::uint8_t>> sample_packet(
    const dsl::FormatSpec& spec, const dsl::ResolvedPath& path, Rng& rng,
    const std::vector<dsl::ExprPtr>& extra, const dsl::Constraint* violate,
    const GenOptions& opts = {});

nlohmann::json packet_to_json(const TestPacket& p);
TestPacket packet_from_json(const nlohmann::json& j);

void write_packets_jsonl(const std::filesystem::path& path,
                         std::span<const TestPacket> packets);
std::vector<TestPacket> read_packets_jsonl(const std::filesystem::path& path);

}  // namespace pfv::gen

#endif
