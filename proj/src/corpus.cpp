// SPDX-License-Identifier: Apache-2.0

#include "pfv/corpus.hpp"

#include "pfv/parse.hpp"

namespace pfv::corpus {

namespace {

std::string id_of(const char* expr_text) {
    auto r = dsl::parse_expr(expr_text);
    if (!r.ok()) throw Error("corpus", "bad constraint expression");
    return dsl::constraint_id(*r.expr);
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
    return (static_cast<std::uint32_t>(b[off]) << 24) |
           (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) |
           static_cast<std::uint32_t>(b[off + 3]);
}

}  // namespace

const std::string& version_constraint_id() {
    static const std::string id = id_of("vers == 1");
    return id;
}
const std::string& detect_mult_constraint_id() {
    static const std::string id = id_of("detect_mult != 0");
    return id;
}
const std::string& min_length_constraint_id() {
    static const std::string id = id_of("length >= 24");
    return id;
}
const std::string& length_bound_constraint_id() {
    static const std::string id = id_of("length <= total_len");
    return id;
}

gen::CheckResult reference_bfd_check(std::span<const std::uint8_t> bytes) {
    gen::CheckResult r;
    if (bytes.size() < 24) {
        r.verdict = gen::Verdict::Reject;
        r.structural = "underrun";
        return r;
    }
    r.decoded["vers"] = (bytes[0] >> 5) & 0x07;
    r.decoded["diag"] = bytes[0] & 0x1f;
    r.decoded["flags"] = bytes[1];
    r.decoded["detect_mult"] = bytes[2];
    r.decoded["length"] = bytes[3];
    r.decoded["my_discriminator"] = be32(bytes, 4);
    r.decoded["your_discriminator"] = be32(bytes, 8);
    r.decoded["desired_min_tx_interval"] = be32(bytes, 12);
    r.decoded["required_min_rx_interval"] = be32(bytes, 16);
    r.decoded["required_min_echo_rx_interval"] = be32(bytes, 20);
    r.decoded_bytes["trailer"] =
        std::vector<std::uint8_t>(bytes.begin() + 24, bytes.end());

    auto reject = [&](const std::string& id) {
        r.verdict = gen::Verdict::Reject;
        r.failed_constraint = id;
        return r;
    };
    if (r.decoded["vers"] != 1) return reject(version_constraint_id());
    if (r.decoded["detect_mult"] == 0) return reject(detect_mult_constraint_id());
    if (r.decoded["length"] < 24) return reject(min_length_constraint_id());
    if (r.decoded["length"] > bytes.size()) return reject(length_bound_constraint_id());
    r.verdict = gen::Verdict::Accept;
    return r;
}

}  // namespace pfv::corpus
