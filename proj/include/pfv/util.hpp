// SPDX-License-Identifier: Apache-2.0

#ifndef PFV_UTIL_HPP
#define PFV_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pfv {

// 64-bit FNV-1a. Used for content digests (constraint ids, canonical spec
// digests, transcript request digests). Not collision resistant; fine for
// content addressing at this scale.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex_u64(std::uint64_t v);
std::string digest_hex(std::string_view data);

std::string hex_encode(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
bool is_identifier(std::string_view s);

// Generic toolkit error with a stable kind tag.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

}  // namespace pfv

#endif
