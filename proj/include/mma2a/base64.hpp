#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mma2a::base64 {

/// Standard alphabet, `=` padding.
std::string encode(std::span<const std::uint8_t> bytes);

/// Strict decode: rejects bad characters, bad length and misplaced padding.
std::optional<std::vector<std::uint8_t>> decode(std::string_view text);

}  // namespace mma2a::base64
