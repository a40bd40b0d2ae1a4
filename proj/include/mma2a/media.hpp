#pragma once

// Deterministic placeholder media. The WAV carries its transcript in a
// LIST/INFO/ICMT chunk and the PNG carries its caption in a tEXt chunk with
// keyword "Description", so the mock transcoders can work from bytes alone.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mma2a/a2a.hpp"

namespace mma2a::media {

inline constexpr std::uint32_t kWavSampleRate = 8000;
inline constexpr std::size_t kDefaultWavSamples = 2000;

struct WavInfo {
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  std::size_t data_bytes = 0;
  std::optional<std::string> comment;
};

/// 8 kHz mono 16-bit PCM silence, grown until the file is at least `min_size` bytes.
Bytes make_wav(std::string_view transcript, std::size_t min_size = 0);
std::optional<WavInfo> parse_wav(std::span<const std::uint8_t> bytes);

struct PngInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::map<std::string, std::string> text;
};

/// RGB image whose pixel pattern depends on `seed`; grown until the file is
/// at least `min_size` bytes.
Bytes make_png(std::string_view caption, std::uint64_t seed, std::size_t min_size = 0);
/// Validates signature and chunk CRCs.
std::optional<PngInfo> parse_png(std::span<const std::uint8_t> bytes);

/// Transcript of a WAV (audio/*) or caption of a PNG (image/*), if present.
std::optional<std::string> embedded_text(std::string_view mime_type, std::span<const std::uint8_t> bytes);

}  // namespace mma2a::media
