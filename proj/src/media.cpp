#include "mma2a/media.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include <zlib.h>

#include "mma2a/error.hpp"

namespace mma2a::media {
namespace {

void put_u16le(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32be(Bytes& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(Bytes& out, const char (&tag)[5]) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get_u16le(std::span<const std::uint8_t> b, std::size_t at) { return b[at] | (b[at + 1] << 8); }

std::uint32_t get_u32le(std::span<const std::uint8_t> b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint32_t get_u32be(std::span<const std::uint8_t> b, std::size_t at) {
  return (static_cast<std::uint32_t>(b[at]) << 24) | (b[at + 1] << 16) | (b[at + 2] << 8) | b[at + 3];
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

Bytes wav_with_samples(std::string_view transcript, std::size_t samples) {
  // ICMT payload is NUL-terminated and padded to an even length.
  std::string comment(transcript);
  comment.push_back('\0');
  if (comment.size() % 2) comment.push_back('\0');
  const std::uint32_t info_size = 4 + 8 + static_cast<std::uint32_t>(comment.size());
  const std::uint32_t data_size = static_cast<std::uint32_t>(samples * 2);
  const std::uint32_t riff_size = 4 + (8 + 16) + (8 + info_size) + (8 + data_size);

  Bytes out;
  out.reserve(riff_size + 8);
  put_tag(out, "RIFF");
  put_u32le(out, riff_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, 1);  // mono
  put_u32le(out, kWavSampleRate);
  put_u32le(out, kWavSampleRate * 2);
  put_u16le(out, 2);
  put_u16le(out, 16);
  put_tag(out, "LIST");
  put_u32le(out, info_size);
  put_tag(out, "INFO");
  put_tag(out, "ICMT");
  put_u32le(out, static_cast<std::uint32_t>(comment.size()));
  out.insert(out.end(), comment.begin(), comment.end());
  put_tag(out, "data");
  put_u32le(out, data_size);
  out.resize(out.size() + data_size, 0);
  return out;
}

void put_png_chunk(Bytes& out, const char (&type)[5], std::span<const std::uint8_t> data) {
  put_u32be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  put_tag(out, type);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32be(out, static_cast<std::uint32_t>(crc));
}

Bytes png_with_size(std::string_view caption, std::uint64_t seed, std::uint32_t width, std::uint32_t height,
                    int level) {
  Bytes raw;
  raw.reserve(static_cast<std::size_t>(height) * (1 + width * 3));
  for (std::uint32_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    for (std::uint32_t x = 0; x < width; ++x) {
      raw.push_back(static_cast<std::uint8_t>((x * 7 + seed) & 0xff));
      raw.push_back(static_cast<std::uint8_t>((y * 5 + (seed >> 8)) & 0xff));
      raw.push_back(static_cast<std::uint8_t>(((x ^ y) + (seed >> 16)) & 0xff));
    }
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  Bytes packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), level) != Z_OK) {
    throw Error(ErrorCode::structural, "zlib compression failed");
  }
  packed.resize(packed_size);

  Bytes out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  Bytes ihdr;
  put_u32be(ihdr, width);
  put_u32be(ihdr, height);
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit RGB, deflate, no filter, no interlace
  put_png_chunk(out, "IHDR", ihdr);
  Bytes text(std::string_view("Description").begin(), std::string_view("Description").end());
  text.push_back(0);
  text.insert(text.end(), caption.begin(), caption.end());
  put_png_chunk(out, "tEXt", text);
  put_png_chunk(out, "IDAT", packed);
  put_png_chunk(out, "IEND", {});
  return out;
}

}  // namespace

Bytes make_wav(std::string_view transcript, std::size_t min_size) {
  Bytes out = wav_with_samples(transcript, kDefaultWavSamples);
  if (out.size() >= min_size) return out;
  const std::size_t extra_samples = (min_size - out.size() + 1) / 2;
  return wav_with_samples(transcript, kDefaultWavSamples + extra_samples);
}

std::optional<WavInfo> parse_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) return std::nullopt;
  if (get_u32le(b, 4) + 8 > b.size()) return std::nullopt;
  WavInfo info;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::uint32_t size = get_u32le(b, at + 4);
    const std::size_t body = at + 8;
    if (body + size > b.size()) return std::nullopt;
    if (tag_is(b, at, "fmt ") && size >= 16) {
      info.channels = static_cast<std::uint16_t>(get_u16le(b, body + 2));
      info.sample_rate = get_u32le(b, body + 4);
      info.bits_per_sample = static_cast<std::uint16_t>(get_u16le(b, body + 14));
      have_fmt = true;
    } else if (tag_is(b, at, "data")) {
      info.data_bytes = size;
      have_data = true;
    } else if (tag_is(b, at, "LIST") && size >= 4 && tag_is(b, body, "INFO")) {
      std::size_t sub = body + 4;
      while (sub + 8 <= body + size) {
        const std::uint32_t sub_size = get_u32le(b, sub + 4);
        if (sub + 8 + sub_size > body + size) return std::nullopt;
        if (tag_is(b, sub, "ICMT")) {
          std::string text(reinterpret_cast<const char*>(b.data() + sub + 8), sub_size);
          text.erase(std::find(text.begin(), text.end(), '\0'), text.end());
          info.comment = std::move(text);
        }
        sub += 8 + sub_size + (sub_size & 1);
      }
    }
    at = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) return std::nullopt;
  return info;
}

Bytes make_png(std::string_view caption, std::uint64_t seed, std::size_t min_size) {
  if (min_size == 0) return png_with_size(caption, seed, 32, 32, 9);
  constexpr std::uint32_t kWidth = 256;
  constexpr std::size_t kRow = 1 + kWidth * 3;
  const auto height = static_cast<std::uint32_t>(min_size / kRow + 1);
  return png_with_size(caption, seed, kWidth, height, 0);
}

std::optional<PngInfo> parse_png(std::span<const std::uint8_t> b) {
  static constexpr std::array<std::uint8_t, 8> kSig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (b.size() < 8 || !std::equal(kSig.begin(), kSig.end(), b.begin())) return std::nullopt;
  PngInfo info;
  bool have_ihdr = false;
  bool have_iend = false;
  std::size_t at = 8;
  while (at + 12 <= b.size()) {
    const std::uint32_t size = get_u32be(b, at);
    if (at + 12 + size > b.size()) return std::nullopt;
    const uLong crc = crc32(0L, b.data() + at + 4, 4 + size);
    if (crc != get_u32be(b, at + 8 + size)) return std::nullopt;
    const std::size_t body = at + 8;
    if (tag_is(b, at + 4, "IHDR") && size == 13) {
      info.width = get_u32be(b, body);
      info.height = get_u32be(b, body + 4);
      have_ihdr = true;
    } else if (tag_is(b, at + 4, "tEXt")) {
      const auto* start = reinterpret_cast<const char*>(b.data() + body);
      std::string chunk(start, size);
      const auto nul = chunk.find('\0');
      if (nul != std::string::npos) info.text[chunk.substr(0, nul)] = chunk.substr(nul + 1);
    } else if (tag_is(b, at + 4, "IEND")) {
      have_iend = true;
      break;
    }
    at += 12 + size;
  }
  if (!have_ihdr || !have_iend) return std::nullopt;
  return info;
}

std::optional<std::string> embedded_text(std::string_view mime_type, std::span<const std::uint8_t> bytes) {
  if (mime_type.substr(0, 6) == "audio/") {
    if (auto wav = parse_wav(bytes)) return wav->comment;
    return std::nullopt;
  }
  if (mime_type.substr(0, 6) == "image/") {
    if (auto png = parse_png(bytes)) {
      if (auto it = png->text.find("Description"); it != png->text.end()) return it->second;
    }
  }
  return std::nullopt;
}

}  // namespace mma2a::media
