#pragma once

// Minimal RIFF/WAVE reader and writer: 16-bit PCM and 32-bit IEEE float,
// including WAVE_FORMAT_EXTENSIBLE headers carrying either subformat.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "declip/signal.hpp"

namespace declip {

enum class SampleFormat { Pcm16, Float32 };

enum class ChannelMode { First, Downmix };

struct WavData {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;
  SampleFormat format = SampleFormat::Float32;
};

namespace detail {

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

inline WavData parse_wav(const std::vector<unsigned char>& bytes) {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error("not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + len > bytes.size()) throw Error("malformed fmt chunk");
      tag = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (tag == kFormatExtensible) {
        if (len < 40) throw Error("malformed extensible fmt chunk");
        tag = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error("data chunk before fmt chunk");
      data = chunk + 8;
      // Tolerate a data length that overruns the file (streamed writers).
      data_len = std::min<std::size_t>(len, bytes.size() - body);
      break;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw Error("missing fmt chunk");
  if (data == nullptr) throw Error("missing data chunk");
  if (channels == 0 || rate == 0) throw Error("invalid channel count or sample rate");

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.channels.assign(channels, {});
  std::size_t width = 0;
  if (tag == kFormatPcm && bits == 16) {
    out.format = SampleFormat::Pcm16;
    width = 2;
  } else if (tag == kFormatFloat && bits == 32) {
    out.format = SampleFormat::Float32;
    width = 4;
  } else {
    throw Error("unsupported WAV encoding (format " + std::to_string(tag) + ", " + std::to_string(bits) +
                " bits); only 16-bit PCM and 32-bit float are supported");
  }
  const std::size_t frames = data_len / (width * channels);
  for (auto& ch : out.channels) ch.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * width;
      double v;
      if (width == 2) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        const std::uint32_t bitsv = read_u32(p);
        float f;
        std::memcpy(&f, &bitsv, 4);
        v = f;
      }
      out.channels[c][i] = v;
    }
  }
  return out;
}

inline WavData read_wav_channels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

/// Mono view of decoded channels. Channel 0 is taken unless `mode` is
/// Downmix, which averages all channels.
inline Signal to_mono(WavData w, ChannelMode mode = ChannelMode::First) {
  Signal s;
  s.sample_rate = w.sample_rate;
  if (mode == ChannelMode::First || w.channels.size() == 1) {
    s.samples = std::move(w.channels.front());
  } else {
    const std::size_t n = w.channels.front().size();
    s.samples.assign(n, 0.0);
    for (const auto& ch : w.channels)
      for (std::size_t i = 0; i < n; ++i) s.samples[i] += ch[i];
    for (double& v : s.samples) v /= static_cast<double>(w.channels.size());
  }
  return s;
}

inline Signal read_wav(const std::filesystem::path& path, ChannelMode mode = ChannelMode::First) {
  return to_mono(read_wav_channels(path), mode);
}

/// The value `v` reads back as after a round trip through `format`.
inline double stored_value(double v, SampleFormat format) {
  if (format == SampleFormat::Float32) return static_cast<float>(v);
  const long q = std::clamp(std::lround(std::clamp(v, -1.0, 1.0) * 32768.0), -32768L, 32767L);
  return static_cast<double>(q) / 32768.0;
}

inline std::string encode_wav(const Signal& s, SampleFormat format) {
  using namespace detail;
  const std::uint16_t width = format == SampleFormat::Pcm16 ? 2 : 4;
  const auto data_len = static_cast<std::uint32_t>(s.size() * width);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(s.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(s.sample_rate) * width);
  put_u16(out, width);
  put_u16(out, static_cast<std::uint16_t>(8 * width));
  out += "data";
  put_u32(out, data_len);
  for (double v : s.samples) {
    if (format == SampleFormat::Pcm16) {
      const long q = std::lround(std::clamp(v, -1.0, 1.0) * 32768.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t b;
      std::memcpy(&b, &f, 4);
      put_u32(out, b);
    }
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, const Signal& s,
                      SampleFormat format = SampleFormat::Float32) {
  validate(s);
  const std::string bytes = encode_wav(s, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace declip
