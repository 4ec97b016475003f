#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>

#include "wildcut/audio_io.h"
#include "wildcut/error.h"

namespace wildcut {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

float read_sample(const unsigned char* p, const FmtChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    if (fmt.bits == 32) {
      float v;
      std::uint32_t u = le32(p);
      std::memcpy(&v, &u, sizeof v);
      return v;
    }
    std::uint64_t u = static_cast<std::uint64_t>(le32(p)) |
                      (static_cast<std::uint64_t>(le32(p + 4)) << 32);
    double v;
    std::memcpy(&v, &u, sizeof v);
    return static_cast<float>(v);
  }
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0f;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0f;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>((p[0] << 8) | (p[1] << 16) |
                                                 (static_cast<std::uint32_t>(p[2]) << 24)) >>
                       8;
      return static_cast<float>(v / 8388608.0);
    }
    default:
      return static_cast<float>(static_cast<std::int32_t>(le32(p)) /
                                2147483648.0);
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

void write_header(std::FILE* f, std::uint16_t format, std::uint16_t bits,
                  int sample_rate, std::uint32_t data_bytes) {
  auto put16 = [f](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>(v >> 8)};
    std::fwrite(b, 1, 2, f);
  };
  auto put32 = [f](std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    std::fwrite(b, 1, 4, f);
  };
  const std::uint16_t block_align = bits / 8;
  std::fwrite("RIFF", 1, 4, f);
  put32(36 + data_bytes);
  std::fwrite("WAVEfmt ", 1, 8, f);
  put32(16);
  put16(format);
  put16(1);
  put32(static_cast<std::uint32_t>(sample_rate));
  put32(static_cast<std::uint32_t>(sample_rate) * block_align);
  put16(block_align);
  put16(bits);
  std::fwrite("data", 1, 4, f);
  put32(data_bytes);
}

std::unique_ptr<std::FILE, FileCloser> open_for_write(
    const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

}  // namespace

RawAudio decode_wav_bytes(std::span<const unsigned char> bytes,
                          const std::string& name) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DecodeError(name + ": not a RIFF/WAVE file");
  }
  FmtChunk fmt;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) {
        throw DecodeError(fmt::format("{}: truncated fmt chunk (read {} of {} bytes)",
                                      name, bytes.size() - std::min(body, bytes.size()), size));
      }
      const unsigned char* p = bytes.data() + body;
      fmt.format = le16(p);
      fmt.channels = le16(p + 2);
      fmt.sample_rate = le32(p + 4);
      fmt.bits = le16(p + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 26 || body + 26 > bytes.size()) {
          throw DecodeError(name + ": truncated WAVE_FORMAT_EXTENSIBLE header");
        }
        fmt.format = le16(p + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw DecodeError(name + ": data chunk before fmt chunk");
      if (fmt.channels == 0 || fmt.sample_rate == 0) {
        throw DecodeError(name + ": zero channels or sample rate");
      }
      const bool supported =
          (fmt.format == kFormatPcm &&
           (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32)) ||
          (fmt.format == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64));
      if (!supported) {
        throw DecodeError(fmt::format("{}: unsupported WAV encoding (format {}, {} bits)",
                                      name, fmt.format, fmt.bits));
      }
      const std::size_t available = bytes.size() - body;
      // 0xFFFFFFFF is written by some streaming encoders for "unknown".
      if (size != 0xFFFFFFFFu && size > available) {
        throw DecodeError(fmt::format("{}: truncated data chunk (read {} of {} bytes)",
                                      name, available, size));
      }
      const std::size_t data_bytes = size == 0xFFFFFFFFu ? available : size;
      const std::size_t bytes_per_sample = fmt.bits / 8;
      const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
      const std::size_t frames = data_bytes / frame_bytes;
      if (frames == 0) throw DecodeError(name + ": empty audio payload");
      RawAudio raw;
      raw.sample_rate = static_cast<int>(fmt.sample_rate);
      raw.channels.assign(fmt.channels, std::vector<float>(frames));
      const unsigned char* p = bytes.data() + body;
      for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < fmt.channels; ++c) {
          raw.channels[c][i] = read_sample(p, fmt);
          p += bytes_per_sample;
        }
      }
      return raw;
    }
    pos = body + size + (size & 1);
  }
  throw DecodeError(fmt::format("{}: no data chunk found (read {} bytes)", name,
                                bytes.size()));
}

void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const float> samples, int sample_rate) {
  auto f = open_for_write(path);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  write_header(f.get(), kFormatPcm, 16, sample_rate, data_bytes);
  std::vector<unsigned char> buf(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const float x = std::clamp(samples[i], -1.0f, 1.0f);
    const auto v = static_cast<std::int16_t>(std::lrint(x * 32767.0f));
    const auto u = static_cast<std::uint16_t>(v);
    buf[2 * i] = static_cast<unsigned char>(u & 0xFF);
    buf[2 * i + 1] = static_cast<unsigned char>(u >> 8);
  }
  if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size()) {
    throw IoError("short write on " + path.string());
  }
}

void write_wav_float(const std::filesystem::path& path,
                     std::span<const float> samples, int sample_rate) {
  auto f = open_for_write(path);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  write_header(f.get(), kFormatFloat, 32, sample_rate, data_bytes);
  // Host is little endian on every supported platform.
  static_assert(sizeof(float) == 4);
  if (std::fwrite(samples.data(), 4, samples.size(), f.get()) != samples.size()) {
    throw IoError("short write on " + path.string());
  }
}

}  // namespace wildcut
