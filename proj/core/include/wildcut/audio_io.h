#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace wildcut {

// Decoded audio before standardization. Integer PCM is scaled to [-1, 1] by
// the type's maximum magnitude (so int16 -32768 maps to exactly -1.0).
struct RawAudio {
  int sample_rate = 0;
  std::vector<std::vector<float>> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(num_frames()) / sample_rate
                           : 0.0;
  }
};

// Decodes WAV (PCM 8/16/24/32-bit, IEEE float 32/64, extensible), FLAC,
// MP3 or Ogg Vorbis. The container is detected from the leading bytes, not
// the file extension. Throws DecodeError for unsupported, truncated or empty
// input.
RawAudio decode_audio(const std::filesystem::path& path);

// Parses a WAV image held in memory. `name` only decorates error messages.
RawAudio decode_wav_bytes(std::span<const unsigned char> bytes,
                          const std::string& name);

// RIFF/WAVE, PCM 16-bit little endian, mono. Samples are clamped to [-1, 1]
// and rounded to the nearest integer step of 1/32767.
void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const float> samples, int sample_rate);

// RIFF/WAVE, IEEE float 32-bit, mono. Used for intermediate files.
void write_wav_float(const std::filesystem::path& path,
                     std::span<const float> samples, int sample_rate);

}  // namespace wildcut
