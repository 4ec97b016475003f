#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "codec_bridge.h"
#include "wildcut/audio_io.h"
#include "wildcut/error.h"

namespace wildcut {
namespace {

enum class Container { kWav, kFlac, kMp3, kOgg, kUnknown };

Container sniff(std::span<const unsigned char> head) {
  auto starts = [&](const char* magic, std::size_t offset = 0) {
    const std::size_t n = std::strlen(magic);
    return head.size() >= offset + n &&
           std::memcmp(head.data() + offset, magic, n) == 0;
  };
  if (starts("RIFF") && starts("WAVE", 8)) return Container::kWav;
  if (starts("fLaC")) return Container::kFlac;
  if (starts("OggS")) return Container::kOgg;
  if (starts("ID3")) return Container::kMp3;
  // Bare MPEG audio frame sync.
  if (head.size() >= 2 && head[0] == 0xFF && (head[1] & 0xE0) == 0xE0) {
    return Container::kMp3;
  }
  return Container::kUnknown;
}

RawAudio decode_compressed(const std::filesystem::path& path, int codec) {
  float* interleaved = nullptr;
  unsigned long long frames = 0;
  unsigned channels = 0;
  unsigned rate = 0;
  char err[256] = {0};
  if (wildcut_decode_compressed(path.c_str(), codec, &interleaved, &frames,
                                &channels, &rate, err, sizeof err) != 0) {
    throw DecodeError(path.string() + ": " + err);
  }
  std::unique_ptr<float, void (*)(float*)> guard(interleaved,
                                                 &wildcut_free_samples);
  if (frames == 0) throw DecodeError(path.string() + ": empty audio payload");
  if (channels == 0 || rate == 0) {
    throw DecodeError(path.string() + ": zero channels or sample rate");
  }
  RawAudio raw;
  raw.sample_rate = static_cast<int>(rate);
  raw.channels.assign(channels, std::vector<float>(frames));
  for (unsigned long long i = 0; i < frames; ++i) {
    for (unsigned c = 0; c < channels; ++c) {
      raw.channels[c][i] = interleaved[i * channels + c];
    }
  }
  return raw;
}

}  // namespace

RawAudio decode_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.empty()) throw DecodeError(path.string() + ": empty file");
  switch (sniff(bytes)) {
    case Container::kWav:
      return decode_wav_bytes(bytes, path.string());
    case Container::kFlac:
      return decode_compressed(path, WILDCUT_CODEC_FLAC);
    case Container::kMp3:
      return decode_compressed(path, WILDCUT_CODEC_MP3);
    case Container::kOgg:
      return decode_compressed(path, WILDCUT_CODEC_VORBIS);
    case Container::kUnknown:
      break;
  }
  throw DecodeError(path.string() + ": unsupported container");
}

}  // namespace wildcut
