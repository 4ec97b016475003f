#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "fixtures.h"
#include "wildcut/audio_io.h"
#include "wildcut/error.h"

using namespace wildcut;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(WILDCUT_TEST_DATA) / "audio";

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Minimal RIFF/WAVE image with an arbitrary format tag and payload.
std::string wav_image(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& data) {
  std::string s = "RIFF";
  put32(s, static_cast<std::uint32_t>(36 + data.size()));
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, format);
  put16(s, channels);
  put32(s, rate);
  put32(s, rate * channels * bits / 8);
  put16(s, static_cast<std::uint16_t>(channels * bits / 8));
  put16(s, bits);
  s += "data";
  put32(s, static_cast<std::uint32_t>(data.size()));
  return s + data;
}

}  // namespace

TEST(Decode, WavStereoFixture) {
  const RawAudio a = decode_audio(kData / "test.wav");
  EXPECT_EQ(a.sample_rate, 22050);
  EXPECT_EQ(a.num_channels(), 2u);
  EXPECT_EQ(a.num_frames(), 21393u);
}

TEST(Decode, CompressedContainersMatchKnownLengths) {
  // Durations measured with an independent decoder. The flac file is the
  // wav re-encoded; mp3 and ogg hold a longer recording.
  const std::pair<const char*, double> cases[] = {
      {"test.flac", 0.970204}, {"test.mp3", 10.0833}, {"test.ogg", 10.016054}};
  for (const auto& [name, seconds] : cases) {
    const RawAudio a = decode_audio(kData / name);
    EXPECT_EQ(a.sample_rate, 22050) << name;
    EXPECT_EQ(a.num_channels(), 2u) << name;
    // mp3 encoder delay and padding shift the decoded length slightly.
    EXPECT_NEAR(a.duration_s(), seconds, 0.1) << name;
  }
  const RawAudio wav = decode_audio(kData / "test.wav");
  const RawAudio flac = decode_audio(kData / "test.flac");
  EXPECT_EQ(flac.num_frames(), wav.num_frames());
}

TEST(Decode, DetectsContainerFromBytesNotExtension) {
  fixtures::TempDir dir;
  fs::copy_file(kData / "test.flac", dir / "mislabelled.wav");
  const RawAudio a = decode_audio(dir / "mislabelled.wav");
  EXPECT_GT(a.num_frames(), 0u);
}

TEST(Decode, Int16FullScaleMapsToMinusOne) {
  std::string data;
  put16(data, 0x8000);
  put16(data, 0x7FFF);
  put16(data, 0);
  const RawAudio a = decode_wav_bytes(bytes_of(wav_image(1, 1, 8000, 16, data)), "mem");
  ASSERT_EQ(a.num_frames(), 3u);
  EXPECT_FLOAT_EQ(a.channels[0][0], -1.0f);
  EXPECT_NEAR(a.channels[0][1], 32767.0 / 32768.0, 1e-7);
  EXPECT_FLOAT_EQ(a.channels[0][2], 0.0f);
}

TEST(Decode, Pcm8And24AndFloat) {
  {
    const std::string data = std::string("\x00\x80\xFF", 3);
    const RawAudio a = decode_wav_bytes(bytes_of(wav_image(1, 1, 8000, 8, data)), "u8");
    EXPECT_FLOAT_EQ(a.channels[0][0], -1.0f);
    EXPECT_FLOAT_EQ(a.channels[0][1], 0.0f);
  }
  {
    const std::string data = std::string("\x00\x00\x80\x00\x00\x40", 6);
    const RawAudio a = decode_wav_bytes(bytes_of(wav_image(1, 1, 8000, 24, data)), "s24");
    EXPECT_FLOAT_EQ(a.channels[0][0], -1.0f);
    EXPECT_FLOAT_EQ(a.channels[0][1], 0.5f);
  }
  {
    std::string data(8, '\0');
    const float v[2] = {0.25f, -0.75f};
    std::memcpy(data.data(), v, 8);
    const RawAudio a = decode_wav_bytes(bytes_of(wav_image(3, 2, 16000, 32, data)), "f32");
    ASSERT_EQ(a.num_channels(), 2u);
    EXPECT_FLOAT_EQ(a.channels[0][0], 0.25f);
    EXPECT_FLOAT_EQ(a.channels[1][0], -0.75f);
  }
}

TEST(Decode, RejectsGarbageTruncatedAndEmpty) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "noise.wav", "definitely not audio");
  EXPECT_THROW(decode_audio(dir / "noise.wav"), DecodeError);
  fixtures::write_file(dir / "empty.wav", "");
  EXPECT_THROW(decode_audio(dir / "empty.wav"), DecodeError);
  const std::string img = wav_image(1, 1, 8000, 16, std::string(2, '\0'));
  EXPECT_THROW(decode_wav_bytes(bytes_of(img.substr(0, 30)), "cut"), DecodeError);
  EXPECT_THROW(decode_wav_bytes(bytes_of(wav_image(1, 1, 8000, 16, "")), "nodata"), DecodeError);
  EXPECT_THROW(decode_audio(dir / "missing.wav"), DecodeError);
}

TEST(Encode, Pcm16RoundTripWithinOneStep) {
  fixtures::TempDir dir;
  std::vector<float> s = {0.0f, 0.5f, -0.5f, 1.5f, -1.5f, 0.123456f};
  write_wav_pcm16(dir / "x.wav", s, 24000);
  const RawAudio a = decode_audio(dir / "x.wav");
  ASSERT_EQ(a.num_frames(), s.size());
  EXPECT_EQ(a.sample_rate, 24000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double want = std::clamp(static_cast<double>(s[i]), -1.0, 1.0);
    EXPECT_NEAR(a.channels[0][i], want, 1.0 / 32767.0) << i;
  }
}

TEST(Encode, FloatIsExact) {
  fixtures::TempDir dir;
  std::vector<float> s = {0.1f, -0.2f, 0.30000001f};
  write_wav_float(dir / "f.wav", s, 24000);
  const RawAudio a = decode_audio(dir / "f.wav");
  EXPECT_EQ(a.channels[0], s);
}
