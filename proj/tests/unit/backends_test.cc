#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.h"
#include "wildcut/backends.h"
#include "wildcut/error.h"
#include "wildcut/text.h"

using namespace wildcut;
namespace fs = std::filesystem;

namespace {

BackendDescriptor mock(Stage s, const std::string& flavor = "auto") {
  BackendDescriptor d = default_descriptor(s);
  d.kind = BackendKind::kMock;
  d.flavor = flavor;
  return d;
}

BackendDescriptor worker(Stage s, const std::string& mode = "ok") {
  BackendDescriptor d = default_descriptor(s);
  d.kind = BackendKind::kWorker;
  d.command = {fixtures::fake_worker(), "--stage", std::string(to_string(s)), "--mode", mode};
  d.handshake_timeout_s = 5.0;
  d.request_timeout_s = 5.0;
  d.ping_interval_s = 0;
  return d;
}

AudioRef clip(const fs::path& audio, double start, double end) {
  AudioRef r;
  r.audio = audio;
  r.source = audio;
  r.start_s = start;
  r.end_s = end;
  return r;
}

}  // namespace

TEST(Descriptor, DefaultsAndValidation) {
  EXPECT_EQ(default_descriptor(Stage::kVad).kind, BackendKind::kReference);
  EXPECT_EQ(default_descriptor(Stage::kAsr).kind, BackendKind::kMock);
  EXPECT_EQ(default_descriptor(Stage::kAsr).batch_size, 16);
  EXPECT_DOUBLE_EQ(default_descriptor(Stage::kAsr).request_timeout_s, 300.0);
  EXPECT_EQ(default_descriptor(Stage::kAsr).max_retries, 2);

  BackendDescriptor d = default_descriptor(Stage::kAsr);
  d.kind = BackendKind::kWorker;
  EXPECT_THROW(validate(d), ConfigError);  // no command
  d = default_descriptor(Stage::kAsr);
  d.kind = BackendKind::kReference;
  EXPECT_THROW(validate(d), ConfigError);
  d = default_descriptor(Stage::kAsr);
  d.concurrency_slots = 0;
  EXPECT_THROW(validate(d), ConfigError);
  d = default_descriptor(Stage::kAsr);
  d.flavor = "magic";
  EXPECT_THROW(validate(d), ConfigError);
  EXPECT_EQ(backend_kind_from_string("worker"), BackendKind::kWorker);
}

TEST(MockBackends, SidecarsWin) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "a.wav";
  fixtures::write_sine_wav(wav, 24000, 2.0, 200.0, 0.3);
  fixtures::write_file(dir / "a.wav.txt", "  hello there \n");
  fixtures::write_file(dir / "a.wav.meta.json", R"({"language":"de","lang_confidence":0.7})");
  fixtures::write_file(dir / "a.mos", "3.75");  // replaced-extension form
  fixtures::write_file(dir / "a.wav.turns.json", R"({"turns":[{"speaker":"S1","start_s":0,"end_s":1}]})");
  fixtures::write_file(dir / "a.wav.vad.json", R"({"regions":[[0.1,0.9]]})");

  auto asr = make_mock_transcriber(mock(Stage::kAsr));
  const auto out = asr->transcribe_batch(std::vector<AudioRef>{clip(wav, 0, 2)}, std::nullopt);
  ASSERT_TRUE(out.at(0).ok());
  EXPECT_EQ(out[0].value->text, "hello there");
  EXPECT_EQ(out[0].value->language, "de");
  EXPECT_DOUBLE_EQ(out[0].value->lang_confidence, 0.7);

  EXPECT_DOUBLE_EQ(make_mock_quality(mock(Stage::kQuality))->score(clip(wav, 0, 2)), 3.75);
  const auto turns = make_mock_diarizer(mock(Stage::kDiarize))->diarize(clip(wav, 0, 2), 2.0);
  ASSERT_EQ(turns.size(), 1u);
  EXPECT_EQ(turns[0].speaker_label, "S1");
  const auto regions = make_mock_vad(mock(Stage::kVad), VadParams{})->detect(clip(wav, 0, 2));
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_DOUBLE_EQ(regions[0].start_s, 0.1);
  EXPECT_EQ(make_mock_separator(mock(Stage::kSeparate))->separate(clip(wav, 0, 2), dir / "v.wav"), wav);
}

TEST(MockBackends, FixtureFlavorRequiresSidecar) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "b.wav";
  fixtures::write_sine_wav(wav, 24000, 1.0, 200.0, 0.3);
  auto asr = make_mock_transcriber(mock(Stage::kAsr, "fixture"));
  const auto out = asr->transcribe_batch(std::vector<AudioRef>{clip(wav, 0, 1)}, std::nullopt);
  EXPECT_FALSE(out.at(0).ok());
  EXPECT_THROW(make_mock_quality(mock(Stage::kQuality, "fixture"))->score(clip(wav, 0, 1)), StageError);
}

TEST(MockBackends, SyntheticTranscriptFollowsCharacterRate) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "c.wav";
  fixtures::write_sine_wav(wav, 24000, 1.0, 200.0, 0.3);
  fixtures::write_file(dir / "c.wav.fixture.json",
                       R"({"language":"zh","lang_confidence":0.9,"char_dur_s":0.1,"char_dur_jitter":0})");
  auto asr = make_mock_transcriber(mock(Stage::kAsr));
  std::vector<AudioRef> refs{clip(wav, 0, 10), clip(wav, 10, 15)};
  const auto out = asr->transcribe_batch(refs, std::nullopt);
  EXPECT_EQ(count_non_whitespace(out[0].value->text), 100u);
  EXPECT_EQ(count_non_whitespace(out[1].value->text), 50u);
  EXPECT_EQ(out[0].value->language, "zh");
  // Deterministic.
  EXPECT_EQ(asr->transcribe_batch(refs, std::nullopt)[0].value->text, out[0].value->text);
}

TEST(MockBackends, LanguageHintUsedWithoutFixture) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "d.wav";
  fixtures::write_sine_wav(wav, 24000, 1.0, 200.0, 0.3);
  auto asr = make_mock_transcriber(mock(Stage::kAsr));
  const auto out = asr->transcribe_batch(std::vector<AudioRef>{clip(wav, 0, 1)}, std::string("ko"));
  EXPECT_EQ(out.at(0).value->language, "ko");
  EXPECT_GT(out[0].value->lang_confidence, 0.0);
}

TEST(SyntheticQuality, FormulaBounds) {
  std::vector<float> silence(24000, 0.0f);
  EXPECT_DOUBLE_EQ(spectral_flatness(silence), 1.0);
  EXPECT_DOUBLE_EQ(synthetic_quality_score(silence), 1.0);

  std::vector<float> tone(24000);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 250 * i / 24000.0));
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  std::vector<float> noise(24000);
  for (auto& v : noise) v = u(rng);

  const double q_tone = synthetic_quality_score(tone);
  const double q_noise = synthetic_quality_score(noise);
  EXPECT_GT(q_tone, 4.5);
  EXPECT_LT(q_noise, 3.5);
  EXPECT_NEAR(q_noise, 1.0 + 4.0 * (1.0 - spectral_flatness(noise)), 1e-12);
  for (double q : {q_tone, q_noise}) {
    EXPECT_GE(q, 1.0);
    EXPECT_LE(q, 5.0);
  }
}

TEST(WorkerBackends, AsrBatchAlignment) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "e.wav";
  fixtures::write_sine_wav(wav, 24000, 1.0, 200.0, 0.3);
  std::vector<AudioRef> refs;
  for (int i = 0; i < 37; ++i) refs.push_back(clip(wav, i, i + 0.08 * (i + 1)));
  for (int batch : {1, 4, 16}) {
    BackendDescriptor d = worker(Stage::kAsr);
    d.batch_size = batch;
    auto asr = make_worker_transcriber(d);
    const auto out = asr->transcribe_batch(refs, std::nullopt);
    ASSERT_EQ(out.size(), refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i) {
      ASSERT_TRUE(out[i].ok()) << out[i].error;
      EXPECT_EQ(out[i].value->text.size(), i + 1) << "batch " << batch;
      EXPECT_EQ(out[i].value->language, "en");
    }
  }
}

TEST(WorkerBackends, ShortBatchFailsEveryItem) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "f.wav";
  fixtures::write_sine_wav(wav, 24000, 1.0, 200.0, 0.3);
  BackendDescriptor d = worker(Stage::kAsr, "short-batch");
  d.batch_size = 4;
  auto asr = make_worker_transcriber(d);
  const auto out = asr->transcribe_batch(std::vector<AudioRef>(3, clip(wav, 0, 1)), std::string("fr"));
  for (const auto& item : out) {
    EXPECT_FALSE(item.ok());
    EXPECT_NE(item.error.find("2 results for 3 items"), std::string::npos) << item.error;
  }
}

TEST(WorkerBackends, EachStageSpeaksItsPayload) {
  fixtures::TempDir dir;
  const fs::path wav = dir / "g.wav";
  fixtures::write_sine_wav(wav, 24000, 2.0, 200.0, 0.3);
  EXPECT_EQ(make_worker_separator(worker(Stage::kSeparate))->separate(clip(wav, 0, 2), dir / "v.wav"), wav);
  const auto turns = make_worker_diarizer(worker(Stage::kDiarize))->diarize(clip(wav, 0, 2), 2.0);
  ASSERT_EQ(turns.size(), 1u);
  EXPECT_DOUBLE_EQ(turns[0].end_s, 2.0);
  const auto regions = make_worker_vad(worker(Stage::kVad))->detect(clip(wav, 0, 2));
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_DOUBLE_EQ(make_worker_quality(worker(Stage::kQuality))->score(clip(wav, 0, 2)), 4.25);
}

TEST(WorkerBackends, UnavailableWorkerFallsBackWhenAllowed) {
  BackendDescriptor d = worker(Stage::kQuality, "exit-before-hello");
  EXPECT_THROW(make_backends({d}, VadParams{}), BackendUnavailable);
  d.fallback_to_mock = true;
  const BackendSet set = make_backends({d}, VadParams{});
  EXPECT_NE(set.quality, nullptr);
  EXPECT_FALSE(set.needs_files);
  const BackendSet with_worker = make_backends({worker(Stage::kQuality)}, VadParams{});
  EXPECT_TRUE(with_worker.needs_files);
}
