#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wildcut/protocol.h"
#include "wildcut/types.h"
#include "wildcut/vad.h"

namespace wildcut {

enum class BackendKind { kMock, kReference, kWorker };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> backend_kind_from_string(std::string_view name);

struct BackendDescriptor {
  Stage stage = Stage::kAsr;
  BackendKind kind = BackendKind::kMock;
  // Mock flavour: "auto" (sidecar fixture if present, else synthetic),
  // "fixture" (sidecar required), "synthetic", "identity" or "single".
  std::string flavor = "auto";
  std::vector<std::string> command;  // argv, worker kind only
  int concurrency_slots = 1;
  int processes = 1;
  double request_timeout_s = 300.0;
  int max_retries = 2;
  int batch_size = 16;  // ASR only
  double handshake_timeout_s = 30.0;
  double ping_interval_s = 60.0;
  // Use the mock backend when a worker cannot be started.
  bool fallback_to_mock = false;
};

// Throws ConfigError listing the first violated invariant.
void validate(const BackendDescriptor& desc);

// Default descriptor per stage: reference VAD, mocks elsewhere.
BackendDescriptor default_descriptor(Stage stage);

// Audio handed to a backend. `audio` is the file the backend reads; workers
// only see paths, so engine and worker must share a filesystem. `source` and
// the span locate the clip on the original input timeline, which fixture
// mocks use to find sidecar files. `samples`, when non-empty, is an
// in-memory view of `audio` that in-process backends may use instead.
struct AudioRef {
  std::filesystem::path audio;
  std::filesystem::path source;
  double start_s = 0.0;
  double end_s = 0.0;
  std::span<const float> samples;
  int sample_rate = kStandardSampleRate;
};

struct AsrResult {
  std::string text;
  std::string language;
  double lang_confidence = 0.0;

  bool operator==(const AsrResult&) const = default;
};

// Per-item outcome inside a batch.
template <typename T>
struct ItemResult {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

class Separator {
 public:
  virtual ~Separator() = default;
  // Returns the path of the vocals-only audio. Identity backends may return
  // the input path unchanged.
  virtual std::filesystem::path separate(const AudioRef& input,
                                         const std::filesystem::path& out_path) = 0;
};

class Diarizer {
 public:
  virtual ~Diarizer() = default;
  // Turns may overlap; post-processing happens downstream.
  virtual std::vector<SpeakerTurn> diarize(const AudioRef& vocals, double duration_s) = 0;
};

class VoiceDetector {
 public:
  virtual ~VoiceDetector() = default;
  virtual std::vector<TimeSpan> detect(const AudioRef& vocals) = 0;
};

class Transcriber {
 public:
  virtual ~Transcriber() = default;
  // One result per ref, in order. Individual failures do not fail the batch.
  virtual std::vector<ItemResult<AsrResult>> transcribe_batch(
      std::span<const AudioRef> refs, const std::optional<std::string>& language_hint) = 0;
  virtual int batch_size() const = 0;
};

class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual double score(const AudioRef& clip) = 0;
};

struct BackendSet {
  std::unique_ptr<Separator> separator;
  std::unique_ptr<Diarizer> diarizer;
  std::unique_ptr<VoiceDetector> vad;
  std::unique_ptr<Transcriber> transcriber;
  std::unique_ptr<QualityScorer> quality;

  // True when any stage talks to a worker and therefore needs files on disk.
  bool needs_files = false;
};

// Builds every stage backend; spawns and handshakes workers. Throws
// BackendUnavailable when a worker fails and no fallback is configured.
BackendSet make_backends(const std::vector<BackendDescriptor>& descriptors,
                         const VadParams& vad_params);

// Mock backends (pure functions of their inputs and sidecar files).
std::unique_ptr<Separator> make_mock_separator(const BackendDescriptor& desc);
std::unique_ptr<Diarizer> make_mock_diarizer(const BackendDescriptor& desc);
// Sidecar regions when present, otherwise the reference detector.
std::unique_ptr<VoiceDetector> make_mock_vad(const BackendDescriptor& desc,
                                             const VadParams& params);
std::unique_ptr<VoiceDetector> make_reference_vad(const VadParams& params);
std::unique_ptr<Transcriber> make_mock_transcriber(const BackendDescriptor& desc);
std::unique_ptr<QualityScorer> make_mock_quality(const BackendDescriptor& desc);

// Worker-backed stage clients.
std::unique_ptr<Separator> make_worker_separator(const BackendDescriptor& desc);
std::unique_ptr<Diarizer> make_worker_diarizer(const BackendDescriptor& desc);
std::unique_ptr<VoiceDetector> make_worker_vad(const BackendDescriptor& desc);
std::unique_ptr<Transcriber> make_worker_transcriber(const BackendDescriptor& desc);
std::unique_ptr<QualityScorer> make_worker_quality(const BackendDescriptor& desc);

// 1 + 4 * (1 - spectral flatness), clamped to [1, 5]. Flatness is the
// geometric over arithmetic mean of the Hann-windowed power spectrum,
// averaged over 512-sample frames and restricted to bins between DC and
// 8 kHz (or Nyquist, whichever is lower); digital silence has flatness 1.
double synthetic_quality_score(std::span<const float> samples, int sample_rate = 24000);
double spectral_flatness(std::span<const float> samples, int sample_rate = 24000);

}  // namespace wildcut
