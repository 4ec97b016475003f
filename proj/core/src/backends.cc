#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wildcut/backends.h"
#include "wildcut/error.h"

namespace wildcut {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kMock: return "mock";
    case BackendKind::kReference: return "reference";
    case BackendKind::kWorker: return "worker";
  }
  return "unknown";
}

std::optional<BackendKind> backend_kind_from_string(std::string_view name) {
  for (BackendKind k : {BackendKind::kMock, BackendKind::kReference, BackendKind::kWorker}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void validate(const BackendDescriptor& d) {
  const std::string stage(to_string(d.stage));
  if (d.kind == BackendKind::kWorker && d.command.empty()) {
    throw ConfigError(fmt::format("backends.{}: worker kind requires a non-empty command", stage));
  }
  if (d.kind == BackendKind::kReference && d.stage != Stage::kVad) {
    throw ConfigError(fmt::format("backends.{}: only vad has a reference backend", stage));
  }
  if (d.concurrency_slots < 1) throw ConfigError(fmt::format("backends.{}: concurrency_slots must be >= 1", stage));
  if (d.processes < 1) throw ConfigError(fmt::format("backends.{}: processes must be >= 1", stage));
  if (d.batch_size < 1) throw ConfigError(fmt::format("backends.{}: batch_size must be >= 1", stage));
  if (d.max_retries < 0) throw ConfigError(fmt::format("backends.{}: max_retries must be >= 0", stage));
  if (!(d.request_timeout_s > 0)) throw ConfigError(fmt::format("backends.{}: request_timeout_s must be > 0", stage));
  if (!(d.handshake_timeout_s > 0)) throw ConfigError(fmt::format("backends.{}: handshake_timeout_s must be > 0", stage));
  if (d.ping_interval_s < 0) throw ConfigError(fmt::format("backends.{}: ping_interval_s must be >= 0", stage));
  static constexpr std::string_view kFlavors[] = {"auto", "fixture", "synthetic", "identity", "single"};
  if (std::find(std::begin(kFlavors), std::end(kFlavors), d.flavor) == std::end(kFlavors)) {
    throw ConfigError(fmt::format("backends.{}: unknown mock flavor '{}'", stage, d.flavor));
  }
}

BackendDescriptor default_descriptor(Stage stage) {
  BackendDescriptor d;
  d.stage = stage;
  d.kind = stage == Stage::kVad ? BackendKind::kReference : BackendKind::kMock;
  return d;
}

BackendSet make_backends(const std::vector<BackendDescriptor>& descriptors,
                         const VadParams& vad_params) {
  std::vector<BackendDescriptor> by_stage;
  for (Stage s : kAllStages) by_stage.push_back(default_descriptor(s));
  for (const auto& d : descriptors) {
    validate(d);
    by_stage[static_cast<std::size_t>(d.stage)] = d;
  }

  BackendSet set;
  for (const auto& d : by_stage) {
    // Worker construction may fail; optionally fall back to the mock.
    auto build = [&](auto make_worker, auto make_mock) {
      if (d.kind != BackendKind::kWorker) return make_mock();
      try {
        auto w = make_worker(d);
        set.needs_files = true;
        return w;
      } catch (const BackendUnavailable& e) {
        if (!d.fallback_to_mock) throw;
        spdlog::warn("{} worker unavailable ({}); using the mock backend", to_string(d.stage), e.what());
        return make_mock();
      }
    };
    switch (d.stage) {
      case Stage::kSeparate:
        set.separator = build(make_worker_separator, [&] { return make_mock_separator(d); });
        break;
      case Stage::kDiarize:
        set.diarizer = build(make_worker_diarizer, [&] { return make_mock_diarizer(d); });
        break;
      case Stage::kVad:
        set.vad = build(make_worker_vad, [&]() -> std::unique_ptr<VoiceDetector> {
          if (d.kind == BackendKind::kMock) return make_mock_vad(d, vad_params);
          return make_reference_vad(vad_params);
        });
        break;
      case Stage::kAsr:
        set.transcriber = build(make_worker_transcriber, [&] { return make_mock_transcriber(d); });
        break;
      case Stage::kQuality:
        set.quality = build(make_worker_quality, [&] { return make_mock_quality(d); });
        break;
    }
  }
  return set;
}

}  // namespace wildcut
