// Stage clients that forward to a WorkerPool. Payload schemas are described
// in docs/protocol.md.

#include <fmt/format.h>

#include "wildcut/backends.h"
#include "wildcut/error.h"
#include "wildcut/worker.h"

namespace wildcut {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

WorkerOptions options_from(const BackendDescriptor& d) {
  WorkerOptions o;
  o.stage = d.stage;
  o.command = d.command;
  o.handshake_timeout_s = d.handshake_timeout_s;
  o.request_timeout_s = d.request_timeout_s;
  o.max_retries = d.max_retries;
  o.concurrency_slots = d.concurrency_slots;
  o.processes = d.processes;
  o.ping_interval_s = d.ping_interval_s;
  return o;
}

json clip_json(const AudioRef& ref) {
  return json{{"audio", ref.audio.string()},
              {"source", ref.source.string()},
              {"start_s", ref.start_s},
              {"end_s", ref.end_s}};
}

// Extracts a typed field and reports schema violations as stage errors.
template <typename T>
T field(const json& j, const char* key, Stage stage) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw StageError(fmt::format("{} worker reply: bad '{}': {}", to_string(stage), key, e.what()));
  }
}

class WorkerClient {
 public:
  explicit WorkerClient(const BackendDescriptor& desc) : pool_(options_from(desc)) {}
  json call(const json& payload) { return pool_.request(payload); }
  Stage stage() const { return pool_.options().stage; }
  WorkerPool pool_;
};

class WorkerSeparator final : public Separator, WorkerClient {
 public:
  using WorkerClient::WorkerClient;
  fs::path separate(const AudioRef& input, const fs::path& out_path) override {
    const json reply = call(json{{"audio", input.audio.string()},
                                 {"out", out_path.string()},
                                 {"source", input.source.string()}});
    fs::path vocals = field<std::string>(reply, "audio", stage());
    std::error_code ec;
    if (!fs::is_regular_file(vocals, ec)) {
      throw StageError(fmt::format("separate worker returned missing file {}", vocals.string()));
    }
    return vocals;
  }
};

class WorkerDiarizer final : public Diarizer, WorkerClient {
 public:
  using WorkerClient::WorkerClient;
  std::vector<SpeakerTurn> diarize(const AudioRef& vocals, double duration_s) override {
    const json reply = call(json{{"audio", vocals.audio.string()},
                                 {"source", vocals.source.string()},
                                 {"duration_s", duration_s}});
    std::vector<SpeakerTurn> turns;
    for (const auto& t : field<json>(reply, "turns", stage())) {
      turns.push_back({field<std::string>(t, "speaker", stage()),
                       field<double>(t, "start_s", stage()), field<double>(t, "end_s", stage())});
    }
    return turns;
  }
};

class WorkerVoiceDetector final : public VoiceDetector, WorkerClient {
 public:
  using WorkerClient::WorkerClient;
  std::vector<TimeSpan> detect(const AudioRef& vocals) override {
    const json reply = call(json{{"audio", vocals.audio.string()}, {"source", vocals.source.string()}});
    std::vector<TimeSpan> regions;
    for (const auto& r : field<json>(reply, "regions", stage())) {
      if (!r.is_array() || r.size() != 2) throw StageError("vad worker reply: region must be [start, end]");
      regions.push_back({r[0].get<double>(), r[1].get<double>()});
    }
    return regions;
  }
};

class WorkerTranscriber final : public Transcriber, WorkerClient {
 public:
  WorkerTranscriber(const BackendDescriptor& desc)
      : WorkerClient(desc), batch_size_(desc.batch_size) {}

  std::vector<ItemResult<AsrResult>> transcribe_batch(
      std::span<const AudioRef> refs, const std::optional<std::string>& hint) override {
    std::vector<ItemResult<AsrResult>> out;
    out.reserve(refs.size());
    for (std::size_t begin = 0; begin < refs.size(); begin += static_cast<std::size_t>(batch_size_)) {
      const auto chunk = refs.subspan(begin, std::min<std::size_t>(batch_size_, refs.size() - begin));
      auto part = request_chunk(chunk, hint);
      for (auto& item : part) out.push_back(std::move(item));
    }
    return out;
  }

  int batch_size() const override { return batch_size_; }

 private:
  std::vector<ItemResult<AsrResult>> request_chunk(std::span<const AudioRef> refs,
                                                   const std::optional<std::string>& hint) {
    json items = json::array();
    for (const auto& r : refs) items.push_back(clip_json(r));
    json payload{{"items", std::move(items)}, {"language_hint", nullptr}};
    if (hint) payload["language_hint"] = *hint;

    std::vector<ItemResult<AsrResult>> out(refs.size());
    json reply;
    try {
      reply = call(payload);
    } catch (const StageError& e) {
      for (auto& item : out) item.error = e.what();
      return out;
    }
    const json results = reply.value("results", json());
    if (!results.is_array() || results.size() != refs.size()) {
      for (auto& item : out) {
        item.error = fmt::format("asr worker returned {} results for {} items",
                                 results.is_array() ? results.size() : 0, refs.size());
      }
      return out;
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const json& r = results[i];
      if (!r.value("ok", true)) {
        out[i].error = r.value("error", std::string("asr item failed"));
        continue;
      }
      try {
        AsrResult a{r.at("text").get<std::string>(), r.at("language").get<std::string>(),
                    r.at("lang_confidence").get<double>()};
        if (!(a.lang_confidence >= 0.0 && a.lang_confidence <= 1.0)) {
          out[i].error = "lang_confidence outside [0, 1]";
          continue;
        }
        out[i].value = std::move(a);
      } catch (const json::exception& e) {
        out[i].error = std::string("malformed asr result: ") + e.what();
      }
    }
    return out;
  }

  int batch_size_;
};

class WorkerQualityScorer final : public QualityScorer, WorkerClient {
 public:
  using WorkerClient::WorkerClient;
  double score(const AudioRef& clip) override {
    const double s = field<double>(call(clip_json(clip)), "score", stage());
    if (!(s >= 0.0 && s <= 5.0)) {
      throw StageError(fmt::format("quality worker score {} outside [0, 5]", s));
    }
    return s;
  }
};

}  // namespace

std::unique_ptr<Separator> make_worker_separator(const BackendDescriptor& desc) {
  return std::make_unique<WorkerSeparator>(desc);
}
std::unique_ptr<Diarizer> make_worker_diarizer(const BackendDescriptor& desc) {
  return std::make_unique<WorkerDiarizer>(desc);
}
std::unique_ptr<VoiceDetector> make_worker_vad(const BackendDescriptor& desc) {
  return std::make_unique<WorkerVoiceDetector>(desc);
}
std::unique_ptr<Transcriber> make_worker_transcriber(const BackendDescriptor& desc) {
  return std::make_unique<WorkerTranscriber>(desc);
}
std::unique_ptr<QualityScorer> make_worker_quality(const BackendDescriptor& desc) {
  return std::make_unique<WorkerQualityScorer>(desc);
}

}  // namespace wildcut
