#include "wildcut/orchestrator.h"

#include <fcntl.h>
#include <glob.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "wildcut/audio_io.h"
#include "wildcut/bounded_queue.h"
#include "wildcut/error.h"
#include "wildcut/manifest.h"
#include "wildcut/source_id.h"
#include "wildcut/text.h"

namespace wildcut {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kJournalName = "journal.jsonl";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool has_glob_chars(const std::string& s) {
  return s.find_first_of("*?[") != std::string::npos;
}

fs::path common_ancestor(const std::vector<fs::path>& dirs) {
  fs::path base = dirs.front();
  for (const auto& d : dirs) {
    fs::path common;
    auto a = base.begin();
    auto b = d.begin();
    for (; a != base.end() && b != d.end() && *a == *b; ++a, ++b) common /= *a;
    base = common;
  }
  return base;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// tmp file, fsync, rename.
void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot write " + tmp.string());
    const char* p = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
      const ssize_t n = ::write(fd, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        throw IoError("write failed for " + tmp.string());
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Per-source result, persisted as <out>/parts/<source_id>.json.

struct SourcePart {
  std::string source_id;
  bool ok = true;
  std::string failure;
  double raw_duration_s = 0.0;
  std::optional<double> raw_quality;
  std::vector<std::pair<double, std::optional<double>>> unfiltered;  // duration, score
  std::vector<SegmentRecord> kept;
  std::vector<DropRecord> drops;
};

std::string encode_part(const SourcePart& p) {
  nlohmann::ordered_json j;
  j["source_id"] = p.source_id;
  j["ok"] = p.ok;
  j["failure"] = p.failure;
  j["raw_duration_s"] = p.raw_duration_s;
  j["raw_quality"] = p.raw_quality ? json(*p.raw_quality) : json(nullptr);
  json unf = json::array();
  for (const auto& [d, q] : p.unfiltered) unf.push_back({d, q ? json(*q) : json(nullptr)});
  j["unfiltered"] = unf;
  json kept = json::array();
  for (const auto& r : p.kept) kept.push_back(encode_record(r));
  j["records"] = kept;
  json drops = json::array();
  for (const auto& d : p.drops) drops.push_back(encode_drop(d));
  j["drops"] = drops;
  return j.dump() + "\n";
}

SourcePart decode_part(const std::string& bytes) {
  const json j = json::parse(bytes);
  SourcePart p;
  p.source_id = j.at("source_id").get<std::string>();
  p.ok = j.at("ok").get<bool>();
  p.failure = j.at("failure").get<std::string>();
  p.raw_duration_s = j.at("raw_duration_s").get<double>();
  if (!j.at("raw_quality").is_null()) p.raw_quality = j.at("raw_quality").get<double>();
  for (const auto& u : j.at("unfiltered")) {
    std::optional<double> q;
    if (!u.at(1).is_null()) q = u.at(1).get<double>();
    p.unfiltered.emplace_back(u.at(0).get<double>(), q);
  }
  for (const auto& r : j.at("records")) p.kept.push_back(decode_record(r.get<std::string>()));
  for (const auto& d : j.at("drops")) p.drops.push_back(decode_drop(d.get<std::string>()));
  return p;
}

// ---------------------------------------------------------------------------

struct Layout {
  fs::path out;
  fs::path journal;
  fs::path parts;
  fs::path wav;
  fs::path work_root;

  explicit Layout(const RunConfig& cfg) {
    out = cfg.out_dir;
    journal = out / kJournalName;
    parts = out / "parts";
    wav = out / "wav";
    if (const char* tmp = std::getenv("WILDCUT_TMPDIR"); tmp && *tmp) {
      work_root = tmp;
    } else {
      work_root = out / ".work";
    }
  }
  fs::path part(const std::string& source_id) const { return parts / (source_id + ".json"); }
  fs::path work(const std::string& source_id) const { return work_root / source_id; }
};

// What the journal says about one source.
struct PriorState {
  std::map<std::string, std::string> stage_hash;  // ok stages of the latest attempt
  std::optional<JournalEntry> done;
};

std::map<std::string, PriorState> summarize(const std::vector<JournalEntry>& entries) {
  std::map<std::string, PriorState> out;
  for (const auto& e : entries) {
    if (e.kind == JournalEntry::Kind::kRun) continue;
    PriorState& s = out[e.source_id];
    if (e.kind == JournalEntry::Kind::kDone) {
      s.done = e;
    } else if (e.ok) {
      s.stage_hash[e.stage] = e.hash;
    } else {
      s.stage_hash.erase(e.stage);
    }
  }
  return out;
}

class StageFailure : public Error {
 public:
  StageFailure(std::string stage, DropReason reason, const std::string& what)
      : Error(what), stage_(std::move(stage)), reason_(reason) {}
  const std::string& stage() const { return stage_; }
  DropReason reason() const { return reason_; }

 private:
  std::string stage_;
  DropReason reason_;
};

// Audio that is valid for the duration of one source's processing.
struct SourceAudio {
  StandardizedAudio standardized;
  std::vector<float> vocals_storage;  // empty when vocals == standardized
  std::span<const float> vocals() const {
    return vocals_storage.empty() ? std::span<const float>(standardized.samples)
                                  : std::span<const float>(vocals_storage);
  }
};

class Engine {
 public:
  Engine(const RunConfig& cfg, BackendSet& backends, JournalWriter& journal,
         const std::map<std::string, PriorState>& prior)
      : cfg_(cfg), layout_(cfg), backends_(backends), journal_(journal), prior_(prior),
        needs_files_(backends.needs_files || cfg.keep_intermediates) {}

  // Processes one source to a part file. Never throws for per-source
  // problems; those end up in the part as a failure.
  void process(AudioSource source);

 private:
  SourcePart run_stages(AudioSource& source, const fs::path& work);
  std::optional<std::string> cached(const std::string& source_id, const char* stage,
                                    const fs::path& file) const;
  void record_stage(const std::string& source_id, const char* name, double wall_s,
                    const std::string& artifact, const fs::path& file);

  const RunConfig& cfg_;
  Layout layout_;
  BackendSet& backends_;
  JournalWriter& journal_;
  const std::map<std::string, PriorState>& prior_;
  bool needs_files_;
};

std::optional<std::string> Engine::cached(const std::string& source_id, const char* stage,
                                          const fs::path& file) const {
  auto it = prior_.find(source_id);
  if (it == prior_.end()) return std::nullopt;
  auto h = it->second.stage_hash.find(stage);
  if (h == it->second.stage_hash.end()) return std::nullopt;
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) return std::nullopt;
  std::string bytes = read_file(file);
  if (hash128_hex(bytes) != h->second) return std::nullopt;
  return bytes;
}

void Engine::record_stage(const std::string& source_id, const char* name, double wall_s,
                          const std::string& artifact, const fs::path& file) {
  if (!file.empty()) write_file_atomic(file, artifact);
  JournalEntry e;
  e.kind = JournalEntry::Kind::kStage;
  e.source_id = source_id;
  e.stage = name;
  e.wall_s = wall_s;
  e.hash = hash128_hex(artifact);
  journal_.append(e);
}

// Regions from a backend may be unsorted or overlapping; normalize them.
std::vector<TimeSpan> normalize_regions(std::vector<TimeSpan> regions, double duration) {
  for (auto& r : regions) {
    r.start_s = std::clamp(r.start_s, 0.0, duration);
    r.end_s = std::clamp(r.end_s, 0.0, duration);
  }
  std::erase_if(regions, [](const TimeSpan& r) { return !(r.end_s > r.start_s); });
  std::sort(regions.begin(), regions.end(),
            [](const TimeSpan& a, const TimeSpan& b) { return a.start_s < b.start_s; });
  std::vector<TimeSpan> merged;
  for (const auto& r : regions) {
    if (!merged.empty() && r.start_s <= merged.back().end_s) {
      merged.back().end_s = std::max(merged.back().end_s, r.end_s);
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

json turns_to_json(const std::vector<SpeakerTurn>& turns) {
  json arr = json::array();
  for (const auto& t : turns) arr.push_back({{"speaker", t.speaker_label}, {"start_s", t.start_s}, {"end_s", t.end_s}});
  return arr;
}

std::vector<SpeakerTurn> turns_from_json(const json& arr) {
  std::vector<SpeakerTurn> turns;
  for (const auto& t : arr) {
    turns.push_back({t.at("speaker").get<std::string>(), t.at("start_s").get<double>(), t.at("end_s").get<double>()});
  }
  return turns;
}

SourcePart Engine::run_stages(AudioSource& source, const fs::path& work) {
  const std::string& sid = source.source_id;
  SourcePart part;
  part.source_id = sid;
  const fs::path std_wav = work / "std.wav";

  // standardize
  SourceAudio audio;
  {
    const auto t0 = Clock::now();
    try {
      audio.standardized = standardize(source.path, cfg_.loudness);
    } catch (const Error& e) {
      throw StageFailure("standardize", DropReason::kDecodeError, e.what());
    }
    audio.standardized.source_id = sid;
    if (audio.standardized.samples.empty()) {
      throw StageFailure("standardize", DropReason::kDecodeError, "decoded audio is empty");
    }
    if (needs_files_) write_wav_float(std_wav, audio.standardized.samples, kStandardSampleRate);
    const json summary{{"samples", audio.standardized.samples.size()},
                       {"rms_dbfs", audio.standardized.rms_dbfs},
                       {"applied_gain_db", audio.standardized.applied_gain_db},
                       {"peak_guard_applied", audio.standardized.peak_guard_applied}};
    record_stage(sid, "standardize", seconds_since(t0), summary.dump(), {});
    source.advance(SourceStatus::kStandardized);
  }
  const double duration = audio.standardized.duration_s();
  source.duration_s = duration;
  part.raw_duration_s = duration;

  auto whole = [&](const fs::path& file, std::span<const float> samples) {
    AudioRef ref;
    ref.audio = file;
    ref.source = source.path;
    ref.start_s = 0.0;
    ref.end_s = duration;
    ref.samples = samples;
    return ref;
  };

  // separate
  fs::path vocals_path = std_wav;
  {
    const auto t0 = Clock::now();
    const fs::path artifact_file = work / "separate.json";
    std::optional<std::string> prior = cached(sid, "separate", artifact_file);
    if (prior) {
      vocals_path = json::parse(*prior).at("audio").get<std::string>();
    } else {
      try {
        vocals_path = backends_.separator->separate(whole(std_wav, audio.standardized.samples),
                                                    work / "vocals.wav");
      } catch (const Error& e) {
        throw StageFailure("separate", DropReason::kBackendError, e.what());
      }
    }
    if (vocals_path != std_wav) {
      try {
        RawAudio raw = decode_audio(vocals_path);
        std::vector<float> mono = to_mono(raw);
        if (raw.sample_rate != kStandardSampleRate) mono = resample(mono, raw.sample_rate);
        const auto n = audio.standardized.samples.size();
        if (mono.size() + 1 < n || mono.size() > n + 1) {
          throw StageError(fmt::format("vocals have {} samples, expected {}", mono.size(), n));
        }
        mono.resize(n, 0.0f);
        audio.vocals_storage = std::move(mono);
      } catch (const Error& e) {
        throw StageFailure("separate", DropReason::kBackendError, e.what());
      }
    }
    if (!prior) {
      record_stage(sid, "separate", seconds_since(t0), json{{"audio", vocals_path.string()}}.dump(),
                   artifact_file);
    }
    source.advance(SourceStatus::kSeparated);
  }
  const AudioRef vocals_ref = whole(vocals_path, audio.vocals());

  // diarize
  std::vector<SpeakerTurn> turns;
  {
    const auto t0 = Clock::now();
    const fs::path artifact_file = work / "diarize.json";
    if (auto prior = cached(sid, "diarize", artifact_file)) {
      turns = turns_from_json(json::parse(*prior));
    } else {
      try {
        turns = backends_.diarizer->diarize(vocals_ref, duration);
      } catch (const Error& e) {
        throw StageFailure("diarize", DropReason::kBackendError, e.what());
      }
      record_stage(sid, "diarize", seconds_since(t0), turns_to_json(turns).dump(), artifact_file);
    }
    source.advance(SourceStatus::kDiarized);
  }

  // vad
  std::vector<TimeSpan> regions;
  {
    const auto t0 = Clock::now();
    const fs::path artifact_file = work / "vad.json";
    if (auto prior = cached(sid, "vad", artifact_file)) {
      for (const auto& r : json::parse(*prior)) regions.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    } else {
      try {
        regions = backends_.vad->detect(vocals_ref);
      } catch (const Error& e) {
        throw StageFailure("vad", DropReason::kBackendError, e.what());
      }
      json arr = json::array();
      for (const auto& r : regions) arr.push_back({r.start_s, r.end_s});
      record_stage(sid, "vad", seconds_since(t0), arr.dump(), artifact_file);
    }
  }

  // segment
  std::vector<Segment> segments;
  {
    const auto t0 = Clock::now();
    const auto clean_turns = diarization_postprocess(turns, duration);
    const auto clean_regions = normalize_regions(std::move(regions), duration);
    const auto chunks = intersect_with_turns(clean_regions, clean_turns, 0.0);
    segments = segment_chunks(chunks, cfg_.segmentation).segments;
    json arr = json::array();
    for (std::size_t i = 0; i < segments.size(); ++i) {
      segments[i].segment_id = make_segment_id(sid, i);
      arr.push_back({segments[i].segment_id, segments[i].speaker_label, segments[i].start_s, segments[i].end_s});
    }
    record_stage(sid, "segment", seconds_since(t0), arr.dump(), {});
    source.advance(SourceStatus::kSegmented);
  }

  // Clip references; files are written only when some backend reads them.
  std::vector<AudioRef> clips;
  clips.reserve(segments.size());
  for (const auto& seg : segments) {
    AudioRef ref;
    ref.audio = work / "clips" / (seg.segment_id + ".wav");
    ref.source = source.path;
    ref.start_s = seg.start_s;
    ref.end_s = seg.end_s;
    ref.samples = slice_audio(audio.vocals(), kStandardSampleRate, seg.start_s, seg.end_s);
    clips.push_back(ref);
  }
  if (needs_files_ && !clips.empty()) {
    fs::create_directories(work / "clips");
    for (const auto& c : clips) write_wav_float(c.audio, c.samples, kStandardSampleRate);
  }

  // asr
  std::vector<ItemResult<AsrResult>> asr(segments.size());
  {
    const auto t0 = Clock::now();
    const fs::path artifact_file = work / "asr.json";
    auto from_json = [&](const json& arr) {
      for (std::size_t i = 0; i < arr.size() && i < asr.size(); ++i) {
        const json& r = arr[i];
        if (r.at("ok").get<bool>()) {
          asr[i].value = AsrResult{r.at("text").get<std::string>(), r.at("language").get<std::string>(),
                                   r.at("lang_confidence").get<double>()};
        } else {
          asr[i].error = r.at("error").get<std::string>();
        }
      }
    };
    if (auto prior = cached(sid, "asr", artifact_file)) {
      from_json(json::parse(*prior));
    } else {
      std::optional<std::string> hint;
      if (!cfg_.language_hint.empty()) hint = cfg_.language_hint;
      const auto batch = static_cast<std::size_t>(std::max(1, backends_.transcriber->batch_size()));
      for (std::size_t begin = 0; begin < clips.size(); begin += batch) {
        const auto span = std::span<const AudioRef>(clips).subspan(begin, std::min(batch, clips.size() - begin));
        std::vector<ItemResult<AsrResult>> results;
        try {
          results = backends_.transcriber->transcribe_batch(span, hint);
        } catch (const Error& e) {
          results.assign(span.size(), ItemResult<AsrResult>{std::nullopt, e.what()});
        }
        if (results.size() != span.size()) {
          results.assign(span.size(), ItemResult<AsrResult>{std::nullopt, "transcriber returned a misaligned batch"});
        }
        for (std::size_t k = 0; k < span.size(); ++k) asr[begin + k] = std::move(results[k]);
      }
      json arr = json::array();
      for (const auto& r : asr) {
        if (r.ok()) {
          arr.push_back({{"ok", true}, {"text", r.value->text}, {"language", r.value->language},
                         {"lang_confidence", r.value->lang_confidence}});
        } else {
          arr.push_back({{"ok", false}, {"error", r.error}});
        }
      }
      record_stage(sid, "asr", seconds_since(t0), arr.dump(), artifact_file);
    }
    source.advance(SourceStatus::kTranscribed);
  }

  // quality: every segment, plus the whole standardized source for the raw row
  std::vector<ItemResult<double>> scores(segments.size());
  {
    const auto t0 = Clock::now();
    const fs::path artifact_file = work / "quality.json";
    if (auto prior = cached(sid, "quality", artifact_file)) {
      const json j = json::parse(*prior);
      if (!j.at("raw").is_null()) part.raw_quality = j.at("raw").get<double>();
      const json& arr = j.at("segments");
      for (std::size_t i = 0; i < arr.size() && i < scores.size(); ++i) {
        if (arr[i].is_number()) {
          scores[i].value = arr[i].get<double>();
        } else {
          scores[i].error = arr[i].get<std::string>();
        }
      }
    } else {
      for (std::size_t i = 0; i < clips.size(); ++i) {
        try {
          const double s = backends_.quality->score(clips[i]);
          if (!(s >= 0.0 && s <= 5.0)) throw StageError(fmt::format("score {} outside [0, 5]", s));
          scores[i].value = s;
        } catch (const Error& e) {
          scores[i].error = e.what();
        }
      }
      try {
        part.raw_quality = backends_.quality->score(whole(std_wav, audio.standardized.samples));
      } catch (const Error& e) {
        spdlog::warn("{}: no whole-source quality score: {}", sid, e.what());
      }
      json arr = json::array();
      for (const auto& s : scores) arr.push_back(s.ok() ? json(*s.value) : json(s.error));
      const json j{{"raw", part.raw_quality ? json(*part.raw_quality) : json(nullptr)}, {"segments", arr}};
      record_stage(sid, "quality", seconds_since(t0), j.dump(), artifact_file);
    }
  }

  // filter barrier: the whole source is known, build records and filter
  {
    const auto t0 = Clock::now();
    std::vector<SegmentRecord> records;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const Segment& seg = segments[i];
      const double dur = seg.duration_s();
      part.unfiltered.emplace_back(dur, scores[i].value);
      if (!asr[i].ok() || !scores[i].ok()) {
        const bool asr_failed = !asr[i].ok();
        part.drops.push_back({seg.segment_id, sid, asr_failed ? "asr" : "quality", DropReason::kBackendError,
                              dur, asr_failed ? asr[i].error : scores[i].error});
        continue;
      }
      SegmentRecord r;
      r.segment_id = seg.segment_id;
      r.wav_path = (fs::path("wav") / sid / (seg.segment_id + ".wav")).generic_string();
      r.text = asr[i].value->text;
      r.language = asr[i].value->language;
      r.lang_confidence = asr[i].value->lang_confidence;
      r.speaker_label = seg.speaker_label;
      r.duration_s = dur;
      r.dnsmos_ovrl = *scores[i].value;
      const std::size_t chars = count_non_whitespace(r.text);
      r.avg_char_dur_s = chars > 0 ? dur / static_cast<double>(chars) : 0.0;
      r.source_id = sid;
      records.push_back(std::move(r));
    }
    FilterOutcome outcome = apply_filters(records, cfg_.filter);
    part.kept = std::move(outcome.kept);
    // Keep drops in segment order regardless of which step produced them.
    for (auto& d : outcome.drops) part.drops.push_back(std::move(d));
    std::stable_sort(part.drops.begin(), part.drops.end(),
                     [](const DropRecord& a, const DropRecord& b) { return a.id < b.id; });

    if (cfg_.write_segment_audio && !part.kept.empty()) {
      const fs::path dir = layout_.wav / sid;
      fs::create_directories(dir);
      for (std::size_t i = 0, k = 0; i < segments.size() && k < part.kept.size(); ++i) {
        if (segments[i].segment_id != part.kept[k].segment_id) continue;
        const fs::path target = layout_.out / part.kept[k].wav_path;
        fs::path tmp = target;
        tmp += ".tmp";
        write_wav_pcm16(tmp, clips[i].samples, kStandardSampleRate);
        fs::rename(tmp, target);
        ++k;
      }
    }
    json ids = json::array();
    for (const auto& r : part.kept) ids.push_back(r.segment_id);
    record_stage(sid, "filter", seconds_since(t0), ids.dump(), {});
    source.advance(SourceStatus::kFiltered);
  }
  return part;
}

void Engine::process(AudioSource source) {
  const std::string sid = source.source_id;
  const fs::path work = layout_.work(sid);
  fs::create_directories(work);

  SourcePart part;
  try {
    part = run_stages(source, work);
    source.advance(SourceStatus::kDone);
  } catch (const StageFailure& f) {
    spdlog::warn("{} ({}) failed at {}: {}", sid, source.path.string(), f.stage(), f.what());
    source.fail(f.what());
    part = SourcePart{};
    part.source_id = sid;
    part.ok = false;
    part.failure = f.what();
    part.raw_duration_s = source.duration_s;
    part.drops.push_back({sid, sid, f.stage(), f.reason(), source.duration_s, f.what()});
    JournalEntry e;
    e.source_id = sid;
    e.stage = f.stage();
    e.ok = false;
    e.reason = f.what();
    journal_.append(e);
  } catch (const std::exception& e) {
    spdlog::error("{} ({}) failed: {}", sid, source.path.string(), e.what());
    source.fail(e.what());
    part = SourcePart{};
    part.source_id = sid;
    part.ok = false;
    part.failure = e.what();
    part.raw_duration_s = source.duration_s;
    part.drops.push_back({sid, sid, "engine", DropReason::kBackendError, source.duration_s, e.what()});
  }

  // Write-ahead: the part is staged, the journal records its digest durably,
  // and only then does the part appear under its final name.
  const std::string bytes = encode_part(part);
  const fs::path final_path = layout_.part(sid);
  fs::path staged = final_path;
  staged += ".staged";
  write_file_atomic(staged, bytes);
  JournalEntry done;
  done.kind = JournalEntry::Kind::kDone;
  done.source_id = sid;
  done.ok = part.ok;
  done.reason = part.failure;
  done.hash = hash128_hex(bytes);
  journal_.append(done, /*durable=*/true);
  fs::rename(staged, final_path);

  if (part.ok && !cfg_.keep_intermediates) {
    std::error_code ec;
    fs::remove_all(work, ec);
  }
}

std::optional<std::size_t> fault_threshold(const RunOptions& options) {
  if (options.fault_after_sources) return options.fault_after_sources;
  if (const char* env = std::getenv("WILDCUT_FAULT_AFTER_SOURCES"); env && *env) {
    return static_cast<std::size_t>(std::stoull(env));
  }
  return std::nullopt;
}

bool part_is_current(const Layout& layout, const std::string& sid, const PriorState& state) {
  if (!state.done || !state.done->ok) return false;
  std::error_code ec;
  const fs::path p = layout.part(sid);
  if (!fs::is_regular_file(p, ec)) {
    // Killed between the durable done entry and the rename: the staged
    // bytes are already vouched for by the journal.
    fs::path staged = p;
    staged += ".staged";
    if (!fs::is_regular_file(staged, ec) || hash128_hex(read_file(staged)) != state.done->hash) return false;
    fs::rename(staged, p);
    return true;
  }
  return hash128_hex(read_file(p)) == state.done->hash;
}

// Builds manifest.jsonl, drops.jsonl and report.json from the part files.
RunResult finalize(const Layout& layout, std::vector<AudioSource> sources,
                   const std::vector<JournalEntry>& entries) {
  std::sort(sources.begin(), sources.end(),
            [](const AudioSource& a, const AudioSource& b) { return a.source_id < b.source_id; });
  std::vector<std::string> manifest_lines;
  std::vector<std::string> drop_lines;
  std::vector<DropRecord> drops;
  std::vector<double> raw_d, raw_q, unf_d, unf_q, kept_d, kept_q;
  std::map<std::string, double> per_language_s;
  std::size_t failed = 0;
  for (const auto& src : sources) {
    const SourcePart part = decode_part(read_file(layout.part(src.source_id)));
    if (!part.ok) ++failed;
    if (part.raw_duration_s > 0) raw_d.push_back(part.raw_duration_s);
    if (part.raw_quality) raw_q.push_back(*part.raw_quality);
    for (const auto& [d, q] : part.unfiltered) {
      unf_d.push_back(d);
      if (q) unf_q.push_back(*q);
    }
    for (const auto& r : part.kept) {
      manifest_lines.push_back(encode_record(r));
      kept_d.push_back(r.duration_s);
      kept_q.push_back(r.dnsmos_ovrl);
      per_language_s[r.language] += r.duration_s;
    }
    for (const auto& d : part.drops) {
      drop_lines.push_back(encode_drop(d));
      drops.push_back(d);
    }
  }
  double raw_total_s = 0.0;
  for (double d : raw_d) raw_total_s += d;
  const double raw_h = raw_total_s / 3600.0;
  std::map<std::string, double> per_language_h;
  for (const auto& [lang, s] : per_language_s) per_language_h[lang] = s / 3600.0;

  const Throughput tp = measure_throughput(entries, raw_h);
  RunReport report = build_report(compute_stats(raw_d, raw_q, raw_h), compute_stats(unf_d, unf_q, raw_h),
                                  compute_stats(kept_d, kept_q, raw_h), per_language_h, drops,
                                  tp.wall_clock_s, tp.per_stage_s);
  report.sources = sources.size();
  report.failed_sources = failed;

  write_lines_atomic(layout.out / "manifest.jsonl", manifest_lines);
  write_lines_atomic(layout.out / "drops.jsonl", drop_lines);
  write_lines_atomic(layout.out / "report.json", {report_to_json(report).dump(2)});

  RunResult result;
  result.report = std::move(report);
  result.sources_total = sources.size();
  result.sources_failed = failed;
  result.exit_code = failed > 0 ? 2 : 0;
  return result;
}

RunResult execute(const RunConfig& cfg, const RunOptions& options, bool resuming) {
  const auto t0 = Clock::now();
  const Layout layout(cfg);
  std::vector<AudioSource> sources = plan(cfg);
  const JournalHeader header{1, input_set_hash(sources), config_fingerprint(cfg)};

  std::error_code ec;
  const bool have_journal = fs::exists(layout.journal, ec);
  if (have_journal && !resuming) {
    throw ConfigError(fmt::format("{} already holds a run (journal.jsonl exists); use resume or another output directory",
                                  layout.out.string()));
  }
  std::vector<JournalEntry> prior_entries;
  if (have_journal) {
    JournalContents contents = read_journal(layout.journal);
    if (contents.header.input_set_hash != header.input_set_hash) {
      throw ConfigError("refusing to resume: the input set differs from the one recorded in the journal");
    }
    if (contents.header.config_hash != header.config_hash) {
      throw ConfigError("refusing to resume: output-relevant settings differ from the journal");
    }
    prior_entries = std::move(contents.entries);
  }
  const std::map<std::string, PriorState> prior = summarize(prior_entries);

  fs::create_directories(layout.out);
  fs::create_directories(layout.parts);
  fs::create_directories(layout.work_root);
  if (::access(layout.out.c_str(), W_OK) != 0) {
    throw IoError(fmt::format("output directory {} is not writable", layout.out.string()));
  }

  // Backends are started before the journal is touched so that a fatal
  // handshake failure leaves no trace.
  BackendSet backends = make_backends(cfg.backends, cfg.vad);

  std::vector<AudioSource> todo;
  std::size_t skipped = 0;
  for (const auto& s : sources) {
    auto it = prior.find(s.source_id);
    if (it != prior.end() && part_is_current(layout, s.source_id, it->second)) {
      ++skipped;
    } else {
      todo.push_back(s);
    }
  }

  RunResult result;
  {
    JournalWriter journal(layout.journal, have_journal ? std::nullopt : std::optional(header));
    Engine engine(cfg, backends, journal, prior);

    const int workers = std::max(1, std::min<int>(cfg.effective_parallelism(), static_cast<int>(std::max<std::size_t>(1, todo.size()))));
    BoundedQueue<AudioSource> queue(static_cast<std::size_t>(workers));
    const auto fault = fault_threshold(options);
    std::atomic<std::size_t> finished{0};
    std::atomic<std::size_t> in_flight{0};
    std::atomic<std::size_t> max_in_flight{0};

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (auto src = queue.pop()) {
          const std::size_t now = ++in_flight;
          std::size_t prev = max_in_flight.load();
          while (now > prev && !max_in_flight.compare_exchange_weak(prev, now)) {
          }
          engine.process(std::move(*src));
          --in_flight;
          const std::size_t n = ++finished;
          if (fault && n >= *fault) {
            spdlog::error("fault injection: terminating after {} sources", n);
            std::_Exit(86);
          }
        }
      });
    }
    for (auto& s : todo) queue.push(std::move(s));
    queue.close();
    for (auto& t : pool) t.join();

    JournalEntry run_entry;
    run_entry.kind = JournalEntry::Kind::kRun;
    run_entry.wall_s = seconds_since(t0);
    journal.append(run_entry, /*durable=*/true);

    result.dispatch_queue_capacity = queue.capacity();
    result.dispatch_queue_high_water = queue.high_water();
    result.journal_queue_capacity = journal.queue_capacity();
    result.journal_queue_high_water = journal.queue_high_water();
    result.max_sources_in_flight = max_in_flight.load();
  }

  const JournalContents contents = read_journal(layout.journal);
  RunResult final_result = finalize(layout, sources, contents.entries);
  final_result.sources_processed = todo.size();
  final_result.sources_skipped = skipped;
  final_result.dispatch_queue_capacity = result.dispatch_queue_capacity;
  final_result.dispatch_queue_high_water = result.dispatch_queue_high_water;
  final_result.journal_queue_capacity = result.journal_queue_capacity;
  final_result.journal_queue_high_water = result.journal_queue_high_water;
  final_result.max_sources_in_flight = result.max_sources_in_flight;
  if (!cfg.keep_intermediates) {
    std::error_code ignore;
    if (fs::is_empty(layout.work_root, ignore)) fs::remove(layout.work_root, ignore);
  }
  return final_result;
}

}  // namespace

std::vector<AudioSource> plan(const RunConfig& config) {
  if (config.inputs.empty()) throw ConfigError("no inputs given (run.inputs is empty)");
  std::set<std::string> exts;
  for (const auto& e : config.extensions) exts.insert(lower(e.starts_with(".") ? e : "." + e));

  std::set<fs::path> files;
  auto add_dir = [&](const fs::path& root) {
    std::error_code ec;
    fs::recursive_directory_iterator it(root, fs::directory_options::none, ec);
    if (ec) throw IoError(fmt::format("cannot read input root {}: {}", root.string(), ec.message()));
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) throw IoError(fmt::format("cannot read input root {}: {}", root.string(), ec.message()));
      if (!it->is_regular_file(ec)) continue;
      if (exts.contains(lower(it->path().extension().string()))) files.insert(fs::canonical(it->path()));
    }
  };
  auto add_path = [&](const fs::path& p) {
    std::error_code ec;
    const auto status = fs::status(p, ec);
    if (ec || !fs::exists(status)) throw IoError(fmt::format("input root {} does not exist", p.string()));
    if (::access(p.c_str(), R_OK) != 0) throw IoError(fmt::format("input root {} is not readable", p.string()));
    if (fs::is_directory(status)) {
      add_dir(p);
    } else {
      files.insert(fs::canonical(p));
    }
  };

  for (const auto& input : config.inputs) {
    if (has_glob_chars(input)) {
      glob_t g{};
      const int rc = ::glob(input.c_str(), 0, nullptr, &g);
      if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) add_path(g.gl_pathv[i]);
      } else if (rc != GLOB_NOMATCH) {
        globfree(&g);
        throw IoError(fmt::format("cannot expand input pattern {}", input));
      }
      globfree(&g);
    } else {
      add_path(input);
    }
  }
  if (files.empty()) {
    std::string roots;
    for (const auto& i : config.inputs) roots += (roots.empty() ? "" : ", ") + i;
    throw ConfigError("no input audio found in: " + roots);
  }

  std::vector<fs::path> sorted(files.begin(), files.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
  std::vector<fs::path> parents;
  for (const auto& f : sorted) parents.push_back(f.parent_path());
  const fs::path base = common_ancestor(parents);

  std::vector<AudioSource> out;
  std::set<std::string> ids;
  for (const auto& f : sorted) {
    AudioSource s;
    s.path = f;
    s.source_id = make_source_id(f, base);
    if (!config.language_hint.empty()) s.language_hint = config.language_hint;
    if (!ids.insert(s.source_id).second) {
      throw ContractViolation("source id collision for " + f.string());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string input_set_hash(std::span<const AudioSource> sources) {
  std::string text;
  for (const auto& s : sources) {
    std::error_code ec;
    const auto size = fs::file_size(s.path, ec);
    text += fmt::format("{}\t{}\n", s.source_id, ec ? 0 : size);
  }
  return hash128_hex(text);
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  return execute(config, options, false);
}

RunResult resume(const RunConfig& config, const RunOptions& options) {
  return execute(config, options, true);
}

Throughput measure_throughput(std::span<const JournalEntry> entries, double raw_total_h) {
  Throughput t;
  for (const char* s : kPipelineStages) t.per_stage_s[s] = 0.0;
  for (const auto& e : entries) {
    if (e.kind == JournalEntry::Kind::kRun) {
      t.wall_clock_s += e.wall_s;
    } else if (e.kind == JournalEntry::Kind::kStage && e.ok) {
      t.per_stage_s[e.stage] += e.wall_s;
    }
  }
  t.h_per_min = throughput_h_per_min(raw_total_h, t.wall_clock_s);
  return t;
}

bool RunAudit::consistent() const {
  const double tolerance = 1e-6 * static_cast<double>(unfiltered_segments + 1) + 1e-9 * unfiltered_s;
  return duplicate_ids.empty() && manifest_errors.empty() &&
         kept_segments + dropped_segments == unfiltered_segments &&
         std::abs(kept_s + dropped_s - unfiltered_s) <= tolerance;
}

RunAudit audit_output(const fs::path& out_dir) {
  RunAudit a;
  const ManifestSummary summary = validate_manifest(out_dir / "manifest.jsonl");
  for (const auto& e : summary.errors) a.manifest_errors.push_back(fmt::format("line {}: {}", e.line, e.message));

  std::set<std::string> seen;
  for (const auto& line : read_lines(out_dir / "manifest.jsonl")) {
    try {
      const SegmentRecord r = decode_record(line);
      ++a.kept_segments;
      a.kept_s += r.duration_s;
      if (!seen.insert(r.segment_id).second) a.duplicate_ids.push_back(r.segment_id);
    } catch (const Error&) {
    }
  }
  for (const auto& line : read_lines(out_dir / "drops.jsonl")) {
    const DropRecord d = decode_drop(line);
    if (d.id == d.source_id) continue;  // source-level failure
    ++a.dropped_segments;
    a.dropped_s += d.duration_s;
    if (!seen.insert(d.id).second) a.duplicate_ids.push_back(d.id);
  }
  const json report = json::parse(read_file(out_dir / "report.json"));
  const json& unf = report.at("phases").at("processed_unfiltered");
  a.unfiltered_segments = unf.at("count").get<std::size_t>();
  a.unfiltered_s = unf.at("total_duration_h").get<double>() * 3600.0;
  return a;
}

}  // namespace wildcut
