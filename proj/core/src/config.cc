#include "wildcut/config.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "defaults_snapshot.h"
#include "wildcut/error.h"
#include "wildcut/source_id.h"
#include "wildcut/worker.h"

namespace wildcut {
namespace {

Diagnostic error_at(std::string field, std::string message) {
  return Diagnostic{"error", std::move(field), std::move(message), 0, 0};
}

// Reads the keys of one TOML table into typed fields. Type mismatches and
// keys nobody asked for become diagnostics.
class SectionReader {
 public:
  SectionReader(const toml::table* table, std::string prefix, std::vector<Diagnostic>& diags)
      : table_(table), prefix_(std::move(prefix)), diags_(diags) {}

  void real(std::string_view key, double& out) {
    if (auto* n = take(key)) {
      if (n->is_floating_point() || n->is_integer()) {
        out = n->is_integer() ? static_cast<double>(*n->value<std::int64_t>()) : *n->value<double>();
      } else {
        mismatch(key, "a number");
      }
    }
  }

  void integer(std::string_view key, int& out) {
    if (auto* n = take(key)) {
      if (n->is_integer()) {
        out = static_cast<int>(*n->value<std::int64_t>());
      } else {
        mismatch(key, "an integer");
      }
    }
  }

  void count(std::string_view key, std::size_t& out) {
    int v = static_cast<int>(out);
    integer(key, v);
    if (v < 0) {
      diags_.push_back(error_at(field(key), "must be >= 0"));
    } else {
      out = static_cast<std::size_t>(v);
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (auto* n = take(key)) {
      if (n->is_boolean()) {
        out = *n->value<bool>();
      } else {
        mismatch(key, "a boolean");
      }
    }
  }

  void string(std::string_view key, std::string& out) {
    if (auto* n = take(key)) {
      if (n->is_string()) {
        out = *n->value<std::string>();
      } else {
        mismatch(key, "a string");
      }
    }
  }

  void strings(std::string_view key, std::vector<std::string>& out) {
    auto* n = take(key);
    if (!n) return;
    const toml::array* arr = n->as_array();
    if (!arr) {
      mismatch(key, "an array of strings");
      return;
    }
    std::vector<std::string> values;
    for (const auto& el : *arr) {
      if (!el.is_string()) {
        mismatch(key, "an array of strings");
        return;
      }
      values.push_back(*el.value<std::string>());
    }
    out = std::move(values);
  }

  // Reports every key that was not read.
  void finish() {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!seen_.contains(std::string(k.str()))) {
        diags_.push_back(error_at(field(k.str()), "unknown key"));
      }
    }
  }

 private:
  const toml::node* take(std::string_view key) {
    seen_.insert(std::string(key));
    return table_ ? table_->get(key) : nullptr;
  }
  std::string field(std::string_view key) const { return prefix_ + "." + std::string(key); }
  void mismatch(std::string_view key, std::string_view expected) {
    diags_.push_back(error_at(field(key), fmt::format("expected {}", expected)));
  }

  const toml::table* table_;
  std::string prefix_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> seen_;
};

const toml::table* section(const toml::table& root, std::string_view name, std::vector<Diagnostic>& diags) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) {
    diags.push_back(error_at(std::string(name), "expected a table"));
    return nullptr;
  }
  return n->as_table();
}

RunConfig from_table(const toml::table& root, std::vector<Diagnostic>& diags) {
  RunConfig cfg = default_config();
  static const std::set<std::string> kSections{"run", "loudness", "vad", "segmentation", "filter", "backends"};
  for (const auto& [k, v] : root) {
    if (!kSections.contains(std::string(k.str()))) {
      diags.push_back(error_at(std::string(k.str()), "unknown section"));
    }
  }

  {
    SectionReader r(section(root, "run", diags), "run", diags);
    r.strings("inputs", cfg.inputs);
    std::string out_dir = cfg.out_dir.string();
    r.string("out_dir", out_dir);
    cfg.out_dir = out_dir;
    r.integer("parallel_sources", cfg.parallel_sources);
    r.boolean("keep_intermediates", cfg.keep_intermediates);
    r.boolean("write_segment_audio", cfg.write_segment_audio);
    r.string("language_hint", cfg.language_hint);
    r.strings("extensions", cfg.extensions);
    r.finish();
  }
  {
    SectionReader r(section(root, "loudness", diags), "loudness", diags);
    r.real("target_dbfs", cfg.loudness.target_dbfs);
    r.real("gain_clamp_db", cfg.loudness.gain_clamp_db);
    r.real("peak_ceiling", cfg.loudness.peak_ceiling);
    r.finish();
  }
  {
    SectionReader r(section(root, "vad", diags), "vad", diags);
    r.real("frame_ms", cfg.vad.frame_ms);
    r.real("hop_ms", cfg.vad.hop_ms);
    r.real("on_threshold_db", cfg.vad.on_threshold_db);
    r.real("off_threshold_db", cfg.vad.off_threshold_db);
    r.real("min_speech_s", cfg.vad.min_speech_s);
    r.real("min_silence_s", cfg.vad.min_silence_s);
    r.real("speech_pad_s", cfg.vad.speech_pad_s);
    r.finish();
  }
  {
    SectionReader r(section(root, "segmentation", diags), "segmentation", diags);
    r.real("max_segment_s", cfg.segmentation.max_segment_s);
    r.real("min_emit_s", cfg.segmentation.min_emit_s);
    r.real("max_join_gap_s", cfg.segmentation.max_join_gap_s);
    r.finish();
  }
  {
    SectionReader r(section(root, "filter", diags), "filter", diags);
    std::vector<std::string> langs(cfg.filter.target_languages.begin(), cfg.filter.target_languages.end());
    r.strings("target_languages", langs);
    cfg.filter.target_languages = {langs.begin(), langs.end()};
    r.real("min_lang_confidence", cfg.filter.min_lang_confidence);
    r.real("min_quality", cfg.filter.min_quality);
    r.boolean("quality_inclusive", cfg.filter.quality_inclusive);
    r.real("min_duration_s", cfg.filter.min_duration_s);
    r.real("iqr_multiplier", cfg.filter.iqr_multiplier);
    r.count("min_segments_for_iqr", cfg.filter.min_segments_for_iqr);
    std::string granularity =
        cfg.filter.language_granularity == DropGranularity::kSource ? "source" : "segment";
    r.string("language_granularity", granularity);
    if (granularity == "segment") {
      cfg.filter.language_granularity = DropGranularity::kSegment;
    } else if (granularity == "source") {
      cfg.filter.language_granularity = DropGranularity::kSource;
    } else {
      diags.push_back(error_at("filter.language_granularity", "must be \"segment\" or \"source\""));
    }
    r.finish();
  }
  if (const toml::table* backends = section(root, "backends", diags)) {
    for (const auto& [k, v] : *backends) {
      const std::string name(k.str());
      const auto stage = stage_from_string(name);
      if (!stage) {
        diags.push_back(error_at("backends." + name, "unknown stage"));
        continue;
      }
      if (!v.is_table()) {
        diags.push_back(error_at("backends." + name, "expected a table"));
        continue;
      }
      BackendDescriptor& d = cfg.backend(*stage);
      SectionReader r(v.as_table(), "backends." + name, diags);
      std::string kind(to_string(d.kind));
      r.string("kind", kind);
      if (auto parsed = backend_kind_from_string(kind)) {
        d.kind = *parsed;
      } else {
        diags.push_back(error_at("backends." + name + ".kind", "must be mock, reference or worker"));
      }
      r.string("flavor", d.flavor);
      r.strings("command", d.command);
      r.integer("concurrency_slots", d.concurrency_slots);
      r.integer("processes", d.processes);
      r.real("request_timeout_s", d.request_timeout_s);
      r.integer("max_retries", d.max_retries);
      r.integer("batch_size", d.batch_size);
      r.real("handshake_timeout_s", d.handshake_timeout_s);
      r.real("ping_interval_s", d.ping_interval_s);
      r.boolean("fallback_to_mock", d.fallback_to_mock);
      r.finish();
    }
  }
  return cfg;
}

// Inserts `value` at a dotted path, creating intermediate tables.
void apply_override(toml::table& root, const std::string& spec, std::vector<Diagnostic>& diags) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    diags.push_back(error_at(spec, "override must look like dotted.key=value"));
    return;
  }
  const std::string key = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  toml::table* table = &root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    toml::node* n = table->get(parts[i]);
    if (!n) {
      table->insert_or_assign(parts[i], toml::table{});
      n = table->get(parts[i]);
    }
    if (!n->is_table()) {
      diags.push_back(error_at(key, fmt::format("'{}' is not a table", parts[i])));
      return;
    }
    table = n->as_table();
  }

  toml::table parsed;
  try {
    parsed = toml::parse("v = " + value);
  } catch (const toml::parse_error&) {
    table->insert_or_assign(parts.back(), value);
    return;
  }
  parsed.get("v")->visit([&](auto&& node) { table->insert_or_assign(parts.back(), node); });
}

std::string fmt_real(double x) {
  std::string s = fmt::format("{}", x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string fmt_strings(const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += nlohmann::json(v[i]).dump();
  }
  return s + "]";
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

const BackendDescriptor& RunConfig::backend(Stage stage) const {
  return backends.at(static_cast<std::size_t>(stage));
}

BackendDescriptor& RunConfig::backend(Stage stage) {
  return backends.at(static_cast<std::size_t>(stage));
}

int RunConfig::effective_parallelism() const {
  if (parallel_sources > 0) return parallel_sources;
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig default_config() {
  RunConfig cfg;
  for (Stage s : kAllStages) cfg.backends.push_back(default_descriptor(s));
  return cfg;
}

std::string diagnostic_to_json(const Diagnostic& d) {
  nlohmann::ordered_json j;
  j["severity"] = d.severity;
  j["field"] = d.field;
  j["message"] = d.message;
  if (d.line > 0) {
    j["line"] = d.line;
    j["column"] = d.column;
  }
  return j.dump();
}

bool LoadResult::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.severity == "error"; });
}

LoadResult load_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<std::string>& overrides) {
  LoadResult result;
  toml::table root;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) {
      result.config = default_config();
      result.diagnostics.push_back(error_at("", fmt::format("cannot read config file {}", file->string())));
      return result;
    }
    std::stringstream text;
    text << in.rdbuf();
    try {
      root = toml::parse(text.str(), file->string());
    } catch (const toml::parse_error& e) {
      result.config = default_config();
      Diagnostic d = error_at("", std::string(e.description()));
      d.line = static_cast<int>(e.source().begin.line);
      d.column = static_cast<int>(e.source().begin.column);
      result.diagnostics.push_back(std::move(d));
      return result;
    }
  }
  for (const auto& o : overrides) apply_override(root, o, result.diagnostics);
  result.config = from_table(root, result.diagnostics);
  for (auto& d : check_config(result.config)) result.diagnostics.push_back(std::move(d));
  return result;
}

RunConfig load_config_or_throw(const std::optional<std::filesystem::path>& file,
                               const std::vector<std::string>& overrides) {
  LoadResult r = load_config(file, overrides);
  if (!r.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& d : r.diagnostics) {
      if (d.severity != "error") continue;
      msg += d.line > 0 ? fmt::format("\n  line {}, column {}: {}", d.line, d.column, d.message)
                        : fmt::format("\n  {}: {}", d.field, d.message);
    }
    throw ConfigError(msg);
  }
  return r.config;
}

std::vector<Diagnostic> check_config(const RunConfig& c) {
  std::vector<Diagnostic> out;
  auto require = [&](bool ok, const char* field, std::string message) {
    if (!ok) out.push_back(error_at(field, std::move(message)));
  };

  require(c.parallel_sources >= 0, "run.parallel_sources", "must be >= 1, or 0 for one per CPU core");
  require(!c.out_dir.empty(), "run.out_dir", "must not be empty");
  require(!c.extensions.empty(), "run.extensions", "must list at least one extension");

  require(std::isfinite(c.loudness.target_dbfs) && c.loudness.target_dbfs < 0, "loudness.target_dbfs",
          fmt::format("must be below 0 dBFS, got {}", c.loudness.target_dbfs));
  require(c.loudness.gain_clamp_db >= 0, "loudness.gain_clamp_db",
          fmt::format("must be >= 0, got {}", c.loudness.gain_clamp_db));
  require(c.loudness.peak_ceiling > 0 && c.loudness.peak_ceiling <= 1, "loudness.peak_ceiling",
          fmt::format("must be in (0, 1], got {}", c.loudness.peak_ceiling));

  require(c.vad.frame_ms > 0, "vad.frame_ms", "must be > 0");
  require(c.vad.hop_ms > 0, "vad.hop_ms", "must be > 0");
  require(c.vad.off_threshold_db < c.vad.on_threshold_db, "vad.off_threshold_db",
          fmt::format("must be below vad.on_threshold_db ({})", c.vad.on_threshold_db));
  require(c.vad.min_speech_s > 0, "vad.min_speech_s", "must be > 0");
  require(c.vad.min_silence_s > 0, "vad.min_silence_s", "must be > 0");
  require(c.vad.speech_pad_s >= 0, "vad.speech_pad_s", "must be >= 0");

  require(c.segmentation.max_segment_s > 0, "segmentation.max_segment_s", "must be > 0");
  require(c.segmentation.min_emit_s > 0 && c.segmentation.min_emit_s <= c.segmentation.max_segment_s,
          "segmentation.min_emit_s",
          fmt::format("must be in (0, {}]", c.segmentation.max_segment_s));
  require(c.segmentation.max_join_gap_s >= 0, "segmentation.max_join_gap_s", "must be >= 0");

  require(!c.filter.target_languages.empty(), "filter.target_languages", "must not be empty");
  for (const auto& lang : c.filter.target_languages) {
    const bool lower = !lang.empty() && std::all_of(lang.begin(), lang.end(), [](unsigned char ch) {
      return std::islower(ch) || ch == '-';
    });
    require(lower, "filter.target_languages", fmt::format("'{}' is not a lowercase language code", lang));
  }
  require(c.filter.min_lang_confidence >= 0 && c.filter.min_lang_confidence <= 1,
          "filter.min_lang_confidence",
          fmt::format("must be in [0, 1], got {}", c.filter.min_lang_confidence));
  require(c.filter.min_quality >= 0 && c.filter.min_quality <= 5, "filter.min_quality",
          fmt::format("must be in [0, 5], got {}", c.filter.min_quality));
  require(c.filter.min_duration_s >= 0, "filter.min_duration_s", "must be >= 0");
  require(c.filter.iqr_multiplier > 0, "filter.iqr_multiplier", "must be > 0");
  require(c.filter.min_segments_for_iqr >= 1, "filter.min_segments_for_iqr", "must be >= 1");

  for (const auto& d : c.backends) {
    const std::string p = "backends." + std::string(to_string(d.stage)) + ".";
    auto need = [&](bool ok, const std::string& key, std::string message) {
      if (!ok) out.push_back(error_at(p + key, std::move(message)));
    };
    need(d.kind != BackendKind::kWorker || !d.command.empty(), "command",
         "worker kind requires a non-empty command");
    need(d.kind != BackendKind::kReference || d.stage == Stage::kVad, "kind",
         "only the vad stage has a reference backend");
    need(d.concurrency_slots >= 1, "concurrency_slots", "must be >= 1");
    need(d.processes >= 1, "processes", "must be >= 1");
    need(d.request_timeout_s > 0, "request_timeout_s", "must be > 0");
    need(d.max_retries >= 0, "max_retries", "must be >= 0");
    need(d.batch_size >= 1, "batch_size", "must be >= 1");
    need(d.handshake_timeout_s > 0, "handshake_timeout_s", "must be > 0");
    need(d.ping_interval_s >= 0, "ping_interval_s", "must be >= 0 (0 disables pings)");
    static const std::set<std::string> kFlavors{"auto", "fixture", "synthetic", "identity", "single"};
    need(kFlavors.contains(d.flavor), "flavor",
         "must be one of auto, fixture, synthetic, identity, single");
  }
  return out;
}

std::vector<Diagnostic> probe_backends(const RunConfig& config) {
  std::vector<Diagnostic> out;
  for (const auto& d : config.backends) {
    if (d.kind != BackendKind::kWorker || d.command.empty()) continue;
    try {
      auto proc = WorkerProcess::spawn(d.stage, d.command, d.handshake_timeout_s);
    } catch (const BackendUnavailable& e) {
      out.push_back(error_at("backends." + std::string(to_string(d.stage)) + ".command",
                             std::string("handshake failed: ") + e.what()));
    }
  }
  return out;
}

std::vector<Diagnostic> check_reference_defaults() {
  const RunConfig c = default_config();
  std::vector<Diagnostic> out;
  auto expect = [&](const char* field, double actual, double expected) {
    if (actual != expected) {
      out.push_back(error_at(field, fmt::format("default {} differs from reference value {}", actual, expected)));
    }
  };
  expect("loudness.target_dbfs", c.loudness.target_dbfs, -20.0);
  expect("loudness.gain_clamp_db", c.loudness.gain_clamp_db, 3.0);
  expect("sample_rate", kStandardSampleRate, 24000);
  expect("filter.min_duration_s", c.filter.min_duration_s, 3.0);
  expect("segmentation.max_segment_s", c.segmentation.max_segment_s, 30.0);
  expect("filter.min_lang_confidence", c.filter.min_lang_confidence, 0.80);
  expect("filter.min_quality", c.filter.min_quality, 3.0);
  expect("filter.iqr_multiplier", c.filter.iqr_multiplier, 1.5);
  const std::set<std::string> langs{"en", "zh", "de", "fr", "ja", "ko"};
  if (c.filter.target_languages != langs) {
    out.push_back(error_at("filter.target_languages", "default differs from the reference language set"));
  }
  if (dump_config(c) != defaults_snapshot()) {
    out.push_back(error_at("", "built-in defaults differ from the checked-in defaults.toml snapshot"));
  }
  return out;
}

std::string dump_config(const RunConfig& c) {
  std::string s;
  auto line = [&](std::string_view key, const std::string& value) {
    s += fmt::format("{} = {}\n", key, value);
  };
  s += "# wildcut configuration. Every key is optional; omitted keys take the\n";
  s += "# values shown here.\n\n";
  s += "[run]\n";
  line("inputs", fmt_strings(c.inputs));
  line("out_dir", nlohmann::json(c.out_dir.string()).dump());
  s += "# 0 runs one source per CPU core\n";
  line("parallel_sources", std::to_string(c.parallel_sources));
  line("keep_intermediates", fmt_bool(c.keep_intermediates));
  line("write_segment_audio", fmt_bool(c.write_segment_audio));
  line("language_hint", nlohmann::json(c.language_hint).dump());
  line("extensions", fmt_strings(c.extensions));

  s += "\n[loudness]\n";
  line("target_dbfs", fmt_real(c.loudness.target_dbfs));
  line("gain_clamp_db", fmt_real(c.loudness.gain_clamp_db));
  line("peak_ceiling", fmt_real(c.loudness.peak_ceiling));

  s += "\n[vad]\n";
  line("frame_ms", fmt_real(c.vad.frame_ms));
  line("hop_ms", fmt_real(c.vad.hop_ms));
  s += "# relative to the RMS level of the whole source\n";
  line("on_threshold_db", fmt_real(c.vad.on_threshold_db));
  line("off_threshold_db", fmt_real(c.vad.off_threshold_db));
  line("min_speech_s", fmt_real(c.vad.min_speech_s));
  line("min_silence_s", fmt_real(c.vad.min_silence_s));
  line("speech_pad_s", fmt_real(c.vad.speech_pad_s));

  s += "\n[segmentation]\n";
  line("max_segment_s", fmt_real(c.segmentation.max_segment_s));
  line("min_emit_s", fmt_real(c.segmentation.min_emit_s));
  line("max_join_gap_s", fmt_real(c.segmentation.max_join_gap_s));

  s += "\n[filter]\n";
  line("target_languages", fmt_strings({c.filter.target_languages.begin(), c.filter.target_languages.end()}));
  line("min_lang_confidence", fmt_real(c.filter.min_lang_confidence));
  s += "# scores must exceed min_quality unless quality_inclusive is set\n";
  line("min_quality", fmt_real(c.filter.min_quality));
  line("quality_inclusive", fmt_bool(c.filter.quality_inclusive));
  line("min_duration_s", fmt_real(c.filter.min_duration_s));
  line("iqr_multiplier", fmt_real(c.filter.iqr_multiplier));
  line("min_segments_for_iqr", std::to_string(c.filter.min_segments_for_iqr));
  line("language_granularity",
       c.filter.language_granularity == DropGranularity::kSource ? "\"source\"" : "\"segment\"");

  for (const auto& d : c.backends) {
    s += fmt::format("\n[backends.{}]\n", to_string(d.stage));
    line("kind", nlohmann::json(std::string(to_string(d.kind))).dump());
    line("flavor", nlohmann::json(d.flavor).dump());
    line("command", fmt_strings(d.command));
    line("concurrency_slots", std::to_string(d.concurrency_slots));
    line("processes", std::to_string(d.processes));
    line("request_timeout_s", fmt_real(d.request_timeout_s));
    line("max_retries", std::to_string(d.max_retries));
    line("batch_size", std::to_string(d.batch_size));
    line("handshake_timeout_s", fmt_real(d.handshake_timeout_s));
    line("ping_interval_s", fmt_real(d.ping_interval_s));
    line("fallback_to_mock", fmt_bool(d.fallback_to_mock));
  }
  return s;
}

std::string_view defaults_snapshot() {
  return kDefaultsSnapshot;
}

std::string config_fingerprint(const RunConfig& config) {
  RunConfig c = config;
  const RunConfig defaults = default_config();
  c.inputs.clear();
  c.out_dir = defaults.out_dir;
  c.parallel_sources = 0;
  c.keep_intermediates = false;
  for (std::size_t i = 0; i < c.backends.size(); ++i) {
    BackendDescriptor& d = c.backends[i];
    const BackendDescriptor& base = defaults.backends[i];
    d.concurrency_slots = base.concurrency_slots;
    d.processes = base.processes;
    d.request_timeout_s = base.request_timeout_s;
    d.max_retries = base.max_retries;
    d.handshake_timeout_s = base.handshake_timeout_s;
    d.ping_interval_s = base.ping_interval_s;
    d.batch_size = base.batch_size;
  }
  return hash128_hex(dump_config(c));
}

}  // namespace wildcut
