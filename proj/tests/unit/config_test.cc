#include <gtest/gtest.h>

#include "fixtures.h"
#include "wildcut/config.h"
#include "wildcut/error.h"

using namespace wildcut;

namespace {

bool has_field(const std::vector<Diagnostic>& ds, const std::string& field, const std::string& text = "") {
  for (const auto& d : ds) {
    if (d.field == field && d.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Config, DefaultsMatchReferenceTableAndSnapshot) {
  EXPECT_TRUE(check_reference_defaults().empty());
  EXPECT_EQ(dump_config(default_config()), std::string(defaults_snapshot()));
  const RunConfig c = default_config();
  EXPECT_DOUBLE_EQ(c.loudness.target_dbfs, -20.0);
  EXPECT_DOUBLE_EQ(c.loudness.gain_clamp_db, 3.0);
  EXPECT_DOUBLE_EQ(c.segmentation.max_segment_s, 30.0);
  EXPECT_DOUBLE_EQ(c.filter.min_duration_s, 3.0);
  EXPECT_DOUBLE_EQ(c.filter.min_lang_confidence, 0.80);
  EXPECT_DOUBLE_EQ(c.filter.min_quality, 3.0);
  EXPECT_DOUBLE_EQ(c.filter.iqr_multiplier, 1.5);
  EXPECT_EQ(c.filter.target_languages.size(), 6u);
}

TEST(Config, DumpedDefaultsLoadCleanly) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "c.toml", dump_config(default_config()));
  const LoadResult r = load_config(dir / "c.toml");
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(dump_config(r.config), dump_config(default_config()));
}

TEST(Config, OutOfRangeConfidenceNamesFieldAndRange) {
  const LoadResult r = load_config(std::nullopt, {"filter.min_lang_confidence=1.5"});
  EXPECT_FALSE(r.ok());
  ASSERT_TRUE(has_field(r.diagnostics, "filter.min_lang_confidence", "[0, 1]"));
  const std::string json = diagnostic_to_json(r.diagnostics.at(0));
  EXPECT_NE(json.find("\"field\":\"filter.min_lang_confidence\""), std::string::npos) << json;
}

TEST(Config, EveryViolationIsListed) {
  const LoadResult r = load_config(std::nullopt, {"filter.min_lang_confidence=1.5", "vad.hop_ms=0",
                                                  "segmentation.min_emit_s=-1", "backends.asr.batch_size=0"});
  EXPECT_TRUE(has_field(r.diagnostics, "filter.min_lang_confidence"));
  EXPECT_TRUE(has_field(r.diagnostics, "vad.hop_ms"));
  EXPECT_TRUE(has_field(r.diagnostics, "segmentation.min_emit_s"));
  EXPECT_TRUE(has_field(r.diagnostics, "backends.asr.batch_size"));
  EXPECT_THROW(load_config_or_throw(std::nullopt, {"vad.hop_ms=0"}), ConfigError);
}

TEST(Config, SyntaxErrorCarriesLineAndColumn) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "bad.toml", "[run]\nparallel_sources = 2\nout_dir = \n");
  const LoadResult r = load_config(dir / "bad.toml");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics.at(0).line, 3);
  EXPECT_GT(r.diagnostics.at(0).column, 0);
}

TEST(Config, UnknownKeysAndBadTypes) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "c.toml", "[filter]\nmin_qualty = 3.5\n[loudness]\ntarget_dbfs = \"loud\"\n[mystery]\n");
  const LoadResult r = load_config(dir / "c.toml");
  EXPECT_TRUE(has_field(r.diagnostics, "filter.min_qualty", "unknown"));
  EXPECT_TRUE(has_field(r.diagnostics, "loudness.target_dbfs"));
  EXPECT_TRUE(has_field(r.diagnostics, "mystery"));
}

TEST(Config, OverridesApplyAfterFile) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "c.toml", "[filter]\nmin_quality = 3.5\n[run]\nlanguage_hint = \"en\"\n");
  const LoadResult r = load_config(dir / "c.toml", {"filter.min_quality=4.0", "run.language_hint=ja",
                                                    "filter.target_languages=[\"en\"]",
                                                    "backends.asr.kind=worker",
                                                    "backends.asr.command=[\"/bin/true\"]"});
  ASSERT_TRUE(r.ok()) << r.diagnostics.at(0).message;
  EXPECT_DOUBLE_EQ(r.config.filter.min_quality, 4.0);
  EXPECT_EQ(r.config.language_hint, "ja");
  EXPECT_EQ(r.config.filter.target_languages, std::set<std::string>{"en"});
  EXPECT_EQ(r.config.backend(Stage::kAsr).kind, BackendKind::kWorker);
  EXPECT_FALSE(load_config(std::nullopt, {"no_equals_sign"}).ok());
}

TEST(Config, ProbeReportsUnusableWorker) {
  const LoadResult r = load_config(std::nullopt, {"backends.asr.kind=worker",
                                                  "backends.asr.command=[\"/nonexistent/asr-worker\"]"});
  ASSERT_TRUE(r.ok());
  const auto diags = probe_backends(r.config);
  EXPECT_TRUE(has_field(diags, "backends.asr.command", "handshake"));

  const LoadResult good = load_config(
      std::nullopt, {"backends.asr.kind=worker",
                     "backends.asr.command=[\"" + fixtures::fake_worker() + "\", \"--stage\", \"asr\"]"});
  EXPECT_TRUE(probe_backends(good.config).empty());
}

TEST(Config, FingerprintIgnoresOperationalSettings) {
  RunConfig a = default_config();
  RunConfig b = a;
  b.parallel_sources = 8;
  b.out_dir = "/elsewhere";
  b.backend(Stage::kAsr).request_timeout_s = 10;
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  b.filter.min_quality = 3.5;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
}

TEST(Config, EffectiveParallelism) {
  RunConfig c = default_config();
  EXPECT_GE(c.effective_parallelism(), 1);
  c.parallel_sources = 3;
  EXPECT_EQ(c.effective_parallelism(), 3);
}
