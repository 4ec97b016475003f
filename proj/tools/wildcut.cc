// wildcut: command line front end for the corpus pipeline.
//
//   wildcut run      [INPUT...] [--config FILE] [--set K=V]... [--out-dir DIR] [--json]
//   wildcut resume   [INPUT...] [--config FILE] [--set K=V]... [--out-dir DIR] [--json]
//   wildcut validate [--config FILE] [--set K=V]... [--dump-config] [--no-probe]
//   wildcut stats    --out-dir DIR [--json]
//   wildcut bench    [--hours H] [--config FILE] [--set K=V]... [--out-dir DIR] [--json]
//
// Machine-readable output goes to stdout, logs to stderr.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wildcut/config.h"
#include "wildcut/error.h"
#include "wildcut/orchestrator.h"
#include "wildcut/stats.h"
#include "wildcut/synth.h"

namespace fs = std::filesystem;
using namespace wildcut;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_out_dir = true) {
  cmd->add_option("--config", c.config, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override a setting, e.g. --set filter.min_quality=3.5")
      ->allow_extra_args(false);
  if (with_out_dir) cmd->add_option("--out-dir", c.out_dir, "Output directory (overrides run.out_dir)");
  cmd->add_flag("--json", c.json, "Print machine-readable JSON");
}

RunConfig load(const Common& c, const std::vector<std::string>& inputs) {
  std::optional<fs::path> file;
  if (!c.config.empty()) file = c.config;
  RunConfig cfg = load_config_or_throw(file, c.overrides);
  if (!inputs.empty()) cfg.inputs = inputs;
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_result(const RunResult& r, const RunConfig& cfg, bool json) {
  if (json) {
    std::cout << read_file(cfg.out_dir / "report.json");
    return;
  }
  std::cout << render_table(r.report);
  std::cout << fmt::format("sources: {} ({} processed now, {} already done, {} failed)\n", r.sources_total,
                           r.sources_processed, r.sources_skipped, r.sources_failed);
  std::cout << fmt::format("output: {}\n", cfg.out_dir.string());
}

int cmd_validate(const Common& c, bool dump, bool no_probe) {
  std::optional<fs::path> file;
  if (!c.config.empty()) file = c.config;
  LoadResult r = load_config(file, c.overrides);
  if (dump) {
    std::cout << dump_config(r.config);
    return r.ok() ? 0 : 1;
  }
  std::vector<Diagnostic> diags = r.diagnostics;
  for (auto& d : check_reference_defaults()) diags.push_back(std::move(d));
  if (r.ok() && !no_probe) {
    for (auto& d : probe_backends(r.config)) diags.push_back(std::move(d));
  }
  bool clean = true;
  for (const auto& d : diags) {
    std::cout << diagnostic_to_json(d) << "\n";
    if (d.severity == "error") clean = false;
  }
  if (clean) spdlog::info("configuration is valid");
  return clean ? 0 : 1;
}

int cmd_stats(const Common& c) {
  const fs::path dir = c.out_dir.empty() ? default_config().out_dir : fs::path(c.out_dir);
  const fs::path report = dir / "report.json";
  if (!fs::is_regular_file(report)) {
    spdlog::error("no report.json in {}; run `wildcut run` (or `wildcut resume`) first", dir.string());
    return 1;
  }
  const std::string bytes = read_file(report);
  if (c.json) {
    std::cout << bytes;
    return 0;
  }
  std::cout << render_table(report_from_json(nlohmann::json::parse(bytes)));
  return 0;
}

int cmd_bench(const Common& c, double hours, bool keep) {
  RunConfig cfg = load(c, {});
  const bool temporary = c.out_dir.empty();
  fs::path root = temporary ? fs::temp_directory_path() / fmt::format("wildcut-bench-{}", ::getpid())
                            : fs::path(c.out_dir);
  fs::create_directories(root);
  SynthSpec spec;
  spec.total_hours = hours;
  spdlog::info("generating {:.2f} h of synthetic audio under {}", hours, (root / "corpus").string());
  generate_corpus(root / "corpus", spec);
  cfg.inputs = {(root / "corpus").string()};
  cfg.out_dir = root / "run";
  if (fs::exists(cfg.out_dir)) fs::remove_all(cfg.out_dir);

  const RunResult r = run(cfg);
  const Throughput tp = measure_throughput(read_journal(cfg.out_dir / "journal.jsonl").entries,
                                           r.report.raw.total_duration_h);
  if (c.json) {
    nlohmann::ordered_json j;
    j["synthetic_hours"] = hours;
    j["raw_hours"] = r.report.raw.total_duration_h;
    j["wall_clock_s"] = tp.wall_clock_s;
    j["h_per_min"] = tp.h_per_min ? nlohmann::ordered_json(*tp.h_per_min) : nlohmann::ordered_json(nullptr);
    j["parallel_sources"] = cfg.effective_parallelism();
    j["per_stage_s"] = tp.per_stage_s;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << fmt::format("raw audio:   {:.3f} h\n", r.report.raw.total_duration_h);
    std::cout << fmt::format("wall clock:  {:.2f} s ({} parallel sources)\n", tp.wall_clock_s,
                             cfg.effective_parallelism());
    std::cout << (tp.h_per_min ? fmt::format("throughput:  {:.2f} h/min\n", *tp.h_per_min)
                               : std::string("throughput:  n/a\n"));
    std::cout << "per-stage time (summed over sources):\n";
    for (const char* stage : kPipelineStages) {
      std::cout << fmt::format("  {:<12} {:>10.2f} s\n", stage, tp.per_stage_s.at(stage));
    }
  }
  if (temporary && !keep) fs::remove_all(root);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("wildcut");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"wildcut: in-the-wild speech corpus pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More log output on stderr (repeatable)");

  Common c;
  std::vector<std::string> inputs;
  auto* run_cmd = app.add_subcommand("run", "Process inputs into a fresh output directory");
  add_common(run_cmd, c);
  run_cmd->add_option("inputs", inputs, "Input files, directories or glob patterns");

  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  add_common(resume_cmd, c);
  resume_cmd->add_option("inputs", inputs, "Input files, directories or glob patterns");

  bool dump = false;
  bool no_probe = false;
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration and probe worker backends");
  add_common(validate_cmd, c, false);
  validate_cmd->add_flag("--dump-config", dump, "Print the effective configuration as TOML");
  validate_cmd->add_flag("--no-probe", no_probe, "Skip worker handshakes");

  auto* stats_cmd = app.add_subcommand("stats", "Render report.json of a finished run");
  stats_cmd->add_option("--out-dir", c.out_dir, "Output directory of the run");
  stats_cmd->add_flag("--json", c.json, "Print report.json verbatim");

  double hours = 1.0;
  bool keep = false;
  auto* bench_cmd = app.add_subcommand("bench", "Measure throughput on a synthetic corpus");
  add_common(bench_cmd, c);
  bench_cmd->add_option("--hours", hours, "Synthetic corpus size in hours")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--keep", keep, "Keep the temporary corpus and output");

  CLI11_PARSE(app, argc, argv);
  if (verbosity == 1) spdlog::set_level(spdlog::level::info);
  if (verbosity >= 2) spdlog::set_level(spdlog::level::debug);

  try {
    if (*run_cmd || *resume_cmd) {
      const RunConfig cfg = load(c, inputs);
      const RunResult r = *run_cmd ? run(cfg) : resume(cfg);
      print_result(r, cfg, c.json);
      return r.exit_code;
    }
    if (*validate_cmd) return cmd_validate(c, dump, no_probe);
    if (*stats_cmd) return cmd_stats(c);
    if (*bench_cmd) return cmd_bench(c, hours, keep);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
    return 1;
  }
  return 1;
}
