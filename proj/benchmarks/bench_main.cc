#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "wildcut/filter.h"
#include "wildcut/manifest.h"
#include "wildcut/segment.h"
#include "wildcut/standardize.h"
#include "wildcut/vad.h"

using namespace wildcut;

namespace {

std::vector<float> noisy_speechlike(int rate, double seconds) {
  std::mt19937 rng(1);
  std::normal_distribution<float> n(0.0f, 0.05f);
  std::vector<float> x(static_cast<std::size_t>(rate * seconds));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const bool on = std::fmod(t, 3.0) < 2.0;
    x[i] = (on ? 0.3f * static_cast<float>(std::sin(2.0 * std::numbers::pi * 220.0 * t)) : 0.0f) + 0.01f * n(rng);
  }
  return x;
}

void BM_Resample(benchmark::State& state) {
  const int from = static_cast<int>(state.range(0));
  const auto x = noisy_speechlike(from, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(resample(x, from));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(x.size()));
}
BENCHMARK(BM_Resample)->Arg(16000)->Arg(44100)->Arg(48000)->Unit(benchmark::kMillisecond);

void BM_ReferenceVad(benchmark::State& state) {
  const auto x = noisy_speechlike(kStandardSampleRate, 60.0);
  const VadParams p;
  for (auto _ : state) benchmark::DoNotOptimize(reference_vad(x, kStandardSampleRate, p));
}
BENCHMARK(BM_ReferenceVad)->Unit(benchmark::kMillisecond);

void BM_Segment(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<VadChunk> chunks;
  double t = 0.0;
  for (int64_t i = 0; i < state.range(0); ++i) {
    const double len = 0.2 + 8.0 * u(rng);
    chunks.push_back({t, t + len, fmt::format("spk{}", rng() % 3)});
    t += len + 3.0 * u(rng);
  }
  const SegmentationParams p;
  for (auto _ : state) benchmark::DoNotOptimize(segment_chunks(chunks, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Segment)->Arg(100)->Arg(10000);

void BM_Quantile(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantile(v, 0.25));
    benchmark::DoNotOptimize(quantile(v, 0.75));
  }
}
BENCHMARK(BM_Quantile)->Arg(1000);

void BM_ApplyFilters(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SegmentRecord> recs;
  for (int64_t i = 0; i < state.range(0); ++i) {
    SegmentRecord r;
    r.segment_id = make_segment_id("bench", static_cast<std::size_t>(i));
    r.source_id = "bench";
    r.language = u(rng) < 0.9 ? "en" : "it";
    r.lang_confidence = 0.7 + 0.3 * u(rng);
    r.dnsmos_ovrl = 2.5 + 2.0 * u(rng);
    r.duration_s = 1.0 + 29.0 * u(rng);
    r.text = std::string(static_cast<std::size_t>(r.duration_s / 0.08), 'a');
    recs.push_back(std::move(r));
  }
  const FilterParams p;
  for (auto _ : state) benchmark::DoNotOptimize(apply_filters(recs, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ApplyFilters)->Arg(200)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
