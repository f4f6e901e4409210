#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "halluzig/attention.hpp"
#include "halluzig/forest.hpp"
#include "halluzig/synth.hpp"
#include "halluzig/vectorize.hpp"
#include "halluzig/zigzag.hpp"

namespace hz = halluzig;

namespace {

hz::AttentionSample sample_of(std::size_t seq_len, std::size_t layers) {
  hz::SynthParams p;
  p.seq_len = seq_len;
  p.num_layers = layers;
  p.seed = 11;
  return hz::synth_sample(p, 1);
}

void BM_BuildGraph(benchmark::State& state) {
  const auto s = sample_of(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(hz::build_graph(s.layers[0], 1, 10.0));
}
BENCHMARK(BM_BuildGraph)->Arg(20)->Arg(128)->Arg(512);

void run_zigzag(benchmark::State& state, hz::ZigzagBackend backend) {
  const auto s = sample_of(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto graphs = hz::build_graph_sequence(s, 10.0);
  const auto f = hz::build_zigzag(graphs);
  for (auto _ : state) benchmark::DoNotOptimize(hz::compute_zigzag_persistence(f, 1, backend));
}

void BM_ZigzagGraphRank(benchmark::State& state) { run_zigzag(state, hz::ZigzagBackend::graph_rank); }
BENCHMARK(BM_ZigzagGraphRank)->Args({20, 12})->Args({64, 32})->Args({256, 32});

void BM_ZigzagBruteForce(benchmark::State& state) { run_zigzag(state, hz::ZigzagBackend::brute_force); }
BENCHMARK(BM_ZigzagBruteForce)->Args({12, 6})->Args({20, 12});

void BM_FeaturizeSample(benchmark::State& state) {
  const auto s = sample_of(20, 12);
  hz::FeatureParams p;
  for (auto _ : state) benchmark::DoNotOptimize(hz::featurize_sample(s, p));
}
BENCHMARK(BM_FeaturizeSample);

void BM_PersistenceImage(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  hz::NormalizedDiagram d;
  for (int i = 0; i < state.range(0); ++i) d.points.push_back({u(rng), u(rng), 1});
  for (auto _ : state) benchmark::DoNotOptimize(hz::persistence_image(d, 32, 32, 1.0 / 32));
}
BENCHMARK(BM_PersistenceImage)->Arg(1)->Arg(16)->Arg(128);

void BM_TrainForest(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t width = 1024;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> x(n * width);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < width; ++j) x[i * width + j] = g(rng) + (j < 8 ? 0.5f * y[i] : 0.0f);
  }
  hz::ForestParams p;
  p.n_trees = 100;
  p.max_depth = 10;
  p.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(hz::train_forest(x, width, y, p));
}
BENCHMARK(BM_TrainForest)->Arg(320)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
