// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Every check is computed here from first principles or
// against the reference routines in test_support.hpp.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "halluzig/metrics.hpp"
#include "halluzig/pipeline.hpp"
#include "halluzig/vectorize.hpp"
#include "halluzig/zigzag.hpp"
#include "test_support.hpp"

namespace hz = halluzig;
namespace ht = halluzig::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

Outcome betti_sum_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::size_t mismatches = 0;
  std::size_t checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t t = 0;
    const auto snaps = ht::union_snapshots(ht::random_layers(rng, t, 12, 8));
    const auto d = hz::compute_zigzag_persistence(hz::make_filtration(t, snaps));
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto [b0, b1] = ht::oracle_betti(t, snaps[i]);
      std::size_t c[2] = {0, 0};
      for (const auto& iv : d.intervals) {
        if (iv.contains(static_cast<std::int64_t>(i + 1))) ++c[iv.dim];
      }
      checks += 2;
      mismatches += (c[0] != b0) + (c[1] != b1);
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 10.0,
          fmt("200 filtrations, %zu index/dim checks, %zu mismatches, %.2f s (limit 10 s)", checks, mismatches, secs)};
}

Outcome hand_barcodes() {
  using PI = hz::PersistenceInterval;
  const hz::VertexPair e12{0, 1}, e23{1, 2}, e13{0, 2};
  bool ok = true;
  for (const auto backend : {hz::ZigzagBackend::graph_rank, hz::ZigzagBackend::brute_force}) {
    const auto a = hz::compute_zigzag_persistence(
        hz::make_filtration(3, {{e12, e23, e13}, {e12, e23, e13}, {e12, e23}}), 1, backend);
    ok &= ht::sorted_intervals(a) == std::vector<PI>{{1, 2, 1}, {1, 3, 0}};
    const auto b = hz::compute_zigzag_persistence(hz::make_filtration(3, {{e12}, {e12, e23}, {e23}}), 1, backend);
    ok &= ht::sorted_intervals(b) == std::vector<PI>{{1, 1, 0}, {1, 3, 0}, {3, 3, 0}};
  }
  return {ok, "triangle-then-broken -> H1 {[1,2]}, H0 {[1,3]}; disjoint edges -> H0 {[1,1],[1,3],[3,3]}; "
              "both backends"};
}

Outcome reversal_symmetry() {
  std::mt19937_64 rng(7001);
  std::size_t bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t t = 0;
    const auto f = hz::make_filtration(t, ht::union_snapshots(ht::random_layers(rng, t, 12, 8)));
    const auto d = hz::compute_zigzag_persistence(f);
    const auto r = hz::compute_zigzag_persistence(hz::reversed(f));
    bad += ht::sorted_intervals(r) != ht::mirrored(d);
  }
  return {bad == 0, fmt("50 filtrations, %zu barcode mismatches", bad)};
}

Outcome monotone_cross_check() {
  std::mt19937_64 rng(7002);
  std::size_t bad = 0;
  std::size_t bars = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t t = 0;
    const auto layers = ht::random_nested_layers(rng, t, 12, 8);
    const auto d = hz::compute_zigzag_persistence(hz::make_filtration(t, ht::union_snapshots(layers)));
    const auto expected = ht::expected_monotone_barcode(t, layers);
    bars += expected.size();
    bad += ht::sorted_intervals(d) != expected;
  }
  return {bad == 0, fmt("50 nested sequences (%zu bars) vs column-reduction persistence, %zu mismatches", bars, bad)};
}

Outcome vectorizer_units() {
  hz::PersistenceDiagram two;
  two.max_index = 5;
  two.intervals = {{1, 3, 1}, {2, 4, 1}};
  const double entropy_err = std::abs(hz::persistence_entropy(two) - std::log(2.0));

  hz::PersistenceDiagram one;
  one.max_index = 5;
  one.intervals = {{2, 4, 1}};
  hz::PersistenceDiagram nested;
  nested.max_index = 5;
  nested.intervals = {{1, 5, 1}, {3, 5, 1}};
  const bool curves = hz::betti_curve(one, 5) == std::vector<double>{0, 1, 1, 1, 0} &&
                      hz::betti_curve(hz::PersistenceDiagram{{}, 1, 5}, 5) == std::vector<double>(5, 0.0) &&
                      hz::betti_curve(nested, 5) == std::vector<double>{1, 1, 2, 2, 2};

  hz::NormalizedDiagram point;
  point.points = {{0.5, 1.0, 1}};
  const auto img = hz::persistence_image(point, 32, 32, 1.0 / 32);
  const double mass = std::accumulate(img.begin(), img.end(), 0.0);

  const bool ok = entropy_err <= 1e-12 && curves && std::abs(mass - 1.0) <= 1e-3;
  return {ok, fmt("|H - ln 2| = %.1e, Betti-curve examples %s, image mass %.6f (weight 1)", entropy_err,
                  curves ? "exact" : "WRONG", mass)};
}

Outcome metric_oracle() {
  std::mt19937_64 rng(7003);
  std::size_t bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 8) / 8.0;
      l[i] = static_cast<int>(rng() % 2);
    }
    l[0] = 1;
    l[1] = 0;
    const auto [doubled, pairs] = ht::pairwise_auroc(s, l);
    bad += hz::auroc(s, l) != static_cast<double>(doubled) / static_cast<double>(2 * pairs);
  }

  std::vector<double> s;
  std::vector<int> l;
  for (int i = 0; i < 20; ++i) {
    s.push_back(0.5 + 0.01 * i);
    l.push_back(1);
    s.push_back(i == 0 ? 0.99 : 0.01 * i);
    l.push_back(0);
  }
  const bool tpr = hz::tpr_at_fpr(s, l, 0.05) == 1.0 &&
                   hz::tpr_at_fpr(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) == 1.0 &&
                   hz::tpr_at_fpr(std::vector<double>(4, 0.5), std::vector<int>{1, 1, 0, 0}) == 0.0;
  return {bad == 0 && tpr, fmt("100 random sets: %zu AUROC mismatches; TPR@5%%FPR hand examples %s", bad,
                               tpr ? "exact" : "WRONG")};
}

/// Shared synthetic experiment: 200 samples per class, T = 20, L = 12, seed 7.
struct Experiment {
  ht::TempDir dir{"acceptance"};
  std::filesystem::path manifest;
  std::vector<hz::ManifestEntry> entries;
  hz::RunConfig config;
  double synth_seconds = 0.0;

  Experiment() {
    const auto start = Clock::now();
    hz::SynthParams p;
    p.n_per_class = 200;
    p.seq_len = 20;
    p.num_layers = 12;
    p.seed = 7;
    manifest = hz::cmd_synth(p, dir.path() / "data");
    entries = hz::read_dataset_manifest(manifest);
    synth_seconds = seconds_since(start);

    config.features.top_percent = 10.0;
    config.features.min_persistence = 5;
    config.features.dims = {1};
    config.features.scheme = hz::Scheme::pers_img;
    config.n_trees = 100;
    config.max_depth = 10;
    config.test_fraction = 0.2;
    config.seed = 7;
  }
};

Outcome synthetic_end_to_end(Experiment& x) {
  const auto start = Clock::now();
  const auto table = hz::featurize_dataset(x.entries, x.config.features, x.config.effective_workers()).table;
  const auto result = hz::train_eval(table, x.config);
  const double secs = seconds_since(start) + x.synth_seconds;
  const auto& r = result.runs.front().report;
  return {table.size() == 400 && r.auroc >= 0.90 && secs < 120.0,
          fmt("test AUROC %.4f (>= 0.90), F1 %.4f, n_test %zu, %.1f s including generation (limit 120 s)", r.auroc,
              r.f1, r.n_test, secs)};
}

Outcome depth_sweep(Experiment& x) {
  const auto rows = hz::depth_sweep(x.entries, x.config, {0.7, 1.0});
  const double f07 = rows[0].report.f1;
  const double f10 = rows[1].report.f1;
  return {f07 >= 0.95 * f10, fmt("F1 at 0.7 depth (%zu layers) = %.4f, at full depth = %.4f, ratio %.4f (>= 0.95)",
                                 rows[0].layers_used, f07, f10, f10 > 0 ? f07 / f10 : 0.0)};
}

Outcome static_vs_zigzag(Experiment& x) {
  const auto zz = hz::featurize_dataset(x.entries, x.config.features, x.config.effective_workers()).table;
  const auto st = hz::featurize_dataset(x.entries, x.config.features, x.config.effective_workers(),
                                        hz::FeatureMode::static_layers)
                      .table;
  const double a_zz = hz::train_eval(zz, x.config).runs.front().report.auroc;
  const double a_st = hz::train_eval(st, x.config).runs.front().report.auroc;
  return {a_zz >= a_st, fmt("zigzag AUROC %.4f vs static per-layer AUROC %.4f", a_zz, a_st)};
}

Outcome determinism(Experiment& x) {
  std::string csv[2], report[2];
  for (int run = 0; run < 2; ++run) {
    const auto out = x.dir.path() / ("features_" + std::to_string(run) + ".csv");
    const auto rep = x.dir.path() / ("report_" + std::to_string(run) + ".json");
    auto c = x.config;
    c.workers = run == 0 ? 1 : 4;  // scheduling must not leak into outputs
    hz::cmd_featurize(x.manifest, c, out);
    std::ostringstream log;
    hz::cmd_train_eval(out, c, rep, log);
    csv[run] = ht::read_file(out);
    report[run] = ht::read_file(rep);
  }
  const bool ok = !csv[0].empty() && csv[0] == csv[1] && report[0] == report[1];
  return {ok, fmt("feature CSV (%zu bytes) and report (%zu bytes) identical across two runs (1 vs 4 workers)",
                  csv[0].size(), report[0].size())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  Experiment* experiment = nullptr;
  auto exp = [&]() -> Experiment& {
    if (experiment == nullptr) experiment = new Experiment();
    return *experiment;
  };
  const std::vector<Criterion> criteria = {
      {"betti_sum_oracle", betti_sum_oracle},
      {"hand_computed_barcodes", hand_barcodes},
      {"reversal_symmetry", reversal_symmetry},
      {"monotone_cross_check", monotone_cross_check},
      {"vectorizer_units", vectorizer_units},
      {"metric_oracle", metric_oracle},
      {"synthetic_end_to_end", [&] { return synthetic_end_to_end(exp()); }},
      {"depth_sweep_property", [&] { return depth_sweep(exp()); }},
      {"static_vs_zigzag_direction", [&] { return static_vs_zigzag(exp()); }},
      {"determinism", [&] { return determinism(exp()); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %-28s %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  delete experiment;
  std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
