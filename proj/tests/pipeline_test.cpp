#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "halluzig/error.hpp"
#include "halluzig/forest.hpp"
#include "halluzig/pipeline.hpp"
#include "halluzig/vectorize.hpp"
#include "test_support.hpp"

namespace halluzig {
namespace {

using testing::TempDir;

SynthParams small_synth(std::size_t n_per_class = 20, std::uint64_t seed = 1) {
  SynthParams p;
  p.n_per_class = n_per_class;
  p.seq_len = 12;
  p.num_layers = 6;
  p.seed = seed;
  return p;
}

RunConfig quick_config() {
  RunConfig c;
  c.n_trees = 20;
  c.max_depth = 6;
  c.workers = 2;
  return c;
}

TEST(Synth, DeterministicBytes) {
  TempDir a("synth_a"), b("synth_b");
  const auto p = small_synth(3, 5);
  write_synth_dataset(p, a.path());
  write_synth_dataset(p, b.path());
  for (const char* f : {"manifest.jsonl", "sample_00000/manifest.json", "sample_00000/layer_003.bin",
                        "sample_00005/layer_005.bin"}) {
    EXPECT_EQ(testing::read_file(a / f), testing::read_file(b / f)) << f;
  }
  const auto s = load_sample(a / "sample_00001");
  EXPECT_EQ(s.label, 1);
  EXPECT_EQ(s.sample_id, "synth_00001");
  EXPECT_TRUE(s.causal);
}

TEST(Synth, Preconditions) {
  auto p = small_synth();
  p.seq_len = 5;
  EXPECT_THROW(p.validate(), UsageError);
  p = small_synth();
  p.num_layers = 3;
  EXPECT_THROW(p.validate(), UsageError);
}

TEST(Synth, StableClassHasLongLoop) {
  SynthParams p;  // T = 20, L = 12
  FeatureParams f;
  for (std::size_t k = 0; k < 40; k += 2) {
    const auto d = sample_barcode(synth_sample(p, k), f).restricted_to(1);
    std::int64_t longest = 0;
    for (const auto& iv : d.intervals) longest = std::max(longest, iv.lifetime());
    EXPECT_GE(longest, static_cast<std::int64_t>(2 * p.num_layers - 3)) << "sample " << k;
  }
}

TEST(Synth, EphemeralClassLoopsAreShortOverSeeds) {
  FeatureParams f;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthParams p;
    p.seed = seed;
    const auto d = sample_barcode(synth_sample(p, 1), f).restricted_to(1);
    std::int64_t longest = 0;
    for (const auto& iv : d.intervals) longest = std::max(longest, iv.lifetime());
    ok += longest <= 5;
  }
  EXPECT_GE(ok, 95);
}

TEST(DatasetManifest, ResolvesRelativePaths) {
  TempDir dir("manifest");
  testing::write_file(dir / "m.jsonl", "{\"path\":\"a\",\"label\":0}\n\n{\"path\":\"/abs/b\",\"label\":null}\n");
  const auto entries = read_dataset_manifest(dir / "m.jsonl");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].path, dir.path() / "a");
  EXPECT_EQ(entries[0].label, 0);
  EXPECT_EQ(entries[1].path, std::filesystem::path("/abs/b"));
  EXPECT_FALSE(entries[1].label.has_value());
}

TEST(DatasetManifest, Errors) {
  TempDir dir("manifest_err");
  EXPECT_THROW(read_dataset_manifest(dir / "none.jsonl"), DataError);
  testing::write_file(dir / "bad.jsonl", "{\"label\":0}\n");
  EXPECT_THROW(read_dataset_manifest(dir / "bad.jsonl"), DataError);
}

TEST(Featurize, ThreeSamples) {
  TempDir dir("feat3");
  const auto manifest = write_synth_dataset(small_synth(2), dir / "data");
  // Keep the first three manifest lines.
  std::istringstream in(testing::read_file(manifest));
  std::string out, line;
  for (int i = 0; i < 3 && std::getline(in, line); ++i) out += line + "\n";
  testing::write_file(manifest, out);

  const auto result = cmd_featurize(manifest, quick_config(), dir / "f.csv");
  EXPECT_EQ(result.table.size(), 3u);
  const auto text = testing::read_file(dir / "f.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_FALSE(std::filesystem::exists(dir / "f.csv.errors.jsonl"));
}

TEST(Featurize, CorruptSampleIsIsolated) {
  TempDir dir("feat_corrupt");
  const auto manifest = write_synth_dataset(small_synth(2), dir / "data");
  std::filesystem::remove(dir / "data" / "sample_00001" / "layer_002.bin");
  const auto result = cmd_featurize(manifest, quick_config(), dir / "f.csv");
  EXPECT_EQ(result.table.size(), 3u);
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].index, 1u);
  const auto log = testing::read_file(dir / "f.csv.errors.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1);
  const auto entry = nlohmann::json::parse(log);
  EXPECT_EQ(entry["code"], "shape_mismatch");
  // Manifest order is preserved around the hole.
  EXPECT_EQ(result.table.sample_id(0), "synth_00000");
  EXPECT_EQ(result.table.sample_id(1), "synth_00002");
}

TEST(Featurize, AllCorruptFails) {
  TempDir dir("feat_all");
  testing::write_file(dir / "m.jsonl", "{\"path\":\"x\",\"label\":0}\n{\"path\":\"y\",\"label\":1}\n");
  try {
    cmd_featurize(dir / "m.jsonl", quick_config(), dir / "f.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.code(), ErrorCode::all_samples_failed);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "f.csv.errors.jsonl"));
}

TEST(Featurize, WorkerCountDoesNotChangeOutput) {
  TempDir dir("feat_workers");
  const auto manifest = write_synth_dataset(small_synth(6), dir / "data");
  auto c = quick_config();
  c.workers = 1;
  cmd_featurize(manifest, c, dir / "a.csv");
  c.workers = 3;
  cmd_featurize(manifest, c, dir / "b.csv");
  EXPECT_EQ(testing::read_file(dir / "a.csv"), testing::read_file(dir / "b.csv"));
}

class TrainEvalFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("train_eval");
    manifest_ = write_synth_dataset(small_synth(30), dir_->path() / "data");
    cmd_featurize(manifest_, quick_config(), dir_->path() / "f.csv");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static TempDir* dir_;
  static std::filesystem::path manifest_;
};

TempDir* TrainEvalFixture::dir_ = nullptr;
std::filesystem::path TrainEvalFixture::manifest_;

TEST_F(TrainEvalFixture, SeparatesSyntheticClasses) {
  std::ostringstream log;
  const auto r = cmd_train_eval(dir_->path() / "f.csv", quick_config(), dir_->path() / "r.json", log);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_GE(r.runs[0].report.auroc, 0.95);
  const auto report = nlohmann::json::parse(testing::read_file(dir_->path() / "r.json"));
  EXPECT_EQ(report["command"], "train-eval");
  EXPECT_EQ(report["config"]["n_trees"], 20);
  EXPECT_EQ(report["runs"][0]["seed"], 0);
}

TEST_F(TrainEvalFixture, MultiSeedAggregate) {
  auto c = quick_config();
  c.seeds = {1, 2, 3};
  std::ostringstream log;
  const auto r = cmd_train_eval(dir_->path() / "f.csv", c, dir_->path() / "r3.json", log);
  ASSERT_EQ(r.runs.size(), 3u);
  const auto report = nlohmann::json::parse(testing::read_file(dir_->path() / "r3.json"));
  ASSERT_EQ(report["runs"].size(), 3u);
  for (const char* k : {"mean", "std", "best"}) {
    EXPECT_TRUE(report["aggregate"].contains(k)) << k;
    EXPECT_TRUE(report["aggregate"][k].contains("auroc")) << k;
  }
  double mean = 0.0;
  for (const auto& run : r.runs) mean += run.report.auroc / 3.0;
  EXPECT_NEAR(r.mean.auroc, mean, 1e-12);
}

TEST_F(TrainEvalFixture, StagedEqualsFused) {
  const auto table = read_feature_csv(dir_->path() / "f.csv");
  const auto fused = featurize_dataset(read_dataset_manifest(manifest_), quick_config().features, 2).table;
  EXPECT_EQ(table, fused);
  const auto staged = train_eval(table, quick_config());
  const auto direct = train_eval(fused, quick_config());
  EXPECT_EQ(train_eval_json("x", quick_config(), staged), train_eval_json("x", quick_config(), direct));
}

TEST_F(TrainEvalFixture, TransferOntoItself) {
  std::ostringstream log;
  const auto r = cmd_transfer(dir_->path() / "f.csv", dir_->path() / "f.csv", quick_config(), {}, log);
  const auto table = read_feature_csv(dir_->path() / "f.csv");
  auto c = quick_config();
  ForestParams p;
  p.n_trees = c.n_trees;
  p.max_depth = c.max_depth;
  p.seed = c.seed;
  const auto model = train_forest(table, p);
  const auto expected = evaluate(model.predict_proba(table), table.labels());
  EXPECT_EQ(r.auroc, expected.auroc);
  EXPECT_EQ(r.f1, expected.f1);
  EXPECT_EQ(r.n_test, table.size());
}

TEST_F(TrainEvalFixture, TransferWidthMismatch) {
  auto c = quick_config();
  c.features.scheme = Scheme::betti_curve;
  cmd_featurize(manifest_, c, dir_->path() / "betti.csv");
  std::ostringstream log;
  try {
    cmd_transfer(dir_->path() / "f.csv", dir_->path() / "betti.csv", quick_config(), {}, log);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.code(), ErrorCode::transfer_incompatible);
  }
}

TEST_F(TrainEvalFixture, DepthSweepRows) {
  std::ostringstream log;
  const auto rows =
      cmd_depth_sweep(manifest_, quick_config(), {0.3, 0.5, 0.7, 1.0}, dir_->path() / "sweep.csv", log);
  ASSERT_EQ(rows.size(), 4u);
  const auto csv = testing::read_file(dir_->path() / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(rows[3].layers_used, 6u);
  // The full-depth row equals a plain train-eval run with the same seed.
  const auto plain = train_eval(read_feature_csv(dir_->path() / "f.csv"), quick_config());
  EXPECT_EQ(eval_report_json(rows[3].report), eval_report_json(plain.runs[0].report));
}

TEST_F(TrainEvalFixture, DepthSweepRejectsShallowFraction) {
  std::ostringstream log;
  EXPECT_THROW(cmd_depth_sweep(manifest_, quick_config(), {0.1}, {}, log), DataError);
  EXPECT_THROW(cmd_depth_sweep(manifest_, quick_config(), {1.5}, {}, log), UsageError);
}

TEST_F(TrainEvalFixture, StaticBaselineRuns) {
  std::ostringstream log;
  auto c = quick_config();
  c.features.scheme = Scheme::betti_curve;
  const auto r = cmd_static_baseline(manifest_, c, dir_->path() / "static.json", log);
  EXPECT_EQ(r.runs.size(), 1u);
  const auto report = nlohmann::json::parse(testing::read_file(dir_->path() / "static.json"));
  EXPECT_EQ(report["command"], "static-baseline");
}

TEST_F(TrainEvalFixture, PersistExportsBarcodes) {
  const auto n = cmd_persist(manifest_, quick_config(), dir_->path() / "bars");
  EXPECT_EQ(n, 60u);
  const auto text = testing::read_file(dir_->path() / "bars" / "synth_00000.jsonl");
  const auto header = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(header["max_index"], 11);
  EXPECT_EQ(header["sample_id"], "synth_00000");
  EXPECT_EQ(cmd_persist(dir_->path() / "data" / "sample_00003", quick_config(), dir_->path() / "one.jsonl"), 1u);
}

TEST(TrainEval, SingleClassRejected) {
  FeatureTable t(1);
  for (int i = 0; i < 6; ++i) t.add_row("s" + std::to_string(i), 0, "x", std::vector<double>{double(i)});
  try {
    train_eval(t, quick_config());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.code(), ErrorCode::single_class);
  }
}

TEST(RunConfig, JsonPrecedenceAndEcho) {
  RunConfig c;
  apply_config_json(c, R"({"top_percent": 20, "dims": [0, 1], "scheme": "betti_curve", "seeds": [4, 5]})");
  EXPECT_EQ(c.features.top_percent, 20.0);
  EXPECT_EQ(c.features.dims, (std::vector<int>{0, 1}));
  EXPECT_EQ(c.features.scheme, Scheme::betti_curve);
  EXPECT_EQ(c.effective_seeds(), (std::vector<std::uint64_t>{4, 5}));
  RunConfig back;
  apply_config_json(back, config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_THROW(apply_config_json(c, R"({"n_trees": 5, "colour": 1})"), UsageError);
  EXPECT_THROW(apply_config_json(c, R"({"n_trees": "many"})"), UsageError);
  EXPECT_THROW(apply_config_json(c, "[1]"), UsageError);
}

TEST(RunConfig, ListParsers) {
  EXPECT_EQ(parse_dims("1, 0"), (std::vector<int>{0, 1}));
  EXPECT_THROW(parse_dims("2"), UsageError);
  EXPECT_EQ(parse_seed_list("1,2,3"), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_THROW(parse_seed_list("1,x"), UsageError);
  EXPECT_EQ(parse_fraction_list("0.3,1"), (std::vector<double>{0.3, 1.0}));
  EXPECT_THROW(parse_fraction_list(""), UsageError);
}

// ---- command-line tool ----------------------------------------------------

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + HALLUZIG_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, EndToEndAndExitCodes) {
  TempDir dir("cli");
  const auto d = dir.path().string();
  ASSERT_EQ(run_cli("synth --n-per-class 15 -T 10 -L 5 --seed 3 --out " + d + "/data"), 0);
  ASSERT_EQ(run_cli("featurize --manifest " + d + "/data/manifest.jsonl --out " + d + "/f.csv --workers 2"), 0);
  testing::write_file(dir / "cfg.json", R"({"n_trees": 10, "max_depth": 4})");
  ASSERT_EQ(run_cli("train-eval --features " + d + "/f.csv --config " + d + "/cfg.json --n-trees 12 --report " + d +
                    "/r.json"),
            0);
  const auto report = nlohmann::json::parse(testing::read_file(dir / "r.json"));
  EXPECT_EQ(report["config"]["n_trees"], 12);  // flag beats config file
  EXPECT_EQ(report["config"]["max_depth"], 4);  // config file beats default
  EXPECT_EQ(run_cli("train-eval --features " + d + "/f.csv --seeds 1,2", "HALLUZIG_WORKERS=2"), 0);
  EXPECT_EQ(run_cli("persist --input " + d + "/data/sample_00000 --out " + d + "/b.jsonl"), 0);
  EXPECT_EQ(run_cli("depth-sweep --manifest " + d + "/data/manifest.jsonl --fractions 0.6,1 --n-trees 5"), 0);
  EXPECT_EQ(run_cli("static-baseline --manifest " + d + "/data/manifest.jsonl --n-trees 5"), 0);

  EXPECT_EQ(run_cli("train-eval --features " + d + "/f.csv --top-percent 0"), 2);
  EXPECT_EQ(run_cli("train-eval --features " + d + "/f.csv --bogus"), 2);
  EXPECT_EQ(run_cli("train-eval --features " + d + "/f.csv", "HALLUZIG_WORKERS=x"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("train-eval --features " + d + "/missing.csv"), 3);
  EXPECT_EQ(run_cli("featurize --manifest " + d + "/missing.jsonl --out " + d + "/g.csv"), 3);
  EXPECT_EQ(run_cli("depth-sweep --manifest " + d + "/data/manifest.jsonl --fractions 0.2"), 3);
}

}  // namespace
}  // namespace halluzig
