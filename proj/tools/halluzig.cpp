// halluzig: featurize attention dumps with zigzag persistence, train and
// evaluate the forest classifier, and run the supporting experiments.
//
// Exit codes: 0 success (per-sample errors may be logged), 2 usage error,
// 3 data error, 4 internal invariant violation.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "halluzig/error.hpp"
#include "halluzig/pipeline.hpp"
#include "halluzig/run_config.hpp"
#include "halluzig/synth.hpp"

namespace fs = std::filesystem;
using namespace halluzig;

namespace {

/// Flags shared by every pipeline subcommand. Values given on the command
/// line override the config file, which overrides built-in defaults.
struct SharedFlags {
  double top_percent = 0;
  std::int64_t min_persistence = 0;
  std::string dims;
  std::string scheme;
  double depth_fraction = 0;
  std::size_t n_trees = 0;
  std::size_t max_depth = 0;
  std::uint64_t seed = 0;
  std::string seeds;
  double test_fraction = 0;
  std::size_t workers = 0;
  std::string config;

  std::vector<std::pair<CLI::Option*, void (*)(const SharedFlags&, RunConfig&)>> options;
  CLI::Option* workers_opt = nullptr;

  void attach(CLI::App* app) {
    auto add = [&](CLI::Option* opt, void (*apply)(const SharedFlags&, RunConfig&)) {
      options.emplace_back(opt, apply);
    };
    add(app->add_option("--top-percent", top_percent, "percentage of edges kept per layer (default 10)"),
        [](const SharedFlags& f, RunConfig& c) { c.features.top_percent = f.top_percent; });
    add(app->add_option("--min-persistence", min_persistence, "minimum bar lifetime in layers (default 5)"),
        [](const SharedFlags& f, RunConfig& c) { c.features.min_persistence = f.min_persistence; });
    add(app->add_option("--dims", dims, "homology dimensions, e.g. 1 or 0,1 (default 1)"),
        [](const SharedFlags& f, RunConfig& c) { c.features.dims = parse_dims(f.dims); });
    add(app->add_option("--scheme", scheme, "pers_img | pers_entropy | betti_curve (default pers_img)"),
        [](const SharedFlags& f, RunConfig& c) { c.features.scheme = parse_scheme(f.scheme); });
    add(app->add_option("--depth-fraction", depth_fraction, "fraction of layers used, in (0, 1] (default 1)"),
        [](const SharedFlags& f, RunConfig& c) { c.features.depth_fraction = f.depth_fraction; });
    add(app->add_option("--n-trees", n_trees, "forest size (default 100)"),
        [](const SharedFlags& f, RunConfig& c) { c.n_trees = f.n_trees; });
    add(app->add_option("--max-depth", max_depth, "maximum tree depth (default 6)"),
        [](const SharedFlags& f, RunConfig& c) { c.max_depth = f.max_depth; });
    add(app->add_option("--seed", seed, "split and forest seed (default 0)"),
        [](const SharedFlags& f, RunConfig& c) { c.seed = f.seed; });
    add(app->add_option("--seeds", seeds, "comma-separated seeds; one evaluation per seed plus an aggregate"),
        [](const SharedFlags& f, RunConfig& c) { c.seeds = parse_seed_list(f.seeds); });
    add(app->add_option("--test-fraction", test_fraction, "held-out fraction (default 0.2)"),
        [](const SharedFlags& f, RunConfig& c) { c.test_fraction = f.test_fraction; });
    workers_opt = app->add_option("--workers", workers, "worker threads (default: $HALLUZIG_WORKERS, else all cores)");
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config.empty()) apply_config_file(c, config);
    for (const auto& [opt, apply] : options) {
      if (opt->count() > 0) apply(*this, c);
    }
    if (workers_opt->count() > 0) {
      c.workers = workers;
    } else if (const char* env = std::getenv("HALLUZIG_WORKERS"); env != nullptr && *env != '\0') {
      const auto parsed = parse_seed_list(env);
      if (parsed.size() != 1) throw UsageError("HALLUZIG_WORKERS must be a single integer");
      c.workers = static_cast<std::size_t>(parsed.front());
    }
    c.validate();
    return c;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Zigzag-persistence hallucination detection from attention dumps"};
  app.require_subcommand(1);

  // featurize
  auto* featurize = app.add_subcommand("featurize", "dataset manifest -> feature CSV");
  SharedFlags featurize_flags;
  fs::path featurize_manifest, featurize_out;
  featurize->add_option("--manifest", featurize_manifest, "dataset manifest (JSON lines)")->required();
  featurize->add_option("--out", featurize_out, "feature CSV to write")->required();
  featurize_flags.attach(featurize);

  // train-eval
  auto* train_eval_cmd = app.add_subcommand("train-eval", "feature CSV -> split, train, evaluate");
  SharedFlags train_flags;
  fs::path train_features, train_report;
  train_eval_cmd->add_option("--features", train_features, "feature CSV")->required();
  train_eval_cmd->add_option("--report", train_report, "JSON report to write");
  train_flags.attach(train_eval_cmd);

  // transfer
  auto* transfer = app.add_subcommand("transfer", "train on one feature CSV, evaluate on another");
  SharedFlags transfer_flags;
  fs::path transfer_train, transfer_test, transfer_report;
  transfer->add_option("--train", transfer_train, "training feature CSV")->required();
  transfer->add_option("--test", transfer_test, "evaluation feature CSV")->required();
  transfer->add_option("--report", transfer_report, "JSON report to write");
  transfer_flags.attach(transfer);

  // depth-sweep
  auto* sweep = app.add_subcommand("depth-sweep", "re-featurize and evaluate at several depth fractions");
  SharedFlags sweep_flags;
  fs::path sweep_manifest, sweep_out;
  std::string sweep_fractions = "0.3,0.5,0.7,1.0";
  sweep->add_option("--manifest", sweep_manifest, "dataset manifest")->required();
  sweep->add_option("--fractions", sweep_fractions, "comma-separated depth fractions")->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV to write (default: stdout)");
  sweep_flags.attach(sweep);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic dataset");
  SynthParams synth_params;
  fs::path synth_out;
  synth->add_option("--n-per-class", synth_params.n_per_class, "samples per class")->capture_default_str();
  synth->add_option("--seq-len,-T", synth_params.seq_len, "tokens per sample")->capture_default_str();
  synth->add_option("--layers,-L", synth_params.num_layers, "layers per sample")->capture_default_str();
  synth->add_option("--seed", synth_params.seed, "generator seed")->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->required();

  // static-baseline
  auto* baseline = app.add_subcommand("static-baseline", "per-layer static persistence baseline");
  SharedFlags baseline_flags;
  fs::path baseline_manifest, baseline_report;
  baseline->add_option("--manifest", baseline_manifest, "dataset manifest")->required();
  baseline->add_option("--report", baseline_report, "JSON report to write");
  baseline_flags.attach(baseline);

  // persist
  auto* persist = app.add_subcommand("persist", "export zigzag barcodes as JSON lines");
  SharedFlags persist_flags;
  fs::path persist_input, persist_out;
  persist->add_option("--input", persist_input, "ADF sample directory or dataset manifest")->required();
  persist->add_option("--out", persist_out, "output file (one sample) or directory (manifest)")->required();
  persist_flags.attach(persist);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::usage);
  }

  if (featurize->parsed()) {
    const auto config = featurize_flags.resolve();
    const auto result = cmd_featurize(featurize_manifest, config, featurize_out);
    std::cerr << "featurized " << result.table.size() << " samples";
    if (!result.failures.empty()) {
      std::cerr << ", " << result.failures.size() << " failed (see " << featurize_out.string()
                << ".errors.jsonl)";
    }
    std::cerr << '\n';
  } else if (train_eval_cmd->parsed()) {
    cmd_train_eval(train_features, train_flags.resolve(), train_report, std::cout);
  } else if (transfer->parsed()) {
    cmd_transfer(transfer_train, transfer_test, transfer_flags.resolve(), transfer_report, std::cout);
  } else if (sweep->parsed()) {
    cmd_depth_sweep(sweep_manifest, sweep_flags.resolve(), parse_fraction_list(sweep_fractions), sweep_out,
                    std::cout);
  } else if (synth->parsed()) {
    const auto manifest = cmd_synth(synth_params, synth_out);
    std::cerr << "wrote " << 2 * synth_params.n_per_class << " samples; manifest " << manifest.string() << '\n';
  } else if (baseline->parsed()) {
    cmd_static_baseline(baseline_manifest, baseline_flags.resolve(), baseline_report, std::cout);
  } else if (persist->parsed()) {
    const auto n = cmd_persist(persist_input, persist_flags.resolve(), persist_out);
    std::cerr << "wrote " << n << " barcode(s)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "halluzig: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "halluzig: internal error: " << e.what() << '\n';
    return exit_code(ErrorKind::invariant);
  }
}
