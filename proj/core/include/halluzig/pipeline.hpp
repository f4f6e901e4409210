#pragma once

// Dataset-level commands behind the `halluzig` CLI. Each cmd_* function
// reads and writes the same files as the matching subcommand, so the CLI is
// a thin flag-parsing layer over this header.
//
// Dataset manifest: JSON lines {"path": <ADF dir>, "label": 0|1}; relative
// paths resolve against the manifest's directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "halluzig/feature_table.hpp"
#include "halluzig/metrics.hpp"
#include "halluzig/run_config.hpp"
#include "halluzig/synth.hpp"

namespace halluzig {

struct ManifestEntry {
  std::filesystem::path path;
  std::optional<int> label;
};

std::vector<ManifestEntry> read_dataset_manifest(const std::filesystem::path& path);

enum class FeatureMode { zigzag, static_layers };

struct SampleFailure {
  std::size_t index = 0;  // manifest line, 0-based
  std::string path;
  std::string code;
  std::string message;
};

struct FeaturizeResult {
  FeatureTable table;
  std::vector<SampleFailure> failures;
};

/// Featurizes every entry on `workers` threads; rows keep manifest order and
/// a failing sample is recorded instead of aborting the batch.
FeaturizeResult featurize_dataset(const std::vector<ManifestEntry>& entries, const FeatureParams& params,
                                  std::size_t workers, FeatureMode mode = FeatureMode::zigzag);

struct SeedRun {
  std::uint64_t seed = 0;
  EvalReport report;
};

struct MetricSummary {
  double auroc = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double tpr_at_5_fpr = 0.0;
};

/// Per-seed runs plus mean, population standard deviation and the best run
/// (highest AUROC, earliest seed on ties).
struct TrainEvalResult {
  std::vector<SeedRun> runs;
  MetricSummary mean;
  MetricSummary std;
  SeedRun best;
};

/// Split (stratified, seeded) -> train -> evaluate, once per effective seed.
TrainEvalResult train_eval(const FeatureTable& table, const RunConfig& config);

/// Fit on all of `train`, evaluate on all of `test`.
EvalReport transfer_eval(const FeatureTable& train, const FeatureTable& test, const RunConfig& config);

struct DepthRow {
  double fraction = 1.0;
  std::size_t layers_used = 0;  // for the first sample
  std::size_t n_samples = 0;
  EvalReport report;
};

std::vector<DepthRow> depth_sweep(const std::vector<ManifestEntry>& entries, const RunConfig& config,
                                  const std::vector<double>& fractions);

std::string eval_report_json(const EvalReport& report);
std::string train_eval_json(const std::string& command, const RunConfig& config,
                            const TrainEvalResult& result);
void write_depth_csv(std::ostream& out, const std::vector<DepthRow>& rows);

// ---- commands -------------------------------------------------------------

/// Writes the feature CSV and, when any sample failed, `<out>.errors.jsonl`.
/// Throws DataError(all_samples_failed) when no sample succeeded.
FeaturizeResult cmd_featurize(const std::filesystem::path& manifest, const RunConfig& config,
                              const std::filesystem::path& out);

TrainEvalResult cmd_train_eval(const std::filesystem::path& features, const RunConfig& config,
                               const std::filesystem::path& report_out, std::ostream& log);

EvalReport cmd_transfer(const std::filesystem::path& train_features, const std::filesystem::path& test_features,
                        const RunConfig& config, const std::filesystem::path& report_out, std::ostream& log);

std::vector<DepthRow> cmd_depth_sweep(const std::filesystem::path& manifest, const RunConfig& config,
                                      const std::vector<double>& fractions, const std::filesystem::path& out_csv,
                                      std::ostream& log);

std::filesystem::path cmd_synth(const SynthParams& params, const std::filesystem::path& out_dir);

TrainEvalResult cmd_static_baseline(const std::filesystem::path& manifest, const RunConfig& config,
                                    const std::filesystem::path& report_out, std::ostream& log);

/// Barcode export. `input` is either one ADF directory (written to `out` as
/// a file) or a dataset manifest (one `<sample_id>.jsonl` per sample under
/// the directory `out`). Returns the number of barcodes written.
std::size_t cmd_persist(const std::filesystem::path& input, const RunConfig& config,
                        const std::filesystem::path& out);

}  // namespace halluzig
