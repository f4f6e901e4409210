#include "halluzig/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "halluzig/attention.hpp"
#include "halluzig/error.hpp"
#include "halluzig/forest.hpp"
#include "halluzig/parallel.hpp"
#include "halluzig/vectorize.hpp"
#include "halluzig/zigzag.hpp"

namespace halluzig {
namespace {

using nlohmann::ordered_json;

ForestParams forest_params(const RunConfig& config, std::uint64_t seed) {
  ForestParams p;
  p.n_trees = config.n_trees;
  p.max_depth = config.max_depth;
  p.seed = seed;
  p.workers = config.effective_workers();
  return p;
}

EvalReport fit_and_score(const FeatureTable& train, const FeatureTable& test, const RunConfig& config,
                         std::uint64_t seed) {
  const auto model = train_forest(train, forest_params(config, seed));
  const auto scores = model.predict_proba(test);
  return evaluate(scores, test.labels());
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  j["auroc"] = r.auroc;
  j["accuracy"] = r.accuracy;
  j["f1"] = r.f1;
  j["tpr_at_5_fpr"] = r.tpr_at_5_fpr;
  j["n_test"] = r.n_test;
  j["threshold"] = r.threshold;
  return j;
}

ordered_json summary_to_json(const MetricSummary& s) {
  ordered_json j;
  j["auroc"] = s.auroc;
  j["accuracy"] = s.accuracy;
  j["f1"] = s.f1;
  j["tpr_at_5_fpr"] = s.tpr_at_5_fpr;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(ErrorCode::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) throw DataError(ErrorCode::io_failure, "write failed: " + path.string());
}

void log_report(std::ostream& log, const std::string& tag, const EvalReport& r) {
  log << tag << ": auroc=" << r.auroc << " accuracy=" << r.accuracy << " f1=" << r.f1
      << " tpr@5%fpr=" << r.tpr_at_5_fpr << " n_test=" << r.n_test << '\n';
}

FeatureTable table_or_throw(FeaturizeResult&& result, std::size_t total) {
  if (result.table.empty()) {
    std::string first = result.failures.empty() ? "" : ": " + result.failures.front().message;
    throw DataError(ErrorCode::all_samples_failed,
                    "all " + std::to_string(total) + " samples failed" + first);
  }
  return std::move(result.table);
}

}  // namespace

std::vector<ManifestEntry> read_dataset_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(ErrorCode::missing_manifest, "cannot read dataset manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(ErrorCode::malformed_manifest, where + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("path") || !doc["path"].is_string()) {
      throw DataError(ErrorCode::malformed_manifest, where + ": expected an object with a string \"path\"");
    }
    ManifestEntry entry;
    std::filesystem::path p = doc["path"].get<std::string>();
    entry.path = p.is_absolute() ? p : base / p;
    if (doc.contains("label") && !doc["label"].is_null()) {
      const auto& l = doc["label"];
      if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
        throw DataError(ErrorCode::malformed_manifest, where + ": label must be 0, 1 or null");
      }
      entry.label = l.get<int>();
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw DataError(ErrorCode::malformed_manifest, path.string() + ": no samples listed");
  return entries;
}

FeaturizeResult featurize_dataset(const std::vector<ManifestEntry>& entries, const FeatureParams& params,
                                  std::size_t workers, FeatureMode mode) {
  params.validate();
  struct Slot {
    std::optional<AttentionSample> sample;  // header fields only, layers dropped
    FeatureVector vector;
    std::optional<SampleFailure> failure;
  };
  std::vector<Slot> slots(entries.size());
  parallel_for(entries.size(), workers, [&](std::size_t i) {
    auto& slot = slots[i];
    try {
      auto sample = load_sample(entries[i].path);
      slot.vector = mode == FeatureMode::zigzag ? featurize_sample(sample, params)
                                                : featurize_sample_static(sample, params);
      sample.layers.clear();
      slot.sample = std::move(sample);
    } catch (const DataError& e) {
      slot.failure = SampleFailure{i, entries[i].path.string(), std::string(to_string(e.code())), e.what()};
    }
  });

  FeaturizeResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& slot = slots[i];
    if (slot.failure) {
      result.failures.push_back(std::move(*slot.failure));
      continue;
    }
    const auto& s = *slot.sample;
    int label = kUnlabelled;
    if (entries[i].label) {
      label = *entries[i].label;
    } else if (s.label) {
      label = *s.label;
    }
    if (!result.table.empty() && slot.vector.values.size() != result.table.width()) {
      // Only the static mode can disagree (samples with different depth).
      result.failures.push_back(SampleFailure{
          i, entries[i].path.string(), std::string(to_string(ErrorCode::dimension_mismatch)),
          "sample '" + s.sample_id + "': feature width " + std::to_string(slot.vector.values.size()) +
              " differs from " + std::to_string(result.table.width())});
      continue;
    }
    result.table.add_row(s.sample_id, label, std::string(to_string(slot.vector.scheme)), slot.vector.values);
  }
  return result;
}

TrainEvalResult train_eval(const FeatureTable& table, const RunConfig& config) {
  config.validate();
  table.require_binary_labels(2);
  TrainEvalResult result;
  for (const auto seed : config.effective_seeds()) {
    const auto split = split_train_test(table, config.test_fraction, seed);
    result.runs.push_back(SeedRun{seed, fit_and_score(split.train, split.test, config, seed)});
  }

  const double n = static_cast<double>(result.runs.size());
  auto accumulate = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : result.runs) mean += field(r.report);
    mean /= n;
    double var = 0.0;
    for (const auto& r : result.runs) var += (field(r.report) - mean) * (field(r.report) - mean);
    return std::pair{mean, std::sqrt(var / n)};
  };
  std::tie(result.mean.auroc, result.std.auroc) = accumulate([](const EvalReport& r) { return r.auroc; });
  std::tie(result.mean.accuracy, result.std.accuracy) =
      accumulate([](const EvalReport& r) { return r.accuracy; });
  std::tie(result.mean.f1, result.std.f1) = accumulate([](const EvalReport& r) { return r.f1; });
  std::tie(result.mean.tpr_at_5_fpr, result.std.tpr_at_5_fpr) =
      accumulate([](const EvalReport& r) { return r.tpr_at_5_fpr; });
  result.best = *std::max_element(result.runs.begin(), result.runs.end(),
                                  [](const SeedRun& a, const SeedRun& b) { return a.report.auroc < b.report.auroc; });
  return result;
}

EvalReport transfer_eval(const FeatureTable& train, const FeatureTable& test, const RunConfig& config) {
  config.validate();
  if (train.width() != test.width()) {
    throw DataError(ErrorCode::transfer_incompatible,
                    "feature width " + std::to_string(train.width()) + " of the training table differs from " +
                        std::to_string(test.width()) + " of the test table");
  }
  train.require_binary_labels(2);
  test.require_binary_labels(1);
  return fit_and_score(train, test, config, config.seed);
}

std::vector<DepthRow> depth_sweep(const std::vector<ManifestEntry>& entries, const RunConfig& config,
                                  const std::vector<double>& fractions) {
  config.validate();
  if (fractions.empty()) throw UsageError("depth sweep needs at least one fraction");
  for (const double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("depth fractions must lie in (0, 1]");
  }
  // Reject fractions that leave fewer than two layers before doing any work.
  const auto first = load_sample(entries.front().path);
  for (const double f : fractions) layers_for_depth(first.layers.size(), f);

  std::vector<DepthRow> rows;
  for (const double f : fractions) {
    RunConfig at = config;
    at.features.depth_fraction = f;
    at.seeds.clear();
    auto featurized = featurize_dataset(entries, at.features, at.effective_workers());
    const auto table = table_or_throw(std::move(featurized), entries.size());
    DepthRow row;
    row.fraction = f;
    row.layers_used = layers_for_depth(first.layers.size(), f);
    row.n_samples = table.size();
    row.report = train_eval(table, at).runs.front().report;
    rows.push_back(row);
  }
  return rows;
}

std::string eval_report_json(const EvalReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::string train_eval_json(const std::string& command, const RunConfig& config, const TrainEvalResult& result) {
  ordered_json j;
  j["command"] = command;
  j["config"] = ordered_json::parse(config_to_json(config));
  ordered_json runs = ordered_json::array();
  for (const auto& r : result.runs) {
    ordered_json run;
    run["seed"] = r.seed;
    run["report"] = report_to_json(r.report);
    runs.push_back(run);
  }
  j["runs"] = runs;
  ordered_json agg;
  agg["n_seeds"] = result.runs.size();
  agg["mean"] = summary_to_json(result.mean);
  agg["std"] = summary_to_json(result.std);
  agg["best_seed"] = result.best.seed;
  agg["best"] = report_to_json(result.best.report);
  j["aggregate"] = agg;
  return j.dump(2) + "\n";
}

void write_depth_csv(std::ostream& out, const std::vector<DepthRow>& rows) {
  out << "fraction,layers,n_samples,auroc,accuracy,f1,tpr_at_5_fpr,n_test\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%zu,%zu,%.9g,%.9g,%.9g,%.9g,%zu\n", r.fraction, r.layers_used,
                  r.n_samples, r.report.auroc, r.report.accuracy, r.report.f1, r.report.tpr_at_5_fpr,
                  r.report.n_test);
    out << buf;
  }
}

FeaturizeResult cmd_featurize(const std::filesystem::path& manifest, const RunConfig& config,
                              const std::filesystem::path& out) {
  config.validate();
  const auto entries = read_dataset_manifest(manifest);
  auto result = featurize_dataset(entries, config.features, config.effective_workers());

  auto errors_path = out;
  errors_path += ".errors.jsonl";
  std::error_code ec;
  std::filesystem::remove(errors_path, ec);
  if (!result.failures.empty()) {
    std::ostringstream log;
    for (const auto& f : result.failures) {
      ordered_json line;
      line["index"] = f.index;
      line["path"] = f.path;
      line["code"] = f.code;
      line["message"] = f.message;
      log << line.dump() << '\n';
    }
    write_text(errors_path, log.str());
  }
  if (result.table.empty()) {
    table_or_throw(std::move(result), entries.size());
  }
  std::ostringstream csv;
  write_feature_csv(csv, result.table);
  write_text(out, csv.str());
  return result;
}

TrainEvalResult cmd_train_eval(const std::filesystem::path& features, const RunConfig& config,
                               const std::filesystem::path& report_out, std::ostream& log) {
  const auto table = read_feature_csv(features);
  const auto result = train_eval(table, config);
  for (const auto& r : result.runs) log_report(log, "seed " + std::to_string(r.seed), r.report);
  if (result.runs.size() > 1) {
    log << "mean: auroc=" << result.mean.auroc << " (std " << result.std.auroc << ") f1=" << result.mean.f1
        << " (std " << result.std.f1 << ")\n";
  }
  if (!report_out.empty()) write_text(report_out, train_eval_json("train-eval", config, result));
  return result;
}

EvalReport cmd_transfer(const std::filesystem::path& train_features, const std::filesystem::path& test_features,
                        const RunConfig& config, const std::filesystem::path& report_out, std::ostream& log) {
  const auto train = read_feature_csv(train_features);
  const auto test = read_feature_csv(test_features);
  const auto report = transfer_eval(train, test, config);
  log_report(log, "transfer", report);
  if (!report_out.empty()) {
    ordered_json j;
    j["command"] = "transfer";
    j["config"] = ordered_json::parse(config_to_json(config));
    j["train"] = train_features.string();
    j["test"] = test_features.string();
    j["report"] = report_to_json(report);
    write_text(report_out, j.dump(2) + "\n");
  }
  return report;
}

std::vector<DepthRow> cmd_depth_sweep(const std::filesystem::path& manifest, const RunConfig& config,
                                      const std::vector<double>& fractions, const std::filesystem::path& out_csv,
                                      std::ostream& log) {
  const auto entries = read_dataset_manifest(manifest);
  const auto rows = depth_sweep(entries, config, fractions);
  for (const auto& r : rows) {
    std::ostringstream tag;
    tag << "fraction " << r.fraction << " (" << r.layers_used << " layers)";
    log_report(log, tag.str(), r.report);
  }
  std::ostringstream csv;
  write_depth_csv(csv, rows);
  if (out_csv.empty()) {
    log << csv.str();
  } else {
    write_text(out_csv, csv.str());
  }
  return rows;
}

std::filesystem::path cmd_synth(const SynthParams& params, const std::filesystem::path& out_dir) {
  return write_synth_dataset(params, out_dir);
}

TrainEvalResult cmd_static_baseline(const std::filesystem::path& manifest, const RunConfig& config,
                                    const std::filesystem::path& report_out, std::ostream& log) {
  config.validate();
  const auto entries = read_dataset_manifest(manifest);
  auto featurized = featurize_dataset(entries, config.features, config.effective_workers(),
                                      FeatureMode::static_layers);
  for (const auto& f : featurized.failures) log << "skipped " << f.path << ": " << f.message << '\n';
  const auto table = table_or_throw(std::move(featurized), entries.size());
  const auto result = train_eval(table, config);
  for (const auto& r : result.runs) log_report(log, "static seed " + std::to_string(r.seed), r.report);
  if (!report_out.empty()) write_text(report_out, train_eval_json("static-baseline", config, result));
  return result;
}

std::size_t cmd_persist(const std::filesystem::path& input, const RunConfig& config,
                        const std::filesystem::path& out) {
  config.validate();
  if (std::filesystem::is_directory(input)) {
    const auto sample = load_sample(input);
    std::ostringstream text;
    write_barcode_jsonl(text, sample_barcode(sample, config.features), sample.sample_id);
    write_text(out, text.str());
    return 1;
  }
  const auto entries = read_dataset_manifest(input);
  std::vector<std::optional<std::string>> texts(entries.size());
  std::vector<std::string> ids(entries.size());
  parallel_for(entries.size(), config.effective_workers(), [&](std::size_t i) {
    try {
      const auto sample = load_sample(entries[i].path);
      std::ostringstream text;
      write_barcode_jsonl(text, sample_barcode(sample, config.features), sample.sample_id);
      texts[i] = text.str();
      ids[i] = sample.sample_id;
    } catch (const DataError&) {
      // One bad sample does not stop the export; it is simply not written.
    }
  });
  std::size_t written = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!texts[i]) continue;
    write_text(out / (ids[i] + ".jsonl"), *texts[i]);
    ++written;
  }
  if (written == 0) throw DataError(ErrorCode::all_samples_failed, "no barcode could be computed");
  return written;
}

}  // namespace halluzig
