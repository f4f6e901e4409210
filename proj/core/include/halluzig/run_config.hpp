#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "halluzig/vectorize.hpp"

namespace halluzig {

/// Effective settings of a pipeline run. Built from defaults, then a config
/// file, then command-line flags, each layer overriding the previous one.
struct RunConfig {
  FeatureParams features;
  std::size_t n_trees = 100;
  std::size_t max_depth = 6;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // non-empty: evaluate once per seed
  double test_fraction = 0.2;
  std::size_t workers = 0;  // 0 = one per logical core

  void validate() const;
  /// Seeds to evaluate: `seeds` when given, otherwise just `seed`.
  std::vector<std::uint64_t> effective_seeds() const;
  std::size_t effective_workers() const;
};

/// JSON object with every field, in a fixed key order.
std::string config_to_json(const RunConfig& config, int indent = -1);

/// Overrides fields of `config` with the keys present in a JSON object.
/// Unknown keys are a usage error.
void apply_config_json(RunConfig& config, const std::string& text, const std::string& source = "config");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Parses "0,1" / "1" into an ascending list of homology dimensions.
std::vector<int> parse_dims(const std::string& text);
/// Parses comma-separated unsigned integers.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
/// Parses comma-separated floats.
std::vector<double> parse_fraction_list(const std::string& text);

}  // namespace halluzig
