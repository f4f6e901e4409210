#pragma once

// Random forest of axis-aligned Gini trees for binary labels.
//
// Training is deterministic given (data, params): tree t draws from its own
// mt19937_64 seeded with substream_seed(seed, t), so results do not depend
// on how trees are scheduled across workers.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "halluzig/feature_table.hpp"

namespace halluzig {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 6;  // root is depth 0
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// One tree in flattened form. Node 0 is the root; leaves have feature -1.
/// A sample goes left when x[feature] <= threshold.
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<double> prob0;  // leaf class frequencies
  std::vector<double> prob1;

  std::size_t node_count() const noexcept { return feature.size(); }
  std::size_t depth() const;
  double predict(std::span<const float> x) const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

class ForestModel {
 public:
  ForestModel() = default;

  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t n_trees() const noexcept { return trees_.size(); }
  std::size_t max_depth() const noexcept { return max_depth_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  /// Mean class-1 leaf frequency over trees.
  double predict_one(std::span<const float> x) const;
  std::vector<double> predict_proba(const FeatureTable& table) const;

  std::string to_json() const;
  static ForestModel from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static ForestModel load(const std::filesystem::path& path);

  /// Throws InvariantError when a structural invariant does not hold.
  void check_invariants() const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  friend ForestModel train_forest(std::span<const float>, std::size_t, std::span<const int>,
                                  const ForestParams&);

  std::size_t feature_dim_ = 0;
  std::size_t max_depth_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
};

/// Bootstrap-bagged Gini forest. Each split examines floor(sqrt(width))
/// non-constant features drawn without replacement (more are drawn while
/// the ones seen are constant on the node); the best gain wins, ties going
/// to the lower feature index and then the lower threshold.
ForestModel train_forest(std::span<const float> values, std::size_t width,
                         std::span<const int> labels, const ForestParams& params);
ForestModel train_forest(const FeatureTable& table, const ForestParams& params);

}  // namespace halluzig
