#include "halluzig/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "halluzig/error.hpp"
#include "halluzig/random.hpp"

namespace halluzig {
namespace {

constexpr int kFormatVersion = 1;
constexpr double kMinGain = 1e-9;

// Size-weighted Gini impurity of a node: n * (1 - p0^2 - p1^2).
inline double weighted_gini(double n0, double n1) {
  const double n = n0 + n1;
  return n > 0.0 ? n - (n0 * n0 + n1 * n1) / n : 0.0;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const float> values, std::size_t width, std::span<const int> labels,
              std::size_t max_depth, std::uint64_t seed)
      : values_(values), width_(width), labels_(labels), max_depth_(max_depth), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = labels_.size();
    sample_.resize(n);
    for (auto& s : sample_) s = static_cast<std::uint32_t>(uniform_index(rng_, n));

    // Features constant over the whole bootstrap sample can never split.
    for (std::size_t f = 0; f < width_; ++f) {
      const float first = value(sample_.front(), f);
      for (auto s : sample_) {
        if (value(s, f) != first) {
          pool_.push_back(static_cast<std::uint32_t>(f));
          break;
        }
      }
    }
    tries_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(width_)))));
    grow(0, sample_.size(), 0);
    return std::move(tree_);
  }

 private:
  float value(std::uint32_t row, std::size_t f) const { return values_[row * width_ + f]; }

  struct Split {
    double gain = 0.0;
    std::int64_t feature = -1;
    double threshold = 0.0;
  };

  std::int32_t add_node(double n0, double n1) {
    const double n = n0 + n1;
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.prob0.push_back(n0 / n);
    tree_.prob1.push_back(n1 / n);
    return static_cast<std::int32_t>(tree_.feature.size() - 1);
  }

  void evaluate_feature(std::size_t begin, std::size_t end, std::uint32_t f, double n0, double n1,
                        Split& best) {
    scratch_.clear();
    for (std::size_t k = begin; k < end; ++k) {
      const auto s = sample_[k];
      scratch_.emplace_back(value(s, f), labels_[s]);
    }
    std::sort(scratch_.begin(), scratch_.end());
    const double parent = weighted_gini(n0, n1);
    double left0 = 0.0;
    double left1 = 0.0;
    for (std::size_t k = 0; k + 1 < scratch_.size(); ++k) {
      (scratch_[k].second == 1 ? left1 : left0) += 1.0;
      const float a = scratch_[k].first;
      const float b = scratch_[k + 1].first;
      if (a == b) continue;
      const double gain =
          parent - weighted_gini(left0, left1) - weighted_gini(n0 - left0, n1 - left1);
      if (gain <= kMinGain) continue;
      double threshold = static_cast<double>(a) + (static_cast<double>(b) - static_cast<double>(a)) / 2.0;
      if (!(threshold >= a && threshold < b)) threshold = a;
      const bool better =
          gain > best.gain ||
          (gain == best.gain && (static_cast<std::int64_t>(f) < best.feature ||
                                 (static_cast<std::int64_t>(f) == best.feature && threshold < best.threshold)));
      if (best.feature < 0 || better) best = {gain, static_cast<std::int64_t>(f), threshold};
    }
  }

  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    double n0 = 0.0;
    double n1 = 0.0;
    for (std::size_t k = begin; k < end; ++k) (labels_[sample_[k]] == 1 ? n1 : n0) += 1.0;
    const std::int32_t node = add_node(n0, n1);
    if (depth >= max_depth_ || n0 == 0.0 || n1 == 0.0 || end - begin < 2) return node;

    // Partial Fisher-Yates over the feature pool; constant features on this
    // node do not count towards the number of tries.
    Split best;
    std::size_t informative = 0;
    for (std::size_t k = 0; k < pool_.size() && informative < tries_; ++k) {
      const auto j = k + static_cast<std::size_t>(uniform_index(rng_, pool_.size() - k));
      std::swap(pool_[k], pool_[j]);
      const auto f = pool_[k];
      const float first = value(sample_[begin], f);
      bool constant = true;
      for (std::size_t i = begin + 1; i < end; ++i) {
        if (value(sample_[i], f) != first) {
          constant = false;
          break;
        }
      }
      if (constant) continue;
      ++informative;
      evaluate_feature(begin, end, f, n0, n1, best);
    }
    if (best.feature < 0) return node;

    const auto f = static_cast<std::size_t>(best.feature);
    const auto mid = std::stable_partition(
        sample_.begin() + static_cast<std::ptrdiff_t>(begin),
        sample_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::uint32_t s) { return static_cast<double>(value(s, f)) <= best.threshold; });
    const auto split = static_cast<std::size_t>(mid - sample_.begin());

    tree_.feature[static_cast<std::size_t>(node)] = static_cast<std::int32_t>(f);
    tree_.threshold[static_cast<std::size_t>(node)] = best.threshold;
    const std::int32_t l = grow(begin, split, depth + 1);
    const std::int32_t r = grow(split, end, depth + 1);
    tree_.left[static_cast<std::size_t>(node)] = l;
    tree_.right[static_cast<std::size_t>(node)] = r;
    return node;
  }

  std::span<const float> values_;
  std::size_t width_;
  std::span<const int> labels_;
  std::size_t max_depth_;
  Rng rng_;
  std::size_t tries_ = 1;
  std::vector<std::uint32_t> sample_;
  std::vector<std::uint32_t> pool_;
  std::vector<std::pair<float, int>> scratch_;
  DecisionTree tree_;
};

std::size_t subtree_depth(const DecisionTree& t, std::int32_t node) {
  const auto i = static_cast<std::size_t>(node);
  if (t.feature[i] < 0) return 0;
  return 1 + std::max(subtree_depth(t, t.left[i]), subtree_depth(t, t.right[i]));
}

}  // namespace

std::size_t DecisionTree::depth() const { return feature.empty() ? 0 : subtree_depth(*this, 0); }

double DecisionTree::predict(std::span<const float> x) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    const auto f = static_cast<std::size_t>(feature[node]);
    node = static_cast<std::size_t>(static_cast<double>(x[f]) <= threshold[node] ? left[node] : right[node]);
  }
  return prob1[node];
}

double ForestModel::predict_one(std::span<const float> x) const {
  if (x.size() != feature_dim_) {
    throw DataError(ErrorCode::dimension_mismatch, "model expects " + std::to_string(feature_dim_) +
                                                       " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size());
}

std::vector<double> ForestModel::predict_proba(const FeatureTable& table) const {
  std::vector<double> scores;
  if (table.empty()) return scores;
  if (table.width() != feature_dim_) {
    throw DataError(ErrorCode::dimension_mismatch,
                    "model expects " + std::to_string(feature_dim_) + " features, table has " +
                        std::to_string(table.width()));
  }
  scores.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) scores.push_back(predict_one(table.row(i)));
  return scores;
}

void ForestModel::check_invariants() const {
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto& tree = trees_[t];
    const std::size_t nodes = tree.node_count();
    if (nodes == 0 || tree.threshold.size() != nodes || tree.left.size() != nodes ||
        tree.right.size() != nodes || tree.prob0.size() != nodes || tree.prob1.size() != nodes) {
      throw InvariantError("tree " + std::to_string(t) + " has inconsistent array lengths");
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      if (tree.feature[i] >= 0) {
        if (static_cast<std::size_t>(tree.feature[i]) >= feature_dim_) {
          throw InvariantError("tree " + std::to_string(t) + " splits on feature out of range");
        }
        const auto l = tree.left[i];
        const auto r = tree.right[i];
        if (l <= static_cast<std::int32_t>(i) || r <= static_cast<std::int32_t>(i) ||
            static_cast<std::size_t>(l) >= nodes || static_cast<std::size_t>(r) >= nodes) {
          throw InvariantError("tree " + std::to_string(t) + " has an invalid child index");
        }
      } else if (std::abs(tree.prob0[i] + tree.prob1[i] - 1.0) > 1e-12 || tree.prob1[i] < 0.0 ||
                 tree.prob0[i] < 0.0) {
        throw InvariantError("tree " + std::to_string(t) + " has a leaf whose probabilities do not sum to 1");
      }
    }
    if (tree.depth() > max_depth_) {
      throw InvariantError("tree " + std::to_string(t) + " exceeds max_depth");
    }
  }
}

std::string ForestModel::to_json() const {
  nlohmann::ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["n_trees"] = trees_.size();
  doc["max_depth"] = max_depth_;
  doc["seed"] = seed_;
  doc["feature_dim"] = feature_dim_;
  auto& trees = doc["trees"] = nlohmann::ordered_json::array();
  for (const auto& t : trees_) {
    nlohmann::ordered_json jt;
    jt["feature"] = t.feature;
    jt["threshold"] = t.threshold;
    jt["left"] = t.left;
    jt["right"] = t.right;
    jt["prob0"] = t.prob0;
    jt["prob1"] = t.prob1;
    trees.push_back(std::move(jt));
  }
  return doc.dump();
}

ForestModel ForestModel::from_json(const std::string& text) {
  ForestModel model;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw DataError(ErrorCode::parse_failure, "unsupported forest format_version");
    }
    model.max_depth_ = doc.at("max_depth").get<std::size_t>();
    model.seed_ = doc.at("seed").get<std::uint64_t>();
    model.feature_dim_ = doc.at("feature_dim").get<std::size_t>();
    for (const auto& jt : doc.at("trees")) {
      DecisionTree t;
      t.feature = jt.at("feature").get<std::vector<std::int32_t>>();
      t.threshold = jt.at("threshold").get<std::vector<double>>();
      t.left = jt.at("left").get<std::vector<std::int32_t>>();
      t.right = jt.at("right").get<std::vector<std::int32_t>>();
      t.prob0 = jt.at("prob0").get<std::vector<double>>();
      t.prob1 = jt.at("prob1").get<std::vector<double>>();
      model.trees_.push_back(std::move(t));
    }
    if (model.trees_.size() != doc.at("n_trees").get<std::size_t>()) {
      throw DataError(ErrorCode::parse_failure, "n_trees does not match the tree list");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(ErrorCode::parse_failure, std::string("forest JSON: ") + e.what());
  }
  try {
    model.check_invariants();
  } catch (const InvariantError& e) {
    throw DataError(ErrorCode::parse_failure, std::string("forest JSON: ") + e.what());
  }
  return model;
}

void ForestModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(ErrorCode::io_failure, "cannot write " + path.string());
  out << to_json() << '\n';
}

ForestModel ForestModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(ErrorCode::io_failure, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

ForestModel train_forest(std::span<const float> values, std::size_t width, std::span<const int> labels,
                         const ForestParams& params) {
  if (width == 0) throw DataError(ErrorCode::dimension_mismatch, "feature width must be positive");
  if (values.size() != labels.size() * width) {
    throw DataError(ErrorCode::dimension_mismatch,
                    "feature matrix holds " + std::to_string(values.size()) + " values for " +
                        std::to_string(labels.size()) + " rows of width " + std::to_string(width));
  }
  if (params.n_trees == 0) throw UsageError("n_trees must be positive");
  std::size_t counts[2] = {0, 0};
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError(ErrorCode::invalid_argument, "labels must be 0 or 1");
    ++counts[l];
  }
  if (counts[0] < 2 || counts[1] < 2) {
    throw DataError(ErrorCode::single_class,
                    "training needs at least 2 samples of each class, got " + std::to_string(counts[0]) +
                        " negatives and " + std::to_string(counts[1]) + " positives");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw DataError(ErrorCode::non_finite_entry, "training features contain NaN or inf");
  }

  ForestModel model;
  model.feature_dim_ = width;
  model.max_depth_ = params.max_depth;
  model.seed_ = params.seed;
  model.trees_.resize(params.n_trees);

  auto train_one = [&](std::size_t t) {
    TreeBuilder builder(values, width, labels, params.max_depth, substream_seed(params.seed, t));
    model.trees_[t] = builder.build();
  };

  const std::size_t workers = std::clamp<std::size_t>(params.workers, 1, params.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) train_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t t = next++; t < params.n_trees; t = next++) train_one(t);
      });
    }
  }
  return model;
}

ForestModel train_forest(const FeatureTable& table, const ForestParams& params) {
  table.require_binary_labels(2);
  return train_forest(table.values(), table.width(), table.labels(), params);
}

}  // namespace halluzig
