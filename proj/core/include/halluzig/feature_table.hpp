#pragma once

// Labelled feature rows, as exchanged between featurization and training.
//
// CSV layout: header `sample_id,label,scheme,f_0,...,f_{n-1}`, one row per
// sample, values written with 9 significant digits. Values are held as
// float32, which that precision round-trips exactly.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace halluzig {

inline constexpr int kUnlabelled = -1;

class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::size_t width) : width_(width) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  /// Appends a row; the first row fixes the width of an empty table.
  void add_row(std::string sample_id, int label, std::string scheme, std::span<const double> values);
  void add_row(std::string sample_id, int label, std::string scheme, std::span<const float> values);

  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(values_).subspan(i * width_, width_);
  }
  std::span<const float> values() const noexcept { return values_; }
  const std::string& sample_id(std::size_t i) const { return ids_[i]; }
  const std::string& scheme(std::size_t i) const { return schemes_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const noexcept { return labels_; }

  FeatureTable select(std::span<const std::size_t> rows) const;

  /// Throws DataError(single_class) unless both labels occur, and
  /// DataError(invalid_argument) when a row is unlabelled.
  void require_binary_labels(std::size_t min_per_class = 1) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;

 private:
  void check_width(std::size_t n, const std::string& sample_id);

  std::size_t width_ = 0;
  std::vector<std::string> ids_;
  std::vector<int> labels_;
  std::vector<std::string> schemes_;
  std::vector<float> values_;
};

void write_feature_csv(std::ostream& out, const FeatureTable& table);
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(std::istream& in, const std::string& source = "<stream>");
FeatureTable read_feature_csv(const std::filesystem::path& path);

struct TrainTestSplit {
  FeatureTable train;
  FeatureTable test;
};

/// Stratified seeded split. The test set holds round(test_fraction * n)
/// rows, apportioned to classes by largest remainder (ties to label 0), so
/// per-class proportions are kept to within one sample.
TrainTestSplit split_train_test(const FeatureTable& table, double test_fraction, std::uint64_t seed);

}  // namespace halluzig
