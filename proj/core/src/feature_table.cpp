#include "halluzig/feature_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "halluzig/error.hpp"
#include "halluzig/random.hpp"

namespace halluzig {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void format_float(std::ostream& out, float v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  out.write(buf, n);
}

}  // namespace

void FeatureTable::check_width(std::size_t n, const std::string& sample_id) {
  if (ids_.empty() && values_.empty() && width_ == 0) {
    width_ = n;
    return;
  }
  if (n != width_) {
    throw DataError(ErrorCode::dimension_mismatch,
                    "row '" + sample_id + "' has " + std::to_string(n) + " features, table has " +
                        std::to_string(width_));
  }
}

void FeatureTable::add_row(std::string sample_id, int label, std::string scheme,
                           std::span<const double> values) {
  std::vector<float> narrowed(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) narrowed[i] = static_cast<float>(values[i]);
  add_row(std::move(sample_id), label, std::move(scheme), std::span<const float>(narrowed));
}

void FeatureTable::add_row(std::string sample_id, int label, std::string scheme,
                           std::span<const float> values) {
  check_width(values.size(), sample_id);
  if (sample_id.find_first_of(",\r\n") != std::string::npos ||
      scheme.find_first_of(",\r\n") != std::string::npos) {
    throw DataError(ErrorCode::invalid_argument,
                    "sample id '" + sample_id + "' or its scheme contains a comma or newline");
  }
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw DataError(ErrorCode::non_finite_entry, "row '" + sample_id + "' has a non-finite feature");
    }
  }
  ids_.push_back(std::move(sample_id));
  labels_.push_back(label);
  schemes_.push_back(std::move(scheme));
  values_.insert(values_.end(), values.begin(), values.end());
}

FeatureTable FeatureTable::select(std::span<const std::size_t> rows) const {
  FeatureTable out(width_);
  for (auto r : rows) out.add_row(ids_.at(r), labels_[r], schemes_[r], row(r));
  return out;
}

void FeatureTable::require_binary_labels(std::size_t min_per_class) const {
  std::size_t counts[2] = {0, 0};
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int l = labels_[i];
    if (l != 0 && l != 1) {
      throw DataError(ErrorCode::invalid_argument, "row '" + ids_[i] + "' has no 0/1 label");
    }
    ++counts[l];
  }
  if (counts[0] < min_per_class || counts[1] < min_per_class) {
    throw DataError(ErrorCode::single_class,
                    "need at least " + std::to_string(min_per_class) + " sample(s) of each class, got " +
                        std::to_string(counts[0]) + " negatives and " + std::to_string(counts[1]) +
                        " positives");
  }
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  out << "sample_id,label,scheme";
  for (std::size_t k = 0; k < table.width(); ++k) out << ",f_" << k;
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.sample_id(i) << ',';
    if (table.label(i) != kUnlabelled) out << table.label(i);
    out << ',' << table.scheme(i);
    for (float v : table.row(i)) {
      out << ',';
      format_float(out, v);
    }
    out << '\n';
  }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(ErrorCode::io_failure, "cannot write " + path.string());
  write_feature_csv(out, table);
  if (!out) throw DataError(ErrorCode::io_failure, "failed writing " + path.string());
}

FeatureTable read_feature_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(ErrorCode::parse_failure, source + ": empty feature table");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label" || header[2] != "scheme") {
    throw DataError(ErrorCode::parse_failure,
                    source + ": header must start with sample_id,label,scheme");
  }
  const std::size_t width = header.size() - 3;
  FeatureTable table(width);
  std::vector<float> values(width);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    const std::string id(fields[0]);
    if (fields.size() != header.size()) {
      throw DataError(ErrorCode::dimension_mismatch,
                      source + ": line " + std::to_string(line_no) + " (row '" + id + "') has " +
                          std::to_string(fields.size() < 3 ? 0 : fields.size() - 3) +
                          " features, header declares " + std::to_string(width));
    }
    int label = kUnlabelled;
    if (!fields[1].empty()) {
      if (fields[1] == "0") {
        label = 0;
      } else if (fields[1] == "1") {
        label = 1;
      } else {
        throw DataError(ErrorCode::parse_failure, source + ": line " + std::to_string(line_no) +
                                                      " has label '" + std::string(fields[1]) + "'");
      }
    }
    for (std::size_t k = 0; k < width; ++k) {
      const auto field = fields[k + 3];
      float v = 0.0f;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(ErrorCode::parse_failure, source + ": line " + std::to_string(line_no) +
                                                      " column f_" + std::to_string(k) +
                                                      " is not a number");
      }
      values[k] = v;
    }
    table.add_row(id, label, std::string(fields[2]), std::span<const float>(values));
  }
  return table;
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(ErrorCode::io_failure, "cannot read " + path.string());
  return read_feature_csv(in, path.string());
}

TrainTestSplit split_train_test(const FeatureTable& table, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test_fraction must lie in (0, 1)");
  }
  table.require_binary_labels(2);

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < table.size(); ++i) by_class[table.label(i)].push_back(i);

  const auto n = static_cast<double>(table.size());
  const auto total_test = static_cast<std::size_t>(std::floor(test_fraction * n + 0.5));
  std::size_t quota[2];
  double remainder[2];
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = test_fraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < total_test) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    ++quota[c];
    remainder[c] = -1.0;
    ++assigned;
    if (remainder[0] < 0.0 && remainder[1] < 0.0) break;
  }
  for (int c = 0; c < 2; ++c) {
    quota[c] = std::clamp<std::size_t>(quota[c], 1, by_class[c].size() - 1);
  }

  Rng rng(mix_seed(seed));
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (int c = 0; c < 2; ++c) {
    shuffle(std::span<std::size_t>(by_class[c]), rng);
    test_rows.insert(test_rows.end(), by_class[c].begin(),
                     by_class[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
    train_rows.insert(train_rows.end(), by_class[c].begin() + static_cast<std::ptrdiff_t>(quota[c]),
                      by_class[c].end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {table.select(train_rows), table.select(test_rows)};
}

}  // namespace halluzig
