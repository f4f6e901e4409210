#include "halluzig/attention.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "halluzig/error.hpp"

namespace halluzig {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string layer_file_name(std::size_t layer) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "layer_%03zu.bin", layer);
  return buf;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) | ((v & 0x00FF0000u) >> 8) |
         ((v & 0xFF000000u) >> 24);
}

std::vector<float> decode_f32_le(const std::vector<char>& bytes) {
  std::vector<float> out(bytes.size() / 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), bytes.data(), out.size() * 4);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint32_t raw;
      std::memcpy(&raw, bytes.data() + 4 * i, 4);
      raw = byteswap32(raw);
      std::memcpy(&out[i], &raw, 4);
    }
  }
  return out;
}

std::vector<char> encode_f32_le(std::span<const float> values) {
  std::vector<char> out(values.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), values.data(), out.size());
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::uint32_t raw;
      std::memcpy(&raw, &values[i], 4);
      raw = byteswap32(raw);
      std::memcpy(out.data() + 4 * i, &raw, 4);
    }
  }
  return out;
}

[[noreturn]] void manifest_error(const fs::path& dir, const std::string& what) {
  throw DataError(ErrorCode::malformed_manifest,
                  "manifest " + (dir / "manifest.json").string() + ": " + what);
}

template <typename T>
T required(const json& j, const char* key, const fs::path& dir) {
  auto it = j.find(key);
  if (it == j.end()) manifest_error(dir, std::string("missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    manifest_error(dir, std::string("key '") + key + "' has the wrong type");
  }
}

std::optional<int> optional_int(const json& j, const char* key, const fs::path& dir) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    manifest_error(dir, std::string("key '") + key + "' must be an integer or null");
  }
  return it->get<int>();
}

}  // namespace

AttentionMatrix::AttentionMatrix(std::size_t size, std::vector<float> values)
    : size_(size), data_(std::move(values)) {
  if (data_.size() != size_ * size_) {
    throw DataError(ErrorCode::shape_mismatch,
                    "attention matrix of size " + std::to_string(size_) + " needs " +
                        std::to_string(size_ * size_) + " values, got " +
                        std::to_string(data_.size()));
  }
}

AttentionMatrix average_heads(std::span<const AttentionMatrix> heads) {
  if (heads.empty()) {
    throw UsageError("average_heads: at least one head is required");
  }
  const std::size_t n = heads.front().size();
  for (std::size_t h = 1; h < heads.size(); ++h) {
    if (heads[h].size() != n) {
      throw DataError(ErrorCode::shape_mismatch,
                      "average_heads: head " + std::to_string(h) + " is " +
                          std::to_string(heads[h].size()) + "x" + std::to_string(heads[h].size()) +
                          ", head 0 is " + std::to_string(n) + "x" + std::to_string(n));
    }
  }
  if (heads.size() == 1) return heads.front();

  std::vector<double> acc(n * n, 0.0);
  for (const auto& head : heads) {
    auto values = head.values();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += values[k];
  }
  AttentionMatrix out(n);
  const double inv = 1.0 / static_cast<double>(heads.size());
  auto dst = out.values();
  for (std::size_t k = 0; k < acc.size(); ++k) dst[k] = static_cast<float>(acc[k] * inv);
  return out;
}

void validate_sample(const AttentionSample& sample) {
  const std::string& id = sample.sample_id;
  if (sample.num_layers() < 2) {
    throw DataError(ErrorCode::shape_mismatch,
                    "sample '" + id + "': need at least 2 layers, got " +
                        std::to_string(sample.num_layers()));
  }
  const std::size_t n = sample.seq_len();
  if (n < 2) {
    throw DataError(ErrorCode::shape_mismatch,
                    "sample '" + id + "': need seq_len >= 2, got " + std::to_string(n));
  }
  for (std::size_t l = 0; l < sample.layers.size(); ++l) {
    const auto& m = sample.layers[l];
    if (m.size() != n) {
      throw DataError(ErrorCode::shape_mismatch, "sample '" + id + "': layer " +
                                                     std::to_string(l) + " has size " +
                                                     std::to_string(m.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const float a = m(i, j);
        const auto where = [&] {
          return "sample '" + id + "': layer " + std::to_string(l) + " row " + std::to_string(i) + " col " +
                 std::to_string(j);
        };
        if (!std::isfinite(a)) {
          throw DataError(ErrorCode::non_finite_entry, where() + " (offset " +
                                                           std::to_string(i * n + j) +
                                                           ") is not finite");
        }
        if (a < 0.0f || a > 1.0f + 1e-6f) {
          throw DataError(ErrorCode::out_of_range_entry,
                          where() + " = " + std::to_string(a) + " is outside [0, 1]");
        }
        if (sample.causal && j > i && a != 0.0f) {
          throw DataError(ErrorCode::causal_violation,
                          where() + " is nonzero above the diagonal of a causal dump");
        }
        sum += a;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw DataError(ErrorCode::row_sum_violation,
                        "sample '" + id + "': layer " + std::to_string(l) + " row " +
                            std::to_string(i) + " sums to " + std::to_string(sum));
      }
    }
  }
}

AttentionSample load_sample(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw DataError(ErrorCode::missing_manifest, "no manifest.json in " + dir.string());
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    manifest_error(dir, std::string("invalid JSON: ") + e.what());
  }
  if (!manifest.is_object()) manifest_error(dir, "top level must be an object");

  const int version = required<int>(manifest, "format_version", dir);
  if (version != kFormatVersion) {
    manifest_error(dir, "unsupported format_version " + std::to_string(version));
  }
  const auto dtype = required<std::string>(manifest, "dtype", dir);
  if (dtype != "f32") manifest_error(dir, "dtype must be \"f32\", got \"" + dtype + "\"");

  AttentionSample sample;
  sample.sample_id = required<std::string>(manifest, "sample_id", dir);
  sample.model_id = required<std::string>(manifest, "model_id", dir);
  sample.causal = required<bool>(manifest, "causal", dir);
  const auto num_layers = required<long long>(manifest, "num_layers", dir);
  const auto num_heads = required<long long>(manifest, "num_heads", dir);
  const auto seq_len = required<long long>(manifest, "seq_len", dir);
  if (num_layers < 1 || num_heads < 1 || seq_len < 1) {
    manifest_error(dir, "num_layers, num_heads and seq_len must be positive");
  }
  sample.label = optional_int(manifest, "label", dir);
  if (sample.label && *sample.label != 0 && *sample.label != 1) {
    manifest_error(dir, "label must be 0, 1 or null");
  }
  sample.prompt_len = optional_int(manifest, "prompt_len", dir);

  const auto n = static_cast<std::size_t>(seq_len);
  const auto heads = static_cast<std::size_t>(num_heads);
  const std::size_t per_head = n * n;
  sample.layers.reserve(static_cast<std::size_t>(num_layers));
  for (std::size_t l = 0; l < static_cast<std::size_t>(num_layers); ++l) {
    const fs::path file = dir / layer_file_name(l);
    std::ifstream bin(file, std::ios::binary);
    if (!bin) {
      throw DataError(ErrorCode::shape_mismatch,
                      "sample '" + sample.sample_id + "': missing " + file.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    const std::size_t expected = heads * per_head;
    if (bytes.size() != expected * 4) {
      throw DataError(ErrorCode::shape_mismatch,
                      "sample '" + sample.sample_id + "': " + file.filename().string() +
                          " holds " + std::to_string(bytes.size()) + " bytes (" +
                          std::to_string(bytes.size() / 4) + " floats), manifest implies " +
                          std::to_string(expected) + " floats");
    }
    std::vector<float> values = decode_f32_le(bytes);
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!std::isfinite(values[k])) {
        throw DataError(ErrorCode::non_finite_entry,
                        "sample '" + sample.sample_id + "': layer " + std::to_string(l) +
                            " offset " + std::to_string(k) + " is not finite");
      }
    }
    if (heads == 1) {
      sample.layers.emplace_back(n, std::move(values));
    } else {
      std::vector<AttentionMatrix> per_head_mats;
      per_head_mats.reserve(heads);
      for (std::size_t h = 0; h < heads; ++h) {
        per_head_mats.emplace_back(
            n, std::vector<float>(values.begin() + static_cast<std::ptrdiff_t>(h * per_head),
                                  values.begin() + static_cast<std::ptrdiff_t>((h + 1) * per_head)));
      }
      sample.layers.push_back(average_heads(per_head_mats));
    }
  }
  validate_sample(sample);
  return sample;
}

void write_sample(const AttentionSample& sample, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw DataError(ErrorCode::io_failure, "cannot create " + dir.string() + ": " + ec.message());
  }
  json manifest = {
      {"format_version", kFormatVersion},
      {"sample_id", sample.sample_id},
      {"model_id", sample.model_id},
      {"num_layers", sample.num_layers()},
      {"num_heads", 1},
      {"seq_len", sample.seq_len()},
      {"dtype", "f32"},
      {"causal", sample.causal},
      {"label", sample.label ? json(*sample.label) : json(nullptr)},
      {"prompt_len", sample.prompt_len ? json(*sample.prompt_len) : json(nullptr)},
  };
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(ErrorCode::io_failure, "cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
  }
  for (std::size_t l = 0; l < sample.layers.size(); ++l) {
    const auto bytes = encode_f32_le(sample.layers[l].values());
    std::ofstream out(dir / layer_file_name(l), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(ErrorCode::io_failure, "cannot write layer file in " + dir.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

AttentionGraph build_graph(const AttentionMatrix& matrix, std::size_t layer, double top_percent) {
  if (!(top_percent > 0.0 && top_percent <= 100.0)) {
    throw UsageError("top_percent must lie in (0, 100], got " + std::to_string(top_percent));
  }
  const std::size_t n = matrix.size();
  std::vector<float> candidates;
  candidates.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && matrix(i, j) > 0.0f) candidates.push_back(matrix(i, j));
    }
  }
  if (candidates.empty()) {
    throw DataError(ErrorCode::degenerate_layer,
                    "layer " + std::to_string(layer) + " has no positive off-diagonal attention");
  }

  const std::size_t count = candidates.size();
  const double rank = std::ceil((100.0 - top_percent) / 100.0 * static_cast<double>(count) - 1e-9);
  const std::size_t k = std::min(count - 1, static_cast<std::size_t>(std::max(0.0, rank)));
  std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                   candidates.end());
  const float threshold = candidates[k];

  AttentionGraph graph;
  graph.layer = layer;
  graph.num_vertices = n;
  graph.threshold = threshold;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const float w = std::max(matrix(i, j), matrix(j, i));
      if (w > 0.0f && w >= threshold) {
        graph.edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
      }
    }
  }
  return graph;
}

std::size_t layers_for_depth(std::size_t num_layers, double depth_fraction) {
  if (!(depth_fraction > 0.0 && depth_fraction <= 1.0)) {
    throw UsageError("depth_fraction must lie in (0, 1], got " + std::to_string(depth_fraction));
  }
  const double exact = depth_fraction * static_cast<double>(num_layers);
  const auto kept = std::min(num_layers, static_cast<std::size_t>(std::ceil(exact - 1e-9)));
  if (kept < 2) {
    throw DataError(ErrorCode::insufficient_depth,
                    "depth fraction " + std::to_string(depth_fraction) + " keeps " + std::to_string(kept) +
                        " of " + std::to_string(num_layers) + " layers, need >= 2");
  }
  return kept;
}

std::vector<AttentionGraph> build_graph_sequence(const AttentionSample& sample, double top_percent,
                                                 double depth_fraction) {
  std::size_t kept = 0;
  try {
    kept = layers_for_depth(sample.num_layers(), depth_fraction);
  } catch (const DataError& e) {
    throw DataError(e.code(), "sample '" + sample.sample_id + "': " + e.what());
  }
  std::vector<AttentionGraph> graphs;
  graphs.reserve(kept);
  for (std::size_t l = 0; l < kept; ++l) {
    graphs.push_back(build_graph(sample.layers[l], l + 1, top_percent));
  }
  return graphs;
}

}  // namespace halluzig
