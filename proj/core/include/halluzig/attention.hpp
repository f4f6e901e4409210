#pragma once

// Attention dump ingestion and attention-graph construction.
//
// On-disk layout of one sample (ADF, format_version 1):
//
//   <dir>/manifest.json
//   <dir>/layer_000.bin ... layer_{L-1:03}.bin
//
// Each layer file holds num_heads * seq_len * seq_len little-endian float32
// values, row-major, heads outermost. Row i of a layer matrix is the
// attention distribution of token i over all tokens.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace halluzig {

/// Dense square matrix of attention probabilities, row-major.
class AttentionMatrix {
 public:
  AttentionMatrix() = default;
  explicit AttentionMatrix(std::size_t size) : size_(size), data_(size * size, 0.0f) {}
  AttentionMatrix(std::size_t size, std::vector<float> values);

  std::size_t size() const noexcept { return size_; }

  float operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * size_ + col];
  }
  float& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * size_ + col];
  }

  std::span<const float> values() const noexcept { return data_; }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> row(std::size_t r) const noexcept {
    return std::span<const float>(data_).subspan(r * size_, size_);
  }

  friend bool operator==(const AttentionMatrix&, const AttentionMatrix&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<float> data_;
};

struct AttentionSample {
  std::string sample_id;
  std::string model_id;
  bool causal = false;
  std::optional<int> label;       // 1 = hallucinated
  std::optional<int> prompt_len;  // tokens
  std::vector<AttentionMatrix> layers;  // head-averaged, one per layer

  std::size_t num_layers() const noexcept { return layers.size(); }
  std::size_t seq_len() const noexcept { return layers.empty() ? 0 : layers.front().size(); }
};

/// Weighted undirected edge; vertices are 0-based token indices, u < v.
struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  float weight = 0.0f;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Thresholded attention graph for one layer. Vertex set is always
/// {0, ..., num_vertices - 1}; edges are sorted by (u, v).
struct AttentionGraph {
  std::size_t layer = 0;  // 1-based layer number
  std::size_t num_vertices = 0;
  float threshold = 0.0f;
  std::vector<Edge> edges;
};

inline constexpr double kRowSumTolerance = 1e-3;
inline constexpr double kDefaultTopPercent = 10.0;

/// Reads and fully validates one ADF directory. Per-head dumps are
/// averaged on load.
AttentionSample load_sample(const std::filesystem::path& dir);

/// Writes a head-averaged sample (num_heads = 1) as an ADF directory.
void write_sample(const AttentionSample& sample, const std::filesystem::path& dir);

/// Checks the row-stochastic / causal / finiteness invariants.
/// Throws DataError naming the offending layer and row.
void validate_sample(const AttentionSample& sample);

/// Elementwise arithmetic mean over heads.
AttentionMatrix average_heads(std::span<const AttentionMatrix> heads);

/// Keeps the top `top_percent` of strictly positive off-diagonal entries.
///
/// Threshold rule: with the N candidates sorted ascending, the threshold is
/// the entry at 0-based rank min(N-1, ceil((100 - top_percent) / 100 * N)),
/// i.e. the floor(top_percent / 100 * N)-th largest (at least one). The pair
/// {i, j} becomes an edge when max(a_ij, a_ji) clears the threshold; ties
/// are kept.
AttentionGraph build_graph(const AttentionMatrix& matrix, std::size_t layer,
                           double top_percent = kDefaultTopPercent);

/// Number of leading layers kept for a depth fraction: ceil(fraction * L).
/// Throws DataError(insufficient_depth) when fewer than two layers remain.
std::size_t layers_for_depth(std::size_t num_layers, double depth_fraction);

std::vector<AttentionGraph> build_graph_sequence(const AttentionSample& sample,
                                                 double top_percent = kDefaultTopPercent,
                                                 double depth_fraction = 1.0);

}  // namespace halluzig
