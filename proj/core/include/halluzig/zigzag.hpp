#pragma once

// Zigzag persistence of graph sequences.
//
// A sequence of layer graphs G_1, ..., G_L is woven into the zigzag
//
//   G_1 -> G_1 u G_2 <- G_2 -> G_2 u G_3 <- ... <- G_L
//
// with snapshots numbered 1 .. 2L-1 (odd = layer, even = union). Bars are
// closed intervals of snapshot indices.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "halluzig/attention.hpp"

namespace halluzig {

/// Unordered vertex pair, u < v.
struct VertexPair {
  std::uint32_t u = 0;
  std::uint32_t v = 0;

  friend auto operator<=>(const VertexPair&, const VertexPair&) = default;
};

/// Edges of one snapshot: ids into ZigzagFiltration::edges, ascending.
struct Snapshot {
  std::vector<std::uint32_t> edge_ids;
  std::vector<float> weights;  // parallel to edge_ids
};

struct ZigzagFiltration {
  std::size_t num_vertices = 0;
  std::size_t num_layers = 0;
  std::vector<VertexPair> edges;  // every pair that appears anywhere, sorted
  std::vector<Snapshot> snapshots;

  std::size_t size() const noexcept { return snapshots.size(); }
};

struct PersistenceInterval {
  std::int64_t birth = 0;
  std::int64_t death = 0;
  int dim = 0;

  std::int64_t lifetime() const noexcept { return death - birth + 1; }
  bool contains(std::int64_t index) const noexcept { return birth <= index && index <= death; }

  friend auto operator<=>(const PersistenceInterval&, const PersistenceInterval&) = default;
};

/// Multiset of closed intervals over snapshot indices [min_index, max_index].
struct PersistenceDiagram {
  std::vector<PersistenceInterval> intervals;  // sorted by (birth, death, dim)
  std::int64_t min_index = 1;
  std::int64_t max_index = 1;

  std::size_t count(int dim) const noexcept;
  PersistenceDiagram restricted_to(int dim) const;
  void sort();
};

struct BettiNumbers {
  std::size_t b0 = 0;
  std::size_t b1 = 0;

  friend bool operator==(const BettiNumbers&, const BettiNumbers&) = default;
};

/// Graph homology with the full vertex set: b0 by union-find, b1 = |E| - T + b0.
BettiNumbers betti_numbers(std::size_t num_vertices, std::span<const VertexPair> edges);
BettiNumbers betti_numbers(const ZigzagFiltration& filtration, std::size_t snapshot);

ZigzagFiltration build_zigzag(std::span<const AttentionGraph> graphs);

/// Builds a filtration from explicit snapshots (0-based vertices). Adjacent
/// snapshots must be nested one way or the other.
ZigzagFiltration make_filtration(std::size_t num_vertices,
                                 const std::vector<std::vector<VertexPair>>& snapshots);

/// Throws DataError(invalid_filtration) unless adjacent snapshots are nested.
void validate_filtration(const ZigzagFiltration& filtration);

ZigzagFiltration reversed(const ZigzagFiltration& filtration);

enum class ZigzagBackend {
  graph_rank,   // production: rank invariant from incremental union-find sweeps
  brute_force,  // explicit homology maps and limit/colimit linear algebra; small inputs
};

PersistenceDiagram compute_zigzag_persistence(const ZigzagFiltration& filtration, int max_dim = 1,
                                              ZigzagBackend backend = ZigzagBackend::graph_rank);

namespace detail {
/// Number of bars of one dimension covering [b, d] for every 0-based b <= d,
/// stored at rank[b * n + d]. Both backends produce this table.
std::vector<std::int64_t> covering_counts_graph(const ZigzagFiltration& filtration, int dim);
std::vector<std::int64_t> covering_counts_brute_force(const ZigzagFiltration& filtration, int dim);

/// Recovers the bar multiset of one dimension from its covering counts.
void decompose_covering_counts(std::span<const std::int64_t> rank, std::size_t n, int dim,
                               std::vector<PersistenceInterval>& out);
}  // namespace detail

/// Descending-weight edge filtration of a single graph. Index 0 holds the
/// bare vertex set, index r the first r edges in the sorted order (ties by
/// vertex pair). Cycles never die and end at the last index.
PersistenceDiagram static_persistence(const AttentionGraph& graph);

/// Barcode export: a header line {"max_index", "sample_id"} followed by one
/// {"dim", "birth", "death"} object per interval.
void write_barcode_jsonl(std::ostream& out, const PersistenceDiagram& diagram,
                         const std::string& sample_id);

}  // namespace halluzig
