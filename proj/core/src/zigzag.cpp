#include "halluzig/zigzag.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "halluzig/error.hpp"
#include "halluzig/union_find.hpp"

namespace halluzig {
namespace {

constexpr std::uint32_t kNever = std::numeric_limits<std::uint32_t>::max();

// Edge ids present in `next` but not in `prev`; both ascending.
std::vector<std::uint32_t> inserted_ids(const Snapshot& prev, const Snapshot& next) {
  std::vector<std::uint32_t> out;
  std::set_difference(next.edge_ids.begin(), next.edge_ids.end(), prev.edge_ids.begin(),
                      prev.edge_ids.end(), std::back_inserter(out));
  return out;
}

// Number of bars covering [b, d] for the dim-0 module equals b0 of the union
// of snapshots b..d: dualizing turns H_0 into the subspaces of functions on
// the vertex set that are constant on components, and the covering count of
// a zigzag of subspaces is the dimension of their intersection.
std::vector<std::int64_t> covering_counts_dim0(const ZigzagFiltration& f) {
  const std::size_t n = f.size();
  const auto& edges = f.edges;
  std::vector<std::int64_t> rank(n * n, 0);

  std::vector<std::vector<std::uint32_t>> inserted(n);
  for (std::size_t i = 1; i < n; ++i) inserted[i] = inserted_ids(f.snapshots[i - 1], f.snapshots[i]);

  UnionFind uf;
  for (std::size_t b = 0; b < n; ++b) {
    uf.reset(f.num_vertices);
    for (auto id : f.snapshots[b].edge_ids) uf.unite(edges[id].u, edges[id].v);
    rank[b * n + b] = static_cast<std::int64_t>(uf.components());
    for (std::size_t d = b + 1; d < n; ++d) {
      if (uf.components() == 1) {
        std::fill(rank.begin() + static_cast<std::ptrdiff_t>(b * n + d),
                  rank.begin() + static_cast<std::ptrdiff_t>(b * n + n), 1);
        break;
      }
      for (auto id : inserted[d]) uf.unite(edges[id].u, edges[id].v);
      rank[b * n + d] = static_cast<std::int64_t>(uf.components());
    }
  }
  return rank;
}

// Cycle spaces of subgraphs are subspaces of the cycle space of the full
// edge set, so the covering count of [b, d] is b1 of the intersection of
// snapshots b..d. For a fixed b, an edge stays in the intersection up to the
// end of its presence run starting at b; sweeping d downward turns the
// shrinking intersection into incremental union-find.
std::vector<std::int64_t> covering_counts_dim1(const ZigzagFiltration& f) {
  const std::size_t n = f.size();
  const auto& edges = f.edges;
  const auto num_vertices = static_cast<std::int64_t>(f.num_vertices);
  std::vector<std::int64_t> rank(n * n, 0);

  std::vector<std::uint32_t> run_end(edges.size(), 0);
  std::vector<std::uint32_t> seen_at(edges.size(), kNever);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> by_end;  // (run end, edge id)
  UnionFind uf;

  for (std::size_t step = n; step-- > 0;) {
    const auto i = static_cast<std::uint32_t>(step);
    by_end.clear();
    for (auto id : f.snapshots[step].edge_ids) {
      const std::uint32_t end = (seen_at[id] == i + 1) ? run_end[id] : i;
      run_end[id] = end;
      seen_at[id] = i;
      by_end.emplace_back(end, id);
    }
    std::sort(by_end.begin(), by_end.end(), std::greater<>());

    uf.reset(f.num_vertices);
    std::int64_t edge_count = 0;
    std::size_t next = 0;
    for (std::size_t d = n; d-- > step;) {
      while (next < by_end.size() && by_end[next].first == d) {
        const auto& e = edges[by_end[next].second];
        uf.unite(e.u, e.v);
        ++edge_count;
        ++next;
      }
      rank[step * n + d] = edge_count - num_vertices + static_cast<std::int64_t>(uf.components());
    }
  }
  return rank;
}

}  // namespace

std::size_t PersistenceDiagram::count(int dim) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      intervals.begin(), intervals.end(), [dim](const auto& iv) { return iv.dim == dim; }));
}

PersistenceDiagram PersistenceDiagram::restricted_to(int dim) const {
  PersistenceDiagram out;
  out.min_index = min_index;
  out.max_index = max_index;
  for (const auto& iv : intervals) {
    if (iv.dim == dim) out.intervals.push_back(iv);
  }
  return out;
}

void PersistenceDiagram::sort() { std::sort(intervals.begin(), intervals.end()); }

BettiNumbers betti_numbers(std::size_t num_vertices, std::span<const VertexPair> edges) {
  UnionFind uf(num_vertices);
  for (const auto& e : edges) uf.unite(e.u, e.v);
  BettiNumbers out;
  out.b0 = uf.components();
  out.b1 = edges.size() + out.b0 - num_vertices;
  return out;
}

BettiNumbers betti_numbers(const ZigzagFiltration& filtration, std::size_t snapshot) {
  std::vector<VertexPair> pairs;
  for (auto id : filtration.snapshots.at(snapshot).edge_ids) pairs.push_back(filtration.edges[id]);
  return betti_numbers(filtration.num_vertices, pairs);
}

void validate_filtration(const ZigzagFiltration& f) {
  if (f.snapshots.empty()) {
    throw DataError(ErrorCode::invalid_filtration, "filtration has no snapshots");
  }
  for (std::size_t i = 0; i < f.snapshots.size(); ++i) {
    const auto& ids = f.snapshots[i].edge_ids;
    if (!std::is_sorted(ids.begin(), ids.end()) ||
        std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw DataError(ErrorCode::invalid_filtration,
                      "snapshot " + std::to_string(i + 1) + " edge ids are not strictly ascending");
    }
    if (!ids.empty() && ids.back() >= f.edges.size()) {
      throw DataError(ErrorCode::invalid_filtration,
                      "snapshot " + std::to_string(i + 1) + " references an unknown edge");
    }
    if (i == 0) continue;
    const auto& prev = f.snapshots[i - 1].edge_ids;
    const bool grows = std::includes(ids.begin(), ids.end(), prev.begin(), prev.end());
    const bool shrinks = std::includes(prev.begin(), prev.end(), ids.begin(), ids.end());
    if (!grows && !shrinks) {
      throw DataError(ErrorCode::invalid_filtration,
                      "snapshots " + std::to_string(i) + " and " + std::to_string(i + 1) +
                          " are not nested");
    }
  }
  for (const auto& e : f.edges) {
    if (e.u >= e.v || e.v >= f.num_vertices) {
      throw DataError(ErrorCode::invalid_filtration, "edge (" + std::to_string(e.u) + ", " +
                                                         std::to_string(e.v) + ") is invalid");
    }
  }
}

ZigzagFiltration build_zigzag(std::span<const AttentionGraph> graphs) {
  if (graphs.size() < 2) {
    throw DataError(ErrorCode::insufficient_depth,
                    "zigzag needs at least 2 layer graphs, got " + std::to_string(graphs.size()));
  }
  const std::size_t num_vertices = graphs.front().num_vertices;
  std::vector<VertexPair> pairs;
  for (const auto& g : graphs) {
    if (g.num_vertices != num_vertices) {
      throw DataError(ErrorCode::inconsistent_vertices,
                      "layer " + std::to_string(g.layer) + " has " +
                          std::to_string(g.num_vertices) + " vertices, expected " +
                          std::to_string(num_vertices));
    }
    for (const auto& e : g.edges) pairs.push_back({e.u, e.v});
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  auto id_of = [&](std::uint32_t u, std::uint32_t v) {
    const VertexPair key{u, v};
    return static_cast<std::uint32_t>(std::lower_bound(pairs.begin(), pairs.end(), key) -
                                      pairs.begin());
  };

  std::vector<Snapshot> layers;
  layers.reserve(graphs.size());
  for (const auto& g : graphs) {
    std::vector<std::pair<std::uint32_t, float>> entries;
    entries.reserve(g.edges.size());
    for (const auto& e : g.edges) {
      if (e.u >= e.v || e.v >= num_vertices) {
        throw DataError(ErrorCode::invalid_filtration,
                        "layer " + std::to_string(g.layer) + " holds an invalid edge");
      }
      entries.emplace_back(id_of(e.u, e.v), e.weight);
    }
    std::sort(entries.begin(), entries.end());
    Snapshot s;
    for (const auto& [id, w] : entries) {
      if (!s.edge_ids.empty() && s.edge_ids.back() == id) {
        throw DataError(ErrorCode::invalid_filtration,
                        "layer " + std::to_string(g.layer) + " holds a duplicate edge");
      }
      s.edge_ids.push_back(id);
      s.weights.push_back(w);
    }
    layers.push_back(std::move(s));
  }

  ZigzagFiltration f;
  f.num_vertices = num_vertices;
  f.num_layers = graphs.size();
  f.edges = std::move(pairs);
  f.snapshots.reserve(2 * graphs.size() - 1);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    f.snapshots.push_back(layers[l]);
    if (l + 1 == layers.size()) break;
    const auto& a = layers[l];
    const auto& b = layers[l + 1];
    Snapshot u;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.edge_ids.size() || j < b.edge_ids.size()) {
      if (j == b.edge_ids.size() || (i < a.edge_ids.size() && a.edge_ids[i] < b.edge_ids[j])) {
        u.edge_ids.push_back(a.edge_ids[i]);
        u.weights.push_back(a.weights[i]);
        ++i;
      } else if (i == a.edge_ids.size() || b.edge_ids[j] < a.edge_ids[i]) {
        u.edge_ids.push_back(b.edge_ids[j]);
        u.weights.push_back(b.weights[j]);
        ++j;
      } else {
        u.edge_ids.push_back(a.edge_ids[i]);
        u.weights.push_back(std::max(a.weights[i], b.weights[j]));
        ++i;
        ++j;
      }
    }
    f.snapshots.push_back(std::move(u));
  }
  return f;
}

ZigzagFiltration make_filtration(std::size_t num_vertices,
                                 const std::vector<std::vector<VertexPair>>& snapshots) {
  std::vector<std::vector<VertexPair>> normalized;
  normalized.reserve(snapshots.size());
  std::vector<VertexPair> all;
  for (const auto& snap : snapshots) {
    std::vector<VertexPair> s;
    for (auto p : snap) {
      if (p.u == p.v || p.u >= num_vertices || p.v >= num_vertices) {
        throw DataError(ErrorCode::invalid_filtration,
                        "edge (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                            ") is a self-loop or out of range");
      }
      if (p.u > p.v) std::swap(p.u, p.v);
      s.push_back(p);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    all.insert(all.end(), s.begin(), s.end());
    normalized.push_back(std::move(s));
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  ZigzagFiltration f;
  f.num_vertices = num_vertices;
  f.num_layers = (snapshots.size() + 1) / 2;
  f.edges = all;
  for (const auto& s : normalized) {
    Snapshot snap;
    for (const auto& p : s) {
      snap.edge_ids.push_back(
          static_cast<std::uint32_t>(std::lower_bound(all.begin(), all.end(), p) - all.begin()));
      snap.weights.push_back(1.0f);
    }
    f.snapshots.push_back(std::move(snap));
  }
  validate_filtration(f);
  return f;
}

ZigzagFiltration reversed(const ZigzagFiltration& filtration) {
  ZigzagFiltration out = filtration;
  std::reverse(out.snapshots.begin(), out.snapshots.end());
  return out;
}

namespace detail {

std::vector<std::int64_t> covering_counts_graph(const ZigzagFiltration& filtration, int dim) {
  return dim == 0 ? covering_counts_dim0(filtration) : covering_counts_dim1(filtration);
}

void decompose_covering_counts(std::span<const std::int64_t> rank, std::size_t n, int dim,
                               std::vector<PersistenceInterval>& out) {
  auto at = [&](std::ptrdiff_t b, std::ptrdiff_t d) -> std::int64_t {
    if (b < 0 || d >= static_cast<std::ptrdiff_t>(n)) return 0;
    return rank[static_cast<std::size_t>(b) * n + static_cast<std::size_t>(d)];
  };
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n); ++b) {
    for (std::ptrdiff_t d = b; d < static_cast<std::ptrdiff_t>(n); ++d) {
      const std::int64_t mult = at(b, d) - at(b - 1, d) - at(b, d + 1) + at(b - 1, d + 1);
      if (mult < 0) {
        throw InvariantError("negative bar multiplicity at [" + std::to_string(b + 1) + ", " +
                             std::to_string(d + 1) + "] in dimension " + std::to_string(dim));
      }
      for (std::int64_t k = 0; k < mult; ++k) out.push_back({b + 1, d + 1, dim});
    }
  }
}

}  // namespace detail

PersistenceDiagram compute_zigzag_persistence(const ZigzagFiltration& filtration, int max_dim,
                                              ZigzagBackend backend) {
  if (max_dim != 0 && max_dim != 1) {
    throw UsageError("max_dim must be 0 or 1, got " + std::to_string(max_dim));
  }
  validate_filtration(filtration);
  const std::size_t n = filtration.size();

  PersistenceDiagram diagram;
  diagram.min_index = 1;
  diagram.max_index = static_cast<std::int64_t>(n);
  for (int dim = 0; dim <= max_dim; ++dim) {
    const auto rank = backend == ZigzagBackend::graph_rank
                          ? detail::covering_counts_graph(filtration, dim)
                          : detail::covering_counts_brute_force(filtration, dim);
    detail::decompose_covering_counts(rank, n, dim, diagram.intervals);
  }
  diagram.sort();
  return diagram;
}

void write_barcode_jsonl(std::ostream& out, const PersistenceDiagram& diagram,
                         const std::string& sample_id) {
  nlohmann::ordered_json header = {{"max_index", diagram.max_index}, {"sample_id", sample_id}};
  out << header.dump() << '\n';
  for (const auto& iv : diagram.intervals) {
    nlohmann::ordered_json line = {{"dim", iv.dim}, {"birth", iv.birth}, {"death", iv.death}};
    out << line.dump() << '\n';
  }
}

}  // namespace halluzig
