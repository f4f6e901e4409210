#include <algorithm>
#include <numeric>

#include "halluzig/union_find.hpp"
#include "halluzig/zigzag.hpp"

namespace halluzig {

PersistenceDiagram static_persistence(const AttentionGraph& graph) {
  std::vector<std::size_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = graph.edges[a];
    const auto& eb = graph.edges[b];
    if (ea.weight != eb.weight) return ea.weight > eb.weight;
    if (ea.u != eb.u) return ea.u < eb.u;
    return ea.v < eb.v;
  });

  const auto last = static_cast<std::int64_t>(graph.edges.size());
  PersistenceDiagram diagram;
  diagram.min_index = 0;
  diagram.max_index = last;

  UnionFind uf(graph.num_vertices);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto rank = static_cast<std::int64_t>(k + 1);
    const auto& e = graph.edges[order[k]];
    if (uf.unite(e.u, e.v)) {
      // every vertex is born at index 0, so the merged-away bar is [0, rank-1]
      diagram.intervals.push_back({0, rank - 1, 0});
    } else {
      diagram.intervals.push_back({rank, last, 1});
    }
  }
  for (std::size_t c = 0; c < uf.components(); ++c) diagram.intervals.push_back({0, last, 0});
  diagram.sort();
  return diagram;
}

}  // namespace halluzig
