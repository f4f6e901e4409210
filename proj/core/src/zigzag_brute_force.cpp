// Verification backend: builds the homology spaces of every snapshot and the
// matrices of the maps induced by inclusion, then for every index window
// [b, d] computes the rank of the canonical map from the limit to the colimit
// of the restricted zigzag. That rank is the number of bars covering the
// window. Only generic linear algebra over F2 is used, no graph shortcuts.
// Cubic in the total homology dimension of a window; meant for small inputs.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "f2.hpp"
#include "halluzig/error.hpp"
#include "halluzig/zigzag.hpp"

namespace halluzig::detail {
namespace {

using f2::BitVec;
using f2::Echelon;

// Homology of one snapshot in one dimension, with a coordinate map.
struct HomologySpace {
  std::size_t dim = 0;
  std::vector<BitVec> representatives;  // chains, one per basis element

  // dim 1: echelon form of the cycle basis, combos index the basis
  // dim 0: echelon form of the boundary space
  Echelon echelon{0, 0};
  std::vector<std::size_t> free_positions;  // dim 0: non-pivot vertices, in order

  BitVec coordinates(const BitVec& chain, int hdim) const {
    BitVec out(dim);
    BitVec v = chain;
    if (hdim == 1) {
      echelon.reduce(v, &out);
      if (!v.none()) throw InvariantError("cycle does not lie in the target cycle space");
    } else {
      echelon.reduce(v);
      for (std::size_t k = 0; k < free_positions.size(); ++k) {
        if (v.test(free_positions[k])) out.set(k);
      }
    }
    return out;
  }
};

HomologySpace cycle_space(const ZigzagFiltration& f, const Snapshot& snap) {
  const std::size_t m = f.edges.size();
  const std::size_t local = snap.edge_ids.size();
  // Column-reduce the boundary matrix restricted to this snapshot's edges;
  // each dependent combination is a cycle.
  Echelon boundaries(f.num_vertices, local);
  HomologySpace space;
  for (auto id : snap.edge_ids) {
    BitVec col(f.num_vertices);
    col.set(f.edges[id].u);
    col.set(f.edges[id].v);
    if (auto combo = boundaries.insert(std::move(col))) {
      BitVec cycle(m);
      for (std::size_t k = 0; k < local; ++k) {
        if (combo->test(k)) cycle.set(snap.edge_ids[k]);
      }
      space.representatives.push_back(std::move(cycle));
    }
  }
  space.dim = space.representatives.size();
  space.echelon = Echelon(m, space.dim);
  for (const auto& z : space.representatives) {
    if (space.echelon.insert(z)) throw InvariantError("cycle basis is dependent");
  }
  return space;
}

HomologySpace component_space(const ZigzagFiltration& f, const Snapshot& snap) {
  HomologySpace space;
  space.echelon = Echelon(f.num_vertices, snap.edge_ids.size());
  for (auto id : snap.edge_ids) {
    BitVec col(f.num_vertices);
    col.set(f.edges[id].u);
    col.set(f.edges[id].v);
    space.echelon.insert(std::move(col));
  }
  for (std::size_t v = 0; v < f.num_vertices; ++v) {
    if (!space.echelon.is_pivot(v)) {
      space.free_positions.push_back(v);
      BitVec rep(f.num_vertices);
      rep.set(v);
      space.representatives.push_back(std::move(rep));
    }
  }
  space.dim = space.representatives.size();
  return space;
}

struct Arrow {
  bool forward = true;                // snapshot i -> i+1 when true, else i <- i+1
  std::vector<BitVec> columns;        // image of each source basis vector
};

}  // namespace

std::vector<std::int64_t> covering_counts_brute_force(const ZigzagFiltration& f, int hdim) {
  const std::size_t n = f.size();
  std::vector<HomologySpace> spaces;
  spaces.reserve(n);
  for (const auto& snap : f.snapshots) {
    spaces.push_back(hdim == 1 ? cycle_space(f, snap) : component_space(f, snap));
  }

  std::vector<Arrow> arrows(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& a = f.snapshots[i].edge_ids;
    const auto& b = f.snapshots[i + 1].edge_ids;
    arrows[i].forward = std::includes(b.begin(), b.end(), a.begin(), a.end());
    const auto& src = spaces[arrows[i].forward ? i : i + 1];
    const auto& dst = spaces[arrows[i].forward ? i + 1 : i];
    for (const auto& rep : src.representatives) {
      arrows[i].columns.push_back(dst.coordinates(rep, hdim));
    }
  }

  std::vector<std::int64_t> rank(n * n, 0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t d = b; d < n; ++d) {
      std::vector<std::size_t> offset(d - b + 2, 0);
      for (std::size_t s = b; s <= d; ++s) offset[s - b + 1] = offset[s - b] + spaces[s].dim;
      const std::size_t total = offset.back();
      if (total == 0) continue;

      // Output blocks of the compatibility map, one per arrow, sized by target.
      std::vector<std::size_t> out_offset(d - b + 1, 0);
      for (std::size_t a = b; a < d; ++a) {
        const std::size_t target = arrows[a].forward ? a + 1 : a;
        out_offset[a - b + 1] = out_offset[a - b] + spaces[target].dim;
      }
      const std::size_t out_total = out_offset.back();

      // Limit: kernel of x -> (M_a x_source + x_target)_a.
      Echelon compat(out_total, total);
      std::vector<BitVec> limit;
      for (std::size_t s = b; s <= d; ++s) {
        for (std::size_t k = 0; k < spaces[s].dim; ++k) {
          BitVec col(out_total);
          if (s > b) {  // arrow s-1 touches slot s
            const auto& arrow = arrows[s - 1];
            const std::size_t base = out_offset[s - 1 - b];
            if (arrow.forward) {
              col.flip(base + k);  // slot s is the target
            } else {
              const auto& img = arrow.columns[k];
              for (std::size_t t = 0; t < img.size(); ++t) {
                if (img.test(t)) col.flip(base + t);
              }
            }
          }
          if (s < d) {  // arrow s touches slot s
            const auto& arrow = arrows[s];
            const std::size_t base = out_offset[s - b];
            if (arrow.forward) {
              const auto& img = arrow.columns[k];
              for (std::size_t t = 0; t < img.size(); ++t) {
                if (img.test(t)) col.flip(base + t);
              }
            } else {
              col.flip(base + k);
            }
          }
          if (auto combo = compat.insert(std::move(col))) limit.push_back(std::move(*combo));
        }
      }

      // Colimit relations: source vector identified with its image.
      Echelon relations(total, 0);
      for (std::size_t a = b; a < d; ++a) {
        const auto& arrow = arrows[a];
        const std::size_t src = arrow.forward ? a : a + 1;
        const std::size_t dst = arrow.forward ? a + 1 : a;
        for (std::size_t k = 0; k < spaces[src].dim; ++k) {
          BitVec rel(total);
          rel.set(offset[src - b] + k);
          const auto& img = arrow.columns[k];
          for (std::size_t t = 0; t < img.size(); ++t) {
            if (img.test(t)) rel.flip(offset[dst - b] + t);
          }
          relations.insert(std::move(rel));
        }
      }

      // Rank of limit -> V_b -> colimit.
      std::int64_t independent = 0;
      for (const auto& x : limit) {
        BitVec y(total);
        for (std::size_t k = 0; k < spaces[b].dim; ++k) {
          if (x.test(k)) y.set(k);
        }
        relations.reduce(y);
        if (!y.none()) {
          relations.insert(std::move(y));
          ++independent;
        }
      }
      rank[b * n + d] = independent;
    }
  }
  return rank;
}

}  // namespace halluzig::detail
