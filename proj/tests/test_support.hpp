#pragma once

// Helpers shared by the unit tests and the acceptance runner: random
// filtrations, temporary directories, and reference implementations that
// deliberately share no code with the library.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "halluzig/attention.hpp"
#include "halluzig/zigzag.hpp"

namespace halluzig::testing {

using EdgeSet = std::vector<VertexPair>;

/// Removes the directory on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("halluzig_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline EdgeSet random_edge_set(std::mt19937_64& rng, std::size_t t, double density) {
  std::bernoulli_distribution keep(density);
  EdgeSet edges;
  for (std::uint32_t u = 0; u < t; ++u) {
    for (std::uint32_t v = u + 1; v < t; ++v) {
      if (keep(rng)) edges.push_back({u, v});
    }
  }
  return edges;
}

inline EdgeSet set_union(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Layer, union, layer, ... snapshots of a sequence of edge sets.
inline std::vector<EdgeSet> union_snapshots(const std::vector<EdgeSet>& layers) {
  std::vector<EdgeSet> snaps;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l > 0) snaps.push_back(set_union(layers[l - 1], layers[l]));
    snaps.push_back(layers[l]);
  }
  return snaps;
}

/// Random layer sequence with T in [2, max_t], L in [2, max_l] and a
/// per-trial edge density.
inline std::vector<EdgeSet> random_layers(std::mt19937_64& rng, std::size_t& t, std::size_t max_t,
                                          std::size_t max_l) {
  t = std::uniform_int_distribution<std::size_t>(2, max_t)(rng);
  const auto l = std::uniform_int_distribution<std::size_t>(2, max_l)(rng);
  const double density = std::uniform_real_distribution<double>(0.1, 0.7)(rng);
  std::vector<EdgeSet> layers;
  for (std::size_t k = 0; k < l; ++k) layers.push_back(random_edge_set(rng, t, density));
  return layers;
}

/// Generic zigzag: each step either inserts or deletes a random batch of
/// edges, so the snapshots are nested one way or the other.
inline std::vector<EdgeSet> random_generic_zigzag(std::mt19937_64& rng, std::size_t t, std::size_t n) {
  std::vector<EdgeSet> snaps{random_edge_set(rng, t, 0.3)};
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution pick(0.35);
  while (snaps.size() < n) {
    const auto& prev = snaps.back();
    EdgeSet next;
    if (coin(rng)) {
      next = prev;
      for (std::uint32_t u = 0; u < t; ++u) {
        for (std::uint32_t v = u + 1; v < t; ++v) {
          if (pick(rng)) next.push_back({u, v});
        }
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
    } else {
      for (const auto& e : prev) {
        if (!pick(rng)) next.push_back(e);
      }
    }
    snaps.push_back(std::move(next));
  }
  return snaps;
}

/// Betti numbers by depth-first search over an adjacency list; beta_1 from
/// the Euler characteristic.
inline std::pair<std::size_t, std::size_t> oracle_betti(std::size_t t, const EdgeSet& edges) {
  std::vector<std::vector<std::uint32_t>> adj(t);
  for (const auto& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<bool> seen(t, false);
  std::size_t components = 0;
  for (std::uint32_t s = 0; s < t; ++s) {
    if (seen[s]) continue;
    ++components;
    std::vector<std::uint32_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (const auto y : adj[x]) {
        if (!seen[y]) {
          seen[y] = true;
          stack.push_back(y);
        }
      }
    }
  }
  return {components, edges.size() + components - t};
}

/// Standard persistence of an ascending graph filtration by boundary-matrix
/// column reduction over F2. Vertices enter at time 1, edge e at time
/// entry[e]. Returns (birth, death, dim) with death = +inf for essential
/// classes; zero-length pairs are dropped.
struct StandardBar {
  std::int64_t birth;
  std::int64_t death;
  int dim;
};

inline std::vector<StandardBar> standard_persistence(std::size_t t, const std::vector<VertexPair>& edges,
                                                     const std::vector<std::int64_t>& entry) {
  constexpr auto kInf = std::numeric_limits<std::int64_t>::max();
  // Simplex order: vertices, then edges by entry time (stable).
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return entry[a] < entry[b]; });

  const std::size_t n = t + edges.size();
  std::vector<std::int64_t> time(n, 1);
  std::vector<std::set<std::size_t>> columns(n);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[order[k]];
    time[t + k] = entry[order[k]];
    columns[t + k] = {e.u, e.v};
  }
  std::map<std::size_t, std::size_t> pivot_owner;
  std::vector<bool> paired(n, false);
  std::vector<StandardBar> bars;
  for (std::size_t j = 0; j < n; ++j) {
    auto& col = columns[j];
    while (!col.empty()) {
      const auto low = *col.rbegin();
      const auto it = pivot_owner.find(low);
      if (it == pivot_owner.end()) break;
      for (const auto r : columns[it->second]) {
        if (!col.erase(r)) col.insert(r);
      }
    }
    if (!col.empty()) {
      const auto low = *col.rbegin();
      pivot_owner[low] = j;
      paired[low] = paired[j] = true;
      if (time[low] != time[j]) bars.push_back({time[low], time[j], 0});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (paired[j]) continue;
    bars.push_back({time[j], kInf, j < t ? 0 : 1});
  }
  return bars;
}

/// Mann-Whitney AUROC by enumerating every positive-negative pair, as an
/// exact fraction (doubled wins, pairs).
inline std::pair<std::uint64_t, std::uint64_t> pairwise_auroc(std::span<const double> scores,
                                                              std::span<const int> labels) {
  std::uint64_t doubled = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        doubled += 2;
      } else if (scores[i] == scores[j]) {
        doubled += 1;
      }
    }
  }
  return {doubled, pairs};
}

inline std::vector<PersistenceInterval> mirrored(const PersistenceDiagram& d) {
  const auto m = d.max_index + d.min_index;
  std::vector<PersistenceInterval> out;
  for (const auto& iv : d.intervals) out.push_back({m - iv.death, m - iv.birth, iv.dim});
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<PersistenceInterval> sorted_intervals(const PersistenceDiagram& d) {
  auto out = d.intervals;
  std::sort(out.begin(), out.end());
  return out;
}

/// Zigzag barcode expected for a nested layer sequence, translated from the
/// standard persistence of the ascending filtration: a class born at layer
/// l first appears at snapshot 2l - 2 (1 for l = 1); a class killed at
/// layer l' was last alive at snapshot 2l' - 3.
inline std::vector<PersistenceInterval> expected_monotone_barcode(std::size_t t,
                                                                  const std::vector<EdgeSet>& nested) {
  std::vector<VertexPair> edges;
  std::vector<std::int64_t> entry;
  for (std::size_t l = 0; l < nested.size(); ++l) {
    for (const auto& e : nested[l]) {
      if (std::find(edges.begin(), edges.end(), e) == edges.end()) {
        edges.push_back(e);
        entry.push_back(static_cast<std::int64_t>(l + 1));
      }
    }
  }
  const auto last = static_cast<std::int64_t>(2 * nested.size() - 1);
  std::vector<PersistenceInterval> out;
  for (const auto& bar : standard_persistence(t, edges, entry)) {
    const std::int64_t b = bar.birth == 1 ? 1 : 2 * bar.birth - 2;
    const std::int64_t d = bar.death == std::numeric_limits<std::int64_t>::max() ? last : 2 * bar.death - 3;
    out.push_back({b, d, bar.dim});
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Random nested sequence G_1 <= G_2 <= ... <= G_L.
inline std::vector<EdgeSet> random_nested_layers(std::mt19937_64& rng, std::size_t& t, std::size_t max_t,
                                                 std::size_t max_l) {
  t = std::uniform_int_distribution<std::size_t>(2, max_t)(rng);
  const auto l = std::uniform_int_distribution<std::size_t>(2, max_l)(rng);
  const double step = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
  std::vector<EdgeSet> layers{random_edge_set(rng, t, step)};
  while (layers.size() < l) {
    layers.push_back(set_union(layers.back(), random_edge_set(rng, t, step)));
  }
  return layers;
}

}  // namespace halluzig::testing
