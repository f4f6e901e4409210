#pragma once

// Synthetic attention dumps with a planted topological class signal.
//
// Every layer of every sample is a causal row-stochastic matrix: i.i.d.
// low-level noise below the diagonal, one strongly attended token cycle,
// and the diagonal taking the remaining mass of each row.
//   label 0 ("stable"):    the same cycle, on the same tokens, in every layer
//   label 1 ("ephemeral"): a fresh random cycle in every layer
// Samples alternate labels 0, 1, 0, 1, ... and sample k draws from
// substream_seed(seed, k), so datasets are reproducible byte for byte.

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "halluzig/attention.hpp"

namespace halluzig {

struct SynthParams {
  std::size_t n_per_class = 100;
  std::size_t seq_len = 20;
  std::size_t num_layers = 12;
  std::uint64_t seed = 0;
  // Cycle length range, tokens. One fixed length by default, so that a
  // single layer looks the same in both classes.
  std::size_t min_cycle = 5;
  std::size_t max_cycle = 5;
  double cycle_weight = 0.20;      // attention on a cycle edge, plus up to cycle_jitter
  double cycle_jitter = 0.10;
  double noise_ceiling = 0.02;     // off-diagonal noise is uniform in (0, noise_ceiling)

  void validate() const;
};

AttentionSample synth_sample(const SynthParams& params, std::size_t index);

/// Writes sample_00000 ... under `out_dir` plus `out_dir/manifest.jsonl`.
/// Returns the manifest path.
std::filesystem::path write_synth_dataset(const SynthParams& params,
                                          const std::filesystem::path& out_dir);

}  // namespace halluzig
