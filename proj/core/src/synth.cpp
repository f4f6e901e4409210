#include "halluzig/synth.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "halluzig/error.hpp"
#include "halluzig/random.hpp"

namespace halluzig {
namespace {

constexpr double kMaxOffDiagonalMass = 0.95;

std::vector<std::uint32_t> random_cycle(const SynthParams& p, Rng& rng) {
  const std::size_t span = p.max_cycle - p.min_cycle + 1;
  const std::size_t length = p.min_cycle + static_cast<std::size_t>(uniform_index(rng, span));
  std::vector<std::uint32_t> tokens(p.seq_len);
  std::iota(tokens.begin(), tokens.end(), std::uint32_t{0});
  for (std::size_t k = 0; k < length; ++k) {
    const auto j = k + static_cast<std::size_t>(uniform_index(rng, p.seq_len - k));
    std::swap(tokens[k], tokens[j]);
  }
  tokens.resize(length);
  return tokens;
}

AttentionMatrix synth_layer(const SynthParams& p, const std::vector<std::uint32_t>& cycle, Rng& rng) {
  const std::size_t n = p.seq_len;
  std::vector<double> noise(n * n, 0.0);
  std::vector<double> strong(n * n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double u;
      do {
        u = uniform01(rng);
      } while (u == 0.0);
      noise[i * n + j] = p.noise_ceiling * u;
    }
  }
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const std::uint32_t a = cycle[k];
    const std::uint32_t b = cycle[(k + 1) % cycle.size()];
    const std::size_t row = std::max(a, b);
    const std::size_t col = std::min(a, b);
    strong[row * n + col] = p.cycle_weight + p.cycle_jitter * uniform01(rng);
  }

  AttentionMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double noise_sum = 0.0;
    double strong_sum = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      noise_sum += noise[i * n + j];
      strong_sum += strong[i * n + j];
    }
    double scale = 1.0;
    if (noise_sum + strong_sum > kMaxOffDiagonalMass && noise_sum > 0.0) {
      scale = std::max(0.0, kMaxOffDiagonalMass - strong_sum) / noise_sum;
    }
    double off = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double a = strong[i * n + j] > 0.0 ? strong[i * n + j] : noise[i * n + j] * scale;
      m(i, j) = static_cast<float>(a);
      off += static_cast<double>(m(i, j));
    }
    m(i, i) = static_cast<float>(1.0 - off);
  }
  return m;
}

}  // namespace

void SynthParams::validate() const {
  if (seq_len < 6) throw UsageError("synthetic data needs seq_len >= 6");
  if (num_layers < 4) throw UsageError("synthetic data needs num_layers >= 4");
  if (n_per_class < 1) throw UsageError("synthetic data needs at least one sample per class");
  if (min_cycle < 3 || max_cycle < min_cycle || max_cycle > seq_len) {
    throw UsageError("cycle length range must satisfy 3 <= min <= max <= seq_len");
  }
  if (!(cycle_weight > 0.0) || cycle_jitter < 0.0 || !(noise_ceiling > 0.0) ||
      2.0 * (cycle_weight + cycle_jitter) >= kMaxOffDiagonalMass) {
    throw UsageError("synthetic weights out of range");
  }
}

AttentionSample synth_sample(const SynthParams& params, std::size_t index) {
  params.validate();
  Rng rng(substream_seed(params.seed, index));
  AttentionSample s;
  char id[32];
  std::snprintf(id, sizeof(id), "synth_%05zu", index);
  s.sample_id = id;
  s.model_id = "synthetic-T" + std::to_string(params.seq_len) + "-L" + std::to_string(params.num_layers);
  s.causal = true;
  s.label = static_cast<int>(index % 2);

  const bool stable = *s.label == 0;
  std::vector<std::uint32_t> cycle = random_cycle(params, rng);
  s.layers.reserve(params.num_layers);
  for (std::size_t l = 0; l < params.num_layers; ++l) {
    if (!stable && l > 0) cycle = random_cycle(params, rng);
    s.layers.push_back(synth_layer(params, cycle, rng));
  }
  return s;
}

std::filesystem::path write_synth_dataset(const SynthParams& params, const std::filesystem::path& out_dir) {
  params.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError(ErrorCode::io_failure, "cannot create " + out_dir.string());
  const auto manifest_path = out_dir / "manifest.jsonl";
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
  if (!manifest) throw DataError(ErrorCode::io_failure, "cannot write " + manifest_path.string());

  const std::size_t total = 2 * params.n_per_class;
  for (std::size_t k = 0; k < total; ++k) {
    const auto sample = synth_sample(params, k);
    char dir[32];
    std::snprintf(dir, sizeof(dir), "sample_%05zu", k);
    write_sample(sample, out_dir / dir);
    nlohmann::ordered_json line = {{"path", dir}, {"label", *sample.label}};
    manifest << line.dump() << '\n';
  }
  return manifest_path;
}

}  // namespace halluzig
