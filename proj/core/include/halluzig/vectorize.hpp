#pragma once

// Fixed-length vectorizations of persistence diagrams.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "halluzig/attention.hpp"
#include "halluzig/zigzag.hpp"

namespace halluzig {

enum class Scheme { pers_img, pers_entropy, betti_curve };

std::string_view to_string(Scheme scheme) noexcept;
/// Accepts the canonical names ("pers_img", "pers_entropy", "betti_curve").
Scheme parse_scheme(std::string_view name);

/// Everything that decides how one attention sample becomes a vector.
struct FeatureParams {
  double top_percent = kDefaultTopPercent;
  double depth_fraction = 1.0;
  std::int64_t min_persistence = 5;  // in snapshot-index units
  std::vector<int> dims = {1};       // ascending subset of {0, 1}
  Scheme scheme = Scheme::pers_img;
  std::size_t image_rows = 32;
  std::size_t image_cols = 32;
  double sigma = 1.0 / 32.0;
  std::size_t betti_resolution = 32;

  /// Throws UsageError when a field is outside its domain.
  void validate() const;
  /// Vector length per homology dimension.
  std::size_t width_per_dim() const;
  std::size_t width() const { return width_per_dim() * dims.size(); }
};

struct FeatureVector {
  std::vector<double> values;
  Scheme scheme = Scheme::pers_img;
  std::vector<int> dims;
};

/// Point of a diagram rescaled to the unit square.
struct NormalizedPoint {
  double birth = 0.0;
  double death = 0.0;
  int dim = 0;
};

struct NormalizedDiagram {
  std::vector<NormalizedPoint> points;
};

/// Keeps bars with lifetime (death - birth + 1) >= min_persistence.
PersistenceDiagram filter_bars(const PersistenceDiagram& diagram, std::int64_t min_persistence);

/// Maps [min_index, max_index] affinely onto [0, 1]; a single-index
/// diagram maps everything to 0.
NormalizedDiagram normalize_diagram(const PersistenceDiagram& diagram);

/// Gaussian persistence image in birth-persistence coordinates over the
/// unit square. Pixel (r, c) has centre ((c + 1/2) / cols, (r + 1/2) / rows)
/// with rows along persistence and columns along birth; output is row-major.
/// Each point contributes w(p) times the kernel density at the pixel centre
/// times the pixel area, with the kernel cut off beyond 4 sigma per axis.
/// w(p) = p / weight_normalizer, defaulting to the diagram's largest
/// persistence (w = 1 when that is zero).
std::vector<double> persistence_image(const NormalizedDiagram& diagram, std::size_t rows,
                                      std::size_t cols, double sigma,
                                      std::optional<double> weight_normalizer = std::nullopt);

/// Shannon entropy (natural log) of the lifetime distribution, lifetimes
/// counted as death - birth + 1. Zero for an empty diagram.
double persistence_entropy(const PersistenceDiagram& diagram);

/// Number of bars alive at `resolution` evenly spaced points over
/// [min_index, max_index], each rounded half-up to an index.
std::vector<double> betti_curve(const PersistenceDiagram& diagram, std::size_t resolution);

/// Applies the configured scheme to each requested dimension of an already
/// filtered diagram and concatenates the results in ascending dim order.
FeatureVector vectorize(const PersistenceDiagram& diagram, const FeatureParams& params);

/// Full per-sample path: graphs -> zigzag -> barcode -> filter -> vector.
FeatureVector featurize_sample(const AttentionSample& sample, const FeatureParams& params);

/// Static baseline: each kept layer's own descending-weight persistence,
/// vectorized per layer and concatenated in layer order.
FeatureVector featurize_sample_static(const AttentionSample& sample, const FeatureParams& params);

/// Zigzag barcode of a sample (no filtering).
PersistenceDiagram sample_barcode(const AttentionSample& sample, const FeatureParams& params);

}  // namespace halluzig
