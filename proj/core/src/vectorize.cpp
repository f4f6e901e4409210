#include "halluzig/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "halluzig/error.hpp"

namespace halluzig {
namespace {

constexpr double kKernelCutoff = 4.0;  // in units of sigma

template <typename Fn>
auto with_sample_context(const AttentionSample& sample, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string prefix = "sample '" + sample.sample_id + "'";
    std::string what = e.what();
    if (what.rfind(prefix, 0) != 0) what = prefix + ": " + what;
    // Rethrow as the same concrete type so callers can still catch DataError.
    switch (e.kind()) {
      case ErrorKind::data: throw DataError(e.code(), what);
      case ErrorKind::usage: throw UsageError(what, e.code());
      case ErrorKind::invariant: throw InvariantError(what);
    }
    throw;
  }
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::pers_img: return "pers_img";
    case Scheme::pers_entropy: return "pers_entropy";
    case Scheme::betti_curve: return "betti_curve";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "pers_img") return Scheme::pers_img;
  if (name == "pers_entropy") return Scheme::pers_entropy;
  if (name == "betti_curve") return Scheme::betti_curve;
  throw UsageError("unknown scheme '" + std::string(name) +
                   "' (expected pers_img, pers_entropy or betti_curve)");
}

void FeatureParams::validate() const {
  if (!(top_percent > 0.0 && top_percent <= 100.0)) {
    throw UsageError("top_percent must lie in (0, 100]");
  }
  if (!(depth_fraction > 0.0 && depth_fraction <= 1.0)) {
    throw UsageError("depth_fraction must lie in (0, 1]");
  }
  if (min_persistence < 0) throw UsageError("min_persistence must be >= 0");
  if (dims.empty()) throw UsageError("dims must name at least one homology dimension");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] != 0 && dims[i] != 1) throw UsageError("dims must be a subset of {0, 1}");
    if (i > 0 && dims[i] <= dims[i - 1]) throw UsageError("dims must be ascending and distinct");
  }
  if (image_rows == 0 || image_cols == 0) throw UsageError("image resolution must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("sigma must be positive");
  if (betti_resolution == 0) throw UsageError("betti resolution must be positive");
}

std::size_t FeatureParams::width_per_dim() const {
  switch (scheme) {
    case Scheme::pers_img: return image_rows * image_cols;
    case Scheme::pers_entropy: return 1;
    case Scheme::betti_curve: return betti_resolution;
  }
  return 0;
}

PersistenceDiagram filter_bars(const PersistenceDiagram& diagram, std::int64_t min_persistence) {
  PersistenceDiagram out;
  out.min_index = diagram.min_index;
  out.max_index = diagram.max_index;
  for (const auto& iv : diagram.intervals) {
    if (iv.lifetime() >= min_persistence) out.intervals.push_back(iv);
  }
  return out;
}

NormalizedDiagram normalize_diagram(const PersistenceDiagram& diagram) {
  NormalizedDiagram out;
  out.points.reserve(diagram.intervals.size());
  const double span = static_cast<double>(diagram.max_index - diagram.min_index);
  for (const auto& iv : diagram.intervals) {
    NormalizedPoint p{0.0, 0.0, iv.dim};
    if (span > 0.0) {
      p.birth = static_cast<double>(iv.birth - diagram.min_index) / span;
      p.death = static_cast<double>(iv.death - diagram.min_index) / span;
    }
    out.points.push_back(p);
  }
  return out;
}

std::vector<double> persistence_image(const NormalizedDiagram& diagram, std::size_t rows,
                                      std::size_t cols, double sigma,
                                      std::optional<double> weight_normalizer) {
  std::vector<double> image(rows * cols, 0.0);
  if (diagram.points.empty()) return image;

  double max_persistence = 0.0;
  for (const auto& p : diagram.points) max_persistence = std::max(max_persistence, p.death - p.birth);
  const double normalizer = weight_normalizer.value_or(max_persistence);

  const double dx = 1.0 / static_cast<double>(cols);
  const double dy = 1.0 / static_cast<double>(rows);
  const double reach = kKernelCutoff * sigma;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double density_scale = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);

  std::vector<double> gx(cols);
  std::vector<double> gy(rows);
  for (const auto& p : diagram.points) {
    const double b = p.birth;
    const double pers = p.death - p.birth;
    const double w = normalizer > 0.0 ? pers / normalizer : 1.0;
    if (w == 0.0) continue;

    // Separable kernel: precompute both axes inside the cutoff window.
    const auto col_lo = static_cast<std::ptrdiff_t>(std::ceil((b - reach) / dx - 0.5));
    const auto col_hi = static_cast<std::ptrdiff_t>(std::floor((b + reach) / dx - 0.5));
    const auto row_lo = static_cast<std::ptrdiff_t>(std::ceil((pers - reach) / dy - 0.5));
    const auto row_hi = static_cast<std::ptrdiff_t>(std::floor((pers + reach) / dy - 0.5));
    const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, col_lo);
    const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(cols) - 1, col_hi);
    const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, row_lo);
    const std::ptrdiff_t r1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(rows) - 1, row_hi);
    if (c0 > c1 || r0 > r1) continue;

    for (auto c = c0; c <= c1; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * dx - b;
      gx[static_cast<std::size_t>(c)] = std::exp(-x * x * inv_two_var);
    }
    for (auto r = r0; r <= r1; ++r) {
      const double y = (static_cast<double>(r) + 0.5) * dy - pers;
      gy[static_cast<std::size_t>(r)] = std::exp(-y * y * inv_two_var);
    }
    const double scale = w * density_scale * dx * dy;
    for (auto r = r0; r <= r1; ++r) {
      const double row_factor = scale * gy[static_cast<std::size_t>(r)];
      double* out = image.data() + static_cast<std::size_t>(r) * cols;
      for (auto c = c0; c <= c1; ++c) out[c] += row_factor * gx[static_cast<std::size_t>(c)];
    }
  }
  return image;
}

double persistence_entropy(const PersistenceDiagram& diagram) {
  double total = 0.0;
  for (const auto& iv : diagram.intervals) total += static_cast<double>(iv.lifetime());
  if (diagram.intervals.empty() || total <= 0.0) return 0.0;
  double entropy = 0.0;
  for (const auto& iv : diagram.intervals) {
    const double p = static_cast<double>(iv.lifetime()) / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return entropy;
}

std::vector<double> betti_curve(const PersistenceDiagram& diagram, std::size_t resolution) {
  std::vector<double> curve(resolution, 0.0);
  if (resolution == 0) return curve;
  const double lo = static_cast<double>(diagram.min_index);
  const double hi = static_cast<double>(diagram.max_index);
  for (std::size_t k = 0; k < resolution; ++k) {
    const double t =
        resolution == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
    const auto index = static_cast<std::int64_t>(std::floor(t + 0.5));
    std::size_t alive = 0;
    for (const auto& iv : diagram.intervals) {
      if (iv.contains(index)) ++alive;
    }
    curve[k] = static_cast<double>(alive);
  }
  return curve;
}

FeatureVector vectorize(const PersistenceDiagram& diagram, const FeatureParams& params) {
  FeatureVector out;
  out.scheme = params.scheme;
  out.dims = params.dims;
  out.values.reserve(params.width());
  for (int dim : params.dims) {
    const PersistenceDiagram part = diagram.restricted_to(dim);
    switch (params.scheme) {
      case Scheme::pers_img: {
        const auto image = persistence_image(normalize_diagram(part), params.image_rows,
                                             params.image_cols, params.sigma);
        out.values.insert(out.values.end(), image.begin(), image.end());
        break;
      }
      case Scheme::pers_entropy:
        out.values.push_back(persistence_entropy(part));
        break;
      case Scheme::betti_curve: {
        const auto curve = betti_curve(part, params.betti_resolution);
        out.values.insert(out.values.end(), curve.begin(), curve.end());
        break;
      }
    }
  }
  for (double v : out.values) {
    if (!std::isfinite(v)) throw InvariantError("vectorizer produced a non-finite value");
  }
  return out;
}

PersistenceDiagram sample_barcode(const AttentionSample& sample, const FeatureParams& params) {
  return with_sample_context(sample, [&] {
    const auto graphs = build_graph_sequence(sample, params.top_percent, params.depth_fraction);
    const auto filtration = build_zigzag(graphs);
    const int max_dim = params.dims.empty() ? 1 : params.dims.back();
    return compute_zigzag_persistence(filtration, max_dim);
  });
}

FeatureVector featurize_sample(const AttentionSample& sample, const FeatureParams& params) {
  params.validate();
  const auto barcode = sample_barcode(sample, params);
  return vectorize(filter_bars(barcode, params.min_persistence), params);
}

FeatureVector featurize_sample_static(const AttentionSample& sample, const FeatureParams& params) {
  params.validate();
  return with_sample_context(sample, [&] {
    const auto graphs = build_graph_sequence(sample, params.top_percent, params.depth_fraction);
    FeatureVector out;
    out.scheme = params.scheme;
    out.dims = params.dims;
    out.values.reserve(graphs.size() * params.width());
    for (const auto& g : graphs) {
      const auto part = vectorize(filter_bars(static_persistence(g), params.min_persistence), params);
      out.values.insert(out.values.end(), part.values.begin(), part.values.end());
    }
    return out;
  });
}

}  // namespace halluzig
