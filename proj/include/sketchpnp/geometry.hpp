#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/image.hpp"

namespace sketchpnp {

/// 2D fan-beam acquisition with a flat detector opposite the source.
///
/// The source sits at `source_radius * (cos t, sin t)` for each view angle t;
/// the detector is centred at `-detector_radius * (cos t, sin t)` and spans
/// `detector_span` length units along `(-sin t, cos t)`, split into `n_bins`
/// equal bins. One ray per bin runs from the source to the bin centre.
struct FanBeamGeometry {
  std::vector<double> angles_deg;
  double arc_deg = 360.0;
  std::size_t n_bins = 0;
  double source_radius = 0.0;
  double detector_radius = 0.0;
  double detector_span = 0.0;
  GridSpec grid;

  std::size_t n_views() const noexcept { return angles_deg.size(); }
  std::size_t rows() const noexcept { return n_views() * n_bins; }
  std::size_t cols() const noexcept { return grid.pixels(); }

  friend bool operator==(const FanBeamGeometry&, const FanBeamGeometry&) = default;
};

inline void validate(const FanBeamGeometry& g) {
  validate(g.grid);
  if (g.angles_deg.empty()) throw ConfigError("geometry needs at least one view");
  if (g.n_bins < 1) throw ConfigError("geometry needs at least one detector bin");
  for (std::size_t v = 1; v < g.angles_deg.size(); ++v)
    if (!(g.angles_deg[v] > g.angles_deg[v - 1]))
      throw ConfigError("view angles must be strictly increasing");
  if (!(g.source_radius > g.grid.half_diagonal()))
    throw ConfigError("source_radius must exceed the image half-diagonal");
  if (!(g.detector_radius > 0.0)) throw ConfigError("detector_radius must be positive");
  if (!(g.detector_span > 0.0)) throw ConfigError("detector_span must be positive");
}

struct FanBeamParams {
  std::size_t n_views = 90;
  double arc_deg = 360.0;
  std::size_t n_bins = 228;
  std::size_t size = 256;       // pixels per side
  double domain_side = 2.0;     // physical side length of the image domain
  double source_radius = 3.0;
  double detector_radius = 3.0;
  /// When unset the fan covers the circumscribed circle of the image with a
  /// 5% margin on the radius.
  std::optional<double> detector_span;
};

/// Flat-detector width whose fan just covers a circle of radius
/// `1.05 * cover_radius` centred on the rotation axis.
inline double covering_detector_span(double cover_radius, double source_radius,
                                     double detector_radius) {
  const double s = 1.05 * cover_radius / source_radius;
  if (!(s < 1.0)) throw ConfigError("source too close to the object to cover it with a fan");
  const double half_fan = std::asin(s);
  return 2.0 * (source_radius + detector_radius) * std::tan(half_fan);
}

inline FanBeamGeometry make_fan_beam(const FanBeamParams& p) {
  if (p.n_views < 1) throw ConfigError("n_views must be >= 1");
  if (p.size < 1) throw ConfigError("size must be >= 1");
  if (!(p.arc_deg > 0.0) || p.arc_deg > 360.0) throw ConfigError("arc must be in (0, 360] degrees");
  if (!(p.domain_side > 0.0)) throw ConfigError("domain_side must be positive");

  FanBeamGeometry g;
  g.arc_deg = p.arc_deg;
  g.angles_deg.resize(p.n_views);
  for (std::size_t v = 0; v < p.n_views; ++v)
    g.angles_deg[v] = p.arc_deg * static_cast<double>(v) / static_cast<double>(p.n_views);
  g.n_bins = p.n_bins;
  g.source_radius = p.source_radius;
  g.detector_radius = p.detector_radius;
  g.grid = GridSpec{p.size, p.size, p.domain_side / static_cast<double>(p.size)};
  g.detector_span = p.detector_span ? *p.detector_span
                                    : covering_detector_span(g.grid.half_diagonal(), p.source_radius,
                                                             p.detector_radius);
  validate(g);
  return g;
}

inline void require_grid(const GridSpec& image_grid, const FanBeamGeometry& g, const char* what) {
  if (!(image_grid == g.grid))
    throw ConfigError(std::string(what) + ": image grid does not match geometry grid");
}

inline void require_shape(const Sinogram& s, const FanBeamGeometry& g, const char* what) {
  if (s.n_views != g.n_views() || s.n_bins != g.n_bins || s.data.size() != g.rows())
    throw ConfigError(std::string(what) + ": sinogram shape does not match geometry");
}

}  // namespace sketchpnp
