#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/geometry.hpp"
#include "sketchpnp/image.hpp"

namespace sketchpnp {

struct Ray {
  double x0, y0;  // source
  double x1, y1;  // detector bin centre
};

inline Ray ray_for(const FanBeamGeometry& g, std::size_t view, std::size_t bin) {
  const double t = g.angles_deg[view] * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double bin_width = g.detector_span / static_cast<double>(g.n_bins);
  const double offset =
      (static_cast<double>(bin) + 0.5 - 0.5 * static_cast<double>(g.n_bins)) * bin_width;
  return Ray{g.source_radius * c, g.source_radius * s,
             -g.detector_radius * c - offset * s, -g.detector_radius * s + offset * c};
}

/// Walks the pixels crossed by `ray` and calls `visit(pixel_index, length)`
/// with the exact intersection length of each.
///
/// Plane crossings are generated in increasing ray parameter from both axes
/// and merged; the pixel of each segment is identified from its midpoint, so
/// rays through pixel corners never double count.
template <typename Visitor>
void trace_ray(const GridSpec& grid, const Ray& ray, Visitor&& visit) {
  const double ps = grid.pixel_size;
  const double xmin = -0.5 * grid.extent_x();
  const double xmax = -xmin;
  const double ymin = -0.5 * grid.extent_y();
  const double ymax = -ymin;
  const double dx = ray.x1 - ray.x0;
  const double dy = ray.y1 - ray.y0;
  const double ray_length = std::hypot(dx, dy);
  if (ray_length == 0.0) return;

  double a_lo = 0.0;
  double a_hi = 1.0;
  auto clip = [&](double origin, double delta, double lo, double hi) {
    if (delta == 0.0) {
      if (origin < lo || origin > hi) a_hi = -1.0;
      return;
    }
    double a = (lo - origin) / delta;
    double b = (hi - origin) / delta;
    if (a > b) std::swap(a, b);
    a_lo = std::max(a_lo, a);
    a_hi = std::min(a_hi, b);
  };
  clip(ray.x0, dx, xmin, xmax);
  clip(ray.y0, dy, ymin, ymax);
  if (!(a_hi > a_lo)) return;

  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto nx = static_cast<long>(grid.width);
  const auto ny = static_cast<long>(grid.height);

  // Next crossing of a vertical (x = const) and horizontal (y = const) grid line.
  long ix = 0, iy = 0;
  const long step_x = dx > 0.0 ? 1 : -1;
  const long step_y = dy > 0.0 ? 1 : -1;
  auto alpha_x = [&](long i) { return (xmin + static_cast<double>(i) * ps - ray.x0) / dx; };
  auto alpha_y = [&](long i) { return (ymin + static_cast<double>(i) * ps - ray.y0) / dy; };

  double next_x = inf;
  if (dx != 0.0) {
    const double u = (ray.x0 + a_lo * dx - xmin) / ps;
    ix = dx > 0.0 ? static_cast<long>(std::floor(u)) + 1 : static_cast<long>(std::ceil(u)) - 1;
    while (ix >= 0 && ix <= nx && alpha_x(ix) <= a_lo) ix += step_x;
    next_x = (ix >= 0 && ix <= nx) ? alpha_x(ix) : inf;
  }
  double next_y = inf;
  if (dy != 0.0) {
    const double u = (ray.y0 + a_lo * dy - ymin) / ps;
    iy = dy > 0.0 ? static_cast<long>(std::floor(u)) + 1 : static_cast<long>(std::ceil(u)) - 1;
    while (iy >= 0 && iy <= ny && alpha_y(iy) <= a_lo) iy += step_y;
    next_y = (iy >= 0 && iy <= ny) ? alpha_y(iy) : inf;
  }

  double a_cur = a_lo;
  while (a_cur < a_hi) {
    const double a_next = std::min({next_x, next_y, a_hi});
    if (a_next > a_cur) {
      const double a_mid = 0.5 * (a_cur + a_next);
      const double xm = ray.x0 + a_mid * dx;
      const double ym = ray.y0 + a_mid * dy;
      const long col = std::clamp(static_cast<long>(std::floor((xm - xmin) / ps)), 0L, nx - 1);
      const long row = std::clamp(static_cast<long>(std::floor((ymax - ym) / ps)), 0L, ny - 1);
      visit(static_cast<std::size_t>(row * nx + col), (a_next - a_cur) * ray_length);
    }
    a_cur = a_next;
    if (next_x == a_next) {
      ix += step_x;
      next_x = (ix >= 0 && ix <= nx) ? alpha_x(ix) : inf;
    }
    if (next_y == a_next) {
      iy += step_y;
      next_y = (iy >= 0 && iy <= ny) ? alpha_y(iy) : inf;
    }
  }
}

namespace detail {

inline std::vector<std::size_t> all_views(const FanBeamGeometry& g) {
  std::vector<std::size_t> v(g.n_views());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

inline void check_views(const FanBeamGeometry& g, std::span<const std::size_t> views) {
  for (auto v : views)
    if (v >= g.n_views()) throw ConfigError("view index out of range");
}

}  // namespace detail

/// Line integrals of `x` restricted to the listed views; other rows are zero.
inline Sinogram project_views(const Image& x, const FanBeamGeometry& g,
                              std::span<const std::size_t> views) {
  require_grid(x.grid, g, "project");
  require_finite(x, "project");
  detail::check_views(g, views);
  Sinogram out(g.n_views(), g.n_bins);
  for (auto v : views) {
    auto row = out.view_row(v);
    for (std::size_t t = 0; t < g.n_bins; ++t) {
      double acc = 0.0;
      trace_ray(g.grid, ray_for(g, v, t),
                [&](std::size_t idx, double len) { acc += len * x.data[idx]; });
      row[t] = acc;
    }
  }
  return out;
}

inline Sinogram project(const Image& x, const FanBeamGeometry& g) {
  const auto views = detail::all_views(g);
  return project_views(x, g, views);
}

/// Transpose of `project_views` for the same view subset.
inline Image backproject_views(const Sinogram& s, const FanBeamGeometry& g,
                               std::span<const std::size_t> views) {
  require_shape(s, g, "backproject");
  detail::check_views(g, views);
  Image out(g.grid);
  for (auto v : views) {
    const auto row = s.view_row(v);
    for (std::size_t t = 0; t < g.n_bins; ++t) {
      const double w = row[t];
      if (w == 0.0) continue;
      trace_ray(g.grid, ray_for(g, v, t),
                [&](std::size_t idx, double len) { out.data[idx] += len * w; });
    }
  }
  return out;
}

inline Image backproject(const Sinogram& s, const FanBeamGeometry& g) {
  const auto views = detail::all_views(g);
  return backproject_views(s, g, views);
}

/// Gradient of 0.5 * ||M(Ax - b)||^2 where M keeps only `views`.
inline Image ls_gradient_views(const Image& x, const Sinogram& b, const FanBeamGeometry& g,
                               std::span<const std::size_t> views) {
  require_shape(b, g, "ls_gradient");
  Sinogram r = project_views(x, g, views);
  for (auto v : views) {
    auto rr = r.view_row(v);
    const auto bb = b.view_row(v);
    for (std::size_t t = 0; t < g.n_bins; ++t) rr[t] -= bb[t];
  }
  return backproject_views(r, g, views);
}

/// A^T (A x - b), the gradient of 0.5 * ||Ax - b||^2.
inline Image ls_gradient(const Image& x, const Sinogram& b, const FanBeamGeometry& g) {
  const auto views = detail::all_views(g);
  return ls_gradient_views(x, b, g, views);
}

inline double data_fidelity(const Image& x, const Sinogram& b, const FanBeamGeometry& g) {
  require_shape(b, g, "data_fidelity");
  const Sinogram ax = project(x, g);
  const double d = distance(ax.data, b.data);
  return 0.5 * d * d;
}

struct PowerIterationResult {
  double value = 0.0;  // Rayleigh quotient, a lower bound on ||A||^2
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on A^T A from a seeded Gaussian start. Stops when the
/// Rayleigh quotient changes by less than `tol` relative, or after `iters`.
inline PowerIterationResult spectral_norm_sq(const FanBeamGeometry& g, int iters, double tol,
                                             std::uint64_t seed) {
  if (iters < 1) throw ConfigError("power iteration needs iters >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Image v(g.grid);
  for (auto& e : v.data) e = normal(rng);

  PowerIterationResult res;
  double nv = norm2(v.data);
  for (auto& e : v.data) e /= nv;

  double previous = 0.0;
  for (int k = 0; k < iters; ++k) {
    Image w = backproject(project(v, g), g);
    const double rq = dot(v.data, w.data);
    res.value = rq;
    res.iterations = k + 1;
    const double nw = norm2(w.data);
    if (nw == 0.0) {
      res.converged = true;
      break;
    }
    if (k > 0 && std::abs(rq - previous) <= tol * std::abs(rq)) {
      res.converged = true;
      break;
    }
    previous = rq;
    for (std::size_t i = 0; i < w.data.size(); ++i) v.data[i] = w.data[i] / nw;
  }
  return res;
}

/// Projection cost in units of one full-resolution projection.
///
/// A ray-driven projector does work proportional to rays x pixels traversed
/// per ray; rays are fixed by the geometry and traversal length grows with the
/// grid side, so a grid of side d' costs d'/d of a grid of side d.
struct CostModel {
  std::size_t full_side = 1;
  double units_per_full_projection = 1.0;
  double resample_units = 0.05;  // one downsample + upsample pair

  double units_per_projection(std::size_t side) const {
    return units_per_full_projection * static_cast<double>(side) /
           static_cast<double>(full_side);
  }
  double units_per_sketched_projection(std::size_t factor) const {
    return units_per_projection(full_side / factor);
  }
};

}  // namespace sketchpnp
