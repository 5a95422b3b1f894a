#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sketchpnp/errors.hpp"

namespace sketchpnp {

/// Square-pixel image grid centred on the rotation axis.
struct GridSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  double pixel_size = 0.0;  // length units per pixel

  std::size_t pixels() const noexcept { return width * height; }
  double extent_x() const noexcept { return static_cast<double>(width) * pixel_size; }
  double extent_y() const noexcept { return static_cast<double>(height) * pixel_size; }
  double half_diagonal() const noexcept {
    return 0.5 * std::hypot(extent_x(), extent_y());
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline void validate(const GridSpec& g) {
  if (g.width < 1 || g.height < 1)
    throw ConfigError("grid must be at least 1x1");
  if (!(g.pixel_size > 0.0) || !std::isfinite(g.pixel_size))
    throw ConfigError("grid pixel_size must be positive and finite");
}

/// Row-major scalar field, row 0 at the top (largest y).
struct Image {
  GridSpec grid;
  std::vector<double> data;

  Image() = default;
  explicit Image(const GridSpec& g, double fill = 0.0) : grid(g), data(g.pixels(), fill) {
    validate(g);
  }

  std::size_t width() const noexcept { return grid.width; }
  std::size_t height() const noexcept { return grid.height; }
  double pixel_size() const noexcept { return grid.pixel_size; }
  std::size_t size() const noexcept { return data.size(); }

  double& operator()(std::size_t row, std::size_t col) { return data[row * grid.width + col]; }
  double operator()(std::size_t row, std::size_t col) const { return data[row * grid.width + col]; }
};

/// Views x detector-bins, row-major by view.
struct Sinogram {
  std::size_t n_views = 0;
  std::size_t n_bins = 0;
  std::vector<double> data;

  Sinogram() = default;
  Sinogram(std::size_t views, std::size_t bins, double fill = 0.0)
      : n_views(views), n_bins(bins), data(views * bins, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  double& operator()(std::size_t view, std::size_t bin) { return data[view * n_bins + bin]; }
  double operator()(std::size_t view, std::size_t bin) const { return data[view * n_bins + bin]; }

  std::span<double> view_row(std::size_t view) {
    return {data.data() + view * n_bins, n_bins};
  }
  std::span<const double> view_row(std::size_t view) const {
    return {data.data() + view * n_bins, n_bins};
  }
};

// Flat-vector helpers shared by the operators and solvers.

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline void require_finite(const Image& x, const char* what) {
  if (!all_finite(x.data)) throw InputError(std::string(what) + ": image contains non-finite values");
}

}  // namespace sketchpnp
