#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/geometry.hpp"
#include "sketchpnp/image.hpp"

namespace sketchpnp {

enum class Boundary { replicate };

struct ResampleSpec {
  std::size_t factor = 1;   // linear scale per side
  double a = -0.5;          // cubic-convolution parameter
  bool antialias = true;    // widen the kernel on downscale
  Boundary boundary = Boundary::replicate;
};

/// Keys cubic-convolution kernel.
inline double cubic_kernel(double s, double a = -0.5) {
  const double x = std::abs(s);
  const double x2 = x * x;
  const double x3 = x2 * x;
  if (x <= 1.0) return (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0;
  if (x < 2.0) return a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a;
  return 0.0;
}

namespace detail {

struct Tap {
  std::size_t index;
  double weight;
};

/// Per-output-sample taps for a 1D resize from `in_len` to `out_len` samples,
/// aligned on sample centres. Weights are renormalised to sum to one.
inline std::vector<std::vector<Tap>> resize_taps(std::size_t in_len, std::size_t out_len,
                                                 const ResampleSpec& spec) {
  const double scale = static_cast<double>(out_len) / static_cast<double>(in_len);
  const bool widen = spec.antialias && scale < 1.0;
  const double kscale = widen ? scale : 1.0;
  const double width = 4.0 / kscale;
  const auto taps_per_sample = static_cast<long>(std::ceil(width)) + 2;
  const auto last = static_cast<long>(in_len) - 1;

  std::vector<std::vector<Tap>> taps(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / scale - 0.5;
    const auto left = static_cast<long>(std::floor(u - 0.5 * width));
    auto& row = taps[i];
    row.reserve(static_cast<std::size_t>(taps_per_sample));
    double sum = 0.0;
    for (long j = left; j < left + taps_per_sample; ++j) {
      const double w = kscale * cubic_kernel(kscale * (u - static_cast<double>(j)), spec.a);
      if (w == 0.0) continue;
      const auto idx = static_cast<std::size_t>(std::clamp(j, 0L, last));
      auto it = std::find_if(row.begin(), row.end(), [&](const Tap& t) { return t.index == idx; });
      if (it != row.end())
        it->weight += w;
      else
        row.push_back({idx, w});
      sum += w;
    }
    for (auto& t : row) t.weight /= sum;
  }
  return taps;
}

inline Image resize(const Image& x, std::size_t out_w, std::size_t out_h, double out_pixel_size,
                    const ResampleSpec& spec) {
  const std::size_t in_w = x.width();
  const std::size_t in_h = x.height();

  // Horizontal pass: in_h x out_w.
  const auto htaps = resize_taps(in_w, out_w, spec);
  std::vector<double> tmp(in_h * out_w, 0.0);
  for (std::size_t r = 0; r < in_h; ++r) {
    const double* src = x.data.data() + r * in_w;
    double* dst = tmp.data() + r * out_w;
    for (std::size_t c = 0; c < out_w; ++c) {
      double acc = 0.0;
      for (const auto& t : htaps[c]) acc += t.weight * src[t.index];
      dst[c] = acc;
    }
  }

  // Vertical pass.
  const auto vtaps = resize_taps(in_h, out_h, spec);
  Image out(GridSpec{out_w, out_h, out_pixel_size});
  for (std::size_t r = 0; r < out_h; ++r) {
    double* dst = out.data.data() + r * out_w;
    for (const auto& t : vtaps[r]) {
      const double* src = tmp.data() + t.index * out_w;
      for (std::size_t c = 0; c < out_w; ++c) dst[c] += t.weight * src[c];
    }
  }
  return out;
}

}  // namespace detail

/// Bicubic downscale by an integer factor; pixel values (not integrals) are kept.
inline Image downsample(const Image& x, const ResampleSpec& spec) {
  if (spec.factor < 1) throw ConfigError("resample factor must be >= 1");
  if (spec.factor == 1) return x;
  if (x.width() % spec.factor != 0 || x.height() % spec.factor != 0)
    throw ConfigError("image dimensions are not divisible by the downsample factor");
  const auto f = static_cast<double>(spec.factor);
  return detail::resize(x, x.width() / spec.factor, x.height() / spec.factor,
                        x.pixel_size() * f, spec);
}

/// Bicubic upscale by an integer factor (no kernel widening).
inline Image upsample(const Image& x, const ResampleSpec& spec) {
  if (spec.factor < 1) throw ConfigError("resample factor must be >= 1");
  if (spec.factor == 1) return x;
  ResampleSpec up = spec;
  up.antialias = false;
  const auto f = static_cast<double>(spec.factor);
  return detail::resize(x, x.width() * spec.factor, x.height() * spec.factor,
                        x.pixel_size() / f, up);
}

/// Same acquisition as `base` on a grid coarsened by `factor` per side.
struct SketchedGeometry {
  FanBeamGeometry base;
  std::size_t factor = 1;
  FanBeamGeometry coarse;
};

inline SketchedGeometry make_sketched_geometry(const FanBeamGeometry& base, std::size_t factor) {
  if (factor < 1) throw ConfigError("sketch factor must be >= 1");
  if (base.grid.width % factor != 0 || base.grid.height % factor != 0)
    throw ConfigError("grid side " + std::to_string(base.grid.width) +
                      " is not divisible by sketch factor " + std::to_string(factor));
  SketchedGeometry s{base, factor, base};
  s.coarse.grid.width = base.grid.width / factor;
  s.coarse.grid.height = base.grid.height / factor;
  s.coarse.grid.pixel_size = base.grid.pixel_size * static_cast<double>(factor);
  return s;
}

}  // namespace sketchpnp
