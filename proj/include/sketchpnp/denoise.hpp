#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/image.hpp"

namespace sketchpnp {

enum class DenoiserKind { identity, gaussian, tv_prox };

inline std::string_view to_string(DenoiserKind k) {
  switch (k) {
    case DenoiserKind::identity: return "identity";
    case DenoiserKind::gaussian: return "gaussian";
    case DenoiserKind::tv_prox: return "tv_prox";
  }
  return "?";
}

inline DenoiserKind denoiser_kind_from_string(std::string_view s) {
  if (s == "identity") return DenoiserKind::identity;
  if (s == "gaussian") return DenoiserKind::gaussian;
  if (s == "tv_prox") return DenoiserKind::tv_prox;
  throw ConfigError("unknown denoiser kind '" + std::string(s) + "'");
}

struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::identity;
  double strength = 0.0;  // sigma in pixels (gaussian) or lambda (tv_prox)
  int inner_iters = 50;
  double tol = 1e-5;

  friend bool operator==(const DenoiserSpec&, const DenoiserSpec&) = default;
};

inline void validate(const DenoiserSpec& s) {
  if (!(s.strength >= 0.0) || !std::isfinite(s.strength))
    throw ConfigError("denoiser strength must be >= 0");
  if (s.inner_iters < 1) throw ConfigError("denoiser inner_iters must be >= 1");
  if (!(s.tol >= 0.0)) throw ConfigError("denoiser tol must be >= 0");
}

namespace detail {

// Forward differences with Neumann boundary (zero difference on the last row/column).
inline void gradient(const std::vector<double>& u, std::size_t w, std::size_t h,
                     std::vector<double>& gx, std::vector<double>& gy) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      gx[i] = c + 1 < w ? u[i + 1] - u[i] : 0.0;
      gy[i] = r + 1 < h ? u[i + w] - u[i] : 0.0;
    }
  }
}

// Negative adjoint of `gradient`.
inline void divergence(const std::vector<double>& px, const std::vector<double>& py,
                       std::size_t w, std::size_t h, std::vector<double>& out) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      double d = 0.0;
      if (c + 1 < w) d += px[i];
      if (c > 0) d -= px[i - 1];
      if (r + 1 < h) d += py[i];
      if (r > 0) d -= py[i - w];
      out[i] = d;
    }
  }
}

}  // namespace detail

/// Isotropic total variation with forward differences and Neumann boundary.
inline double total_variation(const Image& u) {
  const std::size_t w = u.width(), h = u.height();
  std::vector<double> gx(u.size()), gy(u.size());
  detail::gradient(u.data, w, h, gx, gy);
  double tv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) tv += std::hypot(gx[i], gy[i]);
  return tv;
}

/// argmin_u 0.5 * ||u - x||^2 + lambda * TV(u).
///
/// Solved on the dual with accelerated projected gradient (step 1/(8 lambda^2),
/// since ||grad||^2 <= 8 on this discretisation). Stops after `inner_iters`
/// or when the relative change of the dual variable falls below `tol`.
inline Image tv_prox(const Image& x, double lambda, int inner_iters, double tol) {
  if (lambda == 0.0) return x;
  const std::size_t w = x.width(), h = x.height(), n = x.size();
  std::vector<double> px(n, 0.0), py(n, 0.0);    // dual iterate
  std::vector<double> qx(n, 0.0), qy(n, 0.0);    // extrapolated point
  std::vector<double> px_old(n), py_old(n);
  std::vector<double> div(n), u(n), gx(n), gy(n);
  const double step = 1.0 / (8.0 * lambda);
  double t = 1.0;

  for (int k = 0; k < inner_iters; ++k) {
    detail::divergence(qx, qy, w, h, div);
    for (std::size_t i = 0; i < n; ++i) u[i] = x.data[i] + lambda * div[i];
    detail::gradient(u, w, h, gx, gy);

    px_old.swap(px);
    py_old.swap(py);
    double change = 0.0, size = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = qx[i] + step * gx[i];
      const double ay = qy[i] + step * gy[i];
      const double scale = std::max(1.0, std::hypot(ax, ay));
      px[i] = ax / scale;
      py[i] = ay / scale;
      const double dxv = px[i] - px_old[i], dyv = py[i] - py_old[i];
      change += dxv * dxv + dyv * dyv;
      size += px[i] * px[i] + py[i] * py[i];
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) {
      qx[i] = px[i] + beta * (px[i] - px_old[i]);
      qy[i] = py[i] + beta * (py[i] - py_old[i]);
    }
    t = t_next;

    if (size > 0.0 && std::sqrt(change) <= tol * std::sqrt(size)) break;
  }

  detail::divergence(px, py, w, h, div);
  Image out(x.grid);
  for (std::size_t i = 0; i < n; ++i) out.data[i] = x.data[i] + lambda * div[i];
  return out;
}

/// Normalised 1D Gaussian taps on [-ceil(3 sigma), ceil(3 sigma)].
inline std::vector<double> gaussian_taps(double sigma) {
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated edges; sigma in pixels.
inline Image gaussian_smooth(const Image& x, double sigma) {
  if (sigma == 0.0) return x;
  const auto taps = gaussian_taps(sigma);
  const auto radius = static_cast<long>(taps.size() / 2);
  const auto w = static_cast<long>(x.width());
  const auto h = static_cast<long>(x.height());

  Image tmp(x.grid), out(x.grid);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long k = -radius; k <= radius; ++k)
        acc += taps[static_cast<std::size_t>(k + radius)] * x.data[r * w + std::clamp(c + k, 0L, w - 1)];
      tmp.data[r * w + c] = acc;
    }
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) {
      double acc = 0.0;
      for (long k = -radius; k <= radius; ++k)
        acc += taps[static_cast<std::size_t>(k + radius)] * tmp.data[std::clamp(r + k, 0L, h - 1) * w + c];
      out.data[r * w + c] = acc;
    }
  return out;
}

inline Image denoise(const Image& x, const DenoiserSpec& spec) {
  validate(spec);
  require_finite(x, "denoise");
  switch (spec.kind) {
    case DenoiserKind::identity: return x;
    case DenoiserKind::gaussian: return gaussian_smooth(x, spec.strength);
    case DenoiserKind::tv_prox: return tv_prox(x, spec.strength, spec.inner_iters, spec.tol);
  }
  throw ConfigError("unknown denoiser kind");
}

/// (1 - alpha) z + alpha D(z); alpha = 1 returns D(z) exactly.
inline Image red_pro_mix(const Image& z, const DenoiserSpec& spec, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  Image d = denoise(z, spec);
  if (alpha == 1.0) return d;
  for (std::size_t i = 0; i < d.size(); ++i) d.data[i] = (1.0 - alpha) * z.data[i] + alpha * d.data[i];
  return d;
}

}  // namespace sketchpnp
