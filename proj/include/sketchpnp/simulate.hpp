#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/geometry.hpp"
#include "sketchpnp/image.hpp"
#include "sketchpnp/operators.hpp"

namespace sketchpnp {

enum class PhantomKind { disks, shepp_logan };

inline std::string_view to_string(PhantomKind k) {
  return k == PhantomKind::disks ? "disks" : "shepp_logan";
}

inline PhantomKind phantom_kind_from_string(std::string_view s) {
  if (s == "disks") return PhantomKind::disks;
  if (s == "shepp_logan") return PhantomKind::shepp_logan;
  throw ConfigError("unknown phantom kind '" + std::string(s) + "'");
}

struct PhantomSpec {
  PhantomKind kind = PhantomKind::disks;
  std::size_t size = 256;
  double domain_side = 2.0;
  bool randomized = false;  // disks only: seeded placement instead of the fixed layout
  std::uint64_t seed = 0;

  friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

inline void validate(const PhantomSpec& s) {
  if (s.size < 16 || s.size % 16 != 0)
    throw ConfigError("phantom size must be >= 16 and divisible by 16");
  if (!(s.domain_side > 0.0)) throw ConfigError("phantom domain_side must be positive");
}

struct NoiseSpec {
  double I0 = 316227.76601683791;  // 10^5.5
  std::uint64_t seed = 0;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

namespace detail {

// Disk in coordinates normalised to the half-extent of the domain.
struct Disk {
  double cx, cy, r, value;
};

inline constexpr std::array<Disk, 8> kFixedDisks{{
    {-0.40, 0.25, 0.30, 0.8},
    {0.35, 0.35, 0.22, 0.5},
    {0.30, -0.35, 0.25, 1.0},
    {-0.35, -0.45, 0.16, 0.6},
    {0.00, -0.05, 0.10, 0.3},
    {0.70, -0.02, 0.07, 0.7},
    {-0.02, 0.60, 0.09, 0.4},
    {-0.75, -0.10, 0.05, 0.2},
}};

inline std::vector<Disk> random_disks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Disk> out;
  for (const auto& proto : kFixedDisks) {
    for (int attempt = 0; attempt < 2000; ++attempt) {
      const double reach = 0.85 - proto.r;
      const double rad = reach * std::sqrt(unit(rng));
      const double ang = 2.0 * std::numbers::pi * unit(rng);
      const Disk d{rad * std::cos(ang), rad * std::sin(ang), proto.r, proto.value};
      const bool clear = std::all_of(out.begin(), out.end(), [&](const Disk& o) {
        return std::hypot(o.cx - d.cx, o.cy - d.cy) > o.r + d.r + 0.03;
      });
      if (clear) {
        out.push_back(d);
        break;
      }
    }
  }
  return out;
}

struct Ellipse {
  double value, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan (Toft) on [-1, 1]^2.
inline constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

/// Rasterises `value_at(u, v)` (normalised coordinates, y up) with 4x4
/// supersampling per pixel.
template <typename F>
Image rasterize(std::size_t size, double domain_side, F&& value_at) {
  constexpr int ss = 4;
  Image img(GridSpec{size, size, domain_side / static_cast<double>(size)});
  const double n = static_cast<double>(size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      double acc = 0.0;
      double first = 0.0;
      bool uniform = true;
      for (int sy = 0; sy < ss; ++sy)
        for (int sx = 0; sx < ss; ++sx) {
          const double u = -1.0 + 2.0 * (static_cast<double>(c) + (sx + 0.5) / ss) / n;
          const double v = 1.0 - 2.0 * (static_cast<double>(r) + (sy + 0.5) / ss) / n;
          const double val = value_at(u, v);
          if (sx == 0 && sy == 0) first = val;
          uniform = uniform && val == first;
          acc += val;
        }
      // Pixels wholly inside one region keep its value exactly.
      img(r, c) = std::clamp(uniform ? first : acc / (ss * ss), 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace detail

/// Deterministic ground-truth image with attenuation values in [0, 1].
inline Image make_phantom(const PhantomSpec& spec) {
  validate(spec);
  if (spec.kind == PhantomKind::disks) {
    const std::vector<detail::Disk> disks =
        spec.randomized ? detail::random_disks(spec.seed)
                        : std::vector<detail::Disk>(detail::kFixedDisks.begin(),
                                                    detail::kFixedDisks.end());
    return detail::rasterize(spec.size, spec.domain_side, [&](double u, double v) {
      for (const auto& d : disks) {
        const double dx = u - d.cx, dy = v - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) return d.value;
      }
      return 0.0;
    });
  }
  return detail::rasterize(spec.size, spec.domain_side, [](double u, double v) {
    double acc = 0.0;
    for (const auto& e : detail::kSheppLogan) {
      const double phi = e.phi_deg * std::numbers::pi / 180.0;
      const double c = std::cos(phi), s = std::sin(phi);
      const double xr = (u - e.x0) * c + (v - e.y0) * s;
      const double yr = -(u - e.x0) * s + (v - e.y0) * c;
      if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) acc += e.value;
    }
    return acc;
  });
}

/// Poisson transmission data, log-transformed back to line-integral units:
/// counts ~ Poisson(I0 exp(-Ax)), b = -ln(max(counts, 1) / I0).
inline Sinogram simulate_measurements(const Image& x, const FanBeamGeometry& g,
                                      const NoiseSpec& noise) {
  if (!(noise.I0 > 0.0) || !std::isfinite(noise.I0)) throw ConfigError("I0 must be positive");
  require_finite(x, "simulate_measurements");
  if (std::any_of(x.data.begin(), x.data.end(), [](double v) { return v < 0.0; }))
    throw InputError("simulate_measurements: attenuation must be nonnegative");

  Sinogram b = project(x, g);
  std::mt19937_64 rng(noise.seed);
  for (auto& p : b.data) {
    std::poisson_distribution<long long> counts(noise.I0 * std::exp(-p));
    const auto c = std::max<long long>(counts(rng), 1);
    p = -std::log(static_cast<double>(c) / noise.I0);
  }
  return b;
}

/// Acquisition preset: geometry plus the incident photon count used with it.
struct Preset {
  std::string name;
  FanBeamParams params;
  double I0;
};

inline std::vector<Preset> standard_presets(std::size_t size = 256) {
  const double high = std::pow(10.0, 5.5);
  const double low = std::pow(10.0, 3.5);
  FanBeamParams sparse;
  sparse.size = size;
  FanBeamParams dense = sparse;
  dense.n_views = 360;
  FanBeamParams limited = sparse;
  limited.arc_deg = 180.0;
  return {{"sparse_view", sparse, high}, {"low_dose", dense, low}, {"limited_angle", limited, high}};
}

inline Preset find_preset(std::string_view name, std::size_t size = 256) {
  for (auto& p : standard_presets(size))
    if (p.name == name) return p;
  throw ConfigError("unknown geometry preset '" + std::string(name) + "'");
}

struct NamedGeometry {
  std::string name;
  FanBeamGeometry geometry;
};

/// The three acquisition geometries on a `size`^2 grid.
inline std::vector<NamedGeometry> standard_geometries(std::size_t size = 256) {
  std::vector<NamedGeometry> out;
  for (const auto& p : standard_presets(size)) out.push_back({p.name, make_fan_beam(p.params)});
  return out;
}

}  // namespace sketchpnp
