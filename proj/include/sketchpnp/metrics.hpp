#pragma once

#include <algorithm>
#include <cmath>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/image.hpp"

namespace sketchpnp {

/// Reported when the reconstruction matches the reference exactly.
inline constexpr double kPsnrCapDb = 300.0;

inline double psnr(const Image& x, const Image& ref, double peak) {
  if (x.width() != ref.width() || x.height() != ref.height())
    throw InputError("psnr: image dimensions differ");
  if (!(peak > 0.0)) throw InputError("psnr: peak must be positive");
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data[i] - ref.data[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(x.size());
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

/// PSNR with the reference maximum as peak.
inline double psnr(const Image& x, const Image& ref) {
  const double peak = *std::max_element(ref.data.begin(), ref.data.end());
  return psnr(x, ref, peak > 0.0 ? peak : 1.0);
}

}  // namespace sketchpnp
