#include <cmath>

#include <gtest/gtest.h>

#include "sketchpnp/operators.hpp"
#include "sketchpnp/sketch.hpp"
#include "test_support.hpp"

using namespace sketchpnp;
using namespace sketchpnp::testing;

namespace {

// Keys kernel written out piecewise, independent of cubic_kernel().
double keys_reference(double s) {
  const double a = -0.5;
  const double x = std::abs(s);
  if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
  if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
  return 0.0;
}

}  // namespace

TEST(CubicKernel, SpotValues) {
  EXPECT_NEAR(cubic_kernel(0.0), 1.0, 1e-12);
  EXPECT_NEAR(cubic_kernel(0.5), 0.5625, 1e-12);
  EXPECT_NEAR(cubic_kernel(1.0), 0.0, 1e-12);
  for (double s : {0.0, 0.5, 1.0, 1.5, -0.25, 2.5})
    EXPECT_NEAR(cubic_kernel(s), keys_reference(s), 1e-12);
}

TEST(Downsample, PreservesConstants) {
  for (std::size_t f : {1u, 2u, 4u, 8u}) {
    const Image x(GridSpec{64, 64, 0.1}, 0.37);
    const Image y = downsample(x, {f});
    EXPECT_EQ(y.width(), 64 / f);
    EXPECT_DOUBLE_EQ(y.pixel_size(), 0.1 * static_cast<double>(f));
    for (double v : y.data) EXPECT_NEAR(v, 0.37, 1e-12);
  }
}

TEST(Downsample, FactorOneIsIdentity) {
  const Image x = random_image(GridSpec{16, 16, 0.2}, 1);
  const Image y = downsample(x, {1});
  EXPECT_EQ(y.data, x.data);
  EXPECT_EQ(y.grid, x.grid);
}

TEST(Downsample, RejectsIndivisibleSize) {
  EXPECT_THROW(downsample(Image(GridSpec{30, 30, 1.0}), {4}), ConfigError);
}

TEST(Downsample, AveragesOverWidenedKernel) {
  // A single bright pixel spreads over more than one coarse pixel when the
  // kernel is widened, and stays in one when it is not.
  Image x(GridSpec{16, 16, 1.0});
  x(7, 7) = 1.0;
  ResampleSpec aa{4};
  ResampleSpec plain{4, -0.5, false};
  const Image ya = downsample(x, aa);
  const Image yp = downsample(x, plain);
  int nonzero_a = 0, nonzero_p = 0;
  for (double v : ya.data) nonzero_a += std::abs(v) > 1e-12;
  for (double v : yp.data) nonzero_p += std::abs(v) > 1e-12;
  EXPECT_GT(nonzero_a, nonzero_p);
}

TEST(Upsample, PreservesConstantsAndIdentity) {
  const Image x(GridSpec{8, 8, 0.4}, -1.25);
  const Image y = upsample(x, {4});
  EXPECT_EQ(y.width(), 32u);
  EXPECT_DOUBLE_EQ(y.pixel_size(), 0.1);
  for (double v : y.data) EXPECT_NEAR(v, -1.25, 1e-12);
  const Image r = random_image(GridSpec{8, 8, 0.4}, 2);
  EXPECT_EQ(upsample(r, {1}).data, r.data);
}

TEST(Upsample, ReproducesLinearRampInInterior) {
  const std::size_t n = 16, f = 4;
  Image x(GridSpec{n, n, 1.0});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) x(r, c) = static_cast<double>(r);
  const Image y = upsample(x, {f});
  double worst = 0.0;
  for (std::size_t r = 0; r < n * f; ++r) {
    // Source coordinate of this output row.
    const double u = (static_cast<double>(r) + 0.5) / static_cast<double>(f) - 0.5;
    if (u < 2.0 || u > static_cast<double>(n) - 3.0) continue;  // kernel touches the edge
    for (std::size_t c = 0; c < n * f; ++c) worst = std::max(worst, std::abs(y(r, c) - u));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Resample, LinearMaps) {
  const GridSpec g{32, 32, 0.05};
  const Image x = random_image(g, 3), y = random_image(g, 4);
  const double a = 1.7, c = -0.4;
  Image comb(g);
  for (std::size_t i = 0; i < comb.size(); ++i) comb.data[i] = a * x.data[i] + c * y.data[i];
  for (std::size_t f : {2u, 4u}) {
    for (int dir = 0; dir < 2; ++dir) {
      auto op = [&](const Image& im) { return dir == 0 ? downsample(im, {f}) : upsample(im, {f}); };
      const Image lhs = op(comb), ox = op(x), oy = op(y);
      Image rhs = ox;
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs.data[i] = a * ox.data[i] + c * oy.data[i];
      EXPECT_LE(distance(lhs.data, rhs.data), 1e-12 * norm2(rhs.data));
    }
  }
}

TEST(Resample, PixelSizeRoundTrips) {
  const Image x(GridSpec{64, 64, 2.0 / 64.0});
  for (std::size_t f : {2u, 4u, 8u})
    EXPECT_EQ(upsample(downsample(x, {f}), {f}).pixel_size(), x.pixel_size());
}

TEST(Resample, RoundTripOnSmoothImages) {
  const Image blob = gaussian_blob(256, 0.15);
  const Image rt2 = upsample(downsample(blob, {2}), {2});
  EXPECT_LE(distance(rt2.data, blob.data), 0.05 * norm2(blob.data));

  const Image disk = disk_image(256, 0.6);
  const Image d2 = upsample(downsample(disk, {2}), {2});
  const Image d4 = upsample(downsample(disk, {4}), {4});
  const double e2 = distance(d2.data, disk.data) / norm2(disk.data);
  const double e4 = distance(d4.data, disk.data) / norm2(disk.data);
  RecordProperty("disk_roundtrip_factor2", std::to_string(e2));
  RecordProperty("disk_roundtrip_factor4", std::to_string(e4));
  EXPECT_LE(e2, 0.05);
  EXPECT_LT(e2, e4);
}

TEST(SketchedGeometry, FactorOneIsBase) {
  const auto g = small_geometry(32);
  const auto s = make_sketched_geometry(g, 1);
  EXPECT_EQ(s.coarse, g);
}

TEST(SketchedGeometry, Factor4On256) {
  const auto g = small_geometry(256);
  const auto s = make_sketched_geometry(g, 4);
  EXPECT_EQ(s.coarse.grid.width, 64u);
  EXPECT_EQ(s.coarse.grid.height, 64u);
  EXPECT_DOUBLE_EQ(s.coarse.grid.pixel_size, g.grid.pixel_size * 4.0);
  EXPECT_EQ(s.coarse.angles_deg, g.angles_deg);
  EXPECT_EQ(s.coarse.n_bins, g.n_bins);
  EXPECT_EQ(s.coarse.rows(), g.rows());
}

TEST(SketchedGeometry, RejectsIndivisibleFactor) {
  EXPECT_THROW(make_sketched_geometry(small_geometry(48), 5), ConfigError);
}

TEST(SketchedGeometry, CoarseOperatorApproximatesFine) {
  const auto g = small_geometry(256);
  const auto s = make_sketched_geometry(g, 2);
  const Image x = disk_image(256, 0.5);
  const Sinogram full = project(x, g);
  const Sinogram sk = project(downsample(x, {2}), s.coarse);
  EXPECT_LE(distance(full.data, sk.data), 0.05 * norm2(full.data));
}
