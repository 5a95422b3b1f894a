#include <chrono>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sketchpnp/operators.hpp"
#include "sketchpnp/sketch.hpp"
#include "test_support.hpp"

using namespace sketchpnp;
using namespace sketchpnp::testing;

namespace {

double relative_adjoint_mismatch(const FanBeamGeometry& g, std::uint64_t seed) {
  const Image x = random_image(g.grid, seed);
  const Sinogram s = random_sinogram(g, seed + 1000);
  const Sinogram ax = project(x, g);
  const Image ats = backproject(s, g);
  return std::abs(dot(ax.data, s.data) - dot(x.data, ats.data)) / (norm2(ax.data) * norm2(s.data));
}

}  // namespace

TEST(Geometry, PresetShapesAndCoverage) {
  const auto g = small_geometry(256);
  EXPECT_EQ(g.rows(), 20520u);
  EXPECT_EQ(g.cols(), 65536u);
  EXPECT_DOUBLE_EQ(g.grid.pixel_size, 2.0 / 256.0);
  // Outermost rays must clear the circumscribed circle.
  const Ray edge = ray_for(g, 0, 0);
  const double dx = edge.x1 - edge.x0, dy = edge.y1 - edge.y0;
  const double dist = std::abs(edge.x0 * dy - edge.y0 * dx) / std::hypot(dx, dy);
  EXPECT_GT(dist, g.grid.half_diagonal());
}

TEST(Geometry, RejectsSourceInsideObject) {
  FanBeamParams p;
  p.size = 32;
  p.source_radius = 1.0;
  EXPECT_THROW(make_fan_beam(p), ConfigError);
}

TEST(Project, ZeroImageGivesZeroSinogram) {
  const auto g = small_geometry(64);
  const Sinogram s = project(Image(g.grid), g);
  for (double v : s.data) EXPECT_EQ(v, 0.0);
}

TEST(Project, CentralRayThroughDiskHasChordLength) {
  // One bin, so its ray passes through the rotation centre.
  const double radius = 0.5;
  FanBeamParams p;
  p.size = 128;
  p.n_views = 7;
  p.arc_deg = 360.0;
  p.n_bins = 1;
  const auto g = make_fan_beam(p);
  const Sinogram s = project(disk_image(128, radius), g);
  for (double v : s.data) EXPECT_NEAR(v, 2.0 * radius, 0.02 * 2.0 * radius);
}

TEST(Project, IsLinear) {
  const auto g = small_geometry(32);
  const Image x = random_image(g.grid, 1), y = random_image(g.grid, 2);
  const double a = 0.7, c = -2.3;
  Image comb(g.grid);
  for (std::size_t i = 0; i < comb.size(); ++i) comb.data[i] = a * x.data[i] + c * y.data[i];
  const Sinogram lhs = project(comb, g);
  const Sinogram px = project(x, g), py = project(y, g);
  Sinogram rhs(g.n_views(), g.n_bins);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs.data[i] = a * px.data[i] + c * py.data[i];
  EXPECT_LE(distance(lhs.data, rhs.data), 1e-12 * norm2(rhs.data));
}

TEST(Project, RejectsGridMismatchAndNonFinite) {
  const auto g = small_geometry(32);
  EXPECT_THROW(project(Image(GridSpec{16, 16, 2.0 / 16}), g), ConfigError);
  Image bad(g.grid);
  bad.data[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(project(bad, g), InputError);
}

TEST(Backproject, ZeroSinogramGivesZeroImage) {
  const auto g = small_geometry(32);
  const Image x = backproject(Sinogram(g.n_views(), g.n_bins), g);
  for (double v : x.data) EXPECT_EQ(v, 0.0);
}

TEST(Backproject, RejectsShapeMismatch) {
  const auto g = small_geometry(32);
  EXPECT_THROW(backproject(Sinogram(g.n_views(), g.n_bins + 1), g), ConfigError);
}

TEST(Backproject, IsAdjointOfProject) {
  for (std::size_t size : {32u, 64u}) {
    const auto g = small_geometry(size);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      EXPECT_LE(relative_adjoint_mismatch(g, seed), 1e-6) << "size " << size << " seed " << seed;
  }
}

TEST(Backproject, AdjointHoldsForLimitedAngleAndOddShapes) {
  FanBeamParams p;
  p.size = 24;
  p.n_views = 17;
  p.arc_deg = 180.0;
  p.n_bins = 41;
  const auto g = make_fan_beam(p);
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_LE(relative_adjoint_mismatch(g, seed), 1e-12);
}

// Rays lying exactly on a pixel boundary are covered separately below.
TEST(Backproject, SingleRayMatchesBruteForceClipping) {
  const auto g = small_geometry(32, 12, 57);
  for (auto [view, bin] : {std::pair<std::size_t, std::size_t>{0, 27}, {3, 0}, {5, 13}, {9, 56}, {11, 30}}) {
    Sinogram s(g.n_views(), g.n_bins);
    s(view, bin) = 1.0;
    const Image bp = backproject(s, g);
    const auto oracle = brute_force_ray_weights(g, view, bin);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      EXPECT_NEAR(bp.data[i], oracle[i], 1e-12) << "view " << view << " bin " << bin << " pixel " << i;
      EXPECT_EQ(bp.data[i] > 1e-9, oracle[i] > 1e-9) << "support differs at pixel " << i;
    }
  }
}

TEST(Backproject, AxisAlignedRayAlongGridLine) {
  // View at 0 degrees, single bin: the ray runs along y = 0, a pixel boundary
  // for even grids. Its length must be counted once.
  FanBeamParams p;
  p.size = 16;
  p.n_views = 1;
  p.n_bins = 1;
  const auto g = make_fan_beam(p);
  Sinogram s(1, 1, 1.0);
  const Image bp = backproject(s, g);
  double total = 0.0;
  for (double v : bp.data) total += v;
  EXPECT_NEAR(total, g.grid.extent_x(), 1e-12);
}

TEST(LsGradient, VanishesAtExactSolution) {
  const auto g = small_geometry(32);
  const Image x = random_image(g.grid, 3);
  const Image grad = ls_gradient(x, project(x, g), g);
  EXPECT_LE(norm2(grad.data), 1e-12);
}

TEST(LsGradient, MatchesCentralFiniteDifferences) {
  const auto g = small_geometry(32);
  const Image x = random_image(g.grid, 4);
  const Sinogram b = random_sinogram(g, 5);
  const Image grad = ls_gradient(x, b, g);
  auto f = [&](const Image& u) { return data_fidelity(u, b, g); };
  for (std::uint64_t k = 0; k < 3; ++k) {
    const Image d = random_image(g.grid, 100 + k);
    const double eps = 1e-5 * norm2(x.data) / norm2(d.data);
    Image xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp.data[i] += eps * d.data[i];
      xm.data[i] -= eps * d.data[i];
    }
    const double fd = (f(xp) - f(xm)) / (2.0 * eps);
    const double an = dot(grad.data, d.data);
    EXPECT_LE(std::abs(fd - an), 1e-5 * std::abs(an));
  }
}

TEST(LsGradient, ZeroDataIsNormalOperator) {
  const auto g = small_geometry(32);
  const Image x = random_image(g.grid, 6);
  const Image lhs = ls_gradient(x, Sinogram(g.n_views(), g.n_bins), g);
  const Image rhs = backproject(project(x, g), g);
  EXPECT_LE(distance(lhs.data, rhs.data), 1e-12 * norm2(rhs.data));
}

TEST(SpectralNorm, SingleRayIsRowNormSquared) {
  FanBeamParams p;
  p.size = 32;
  p.n_views = 1;
  p.n_bins = 1;
  const auto g = make_fan_beam(p);
  const Image row = backproject(Sinogram(1, 1, 1.0), g);
  const double expected = dot(row.data, row.data);
  const auto est = spectral_norm_sq(g, 20, 1e-12, 3);
  EXPECT_NEAR(est.value, expected, 1e-8 * expected);
}

TEST(SpectralNorm, SeedIndependentAfterConvergence) {
  const auto g = small_geometry(32);
  const double tol = 1e-7;
  const auto a = spectral_norm_sq(g, 500, tol, 1);
  const auto b = spectral_norm_sq(g, 500, tol, 2);
  ASSERT_TRUE(a.converged);
  ASSERT_TRUE(b.converged);
  EXPECT_LE(std::abs(a.value - b.value), 1e-5 * a.value);
}

TEST(SpectralNorm, ScalesQuadraticallyWithLengths) {
  const double c = 2.0;
  FanBeamParams p;
  p.size = 16;
  p.n_views = 20;
  p.n_bins = 40;
  const auto g1 = make_fan_beam(p);
  p.domain_side *= c;
  p.source_radius *= c;
  p.detector_radius *= c;
  const auto g2 = make_fan_beam(p);
  const auto a = spectral_norm_sq(g1, 300, 1e-10, 9);
  const auto b = spectral_norm_sq(g2, 300, 1e-10, 9);
  EXPECT_NEAR(b.value, c * c * a.value, 1e-6 * b.value);
}

TEST(SpectralNorm, RejectsZeroIterations) {
  EXPECT_THROW(spectral_norm_sq(small_geometry(16), 0, 1e-6, 1), ConfigError);
}

TEST(Resolution, CoarseProjectionOfSmoothPhantomAgrees) {
  const auto fine = small_geometry(256);
  const auto coarse = make_sketched_geometry(fine, 4).coarse;
  const Sinogram a = project(gaussian_blob(256), fine);
  const Sinogram b = project(gaussian_blob(64), coarse);
  EXPECT_LE(distance(a.data, b.data), 0.05 * norm2(a.data));
}

TEST(CostModel, UnitsScaleWithGridSide) {
  const CostModel m{256, 1.0, 0.05};
  EXPECT_DOUBLE_EQ(m.units_per_projection(256), 1.0);
  EXPECT_DOUBLE_EQ(m.units_per_sketched_projection(4), 0.25);
  EXPECT_DOUBLE_EQ(m.units_per_sketched_projection(2), 0.5);
}

TEST(CostModel, CoarseProjectionIsFaster) {
  const auto fine = small_geometry(256);
  const auto coarse = make_sketched_geometry(fine, 4).coarse;
  const Image xf(fine.grid, 1.0), xc(coarse.grid, 1.0);
  auto time_it = [](auto&& fn) {
    double best = 1e30;
    for (int k = 0; k < 3; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const double tf = time_it([&] { (void)project(xf, fine); });
  const double tc = time_it([&] { (void)project(xc, coarse); });
  EXPECT_LT(tc, tf);
}
