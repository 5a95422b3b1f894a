#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "sketchpnp/simulate.hpp"
#include "test_support.hpp"

using namespace sketchpnp;
using namespace sketchpnp::testing;

TEST(Phantom, Deterministic) {
  for (auto kind : {PhantomKind::disks, PhantomKind::shepp_logan}) {
    const PhantomSpec spec{kind, 64};
    EXPECT_EQ(make_phantom(spec).data, make_phantom(spec).data);
  }
  const PhantomSpec rnd{PhantomKind::disks, 64, 2.0, true, 17};
  EXPECT_EQ(make_phantom(rnd).data, make_phantom(rnd).data);
  const PhantomSpec rnd2{PhantomKind::disks, 64, 2.0, true, 18};
  EXPECT_NE(make_phantom(rnd).data, make_phantom(rnd2).data);
}

TEST(Phantom, DisksHaveDistinctLevelsAndZeroBackground) {
  for (bool randomized : {false, true}) {
    const Image x = make_phantom({PhantomKind::disks, 256, 2.0, randomized, 5});
    std::set<double> levels(x.data.begin(), x.data.end());
    // Interior pixels of each disk carry its exact intensity.
    int exact = 0;
    for (double v : {0.8, 0.5, 1.0, 0.6, 0.3, 0.7, 0.4, 0.2}) exact += levels.contains(v);
    EXPECT_GE(exact, 4);
    for (double v : x.data) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    // Corners lie outside every disk.
    EXPECT_EQ(x(0, 0), 0.0);
    EXPECT_EQ(x(255, 255), 0.0);
    EXPECT_EQ(x(0, 255), 0.0);
  }
}

TEST(Phantom, RejectsBadSize) {
  EXPECT_THROW(make_phantom({PhantomKind::disks, 8}), ConfigError);
  EXPECT_THROW(make_phantom({PhantomKind::disks, 40}), ConfigError);
}

TEST(Phantom, SheppLoganInRange) {
  const Image x = make_phantom({PhantomKind::shepp_logan, 128});
  double hi = 0.0;
  for (double v : x.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    hi = std::max(hi, v);
  }
  EXPECT_DOUBLE_EQ(hi, 1.0);
  EXPECT_EQ(x(0, 0), 0.0);
}

TEST(Simulate, ZeroObjectLogDataIsUnbiased) {
  const auto g = small_geometry(32);  // 90 x 228 = 20520 bins
  const double I0 = 1e6;
  const Sinogram b = simulate_measurements(Image(g.grid), g, {I0, 123});
  double mean = 0.0;
  for (double v : b.data) mean += v;
  mean /= static_cast<double>(b.size());
  const double se = std::sqrt(1.0 / I0) / std::sqrt(static_cast<double>(b.size()));
  EXPECT_LE(std::abs(mean), 3.0 * se);
}

TEST(Simulate, HighDoseApproachesLineIntegrals) {
  const auto g = small_geometry(64);
  const Image x = make_phantom({PhantomKind::disks, 64});
  const Sinogram p = project(x, g);
  const Sinogram b = simulate_measurements(x, g, {1e12, 9});
  EXPECT_LE(distance(b.data, p.data), 1e-4 * norm2(p.data));
}

TEST(Simulate, ReproducibleAndFinite) {
  const auto g = small_geometry(32, 20, 50);
  const Image x = make_phantom({PhantomKind::disks, 32});
  const Sinogram a = simulate_measurements(x, g, {10.0, 1});
  const Sinogram b = simulate_measurements(x, g, {10.0, 1});
  EXPECT_EQ(a.data, b.data);
  EXPECT_TRUE(all_finite(a.data));
  // Very low dose: some counts are zero and must be clamped.
  const Image thick(g.grid, 50.0);
  const Sinogram c = simulate_measurements(thick, g, {10.0, 2});
  EXPECT_TRUE(all_finite(c.data));
}

TEST(Simulate, ThickerObjectsAttenuateMore) {
  const auto g = small_geometry(32, 10, 31);
  const Image thin = disk_image(32, 0.3);
  Image thick = disk_image(32, 0.6);
  const Sinogram a = simulate_measurements(thin, g, {1e12, 3});
  const Sinogram b = simulate_measurements(thick, g, {1e12, 3});
  for (std::size_t v = 0; v < g.n_views(); ++v) EXPECT_GT(b(v, 15), a(v, 15));
}

TEST(Simulate, RejectsNegativeAttenuationAndBadDose) {
  const auto g = small_geometry(16, 4, 10);
  Image x(g.grid);
  x.data[3] = -0.1;
  EXPECT_THROW(simulate_measurements(x, g, {100.0, 0}), InputError);
  EXPECT_THROW(simulate_measurements(Image(g.grid), g, {0.0, 0}), ConfigError);
}

TEST(Presets, ThreeStandardGeometries) {
  const auto gs = standard_geometries();
  ASSERT_EQ(gs.size(), 3u);
  EXPECT_EQ(gs[0].name, "sparse_view");
  EXPECT_EQ(gs[0].geometry.rows(), 20520u);
  EXPECT_EQ(gs[0].geometry.cols(), 65536u);
  EXPECT_EQ(gs[1].name, "low_dose");
  EXPECT_EQ(gs[1].geometry.rows(), 82080u);
  EXPECT_EQ(gs[2].name, "limited_angle");
  EXPECT_EQ(gs[2].geometry.rows(), 20520u);
  EXPECT_LT(gs[2].geometry.angles_deg.back(), 180.0);
  EXPECT_LT(gs[0].geometry.angles_deg.back(), 360.0);
  EXPECT_DOUBLE_EQ(gs[0].geometry.angles_deg[1], 4.0);

  EXPECT_NEAR(find_preset("sparse_view").I0, std::pow(10.0, 5.5), 1e-6);
  EXPECT_NEAR(find_preset("low_dose").I0, std::pow(10.0, 3.5), 1e-9);
  EXPECT_NEAR(find_preset("limited_angle").I0, std::pow(10.0, 5.5), 1e-6);
  EXPECT_THROW(find_preset("cone_beam"), ConfigError);
}
