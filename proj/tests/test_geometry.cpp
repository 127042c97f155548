#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cmapf/geometry.hpp"
#include "cmapf/spatial_hash.hpp"
#include "cmapf/rng.hpp"

using namespace cmapf;

TEST(Geometry, SurfaceDistance) {
  EXPECT_DOUBLE_EQ(surface_distance({{1, 2}, 0.5}, {{4, 6}, 0.5}), 4.0);
  EXPECT_LT(surface_distance({{0, 0}, 1.0}, {{1, 0}, 1.0}), 0.0);
}

TEST(Geometry, ClampNormKeepsShortVectors) {
  const Vec2 v{0.3, -0.4};
  EXPECT_EQ(clamp_norm(v, 1.0), v);
}

TEST(Geometry, ClampNormNeverExceedsLimit) {
  RandomStream rs(RngKey::from_seed(11));
  for (int i = 0; i < 10000; ++i) {
    const Vec2 v{rs.uniform(-50, 50), rs.uniform(-50, 50)};
    const double limit = rs.uniform(0.01, 3.0);
    EXPECT_LE(norm(clamp_norm(v, limit)), limit);
  }
}

TEST(Geometry, SegmentClearance) {
  const Circle c{{1.0, 1.0}, 0.5};
  EXPECT_DOUBLE_EQ(segment_circle_clearance({0, 0}, {2, 0}, c), 0.5);
  EXPECT_DOUBLE_EQ(segment_circle_clearance({0, 0}, {0, 0}, c), std::sqrt(2.0) - 0.5);
}

TEST(Geometry, GridToCircles) {
  BoolGrid g(2, 3);
  g.set(0, 0, true);
  g.set(1, 2, true);
  const auto circles = grid_to_circles(g, 0.4, 1);
  ASSERT_EQ(circles.size(), 2u);
  EXPECT_NEAR(circles[0].radius, 0.2, 1e-12);
  EXPECT_NEAR(circles[1].center.x, 1.0, 1e-12);
  EXPECT_NEAR(circles[1].center.y, 0.6, 1e-12);
  EXPECT_EQ(grid_to_circles(g, 0.4, 2).size(), 8u);
}

TEST(SpatialHash, QueryIsSupersetOfBruteForce) {
  RandomStream rs(RngKey::from_seed(12));
  for (int scene = 0; scene < 50; ++scene) {
    std::vector<Circle> bodies;
    const std::size_t n = 2 + rs.below(80);
    for (std::size_t i = 0; i < n; ++i) bodies.push_back({{rs.uniform(-3, 5), rs.uniform(-3, 5)}, rs.uniform(0.01, 0.6)});
    SpatialHash hash(rs.uniform(0.1, 1.0));
    hash.build(bodies);
    for (std::size_t i = 0; i < n; ++i) {
      const double range = rs.uniform(0.0, 1.0);
      const auto got = hash.query(bodies[i], range);
      ASSERT_TRUE(std::is_sorted(got.begin(), got.end()));
      ASSERT_EQ(std::adjacent_find(got.begin(), got.end()), got.end());
      for (std::size_t j = 0; j < n; ++j) {
        if (surface_distance(bodies[i], bodies[j]) < range) {
          EXPECT_TRUE(std::binary_search(got.begin(), got.end(), static_cast<std::uint32_t>(j)));
        }
      }
    }
  }
}
