#include <cmath>

#include <gtest/gtest.h>

#include "cutfsi/geometry.hpp"

using namespace cutfsi;

namespace {

const CircleLevelSet disk({0.0, 0.0}, 0.75);
const double r = std::sqrt(0.75);

}  // namespace

TEST(LevelSet, Values) {
  EXPECT_DOUBLE_EQ(level_set_eval(disk, {0.0, 0.0}), -0.75);
  EXPECT_NEAR(level_set_eval(disk, {r, 0.0}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(level_set_eval(disk, {1.0, 1.0}), 1.25);
}

TEST(LevelSet, RejectsNonPositiveRadius) {
  EXPECT_THROW(CircleLevelSet({0.0, 0.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(CircleLevelSet({0.0, 0.0}, -1.0), std::invalid_argument);
}

TEST(LevelSet, FluidNormalPointsIntoSolid) {
  const Vec2 n = disk.fluid_normal({r, 0.0});
  EXPECT_NEAR(n.x, -1.0, 1e-15);
  EXPECT_NEAR(n.y, 0.0, 1e-15);
}

TEST(EdgeCrossings, SingleRoot) {
  const auto c = edge_zero_crossings(disk, {0.75, 0.0}, {1.0, 0.0});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].x, r, 1e-14);
  EXPECT_NEAR(c[0].y, 0.0, 1e-15);
}

TEST(EdgeCrossings, NoRootInside) { EXPECT_TRUE(edge_zero_crossings(disk, {0.0, 0.0}, {0.25, 0.0}).empty()); }

TEST(EdgeCrossings, TwoSymmetricRoots) {
  const auto c = edge_zero_crossings(disk, {-1.0, 0.0}, {1.0, 0.0});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(c[0].x, -r, 1e-14);
  EXPECT_NEAR(c[1].x, r, 1e-14);
}

TEST(EdgeCrossings, MatchesBisection) {
  // Oblique segment; bisection on phi gives the crossing independently.
  const Vec2 a{0.2, 0.3}, b{1.0, 0.9};
  const auto c = edge_zero_crossings(disk, a, b);
  ASSERT_EQ(c.size(), 1u);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (disk(a + mid * (b - a)) < 0.0 ? lo : hi) = mid;
  }
  const Vec2 x = a + lo * (b - a);
  EXPECT_NEAR(c[0].x, x.x, 1e-13);
  EXPECT_NEAR(c[0].y, x.y, 1e-13);
}

TEST(ClassifyPoint, Sides) {
  EXPECT_EQ(classify_point(disk, {0.0, 0.0}), PointClass::Solid);
  EXPECT_EQ(classify_point(disk, {0.9, 0.9}), PointClass::Fluid);
  EXPECT_EQ(classify_point(disk, {r, 0.0}), PointClass::Interface);
}
