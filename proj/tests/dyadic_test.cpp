#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "dyadica/dyadic.hpp"

using namespace dyadica;

namespace {
constexpr double kInfinity = std::numeric_limits<double>::infinity();
}

TEST(DyadicCube, ParentOfNegativePositionRoundsDown) {
  EXPECT_EQ(DyadicCube::line(-2, -1).parent(), DyadicCube::line(-1, -1));
  EXPECT_EQ(DyadicCube::line(-2, -3).parent(), DyadicCube::line(-1, -2));
  EXPECT_EQ(DyadicCube::line(-2, 5).parent(), DyadicCube::line(-1, 2));
}

TEST(DyadicCube, GeometryOfUnitCube) {
  const DyadicCube q(2, -1, {3, 1, 0});
  EXPECT_DOUBLE_EQ(q.side(), 0.5);
  EXPECT_DOUBLE_EQ(q.volume(), 0.25);
  EXPECT_DOUBLE_EQ(q.center(0), 1.75);
  EXPECT_DOUBLE_EQ(q.corner(1), 0.5);
}

TEST(DyadicCube, TokenRoundTripInEveryDimension) {
  for (int d = 1; d <= kMaxDim; ++d) {
    const DyadicCube q(d, -3, {7, -2, 11});
    EXPECT_EQ(DyadicCube::parse(q.token()), q) << q.token();
  }
  EXPECT_EQ(DyadicCube(2, 1, {4, 5, 0}).token(), "2:1:4,5");
  EXPECT_THROW(DyadicCube::parse("2:1:4"), GeometryError);
  EXPECT_THROW(DyadicCube::parse("garbage"), GeometryError);
}

TEST(DyadicCube, DimensionIsCapped) { EXPECT_THROW(DyadicCube(4, 0, {}), GeometryError); }

TEST(DyadicCube, NestingPropertyOnRandomCubes) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Index> pos(-40, 40);
  std::uniform_int_distribution<int> scale(-6, 2), dim(1, 3);
  for (int t = 0; t < 500; ++t) {
    const int d = dim(rng);
    const DyadicCube q(d, scale(rng), {pos(rng), pos(rng), pos(rng)});
    const int up = q.scale + static_cast<int>(rng() % 4);
    const DyadicCube a = q.ancestor(up);
    EXPECT_TRUE(q.inside(a));
    EXPECT_FALSE(q.disjoint(a));
    if (up > q.scale) {
      EXPECT_FALSE(a.inside(q));
    }
    DyadicCube walk = q;
    while (walk.scale < up) walk = walk.parent();
    EXPECT_EQ(walk, a);
  }
}

TEST(RootBox, ChildrenPartitionTheParent) {
  const RootBox root(2, 1, -3);
  const DyadicCube q(2, 0, {1, 0, 0});
  const auto kids = root.children(q);
  ASSERT_EQ(kids.size(), 4u);
  double vol = 0.0;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    EXPECT_EQ(kids[i].parent(), q);
    vol += kids[i].volume();
    for (std::size_t j = i + 1; j < kids.size(); ++j) EXPECT_TRUE(kids[i].disjoint(kids[j]));
  }
  EXPECT_DOUBLE_EQ(vol, q.volume());
  EXPECT_THROW(root.children(DyadicCube(2, -3, {})), GeometryError);
}

TEST(RootBox, SubcubeCountIsGeometricSum) {
  const RootBox root(1, 2, -3);
  EXPECT_EQ(root.subcubes(root.root_cube()).size(), 63u);  // 1 + 2 + ... + 32
  const RootBox r3(3, 0, -2);
  EXPECT_EQ(r3.subcubes(r3.root_cube()).size(), 1u + 8u + 64u);
  const auto s = root.subcubes(root.root_cube(), 0);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i - 1], s[i]);
}

TEST(RootBox, CellsAndDilates) {
  const RootBox root(1, 2, -2);
  EXPECT_EQ(root.cell_count(), 16);
  const DyadicCube q = DyadicCube::line(0, 1);
  const CellBox c = root.cells(q);
  EXPECT_EQ(c.lo[0], 4);
  EXPECT_EQ(c.hi[0], 8);
  const CellBox w = root.dilated_cells(q, 3);
  EXPECT_EQ(w.lo[0], 0);
  EXPECT_EQ(w.hi[0], 12);
  EXPECT_TRUE(root.interior(q, 3));
  EXPECT_FALSE(root.interior(q, 5));
  EXPECT_THROW(root.dilated_cells(q, 4), GeometryError);
}

TEST(RootBox, AdmissibilityAndLimits) {
  const RootBox root(1, 2, -2);
  EXPECT_TRUE(root.admissible(DyadicCube::line(2, 0)));
  EXPECT_FALSE(root.admissible(DyadicCube::line(2, 1)));
  EXPECT_FALSE(root.admissible(DyadicCube::line(-3, 0)));
  EXPECT_FALSE(root.admissible(DyadicCube::line(0, -1)));
  EXPECT_THROW(RootBox(1, 0, 0), GeometryError);
  EXPECT_THROW(RootBox(1, 20, -10), GeometryError);
}

TEST(LongDistance, ClosedFormValues) {
  const DyadicCube q = DyadicCube::line(0, 0);
  EXPECT_DOUBLE_EQ(long_distance(q, q), 1.0);
  EXPECT_DOUBLE_EQ(long_distance(q, DyadicCube::line(0, 5)), 5.0);
  EXPECT_DOUBLE_EQ(long_distance(DyadicCube::line(-2, 0), DyadicCube::line(1, 0)), 2.0);
  EXPECT_DOUBLE_EQ(long_distance(DyadicCube(2, 0, {0, 0, 0}), DyadicCube(2, 0, {3, 4, 0})), 5.0);
}

TEST(RescalePoint, MapsCubeCenterToOrigin) {
  const DyadicCube q = DyadicCube::line(-1, 3);  // [1.5, 2)
  const auto r = rescale_point(q, 2.0, {1.75, 2.25}, 2);
  EXPECT_DOUBLE_EQ(r.argument[0], 0.0);
  EXPECT_DOUBLE_EQ(r.argument[1], 1.0);
  EXPECT_DOUBLE_EQ(r.weight, 2.0);  // (1/2)^{-2/2}
  EXPECT_DOUBLE_EQ(rescale_point(q, kInfinity, {1.75}, 1).weight, 1.0);
  EXPECT_THROW(rescale_point(q, 2.0, {1.0}, 2), GeometryError);
}
