#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "dyadica/grid.hpp"

using namespace dyadica;

TEST(GridFunction, MidpointRuleIsExactForLinearFunctions) {
  const RootBox root(1, 2, -3);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return 3.0 * x[0] - 1.0; });
  EXPECT_NEAR(f.integral(), 3.0 * 8.0 - 4.0, 1e-13);
}

TEST(GridFunction, SampleOrderHasFirstCoordinateFastest) {
  const RootBox root(2, 0, -1);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return 10.0 * x[1] + x[0]; });
  EXPECT_DOUBLE_EQ(f[0], 2.75);
  EXPECT_DOUBLE_EQ(f[1], 3.25);
  EXPECT_DOUBLE_EQ(f[2], 7.75);
  IndexVec c{};
  f.unflatten(3, c);
  EXPECT_EQ(c[0], 1);
  EXPECT_EQ(c[1], 1);
  EXPECT_EQ(f.flatten(c), 3);
}

TEST(GridFunction, NormsOfConstant) {
  const RootBox root(2, 1, -2);
  RealGrid f = RealGrid::sample(root, [](auto) { return -2.0; });
  EXPECT_NEAR(f.lp_norm(1.0), 8.0, 1e-13);    // |f| * |root| = 2 * 4
  EXPECT_NEAR(f.lp_norm(2.0), 4.0, 1e-13);    // sqrt(4 * 4)
  EXPECT_DOUBLE_EQ(f.lp_norm(kInf), 2.0);
  EXPECT_NEAR(f.pair(f), 16.0, 1e-13);
}

TEST(GridFunction, ZeroExtensionOutsideRoot) {
  const RootBox root(1, 0, -2);
  const RealGrid f = RealGrid::sample(root, [](auto) { return 1.0; });
  EXPECT_DOUBLE_EQ(f.at({-1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(f.at({4, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(f.at({3, 0, 0}), 1.0);
}

TEST(GridFunction, ArithmeticChecksRoots) {
  const RealGrid a(RootBox(1, 0, -2)), b(RootBox(1, 0, -3));
  EXPECT_THROW(a + b, GeometryError);
  EXPECT_THROW(RealGrid(RootBox(1, 0, -2), std::vector<double>(3)), GeometryError);
}

TEST(GridFunction, RestrictionKeepsOnlyTheBox) {
  const RootBox root(1, 0, -3);
  const RealGrid f = RealGrid::sample(root, [](auto) { return 1.0; });
  CellBox box;
  box.dim = 1;
  box.lo[0] = 2;
  box.hi[0] = 5;
  const RealGrid r = f.restricted(box);
  EXPECT_NEAR(r.integral(), 3.0 / 8.0, 1e-15);
}

TEST(GridIo, BinaryRoundTrip) {
  const RootBox root(2, 1, -2);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return std::sin(x[0]) * x[1]; });
  const auto path = std::filesystem::temp_directory_path() / "dyadica_grid_roundtrip.bin";
  write_binary(f, path.string());
  const RealGrid g = read_binary(path.string());
  std::filesystem::remove(path);
  EXPECT_TRUE(g.root() == root);
  for (Index k = 0; k < root.cell_count(); ++k) EXPECT_EQ(f[k], g[k]);
}

TEST(GridIo, BinaryHeaderIsFourInt64) {
  const RootBox root(1, 0, -1);
  const auto path = std::filesystem::temp_directory_path() / "dyadica_grid_header.bin";
  write_binary(RealGrid(root), path.string());
  EXPECT_EQ(std::filesystem::file_size(path), 4 * 8 + 2 * 8u);
  std::filesystem::remove(path);
  EXPECT_THROW(read_binary("/nonexistent/dyadica.bin"), std::runtime_error);
}

TEST(GridIo, CsvHasOneRowPerCell) {
  const RootBox root(1, 0, -2);
  std::ostringstream os;
  write_csv(RealGrid(root), os);
  std::size_t lines = 0;
  for (char c : os.str()) lines += c == '\n';
  EXPECT_EQ(lines, 5u);  // header + 4 cells
}
