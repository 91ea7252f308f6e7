#include <gtest/gtest.h>

#include <random>

#include "dyadica/funcspace.hpp"

using namespace dyadica;

namespace {

// sup over every admissible dyadic cube containing the cell, by direct averaging
double brute_maximal(const RealGrid& f, Index cell, double p) {
  const RootBox& root = f.root();
  double best = 0.0;
  for (int s = root.finest; s <= root.top; ++s) {
    const DyadicCube q = DyadicCube::line(s, cell >> (s - root.finest));
    double acc = 0.0;
    const CellBox b = root.cells(q);
    for (Index k = b.lo[0]; k < b.hi[0]; ++k) acc += std::pow(std::abs(f[k]), p);
    best = std::max(best, std::pow(acc / static_cast<double>(b.count()), 1.0 / p));
  }
  return best;
}

}  // namespace

TEST(Maximal, IndicatorOfOneQuarter) {
  const RootBox root(1, 0, -2);
  RealGrid f(root);
  f[0] = 1.0;
  const RealGrid m = maximal(f);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
  EXPECT_DOUBLE_EQ(m[2], 0.25);
  EXPECT_DOUBLE_EQ(m[3], 0.25);
}

TEST(Maximal, MatchesBruteForceOnRandomData) {
  const RootBox root(1, 1, -4);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (double p : {1.0, 2.0, 3.5}) {
    RealGrid f(root);
    for (auto& v : f.samples()) v = g(rng);
    const RealGrid m = maximal(f, p);
    for (Index k = 0; k < root.cell_count(); ++k) EXPECT_NEAR(m[k], brute_maximal(f, k, p), 1e-12);
  }
}

TEST(Maximal, MultiSublinearIsProductOfAveragesBound) {
  const RootBox root(1, 0, -4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealGrid a(root), b(root);
  for (Index k = 0; k < root.cell_count(); ++k) {
    a[k] = u(rng);
    b[k] = u(rng);
  }
  const RealGrid joint = maximal(std::vector<RealGrid>{a, b}, {2.0, 2.0});
  const RealGrid ma = maximal(a, 2.0), mb = maximal(b, 2.0);
  for (Index k = 0; k < root.cell_count(); ++k) EXPECT_LE(joint[k], ma[k] * mb[k] + 1e-14);
}

TEST(LocalAverage, ConstantAndBoxOutsideRoot) {
  const RootBox root(1, 0, -2);
  const RealGrid f = RealGrid::sample(root, [](auto) { return 3.0; });
  EXPECT_DOUBLE_EQ(local_average(f, root.root_cube(), 2.0), 3.0);
  // a 3-dilate of a quarter cube at the edge counts the missing cell as zero
  const CellBox w = root.dilated_cells(DyadicCube::line(-2, 0), 3);
  EXPECT_NEAR(local_average(f, w, 1.0), 2.0, 1e-15);
  EXPECT_THROW(local_average(f, root.root_cube(), 0.0), ParameterError);
}

TEST(ExponentTuple, HoelderExponent) {
  EXPECT_DOUBLE_EQ(ExponentTuple({2.0, 2.0}).r(), 1.0);
  EXPECT_DOUBLE_EQ(ExponentTuple({2.0, kInf}).r(), 2.0);
  EXPECT_TRUE(std::isinf(ExponentTuple({kInf, kInf}).r()));
  EXPECT_THROW(ExponentTuple({1.0}), ParameterError);
  EXPECT_THROW(ExponentTuple(std::vector<double>{}), ParameterError);
}

TEST(MultiIndex, Counts) {
  EXPECT_EQ(multi_indices(2, 2).size(), 3u);
  EXPECT_EQ(multi_indices_upto(2, 2).size(), 6u);
  EXPECT_EQ(multi_indices(3, 2).size(), 6u);
  EXPECT_EQ(multi_indices_upto(1, 3).size(), 4u);
}

TEST(Derivative, CentralDifferencesOnPolynomials) {
  const RootBox root(1, 2, -6);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return x[0] * x[0]; });
  const RealGrid d1 = derivative(f, MultiIndex{1, 0, 0});
  const RealGrid d2 = derivative(f, MultiIndex{2, 0, 0});
  const double h = root.spacing();
  for (Index k = 1; k + 1 < root.cell_count(); ++k) {
    EXPECT_NEAR(d1[k], 2.0 * (static_cast<double>(k) + 0.5) * h, 1e-11);
    EXPECT_NEAR(d2[k], 2.0, 1e-9);
  }
}

TEST(Taylor, ReproducesQuadraticExactly) {
  const RootBox root(1, 2, -6);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return x[0] * x[0] - x[0]; });
  const DyadicCube q = DyadicCube::line(-2, 5);
  const RealGrid p = taylor_poly(f, q, 3, 5);
  const CellBox box = root.dilated_cells(q, 5);
  double err = 0.0;
  f.for_each_cell(box, [&](const IndexVec&, Index k) { err = std::max(err, std::abs(p[k] - f[k])); });
  EXPECT_LT(err, 1e-12);
}

TEST(Taylor, DegreeZeroIsAverageOfConstant) {
  const RootBox root(1, 2, -5);
  const RealGrid f = RealGrid::sample(root, [](auto) { return 4.0; });
  const DyadicCube q = DyadicCube::line(-1, 3);
  const RealGrid p = taylor_poly(f, q, 1, 3);
  f.for_each_cell(root.dilated_cells(q, 3), [&](const IndexVec&, Index k) { EXPECT_NEAR(p[k], 4.0, 1e-13); });
}

TEST(AntiIbp, HaarAtomAgainstIdentity) {
  const RootBox root(1, 1, -4);
  const WaveletBasis basis(build_family(1, 12, 0, 1), root);
  const RealGrid x = RealGrid::sample(root, [](std::span<const double> t) { return t[0]; });
  const auto rep = anti_ibp_check(x, basis.wavelet(DyadicCube::line(0, 0)), 1);
  // int_0^{1/2} x dx - int_{1/2}^1 x dx
  EXPECT_NEAR(rep.lhs, -0.25, 1e-15);
  EXPECT_NEAR(rep.rhs, -0.25, 1e-15);
}

TEST(AntiIbp, IdentityHoldsForSmoothWaveletsAndBoundedClass) {
  const RootBox root(1, 2, -6);
  const WaveletBasis basis(build_family(3, 12, 2, 5), root);
  const RealGrid f =
      RealGrid::sample(root, [](std::span<const double> x) { return std::sin(3.0 * x[0]) * std::exp(-x[0]); });
  for (int k = 0; k <= 2; ++k)
    for (const DyadicCube& q : {DyadicCube::line(-2, 6), DyadicCube::line(-3, 13), DyadicCube::line(-1, 3)}) {
      const auto rep = anti_ibp_check(f, basis.wavelet(q), k);
      EXPECT_LT(rep.relative_gap(), 1e-8) << "k=" << k << " " << q.token();
      EXPECT_LT(rep.class_constant, 1e3);
    }
  EXPECT_THROW(anti_ibp_check(f, basis.wavelet(DyadicCube::line(-2, 0)), 1), GeometryError);
}

TEST(Sobolev, NormOfLinearFunction) {
  const RootBox root(1, 0, -6);
  const WaveletBasis basis(build_family(3, 12, 2, 5), root);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return x[0]; });
  EXPECT_NEAR(sobolev_seminorm(f, 0, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(sobolev_norm(f, 0, kInf, basis), 1.0 - 0.5 / 64.0, 1e-14);
  EXPECT_THROW(sobolev_norm(f, 3, 2.0, basis), ParameterError);
  EXPECT_THROW(sobolev_seminorm(f, -1, 2.0), ParameterError);
}
