#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dyadica/wavelet.hpp"

using namespace dyadica;

TEST(DaubechiesFilter, OrderTwoMatchesClosedForm) {
  const double s3 = std::sqrt(3.0), den = 4.0 * std::sqrt(2.0);
  const std::vector<double> expect{(1 + s3) / den, (3 + s3) / den, (3 - s3) / den, (1 - s3) / den};
  const auto h = daubechies_lowpass(2);
  ASSERT_EQ(h.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(h[i], expect[i], 1e-14);
}

TEST(DaubechiesFilter, OrthonormalAndMirror) {
  for (int N = 1; N <= 6; ++N) {
    const auto h = daubechies_lowpass(N);
    EXPECT_LT(orthonormality_residual(h), 1e-12) << N;
    const auto g = quadrature_mirror(h);
    double cross = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) cross += h[i] * g[i];
    EXPECT_NEAR(cross, 0.0, 1e-13);
  }
}

TEST(WaveletFamily, VanishingMomentsAndUnitIntegral) {
  for (int N = 2; N <= 4; ++N) {
    const WaveletFamily fam = build_family(N, 10);
    const auto m = wavelet_moments(fam, N);
    for (int i = 0; i < N; ++i) EXPECT_NEAR(m[i], 0.0, 1e-8) << "N=" << N << " moment " << i;
    double integral = 0.0;
    for (double v : fam.scaling_values) integral += v * fam.grid_step();
    EXPECT_NEAR(integral, 1.0, 1e-3);
    EXPECT_LT(fam.cascade_residual, 1e-8);
  }
}

TEST(WaveletFamily, RejectsInconsistentBudgets) {
  EXPECT_THROW(build_family(2, 12, 2), ConstructionError);     // k + 1 > N
  EXPECT_THROW(build_family(3, 12, 2, 4), ConstructionError);  // even dilation
  EXPECT_THROW(build_family(3, 12, 2, 3), ConstructionError);  // w < 2N - 1
  EXPECT_THROW(build_family(3, 4), ConstructionError);
  EXPECT_THROW(build_family(0), ConstructionError);
}

TEST(HaarAtoms, StepValuesAreInverseVolume) {
  const RootBox root(1, 1, -3);
  const WaveletBasis basis(build_family(1, 12, 0, 1), root);
  const DyadicCube q = DyadicCube::line(-1, 1);  // [0.5, 1)
  const RealGrid a = atom_samples(root, basis.wavelet(q));
  for (Index k = 0; k < root.cell_count(); ++k) {
    const double expect = k == 4 || k == 5 ? 2.0 : (k == 6 || k == 7 ? -2.0 : 0.0);
    EXPECT_DOUBLE_EQ(a[k], expect) << k;
  }
  const RealGrid c = atom_samples(root, basis.scaling(q));
  EXPECT_DOUBLE_EQ(c[4], 2.0);
  EXPECT_DOUBLE_EQ(c[7], 2.0);
  EXPECT_DOUBLE_EQ(c[3], 0.0);
}

class WaveletGram : public ::testing::TestWithParam<int> {};

TEST_P(WaveletGram, AtomsAreOrthogonalWithInverseVolumeNorm) {
  const int dim = GetParam();
  const RootBox root(dim, 0, dim == 1 ? -5 : -3);
  const WaveletBasis basis(build_family(3, 12, 2, 5), root);
  std::vector<DyadicCube> cubes;
  for (int s = root.top; s > root.finest; --s)
    for (const auto& q : root.cubes_at(s)) cubes.push_back(q);
  std::vector<RealGrid> samples;
  for (const auto& q : cubes) samples.push_back(atom_samples(root, basis.wavelet(q)));
  double worst = 0.0;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    for (std::size_t j = i; j < cubes.size(); ++j) {
      const double g = std::sqrt(cubes[i].volume() * cubes[j].volume()) * pair(basis.wavelet(cubes[i]), samples[j]);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  EXPECT_LT(worst, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Dimensions, WaveletGram, ::testing::Values(1, 2));

TEST(WaveletBasis, AnalysisSynthesisReconstructs) {
  const RootBox root(1, 1, -5);
  const WaveletBasis basis(build_family(3, 12, 2, 5), root);
  const RealGrid f =
      RealGrid::sample(root, [](std::span<const double> x) { return std::sin(5.0 * x[0]) + x[0] * x[0]; });
  const RealGrid g = basis.synthesize(basis.analyze(f)) + basis.scaling_projection(f, root.top);
  double err = 0.0;
  for (Index k = 0; k < root.cell_count(); ++k) err = std::max(err, std::abs(f[k] - g[k]));
  EXPECT_LT(err, 1e-12);
}

TEST(WaveletBasis, HighLowSplitCloses) {
  const RootBox root(1, 1, -5);
  const WaveletBasis basis(build_family(3, 12, 2, 5), root);
  const RealGrid f = RealGrid::sample(root, [](std::span<const double> x) { return std::exp(-x[0]) * x[0]; });
  for (int ell = root.finest + 1; ell <= root.top; ++ell) EXPECT_LT(basis.high_low_check(f, ell), 1e-12) << ell;
  EXPECT_THROW(basis.high_low_check(f, root.finest), GeometryError);
}

TEST(WaveletBasis, AtomsAnnihilateLowDegreePolynomials) {
  const RootBox root(1, 2, -6);
  const WaveletBasis basis(build_family(3, 12, 2, 5), root);
  const DyadicCube q = DyadicCube::line(-2, 8);
  ASSERT_TRUE(basis.interior(q));
  for (int deg = 0; deg < 3; ++deg) {
    const RealGrid f = RealGrid::sample(root, [&](std::span<const double> x) { return std::pow(x[0], deg); });
    EXPECT_NEAR(pair(basis.wavelet(q), f), 0.0, 1e-10) << deg;
  }
  const RealGrid one = RealGrid::sample(root, [](auto) { return 1.0; });
  EXPECT_NEAR(pair(basis.scaling(q), one), 1.0, 1e-13);
  EXPECT_THROW(basis.wavelet(DyadicCube::line(root.finest, 0)), GeometryError);
}

TEST(CoefficientCsv, RoundTripWithMultiCoordinateTokens) {
  CoefficientTree<double> t;
  t[DyadicCube(2, -1, {3, 1, 0})] = 0.125;
  t[DyadicCube(2, 0, {0, 1, 0})] = -1.0 / 3.0;
  std::stringstream ss;
  write_tree_csv(t, ss);
  const auto back = real_tree(read_tree_csv(ss));
  ASSERT_EQ(back.size(), t.size());
  for (const auto& [q, v] : t) EXPECT_EQ(back.at(q), v);
}

TEST(CoefficientCsv, ComplexEntriesAreRejectedAsReal) {
  CoefficientTree<std::complex<double>> t;
  t[DyadicCube::line(0, 0)] = {1.0, 2.0};
  std::stringstream ss;
  write_tree_csv(t, ss);
  const auto back = read_tree_csv(ss);
  EXPECT_EQ(back.at(DyadicCube::line(0, 0)), std::complex<double>(1.0, 2.0));
  EXPECT_THROW(real_tree(back), std::runtime_error);
}

TEST(CoefficientTree, SumAndScale) {
  CoefficientTree<double> a{{DyadicCube::line(0, 0), 1.0}}, b{{DyadicCube::line(0, 0), 2.0}, {DyadicCube::line(0, 1), 3.0}};
  const auto s = sum(scaled(a, 2.0), b);
  EXPECT_DOUBLE_EQ(s.at(DyadicCube::line(0, 0)), 4.0);
  EXPECT_DOUBLE_EQ(s.at(DyadicCube::line(0, 1)), 3.0);
}
