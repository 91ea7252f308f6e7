#include <gtest/gtest.h>

#include "dyadica/ensemble.hpp"
#include "dyadica/paraproduct.hpp"

using namespace dyadica;

namespace {

struct Fixture {
  RootBox root{1, 2, -6};
  WaveletBasis basis{build_family(3, 12, 2, 5), root};
  Rng rng{17};

  ParaproductSpec<double> spec(int arity, int terms) {
    ParaproductSpec<double> s;
    s.basis = &basis;
    s.arity = arity;
    s.symbol = random_symbol(rng, basis, -3, 0, terms);
    return s;
  }
  std::vector<RealGrid> inputs(int m) {
    std::vector<RealGrid> v;
    for (int j = 0; j < m; ++j) v.push_back(random_bumps(rng, root, 3, 0.2, 1.0, 0.3).sample(root));
    return v;
  }
};

double max_abs_diff(const RealGrid& a, const RealGrid& b) {
  double e = 0.0;
  for (Index k = 0; k < static_cast<Index>(a.size()); ++k) e = std::max(e, std::abs(a[k] - b[k]));
  return e;
}

}  // namespace

TEST(Paraproduct, SingleTermOnConstantsIsScaledAtom) {
  Fixture fx;
  const DyadicCube q = DyadicCube::line(-2, 7);
  ParaproductSpec<double> s;
  s.basis = &fx.basis;
  s.arity = 2;
  s.symbol = {{q, 1.5}};
  const RealGrid one = RealGrid::sample(fx.root, [](auto) { return 1.0; });
  const RealGrid two = 2.0 * one;
  const RealGrid out = apply_paraproduct(s, {one, two});
  const RealGrid expect = (q.volume() * 1.5 * 2.0) * atom_samples(fx.root, fx.basis.wavelet(q));
  EXPECT_LT(max_abs_diff(out, expect), 1e-13);
}

TEST(Paraproduct, ThreadedMatchesSerial) {
  Fixture fx;
  const auto s = fx.spec(2, 40);
  const auto in = fx.inputs(2);
  const RealGrid a = apply_paraproduct(s, in, 1);
  for (int t : {2, 3, 8}) EXPECT_LT(max_abs_diff(a, apply_paraproduct(s, in, t)), 1e-12) << t;
}

TEST(Paraproduct, LinearInTheSymbol) {
  Fixture fx;
  auto s1 = fx.spec(1, 10), s2 = fx.spec(1, 10);
  const auto in = fx.inputs(1);
  ParaproductSpec<double> s12 = s1;
  s12.symbol = sum(s1.symbol, scaled(s2.symbol, -2.0));
  const RealGrid lhs = apply_paraproduct(s12, in);
  const RealGrid rhs = apply_paraproduct(s1, in) - 2.0 * apply_paraproduct(s2, in);
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
}

TEST(Paraproduct, AdjointIdentityInEverySlot) {
  Fixture fx;
  for (int m = 1; m <= 3; ++m) {
    const auto s = fx.spec(m, 12);
    const auto in = fx.inputs(m);
    const RealGrid g = fx.inputs(1)[0];
    for (int j = 1; j <= m; ++j) {
      auto swapped = in;
      swapped[static_cast<std::size_t>(j - 1)] = g;
      const double lhs = adjoint_apply(s, j, in).pair(g);
      const double rhs = apply_paraproduct(s, swapped).pair(in[static_cast<std::size_t>(j - 1)]);
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs))) << "m=" << m << " j=" << j;
    }
    EXPECT_THROW(adjoint_apply(s, m + 1, in), ParameterError);
  }
}

TEST(Paraproduct, DualityThroughMatchedWaveletForm) {
  Fixture fx;
  const auto s = fx.spec(2, 15);
  const auto in = fx.inputs(2);
  const RealGrid g = fx.inputs(1)[0];
  const RealGrid b = fx.basis.synthesize(s.symbol);
  std::vector<RealGrid> slots{g};
  slots.insert(slots.end(), in.begin(), in.end());
  const double via_form = form_eval(matched_form(s), b, slots);
  const double via_pairing = apply_paraproduct(s, in).pair(g);
  EXPECT_NEAR(via_form, via_pairing, 1e-12 * (1.0 + std::abs(via_pairing)));
}

TEST(Paraproduct, LocalizedFormOverRootIsThePairing) {
  Fixture fx;
  const auto s = fx.spec(2, 15);
  const auto in = fx.inputs(2);
  const RealGrid g = fx.inputs(1)[0];
  EXPECT_NEAR(localized_form(s, fx.root.root_cube(), g, in), apply_paraproduct(s, in).pair(g), 1e-12);
  // a small cube sees only the symbol terms inside it
  const DyadicCube small = DyadicCube::line(-5, 0);
  bool any = false;
  for (const auto& [q, c] : s.symbol) any |= q.inside(small);
  if (!any) {
    EXPECT_EQ(localized_form(s, small, g, in), 0.0);
  }
}

TEST(Paraproduct, ArityMismatchThrows) {
  Fixture fx;
  const auto s = fx.spec(2, 4);
  EXPECT_THROW(apply_paraproduct(s, fx.inputs(1)), ParameterError);
}

TEST(WaveletForm, LocalizationDropsOutsideCubes) {
  Fixture fx;
  WaveletFormSpec v;
  v.basis = &fx.basis;
  v.arity = 1;
  v.weights = WaveletFormSpec::all_cubes(fx.root);
  const auto in = fx.inputs(2);
  const double full = form_eval(v, in[0], {in[1]});
  double split = 0.0;
  for (const auto& q : fx.root.cubes_at(fx.root.top - 1)) {
    v.localization = q;
    split += form_eval(v, in[0], {in[1]});
  }
  v.localization.reset();
  v.weights.erase(fx.root.root_cube());
  const double without_root = form_eval(v, in[0], {in[1]});
  EXPECT_NEAR(split, without_root, 1e-12 * (1.0 + std::abs(full)));
}

TEST(IntrinsicForm, NonnegativeAndHomogeneous) {
  Fixture fx;
  const TestDictionary dict(fx.basis, 4);
  const auto in = fx.inputs(3);
  const DyadicCube Q0 = fx.root.root_cube();
  const double a = intrinsic_form(Q0, in[0], {in[1], in[2]}, dict);
  EXPECT_GE(a, 0.0);
  EXPECT_NEAR(intrinsic_form(Q0, -2.0 * in[0], {in[1], 3.0 * in[2]}, dict), 6.0 * a, 1e-10 * (1.0 + a));
  EXPECT_THROW(intrinsic_form(Q0, in[0], {}, dict), ParameterError);
}
