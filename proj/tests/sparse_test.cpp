#include <gtest/gtest.h>

#include <map>

#include "dyadica/ensemble.hpp"
#include "dyadica/sparse.hpp"

using namespace dyadica;

namespace {

struct Fixture {
  RootBox root{1, 2, -6};
  WaveletBasis basis{build_family(3, 12, 2, 5), root};
  TestDictionary dict{basis, 4};
  Rng rng{23};
  DyadicCube Q0 = root.root_cube();
};

void expect_well_formed(const SparseCollection& col, double target) {
  ASSERT_FALSE(col.cubes.empty());
  EXPECT_EQ(col.cubes[0].cube, col.root);
  EXPECT_EQ(col.cubes[0].generation, 0);
  EXPECT_FALSE(col.cubes[0].parent.has_value());
  std::map<DyadicCube, int> gen;
  std::map<DyadicCube, double> child_mass;
  for (const auto& s : col.cubes) {
    gen[s.cube] = s.generation;
    if (!s.parent) continue;
    EXPECT_TRUE(s.cube.inside(*s.parent));
    EXPECT_NE(s.cube, *s.parent);
    EXPECT_EQ(s.generation, gen.at(*s.parent) + 1);
    child_mass[*s.parent] += s.cube.volume();
  }
  for (std::size_t i = 0; i < col.cubes.size(); ++i)
    for (std::size_t j = i + 1; j < col.cubes.size(); ++j)
      if (col.cubes[i].generation == col.cubes[j].generation) {
        EXPECT_TRUE(col.cubes[i].cube.disjoint(col.cubes[j].cube));
      }
  for (const auto& p : col.packing) {
    const double m = child_mass.count(p.parent) ? child_mass.at(p.parent) : 0.0;
    EXPECT_DOUBLE_EQ(p.children_mass, m);
    EXPECT_DOUBLE_EQ(p.ratio, m / p.parent.volume());
    if (!p.cap_hit) {
      EXPECT_LE(p.ratio, target);
    }
  }
}

}  // namespace

TEST(StoppingConfig, ModeDefaultsAndValidation) {
  EXPECT_DOUBLE_EQ(StoppingConfig::for_mode(StoppingMode::intest).packing_target, 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(StoppingConfig::for_mode(StoppingMode::mainiter).packing_target, 0.25);
  StoppingConfig c;
  c.theta = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c.theta = 4.0;
  c.packing_target = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(BuildSparse, IntestCollectionIsNestedAndPacked) {
  Fixture fx;
  for (int t = 0; t < 4; ++t) {
    SparseInputs in;
    in.b = random_atom_function(fx.rng, fx.basis, -4, 1, 8);
    in.g = random_atom_function(fx.rng, fx.basis, -4, 1, 8);
    in.f = {RealGrid(fx.root), random_bumps(fx.rng, fx.root, 3, 0.1, 0.6, 0.2, true).sample(fx.root)};
    const auto cfg = StoppingConfig::for_mode(StoppingMode::intest);
    const SparseCollection col = build_sparse(fx.Q0, in, cfg, fx.dict);
    expect_well_formed(col, cfg.packing_target);
  }
}

TEST(BuildSparse, MainiterCollectionIsNestedAndPacked) {
  Fixture fx;
  for (int n : {0, 1}) {
    SparseInputs in;
    in.f = {random_bumps(fx.rng, fx.root, 4, 0.05, 0.5, 0.2).sample(fx.root)};
    StoppingConfig cfg = StoppingConfig::for_mode(StoppingMode::mainiter);
    cfg.n = n;
    const SparseCollection col = build_sparse(fx.Q0, in, cfg, fx.dict);
    expect_well_formed(col, cfg.packing_target);
    EXPECT_GE(col.generations(), 1);
  }
}

TEST(BuildSparse, MaxDepthTruncates) {
  Fixture fx;
  SparseInputs in;
  in.f = {random_bumps(fx.rng, fx.root, 4, 0.05, 0.5, 0.2).sample(fx.root)};
  StoppingConfig cfg = StoppingConfig::for_mode(StoppingMode::mainiter);
  cfg.max_depth = 1;
  const SparseCollection col = build_sparse(fx.Q0, in, cfg, fx.dict);
  for (const auto& s : col.cubes) EXPECT_LE(s.generation, 1);
}

TEST(SparseForm, SingleCubeMatchesDirectFormula) {
  Fixture fx;
  const RealGrid b = random_atom_function(fx.rng, fx.basis, -4, 1, 6);
  const RealGrid g = random_atom_function(fx.rng, fx.basis, -4, 1, 6);
  const RealGrid f = random_bumps(fx.rng, fx.root, 2, 0.2, 0.8, 0.2, true).sample(fx.root);
  const TLNormEvaluator eb(b, fx.dict), eg(g, fx.dict);
  const DyadicCube q = DyadicCube::line(0, 1);
  const int w = fx.basis.dilation();
  const double direct = q.volume() * local_average(eb.square_function(q, 0.0, 2.0), q, 1.0) *
                        local_average(eg.square_function(q, 0.0, 2.0), q, 1.0) *
                        local_average(f, fx.root.dilated_cells(q, w), 1.0);
  EXPECT_NEAR(sparse_form_eval({q}, eb, eg, {f}, w), direct, 1e-14 * (1.0 + direct));
  EXPECT_EQ(sparse_form_eval({}, eb, eg, {f}, w), 0.0);
}

TEST(Domination, HoelderExponentsAreChecked) {
  EXPECT_NO_THROW(check_holder(3.0, 3.0, {3.0}));
  EXPECT_NO_THROW(check_holder(2.0, 2.0, {kInf}));
  EXPECT_THROW(check_holder(2.0, 2.0, {2.0}), ParameterError);
  EXPECT_THROW(check_holder(0.5, 2.0, {}), ParameterError);
}

TEST(Domination, IntestReportIsConsistent) {
  Fixture fx;
  const RealGrid b = random_atom_function(fx.rng, fx.basis, -4, 1, 6);
  const RealGrid g = random_atom_function(fx.rng, fx.basis, -4, 1, 6);
  const RealGrid f = random_bumps(fx.rng, fx.root, 2, 0.2, 0.8, 0.2, true).sample(fx.root);
  const DominationReport rep = verify_domination(fx.Q0, b, g, {f}, fx.dict, 3.0, 3.0, {3.0});
  EXPECT_GT(rep.lhs, 0.0);
  EXPECT_GT(rep.sparse_rhs, 0.0);
  EXPECT_TRUE(std::isfinite(rep.sparse_ratio()));
  EXPECT_TRUE(std::isfinite(rep.holder_ratio()));
  const TLNormEvaluator eb(b, fx.dict), eg(g, fx.dict);
  EXPECT_NEAR(rep.sparse_rhs,
              sparse_form_eval(rep.collection.members(), eb, eg, {f}, fx.basis.dilation()), 1e-12 * rep.sparse_rhs);
  // the form is bilinear-homogeneous in (b, g)
  const DominationReport rep2 = verify_domination(fx.Q0, 2.0 * b, g, {f}, fx.dict, 3.0, 3.0, {3.0});
  EXPECT_NEAR(rep2.lhs, 2.0 * rep.lhs, 1e-10 * rep.lhs);
}

TEST(Domination, StoppedSquareFunctionStaysBelowThreshold) {
  Fixture fx;
  const RealGrid b = random_atom_function(fx.rng, fx.basis, -5, 1, 10);
  SparseInputs in;
  in.b = b;
  in.g = b;
  in.f = {RealGrid(fx.root)};
  const auto cfg = StoppingConfig::for_mode(StoppingMode::intest);
  const SparseCollection col = build_sparse(fx.Q0, in, cfg, fx.dict);
  const TLNormEvaluator eb(b, fx.dict);
  std::map<DyadicCube, std::vector<DyadicCube>> kids;
  for (const auto& s : col.cubes)
    if (s.parent) kids[*s.parent].push_back(s.cube);
  for (const auto& s : col.cubes) {
    if (s.generation >= 2) continue;
    EXPECT_LE(stopped_square_ratio(eb, s.cube, kids[s.cube], s.theta), 1.0 + 1e-9) << s.cube.token();
  }
}

TEST(Telescoping, ConstantsAreFiniteForSmoothInput) {
  Fixture fx;
  const RealGrid f = random_bumps(fx.rng, fx.root, 3, 0.3, 1.0, 0.2).sample(fx.root);
  SparseInputs in;
  in.f = {f};
  StoppingConfig cfg = StoppingConfig::for_mode(StoppingMode::mainiter);
  cfg.n = 1;
  const SparseCollection col = build_sparse(fx.Q0, in, cfg, fx.dict);
  const auto rep = taylor_telescoping(f, fx.Q0, 1, col.members(), fx.basis.dilation(), fx.root.finest + 2);
  EXPECT_TRUE(std::isfinite(rep.split3));
  EXPECT_TRUE(std::isfinite(rep.split4));
  EXPECT_GE(rep.split3, 0.0);
}
