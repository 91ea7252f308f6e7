#pragma once

// Random and structured inputs for the experiment suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dyadica/funcspace.hpp"
#include "dyadica/wavelet.hpp"

namespace dyadica {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }
inline Index uniform_index(Rng& rng, Index lo, Index hi) {  // inclusive
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// Interior cubes of one scale.
inline std::vector<DyadicCube> interior_cubes(const WaveletBasis& basis, int scale) {
  std::vector<DyadicCube> out;
  for (const auto& q : basis.root().cubes_at(scale))
    if (basis.interior(q)) out.push_back(q);
  return out;
}

/// Random finitely supported symbol: `count` interior cubes drawn over the
/// scales [min_scale, max_scale] (each scale used at least once when count
/// allows), Gaussian coefficients.
inline CoefficientTree<double> random_symbol(Rng& rng, const WaveletBasis& basis, int min_scale, int max_scale,
                                             int count) {
  CoefficientTree<double> t;
  std::vector<int> scales;
  for (int s = max_scale; s >= min_scale; --s)
    if (!interior_cubes(basis, s).empty()) scales.push_back(s);
  if (scales.empty()) throw GeometryError("random_symbol: no interior cubes in the scale range");
  for (int i = 0; i < count; ++i) {
    const int s = i < static_cast<int>(scales.size()) ? scales[static_cast<std::size_t>(i)]
                                                       : scales[static_cast<std::size_t>(uniform_index(rng, 0, static_cast<Index>(scales.size()) - 1))];
    const auto cubes = interior_cubes(basis, s);
    const auto& q = cubes[static_cast<std::size_t>(uniform_index(rng, 0, static_cast<Index>(cubes.size()) - 1))];
    t[q] += gaussian(rng);
  }
  return t;
}

/// Smooth bump exp(-1/(1-|x-c|^2/r^2)) (all coordinates).
inline double smooth_bump(std::span<const double> x, const std::array<double, kMaxDim>& c, double r) {
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) q += (x[i] - c[i]) * (x[i] - c[i]);
  q /= r * r;
  return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
}

struct BumpSum {
  std::vector<std::array<double, kMaxDim>> center;
  std::vector<double> radius;
  std::vector<double> amp;

  double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t t = 0; t < amp.size(); ++t) s += amp[t] * smooth_bump(x, center[t], radius[t]);
    return s;
  }
  RealGrid sample(const RootBox& root) const {
    return RealGrid::sample(root, [this](std::span<const double> x) { return (*this)(x); });
  }
};

/// Random C-infinity function: a few bumps with radii in [rmin, rmax], each
/// supported at distance >= margin from the root boundary.
inline BumpSum random_bumps(Rng& rng, const RootBox& root, int count, double rmin, double rmax, double margin,
                            bool positive = false) {
  BumpSum b;
  const double side = std::ldexp(1.0, root.top);
  for (int t = 0; t < count; ++t) {
    const double r = uniform(rng, rmin, std::min(rmax, 0.5 * side - margin));
    std::array<double, kMaxDim> c{};
    for (int i = 0; i < root.dim; ++i) c[i] = uniform(rng, margin + r, side - margin - r);
    b.center.push_back(c);
    b.radius.push_back(r);
    b.amp.push_back(positive ? uniform(rng, 0.2, 1.0) : gaussian(rng));
  }
  return b;
}

/// Random finite atom combination sum_Q |Q| c_Q phi_Q on interior cubes of
/// at least three scales.
inline RealGrid random_atom_function(Rng& rng, const WaveletBasis& basis, int min_scale, int max_scale, int count) {
  return basis.synthesize(random_symbol(rng, basis, min_scale, max_scale, count));
}

/// Plateau: sum of indicator functions of random dyadic cubes (BMO probes).
inline RealGrid random_plateau(Rng& rng, const RootBox& root, int count, int min_scale, int max_scale) {
  RealGrid g(root);
  for (int t = 0; t < count; ++t) {
    const int s = static_cast<int>(uniform_index(rng, min_scale, max_scale));
    const auto cubes = root.cubes_at(s);
    const auto& q = cubes[static_cast<std::size_t>(uniform_index(rng, 0, static_cast<Index>(cubes.size()) - 1))];
    const double a = gaussian(rng);
    g.for_each_cell(root.cells(q), [&](const IndexVec&, Index k) { g[k] += a; });
  }
  return g;
}

/// Generic random function for norm suites: mixes atoms, bumps and plateaus.
inline RealGrid random_function(Rng& rng, const WaveletBasis& basis) {
  const RootBox& root = basis.root();
  const int kind = static_cast<int>(uniform_index(rng, 0, 2));
  const int lo = std::min(root.finest + 2, root.top), hi = root.top;
  switch (kind) {
    case 0: return random_atom_function(rng, basis, lo, hi, 6);
    case 1: {
      const double side = std::ldexp(1.0, root.top);
      return random_bumps(rng, root, 3, side / 16, side / 4, side / 16).sample(root);
    }
    default: return random_plateau(rng, root, 4, std::max(root.finest + 1, root.top - 5), root.top - 1);
  }
}

/// Lacunary symbol: disjoint cubes Z_i of side 2^{-i} (i = 1..depth)
/// accumulating at x_1 = 2 from the left, b_{Z_i} = l(Z_i)^{-1/p} 2^{-(depth-i)/p}.
/// Its BMO norm grows like 2^{depth/p} while l(Q)^n-weighted averages stay bounded.
inline CoefficientTree<double> lacunary_symbol(const RootBox& root, int depth, double p) {
  if (root.top < 2) throw GeometryError("lacunary_symbol needs a root of side >= 4");
  CoefficientTree<double> t;
  for (int i = 1; i <= depth; ++i) {
    if (-i <= root.finest) throw GeometryError("lacunary_symbol: depth exceeds the grid");
    IndexVec pos{};
    pos[0] = (Index{1} << (i + 1)) - 2;  // [2 - 2^{1-i}, 2 - 2^{-i})
    for (int c = 1; c < root.dim; ++c) pos[c] = Index{1} << (i + 1 - 2);
    DyadicCube q(root.dim, -i, pos);
    const double len = q.side();
    t[q] = std::pow(len, -1.0 / p) * std::pow(2.0, -static_cast<double>(depth - i) / p);
  }
  return t;
}

/// The symbol b_Q = l(Q)^n on the same lacunary cubes (informational).
inline CoefficientTree<double> power_symbol(const RootBox& root, int depth, double n) {
  CoefficientTree<double> t;
  for (const auto& [q, v] : lacunary_symbol(root, depth, 2.0)) {
    (void)v;
    t[q] = std::pow(q.side(), n);
  }
  return t;
}

}  // namespace dyadica
