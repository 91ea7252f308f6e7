#pragma once

// Local averages, dyadic maximal operators, discrete derivatives, the
// Taylor-type polynomial adapted to a cube, anti-integration by parts, and
// Sobolev norms.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/grid.hpp"
#include "dyadica/wavelet.hpp"

namespace dyadica {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponents p_1..p_m in (1, inf] with 1/r = sum 1/p_j.
struct ExponentTuple {
  std::vector<double> p;

  ExponentTuple() = default;
  explicit ExponentTuple(std::vector<double> ps) : p(std::move(ps)) {
    if (p.empty()) throw ParameterError("exponent tuple is empty");
    for (double v : p)
      if (!(v > 1.0)) throw ParameterError("exponents must satisfy p_j > 1");
  }
  std::size_t size() const { return p.size(); }
  double inverse_sum() const {
    double s = 0.0;
    for (double v : p) s += std::isinf(v) ? 0.0 : 1.0 / v;
    return s;
  }
  /// Hoelder exponent r; infinity when every p_j is infinite.
  double r() const {
    const double s = inverse_sum();
    return s == 0.0 ? kInf : 1.0 / s;
  }
};

inline double inverse(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// ---------------------------------------------------------------- averages

/// <f>_{p,B} = (|B|^{-1} int_B |f|^p)^{1/p}; |B| counts cells outside the root.
template <Scalar T>
double local_average(const GridFunction<T>& f, const CellBox& box, double p) {
  if (!(p > 0.0)) throw ParameterError("local_average: p must be positive");
  const Index total = box.count();
  if (total == 0) throw GeometryError("local_average: empty box");
  double acc = 0.0;
  const bool sup = std::isinf(p);
  f.for_each_cell(box, [&](const IndexVec&, Index k) {
    const double v = std::abs(f[k]);
    acc = sup ? std::max(acc, v) : acc + std::pow(v, p);
  });
  if (sup) return acc;
  return std::pow(acc / static_cast<double>(total), 1.0 / p);
}

template <Scalar T>
double local_average(const GridFunction<T>& f, const DyadicCube& q, double p) {
  if (!f.root().admissible(q)) throw GeometryError("local_average: cube not admissible");
  return local_average(f, f.root().cells(q), p);
}

/// Per-scale reductions of a nonnegative cell array: level s holds, for every
/// cube of scale J + s, the sum (or max) of the cell values it contains.
class ScalePyramid {
 public:
  ScalePyramid(const RootBox& root, std::vector<double> cells, bool use_max)
      : root_(root) {
    levels_.push_back(std::move(cells));
    const int d = root.dim;
    for (int s = 1; s <= root.levels(); ++s) {
      const Index m = root.cells_per_side() >> s;
      const Index mf = m * 2;
      std::vector<double> next(static_cast<std::size_t>(ipow(m, d)), use_max ? 0.0 : 0.0);
      const auto& prev = levels_.back();
      for (Index k = 0; k < static_cast<Index>(prev.size()); ++k) {
        Index r = k, parent = 0, stride = 1;
        for (int i = 0; i < d; ++i) {
          parent += ((r % mf) / 2) * stride;
          r /= mf;
          stride *= m;
        }
        if (use_max)
          next[parent] = std::max(next[parent], prev[k]);
        else
          next[parent] += prev[k];
      }
      levels_.push_back(std::move(next));
    }
  }

  /// Value at the ancestor of finest cell `cell` at level s.
  double at(const IndexVec& cell, int s) const {
    const Index m = root_.cells_per_side() >> s;
    Index k = 0;
    for (int i = root_.dim - 1; i >= 0; --i) k = k * m + (cell[i] >> s);
    return levels_[s][k];
  }
  double at(const DyadicCube& q) const {
    const int s = q.scale - root_.finest;
    const Index m = root_.cells_per_side() >> s;
    Index k = 0;
    for (int i = root_.dim - 1; i >= 0; --i) k = k * m + q.pos[i];
    return levels_[s][k];
  }
  const std::vector<double>& level(int s) const { return levels_[s]; }

  static Index ipow(Index b, int e) {
    Index r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }

 private:
  RootBox root_;
  std::vector<std::vector<double>> levels_;
};

/// Dyadic multi-sublinear maximal function
///   M_p(f_1..f_m)(x) = sup_{x in Q admissible} prod_j <f_j>_{p_j,Q}.
/// An empty exponent list means all ones.
template <Scalar T>
RealGrid maximal(const std::vector<GridFunction<T>>& fs, std::vector<double> ps = {}) {
  if (fs.empty()) throw ParameterError("maximal: no input functions");
  if (ps.empty()) ps.assign(fs.size(), 1.0);
  if (ps.size() != fs.size()) throw ParameterError("maximal: exponent count mismatch");
  const RootBox root = fs[0].root();
  std::vector<ScalePyramid> pyr;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    if (!(fs[j].root() == root)) throw GeometryError("maximal: inputs on different roots");
    std::vector<double> cells(fs[j].size());
    const bool sup = std::isinf(ps[j]);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const double v = std::abs(fs[j][static_cast<Index>(k)]);
      cells[k] = sup ? v : std::pow(v, ps[j]);
    }
    pyr.emplace_back(root, std::move(cells), sup);
  }
  RealGrid out(root);
  IndexVec cell{};
  for (Index k = 0; k < root.cell_count(); ++k) {
    out.unflatten(k, cell);
    double best = 0.0;
    for (int s = 0; s <= root.levels(); ++s) {
      const double count = std::ldexp(1.0, s * root.dim);
      double prod = 1.0;
      for (std::size_t j = 0; j < fs.size(); ++j) {
        const double v = pyr[j].at(cell, s);
        prod *= std::isinf(ps[j]) ? v : std::pow(v / count, 1.0 / ps[j]);
      }
      best = std::max(best, prod);
    }
    out[k] = best;
  }
  return out;
}

inline RealGrid maximal(const RealGrid& f, double p = 1.0) { return maximal(std::vector<RealGrid>{f}, {p}); }

// ---------------------------------------------------------------- derivatives

using MultiIndex = std::array<int, kMaxDim>;

inline int order(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double multi_factorial(const MultiIndex& a) { return factorial(a[0]) * factorial(a[1]) * factorial(a[2]); }

/// Multi-indices with |a| == n in dimension d, lexicographic.
inline std::vector<MultiIndex> multi_indices(int d, int n) {
  std::vector<MultiIndex> out;
  if (n < 0) return out;
  if (d == 1) return {MultiIndex{n, 0, 0}};
  for (int a0 = n; a0 >= 0; --a0) {
    if (d == 2) {
      out.push_back({a0, n - a0, 0});
      continue;
    }
    for (int a1 = n - a0; a1 >= 0; --a1) out.push_back({a0, a1, n - a0 - a1});
  }
  return out;
}

/// Multi-indices with |a| <= n.
inline std::vector<MultiIndex> multi_indices_upto(int d, int n) {
  std::vector<MultiIndex> out;
  for (int t = 0; t <= n; ++t) {
    auto v = multi_indices(d, t);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

namespace detail {

template <Scalar T>
GridFunction<T> difference(const GridFunction<T>& f, int axis, bool second) {
  const RootBox& root = f.root();
  const double h = root.spacing();
  GridFunction<T> out(root);
  IndexVec c{};
  for (Index k = 0; k < root.cell_count(); ++k) {
    f.unflatten(k, c);
    IndexVec lo = c, hi = c;
    lo[axis] -= 1;
    hi[axis] += 1;
    const T a = f.at(lo), b = f.at(hi);
    out[k] = second ? (b - 2.0 * f[k] + a) / (h * h) : (b - a) / (2.0 * h);
  }
  return out;
}

}  // namespace detail

/// Central-difference partial derivative d^a f (zero extension outside the
/// root). Even orders use repeated second differences; odd orders add one
/// centered first difference.
template <Scalar T>
GridFunction<T> derivative(const GridFunction<T>& f, const MultiIndex& a) {
  GridFunction<T> g = f;
  for (int i = 0; i < f.root().dim; ++i) {
    for (int t = 0; t < a[i] / 2; ++t) g = detail::difference(g, i, true);
    if (a[i] % 2) g = detail::difference(g, i, false);
  }
  return g;
}

/// All partial derivatives up to a fixed order, computed once.
class Jet {
 public:
  Jet(const RealGrid& f, int max_order) : f_(f), max_order_(max_order) {
    for (const auto& a : multi_indices_upto(f.root().dim, max_order)) parts_.emplace(a, derivative(f, a));
  }
  const RealGrid& function() const { return f_; }
  const RootBox& root() const { return f_.root(); }
  int max_order() const { return max_order_; }
  const RealGrid& operator[](const MultiIndex& a) const {
    auto it = parts_.find(a);
    if (it == parts_.end()) throw ParameterError("Jet: derivative order not precomputed");
    return it->second;
  }

  /// |grad^n f| = sqrt(sum_{|a|=n} n!/a! |d^a f|^2), the Frobenius norm of the
  /// full symmetric derivative tensor.
  RealGrid gradient_magnitude(int n) const {
    RealGrid out(root());
    for (const auto& a : multi_indices(root().dim, n)) {
      const RealGrid& g = (*this)[a];
      const double w = factorial(n) / multi_factorial(a);
      for (Index k = 0; k < root().cell_count(); ++k) out[k] += w * g[k] * g[k];
    }
    for (Index k = 0; k < root().cell_count(); ++k) out[k] = std::sqrt(out[k]);
    return out;
  }

 private:
  RealGrid f_;
  int max_order_;
  std::map<MultiIndex, RealGrid> parts_;
};

inline RealGrid gradient_magnitude(const RealGrid& f, int n) { return Jet(f, n).gradient_magnitude(n); }

// ---------------------------------------------------------------- Taylor

/// Smooth bump exp(-1/(1 - |2u|^2)) on the unit cube centered at the origin.
inline double unit_bump(std::span<const double> u) {
  double r2 = 0.0;
  for (double v : u) r2 += 4.0 * v * v;
  return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

/// Polynomial sum_b c_b (x - center)^b.
struct LocalPolynomial {
  int dim = 1;
  std::array<double, kMaxDim> center{};
  std::map<MultiIndex, double> coeff;

  double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [b, c] : coeff) {
      double m = c;
      for (int i = 0; i < dim; ++i) m *= std::pow(x[i] - center[i], b[i]);
      s += m;
    }
    return s;
  }

  /// Samples on the cells of `box` inside the root; zero elsewhere.
  RealGrid on(const RootBox& root, const CellBox& box) const {
    RealGrid g(root);
    const double h = root.spacing();
    std::array<double, kMaxDim> x{};
    g.for_each_cell(box, [&](const IndexVec& c, Index k) {
      for (int i = 0; i < dim; ++i) x[i] = (static_cast<double>(c[i]) + 0.5) * h;
      g[k] = (*this)(std::span<const double>(x.data(), dim));
    });
    return g;
  }
};

/// Discrete theta_Q: bump rescaled to Q, normalized to unit midpoint mass.
/// Returns (cell index, weight * h^d) pairs.
inline std::vector<std::pair<Index, double>> bump_weights(const RootBox& root, const DyadicCube& q) {
  std::vector<std::pair<Index, double>> out;
  RealGrid probe(root);
  const double h = root.spacing();
  std::array<double, kMaxDim> u{};
  double mass = 0.0;
  probe.for_each_cell(root.cells(q), [&](const IndexVec& c, Index k) {
    for (int i = 0; i < root.dim; ++i) u[i] = ((static_cast<double>(c[i]) + 0.5) * h - q.center(i)) / q.side();
    const double v = unit_bump(std::span<const double>(u.data(), root.dim));
    if (v > 0.0) {
      out.emplace_back(k, v);
      mass += v;
    }
  });
  for (auto& [k, v] : out) v /= mass;
  return out;
}

/// Taylor-type polynomial
///   P^k_Q f(x) = sum_{|a| <= k-1} (1/a!) int_Q theta_Q(y) d^a f(y) (x - y)^a dy,
/// expanded in powers of x - c(Q). k = 0 gives the zero polynomial.
inline LocalPolynomial taylor_polynomial(const Jet& jet, const DyadicCube& q, int k) {
  const RootBox& root = jet.root();
  LocalPolynomial P;
  P.dim = root.dim;
  for (int i = 0; i < root.dim; ++i) P.center[i] = q.center(i);
  if (k <= 0) return P;
  if (k - 1 > jet.max_order()) throw ParameterError("taylor_polynomial: jet order too small");
  const auto weights = bump_weights(root, q);
  const double h = root.spacing();
  RealGrid shape(root);
  IndexVec c{};
  // (x - y)^a = sum_{b <= a} C(a,b) (x - c)^b (c - y)^{a-b}
  for (const auto& a : multi_indices_upto(root.dim, k - 1)) {
    const RealGrid& da = jet[a];
    for (const auto& b : multi_indices_upto(root.dim, order(a))) {
      bool le = true;
      for (int i = 0; i < root.dim; ++i) le = le && b[i] <= a[i];
      if (!le) continue;
      double binom = 1.0;
      for (int i = 0; i < root.dim; ++i) binom *= detail::binomial(a[i], b[i]);
      double integral = 0.0;
      for (const auto& [cell, w] : weights) {
        shape.unflatten(cell, c);
        double mono = 1.0;
        for (int i = 0; i < root.dim; ++i)
          mono *= std::pow(q.center(i) - (static_cast<double>(c[i]) + 0.5) * h, a[i] - b[i]);
        integral += w * da[cell] * mono;
      }
      P.coeff[b] += binom * integral / multi_factorial(a);
    }
  }
  return P;
}

/// P^k_Q f sampled on wQ (inside the root), zero elsewhere.
inline RealGrid taylor_poly(const RealGrid& f, const DyadicCube& q, int k, int w) {
  if (k <= 0) return RealGrid(f.root());
  Jet jet(f, k - 1);
  return taylor_polynomial(jet, q, k).on(f.root(), f.root().dilated_cells(q, w));
}

// ---------------------------------------------------------------- anti-IBP

struct AntiIbpReport {
  double lhs = 0.0;          // phi_Q(f - P^k_Q f)
  double rhs = 0.0;          // l(Q)^k phi^{-k}_Q(grad^k f)
  double class_constant = 0.0;  // |Q| max |phi^{-k}_Q|
  std::vector<double> antiderivative;  // phi^{-k}_Q on its cells
  Index first_cell = 0;
  double relative_gap() const {
    const double s = std::max(std::abs(lhs), std::abs(rhs));
    return s == 0.0 ? 0.0 : std::abs(lhs - rhs) / s;
  }
};

/// Staggered k-th difference: D_+^k f at cell i (a discretization of f^(k) at
/// the point x_i + k h / 2).
inline std::vector<double> forward_difference(const RealGrid& f, int k) {
  const double h = f.root().spacing();
  std::vector<double> v(f.samples().begin(), f.samples().end());
  for (int t = 0; t < k; ++t) {
    std::vector<double> n(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double next = i + 1 < v.size() ? v[i + 1] : 0.0;
      n[i] = (next - v[i]) / h;
    }
    v = std::move(n);
  }
  return v;
}

/// Builds phi^{-k}_Q by k-fold summation by parts of the atom (d = 1) and
/// evaluates both sides of phi_Q(f - P^k_Q f) = l(Q)^k phi^{-k}_Q(grad^k f).
/// `derivative` supplies grad^k f on the cells; by default the staggered
/// forward difference, for which the identity is exact.
inline AntiIbpReport anti_ibp_check(const RealGrid& f, const Atom& atom, int k,
                                    const std::vector<double>* derivative_k = nullptr) {
  const RootBox& root = f.root();
  if (root.dim != 1) throw ParameterError("anti_ibp_check: exact path requires d = 1");
  if (k < 0) throw ParameterError("anti_ibp_check: k must be nonnegative");
  const Index n = root.cells_per_side();
  const double h = root.spacing();
  const auto& tmpl = atom.factor[0];
  const Index start = atom.start[0];
  if (start < 0 || start + static_cast<Index>(tmpl.size()) > n)
    throw GeometryError("anti_ibp_check: atom must not wrap around the root");
  std::vector<double> a(tmpl.size());
  double scale_ref = 0.0;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    a[i] = atom.amplitude * tmpl[i];
    scale_ref = std::max(scale_ref, std::abs(a[i]));
  }
  // repeated cumulative sums; each must vanish past the support
  for (int t = 0; t < k; ++t) {
    std::vector<double> s(a.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      acc += a[i] * h;
      s[i] = -acc;  // sign: int a f = - int A f'
    }
    if (std::abs(acc) > 1e-9 * scale_ref * h * static_cast<double>(a.size()))
      throw ConstructionError("anti_ibp_check: atom lacks the vanishing moments for this k");
    s.pop_back();  // last entry is (numerically) zero
    a = std::move(s);
    if (a.empty()) throw ConstructionError("anti_ibp_check: support exhausted");
  }
  const double lq = std::pow(atom.cube.side(), k);
  AntiIbpReport rep;
  rep.first_cell = start;
  rep.antiderivative.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) rep.antiderivative[i] = a[i] / lq;

  RealGrid g = f;
  if (k > 0) {
    Jet jet(f, k - 1);
    g -= taylor_polynomial(jet, atom.cube, k).on(root, root.all_cells());
  }
  rep.lhs = pair(atom, g);

  std::vector<double> dk = derivative_k ? *derivative_k : forward_difference(f, k);
  double rhs = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    rhs += rep.antiderivative[i] * dk[static_cast<std::size_t>(start) + i] * h;
    mx = std::max(mx, std::abs(rep.antiderivative[i]));
  }
  rep.rhs = lq * rhs;
  rep.class_constant = mx * atom.cube.volume();
  return rep;
}

/// Ratio |chi_R(P^k_P f - P^k_Q f)| / (l(Q) d(Q,R)^{k-1} <|grad^k f|>_{1,box}),
/// box the smallest odd dilate of Q containing wQ and wP.
inline double neighbor_ratio(const Jet& jet, const WaveletBasis& basis, const DyadicCube& P, const DyadicCube& Q,
                             const DyadicCube& R, int k) {
  const RootBox& root = jet.root();
  const LocalPolynomial pp = taylor_polynomial(jet, P, k), pq = taylor_polynomial(jet, Q, k);
  RealGrid diff = pp.on(root, root.all_cells()) - pq.on(root, root.all_cells());
  const double lhs = std::abs(pair(basis.scaling(R), diff));
  const int w = basis.dilation();
  int wd = w;
  const CellBox target = root.dilated_cells(P, w);
  while (!root.dilated_cells(Q, wd).contains(target)) wd += 2;
  const double avg = local_average(jet.gradient_magnitude(k), root.dilated_cells(Q, wd), 1.0);
  const double dist = long_distance(Q, R);
  const double rhs = Q.side() * std::pow(dist, k - 1) * avg;
  if (rhs <= 0.0) return lhs > 1e-12 ? kInf : 0.0;
  return lhs / rhs;
}

// ---------------------------------------------------------------- Sobolev

/// Wavelet Littlewood-Paley surrogate || (sum_Q (l(Q)^{-kappa} |phi_Q(f)| 1_Q)^2)^{1/2} ||_r.
template <Scalar T>
double wavelet_sobolev_norm(const GridFunction<T>& f, double kappa, double r, const WaveletBasis& basis) {
  const RootBox& root = f.root();
  std::vector<double> sq(static_cast<std::size_t>(root.cell_count()), 0.0);
  const auto coeffs = basis.analyze(f);
  RealGrid tmp(root);
  for (const auto& [q, c] : coeffs) {
    const double v = std::pow(q.side(), -kappa) * std::abs(c);
    if (v == 0.0) continue;
    tmp.for_each_cell(root.cells(q), [&](const IndexVec&, Index k) { sq[k] += v * v; });
  }
  for (std::size_t k = 0; k < sq.size(); ++k) tmp[static_cast<Index>(k)] = std::sqrt(sq[k]);
  return tmp.lp_norm(r);
}

/// W^{kappa,r} norm: finite differences for kappa >= 0, wavelet surrogate for kappa < 0.
inline double sobolev_norm(const RealGrid& f, int kappa, double r, const WaveletBasis& basis) {
  const int k = basis.family().smoothness;
  if (kappa < -k || kappa > k) throw ParameterError("sobolev_norm: kappa outside [-k, k]");
  if (kappa < 0) return wavelet_sobolev_norm(f, kappa, r, basis);
  double s = 0.0;
  for (const auto& a : multi_indices_upto(f.root().dim, kappa)) s += derivative(f, a).lp_norm(r);
  return s;
}

/// Homogeneous part ||grad^kappa f||_r (kappa >= 0).
inline double sobolev_seminorm(const RealGrid& f, int kappa, double r) {
  if (kappa < 0) throw ParameterError("sobolev_seminorm: kappa must be nonnegative");
  if (kappa == 0) return f.lp_norm(r);
  return gradient_magnitude(f, kappa).lp_norm(r);
}

}  // namespace dyadica
