#pragma once

// Multilinear singular integral forms given by a kernel or by a planted
// finite wavelet expansion: quadrature, weak boundedness, testing symbols and
// the testing norm.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyadica/funcspace.hpp"
#include "dyadica/paraproduct.hpp"
#include "dyadica/tlnorm.hpp"

namespace dyadica {

class QuadratureRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelKind { zero, planted_paraproduct, planted_wavelet_form, cz_odd, tabulated };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::zero: return "zero";
    case KernelKind::planted_paraproduct: return "planted_paraproduct";
    case KernelKind::planted_wavelet_form: return "planted_wavelet_form";
    case KernelKind::cz_odd: return "cz_odd";
    case KernelKind::tabulated: return "tabulated";
  }
  return "?";
}

/// An (n+1)-linear form Lambda(f_0, f_1..f_n).
///
/// cz_odd is K(x_0..x_n) = (sum_i (x_0 - x_i)_1) / (sum_i |x_0 - x_i|)^{nd+1},
/// zero where sum_i |x_0 - x_i| < eps_trunc; for n = d = 1 this is 1/(x - y).
/// tabulated (n = 1 only) holds K at every pair of grid cells, row x_0.
struct KernelSpec {
  std::string name = "zero";
  KernelKind kind = KernelKind::zero;
  int arity = 1;  // n
  double scale = 1.0;
  double eps_trunc = 0.0;
  int k = 1;
  double delta = 0.5;
  std::shared_ptr<const ParaproductSpec<double>> paraproduct;
  std::shared_ptr<const WaveletFormSpec> wavelet_form;
  std::vector<double> table;

  bool planted() const {
    return kind == KernelKind::zero || kind == KernelKind::planted_paraproduct ||
           kind == KernelKind::planted_wavelet_form;
  }

  double kernel(const std::vector<std::span<const double>>& x) const {
    const int n = arity;
    const int d = static_cast<int>(x[0].size());
    double num = 0.0, den = 0.0;
    for (int i = 1; i <= n; ++i) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) r2 += (x[0][c] - x[i][c]) * (x[0][c] - x[i][c]);
      den += std::sqrt(r2);
      num += x[0][0] - x[i][0];
    }
    if (den == 0.0 || den < eps_trunc) return 0.0;
    return scale * num / std::pow(den, n * d + 1);
  }
};

struct QuadratureResult {
  double value = 0.0;
  double excluded_mass = 0.0;  // int over excluded near-diagonal cells of prod |f_j|
  bool exact = false;          // planted path, no kernel quadrature
};

namespace detail {

inline std::vector<Index> support_cells(const RealGrid& f) {
  std::vector<Index> s;
  for (Index k = 0; k < static_cast<Index>(f.size()); ++k)
    if (f[k] != 0.0) s.push_back(k);
  return s;
}

}  // namespace detail

/// Lambda(f_0..f_n). Planted forms are summed exactly; kernels are integrated
/// with the tensor midpoint rule over the supports. An untruncated kernel is
/// refused when all supports share a cell.
inline QuadratureResult form_quadrature(const KernelSpec& K, const std::vector<RealGrid>& f) {
  if (static_cast<int>(f.size()) != K.arity + 1) throw ParameterError("form_quadrature: wrong number of functions");
  QuadratureResult res;
  switch (K.kind) {
    case KernelKind::zero:
      res.exact = true;
      return res;
    case KernelKind::planted_paraproduct: {
      if (!K.paraproduct) throw ParameterError("planted paraproduct kernel without a symbol");
      std::vector<RealGrid> rest(f.begin() + 1, f.end());
      res.value = K.scale * apply_paraproduct(*K.paraproduct, rest).pair(f[0]);
      res.exact = true;
      return res;
    }
    case KernelKind::planted_wavelet_form: {
      if (!K.wavelet_form) throw ParameterError("planted wavelet form kernel without a form");
      std::vector<RealGrid> rest(f.begin() + 1, f.end());
      res.value = K.scale * form_eval(*K.wavelet_form, f[0], rest);
      res.exact = true;
      return res;
    }
    default: break;
  }
  const RootBox& root = f[0].root();
  const double h = root.spacing();
  const double cell_vol = root.cell_volume();
  std::vector<std::vector<Index>> supp;
  for (const auto& g : f) {
    supp.push_back(detail::support_cells(g));
    if (supp.back().empty()) return res;
  }
  if (K.eps_trunc <= 0.0) {
    std::vector<char> common(static_cast<std::size_t>(root.cell_count()), 1);
    for (const auto& s : supp) {
      std::vector<char> mark(common.size(), 0);
      for (Index k : s) mark[static_cast<std::size_t>(k)] = 1;
      for (std::size_t i = 0; i < common.size(); ++i) common[i] = common[i] && mark[i];
    }
    for (char c : common)
      if (c) throw QuadratureRefusal("kernel '" + K.name + "': supports overlap and the kernel is untruncated");
  }
  if (K.kind == KernelKind::tabulated) {
    if (K.arity != 1) throw ParameterError("tabulated kernels are bilinear");
    const Index n = root.cell_count();
    if (static_cast<Index>(K.table.size()) != n * n) throw ParameterError("kernel table has wrong size");
    double s = 0.0;
    for (Index a : supp[0])
      for (Index b : supp[1]) s += K.table[static_cast<std::size_t>(a * n + b)] * f[0][a] * f[1][b];
    res.value = K.scale * s * cell_vol * cell_vol;
    return res;
  }
  // cz_odd: iterate over the tensor product of supports
  const int d = root.dim;
  const int m = K.arity + 1;
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d)));
  std::vector<std::span<const double>> xs;
  for (auto& c : coords) xs.emplace_back(c.data(), c.size());
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  IndexVec cell{};
  double sum = 0.0, excluded = 0.0;
  while (true) {
    double prod = 1.0;
    for (int j = 0; j < m; ++j) {
      const Index k = supp[j][idx[j]];
      f[0].unflatten(k, cell);
      for (int c = 0; c < d; ++c) coords[j][c] = (static_cast<double>(cell[c]) + 0.5) * h;
      prod *= f[j][k];
    }
    double den = 0.0;
    for (int i = 1; i < m; ++i) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) r2 += (coords[0][c] - coords[i][c]) * (coords[0][c] - coords[i][c]);
      den += std::sqrt(r2);
    }
    if (den < K.eps_trunc || den == 0.0)
      excluded += std::abs(prod);
    else
      sum += K.kernel(xs) * prod;
    int j = 0;
    for (; j < m; ++j) {
      if (++idx[j] < supp[j].size()) break;
      idx[j] = 0;
    }
    if (j == m) break;
  }
  const double w = std::pow(cell_vol, m);
  res.value = sum * w;
  res.excluded_mass = excluded * w;
  return res;
}

/// Lambda^{*,j}(f_0, f_1..f_n) = Lambda(f_j, f_1..f_{j-1}, f_0, f_{j+1}..f_n).
inline QuadratureResult adjoint_quadrature(const KernelSpec& K, int j, std::vector<RealGrid> f) {
  if (j < 1 || j > K.arity) throw ParameterError("adjoint slot out of range");
  std::swap(f[0], f[static_cast<std::size_t>(j)]);
  return form_quadrature(K, f);
}

/// Noncancellative test bumps at Q: the scaling atom and an L1-normalized hat.
inline std::vector<RealGrid> wbp_bumps(const WaveletBasis& basis, const DyadicCube& q) {
  const RootBox& root = basis.root();
  std::vector<RealGrid> out{atom_samples(root, basis.scaling(q))};
  RealGrid hat(root);
  const double h = root.spacing();
  double mass = 0.0;
  hat.for_each_cell(root.cells(q), [&](const IndexVec& c, Index k) {
    double v = 1.0;
    for (int i = 0; i < root.dim; ++i) {
      const double u = ((static_cast<double>(c[i]) + 0.5) * h - q.center(i)) / q.side();
      v *= std::max(0.0, 1.0 - 2.0 * std::abs(u));
    }
    hat[k] = v;
    mass += v;
  });
  if (mass > 0.0) hat *= 1.0 / (mass * root.cell_volume());
  out.push_back(hat);
  return out;
}

/// max over sampled cubes and bump tuples of |Q|^n |Lambda(chi^0..chi^n)|.
inline double wbp_check(const KernelSpec& K, const WaveletBasis& basis, const std::vector<DyadicCube>& cubes) {
  double best = 0.0;
  for (const auto& q : cubes) {
    const auto bumps = wbp_bumps(basis, q);
    const int m = K.arity + 1;
    std::vector<std::size_t> pick(static_cast<std::size_t>(m), 0);
    while (true) {
      std::vector<RealGrid> f;
      for (int j = 0; j < m; ++j) f.push_back(bumps[pick[j]]);
      const double v = std::pow(q.volume(), K.arity) * std::abs(form_quadrature(K, f).value);
      best = std::max(best, v);
      int j = 0;
      for (; j < m; ++j) {
        if (++pick[j] < bumps.size()) break;
        pick[j] = 0;
      }
      if (j == m) break;
    }
  }
  return best;
}

/// Smooth step: 1 for |t| <= 1/2, 0 for |t| >= 1.
inline double smooth_cutoff(double t) {
  t = std::abs(t);
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double s = 2.0 * (t - 0.5);  // (0,1)
  const double a = std::exp(-1.0 / (1.0 - s)), b = std::exp(-1.0 / s);
  return a / (a + b);
}

/// Tr_Q x^gamma = x^gamma * prod_i cutoff((x_i - c_i(Q)) / (A l(Q))).
inline RealGrid truncated_monomial(const RootBox& root, const DyadicCube& q, const MultiIndex& gamma, double A) {
  return RealGrid::sample(root, [&](std::span<const double> x) {
    double v = 1.0;
    for (int i = 0; i < root.dim; ++i) v *= std::pow(x[i], gamma[i]) * smooth_cutoff((x[i] - q.center(i)) / (A * q.side()));
    return v;
  });
}

struct TestingSymbols {
  int k = 1;
  int arity = 1;
  std::map<std::vector<MultiIndex>, CoefficientTree<double>> gamma;  // gamma = (gamma_1..gamma_n)
  std::vector<CoefficientTree<double>> adjoint;                     // j = 1..n
  std::vector<std::pair<int, DyadicCube>> unstable;                 // (j, Q) with non-stabilizing 1-cutoffs
  double cutoff_sensitivity = 0.0;  // max relative change of b^0 between A and 2A
};

/// All gamma tuples with total order <= k.
inline std::vector<std::vector<MultiIndex>> gamma_tuples(int d, int n, int k) {
  std::vector<std::vector<MultiIndex>> out;
  std::vector<MultiIndex> all = multi_indices_upto(d, k);
  std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
  while (true) {
    int tot = 0;
    std::vector<MultiIndex> g;
    for (int j = 0; j < n; ++j) {
      g.push_back(all[pick[j]]);
      tot += order(all[pick[j]]);
    }
    if (tot <= k) out.push_back(g);
    int j = 0;
    for (; j < n; ++j) {
      if (++pick[j] < all.size()) break;
      pick[j] = 0;
    }
    if (j == n) break;
  }
  return out;
}

inline int order(const std::vector<MultiIndex>& g) {
  int s = 0;
  for (const auto& a : g) s += order(a);
  return s;
}

/// b^gamma_Q = l(Q)^k Lambda(phi_Q, Tr_Q x^{gamma_1}, ..) and
/// b^{*,j}_Q = l(Q)^k Lambda^{*,j}(phi_Q, 1, .., 1) over the given cubes.
/// The constant functions use cutoffs of radius A, 2A, 4A times l(Q); a
/// coefficient whose last two values differ by more than stab_tol (relative to
/// max(|value|, floor)) is flagged.
inline TestingSymbols testing_symbols(const KernelSpec& K, const WaveletBasis& basis, int k,
                                      const std::vector<DyadicCube>& cubes, double A = 8.0,
                                      double stab_tol = 1e-3, double floor = 1e-12) {
  const RootBox& root = basis.root();
  TestingSymbols T;
  T.k = k;
  T.arity = K.arity;
  T.adjoint.resize(static_cast<std::size_t>(K.arity));
  const auto tuples = gamma_tuples(root.dim, K.arity, k);
  for (const auto& q : cubes) {
    const RealGrid phi = atom_samples(root, basis.wavelet(q));
    const double lk = std::pow(q.side(), k);
    std::map<MultiIndex, RealGrid> tr;
    for (const auto& g : tuples) {
      std::vector<RealGrid> f{phi};
      for (const auto& a : g) {
        auto it = tr.find(a);
        if (it == tr.end()) it = tr.emplace(a, truncated_monomial(root, q, a, A)).first;
        f.push_back(it->second);
      }
      const double v = lk * form_quadrature(K, f).value;
      T.gamma[g][q] = v;
      if (order(g) == 0) {
        std::vector<RealGrid> f2{phi};
        const RealGrid one2 = truncated_monomial(root, q, MultiIndex{}, 2.0 * A);
        for (int j = 0; j < K.arity; ++j) f2.push_back(one2);
        const double v2 = lk * form_quadrature(K, f2).value;
        const double s = std::max({std::abs(v), std::abs(v2), floor});
        T.cutoff_sensitivity = std::max(T.cutoff_sensitivity, std::abs(v2 - v) / s);
      }
    }
    std::vector<RealGrid> ones;
    for (double a : {A, 2.0 * A, 4.0 * A}) ones.push_back(truncated_monomial(root, q, MultiIndex{}, a));
    for (int j = 1; j <= K.arity; ++j) {
      double vals[3];
      for (int r = 0; r < 3; ++r) {
        std::vector<RealGrid> f{phi};
        for (int i = 0; i < K.arity; ++i) f.push_back(ones[r]);
        vals[r] = lk * adjoint_quadrature(K, j, f).value;
      }
      T.adjoint[static_cast<std::size_t>(j - 1)][q] = vals[2];
      const double s = std::max({std::abs(vals[1]), std::abs(vals[2]), floor});
      if (std::abs(vals[2] - vals[1]) > stab_tol * s) T.unstable.emplace_back(j, q);
    }
  }
  return T;
}

struct TestingNormParts {
  double low = 0.0;      // |gamma| < k - floor(d/p), F^{0,|gamma|-k}_{p,2}
  double mid = 0.0;      // k - floor(d/p) <= |gamma| <= k-1, F^{0,|gamma|-k}_{q,2}
  double top = 0.0;      // |gamma| = k, F^{0,0}_{1,2}
  double adjoint = 0.0;  // F^{-k,0}_{1,2}
  double total() const { return low + mid + top + adjoint; }
};

/// Norm of a symbol sequence through its function avatar sum |Q| b_Q phi_Q.
inline double symbol_norm(const CoefficientTree<double>& b, const NormSpec& spec, const TestDictionary& dict) {
  const RealGrid f = dict.basis().synthesize(b);
  return TLNormEvaluator(f, dict).norm(spec);
}

inline TestingNormParts testing_norm(const TestingSymbols& T, double p, double q, const TestDictionary& dict) {
  if (!(p >= 1.0 && q >= p)) throw ParameterError("testing_norm needs 1 <= p <= q");
  const int d = dict.basis().root().dim;
  const int k = T.k;
  const int split = k - (std::isinf(p) ? 0 : static_cast<int>(std::floor(d / p)));
  TestingNormParts parts;
  for (const auto& [g, tree] : T.gamma) {
    const int a = order(g);
    if (a < split)
      parts.low = std::max(parts.low, symbol_norm(tree, {0.0, double(a - k), p, 2.0}, dict));
    else if (a <= k - 1)
      parts.mid = std::max(parts.mid, symbol_norm(tree, {0.0, double(a - k), q, 2.0}, dict));
    if (a == k) parts.top = std::max(parts.top, symbol_norm(tree, {0.0, 0.0, 1.0, 2.0}, dict));
  }
  for (const auto& tree : T.adjoint)
    parts.adjoint = std::max(parts.adjoint, symbol_norm(tree, {double(-k), 0.0, 1.0, 2.0}, dict));
  return parts;
}

/// max over gamma of ||b^gamma||_{F^{|gamma|-k,0}_{inf,inf}}.
inline double finfty_constant(const TestingSymbols& T, const TestDictionary& dict) {
  double c = 0.0;
  for (const auto& [g, tree] : T.gamma)
    c = std::max(c, symbol_norm(tree, {double(order(g) - T.k), 0.0, kInf, kInf}, dict));
  return c;
}

/// The operator T(f) with <T(f_1..f_n), f_0> = Lambda(f_0, f_1..f_n), sampled on the grid.
inline RealGrid operator_output(const KernelSpec& K, const std::vector<RealGrid>& fs) {
  if (static_cast<int>(fs.size()) != K.arity) throw ParameterError("operator_output: wrong arity");
  const RootBox& root = fs[0].root();
  switch (K.kind) {
    case KernelKind::zero: return RealGrid(root);
    case KernelKind::planted_paraproduct: return K.scale * apply_paraproduct(*K.paraproduct, fs);
    default: break;
  }
  RealGrid out(root);
  RealGrid delta(root);
  for (Index c = 0; c < root.cell_count(); ++c) {
    delta[c] = 1.0 / root.cell_volume();
    std::vector<RealGrid> f{delta};
    f.insert(f.end(), fs.begin(), fs.end());
    try {
      out[c] = form_quadrature(K, f).value;
    } catch (const QuadratureRefusal&) {
      delta[c] = 0.0;
      throw;
    }
    delta[c] = 0.0;
  }
  return out;
}

struct BenchReport {
  std::vector<double> ratios;  // per tuple, skipped tuples omitted
  double max_ratio = 0.0;
  double testing_norm = 0.0;
  int skipped = 0;
};

/// Ratio ||T(f)||_{W^{k,p}} / ((1 + ||Lambda||) sum_{|beta|=k} prod ||f_j||_{W^{beta_j,p_j}})
/// over a list of input tuples, 1/p = sum 1/p_j.
inline BenchReport sobolev_bound_bench(const KernelSpec& K, const WaveletBasis& basis,
                                       const std::vector<std::vector<RealGrid>>& tuples,
                                       const std::vector<double>& pj, int k, double tnorm,
                                       double rhs_floor = 1e-12) {
  if (static_cast<int>(pj.size()) != K.arity) throw ParameterError("bench: one exponent per input");
  const double p = ExponentTuple(pj).r();
  std::vector<std::vector<int>> betas;
  {
    std::vector<int> cur(pj.size(), 0);
    while (true) {
      int s = 0;
      for (int v : cur) s += v;
      if (s == k) betas.push_back(cur);
      std::size_t j = 0;
      for (; j < cur.size(); ++j) {
        if (++cur[j] <= k) break;
        cur[j] = 0;
      }
      if (j == cur.size()) break;
    }
  }
  BenchReport rep;
  rep.testing_norm = tnorm;
  for (const auto& fs : tuples) {
    const double lhs = sobolev_norm(operator_output(K, fs), k, p, basis);
    double sum = 0.0;
    for (const auto& b : betas) {
      double prod = 1.0;
      for (std::size_t j = 0; j < fs.size(); ++j) prod *= sobolev_norm(fs[j], b[j], pj[j], basis);
      sum += prod;
    }
    const double rhs = (1.0 + tnorm) * sum;
    if (rhs < rhs_floor) {
      ++rep.skipped;
      continue;
    }
    rep.ratios.push_back(lhs / rhs);
    rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
  }
  return rep;
}

}  // namespace dyadica
