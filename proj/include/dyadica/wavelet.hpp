#pragma once

// Daubechies families and the discrete wavelet resolution of grid functions.
//
// Atoms are realized as the basis vectors of the periodic discrete wavelet
// transform on the root box, shifted so that the atom of a cube Q is
// supported in the cells of wQ, w = 2N - 1. With samples identified with the
// finest-scale scaling coefficients, the atoms are exactly orthonormal under
// the midpoint pairing, so definitional identities hold to rounding.
//
// Normalization is L1: phi_Q = |Q|^{-1} (mother wavelet rescaled to Q), so that
// sqrt(|Q|) phi_Q has unit L2 norm and chi_Q has unit integral.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/grid.hpp"
#include "dyadica/report.hpp"

namespace dyadica {

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Polynomial coefficients (ascending) of prod (z - r_i).
inline std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (auto r : roots) {
    std::vector<std::complex<double>> n(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      n[i + 1] += c[i];
      n[i] -= r * c[i];
    }
    c = std::move(n);
  }
  return c;
}

}  // namespace detail

/// Extremal-phase Daubechies lowpass filter with N vanishing moments, sum sqrt(2).
///
/// Spectral factorization: |m0|^2 = cos^{2N}(w/2) P(sin^2(w/2)) with
/// P(y) = sum_{k<N} C(N-1+k, k) y^k; each root y of P contributes the root of
/// z^2 - (2 - 4y) z + 1 inside the unit disc.
inline std::vector<double> daubechies_lowpass(int N) {
  if (N < 1 || N > 12) throw ConstructionError("Daubechies order must be in [1, 12]");
  std::vector<std::complex<double>> zroots;
  if (N > 1) {
    const int deg = N - 1;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    const double lead = detail::binomial(2 * N - 2, N - 1);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -detail::binomial(N - 1 + i, i) / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
    for (int i = 0; i < deg; ++i) {
      std::complex<double> y = es.eigenvalues()[i];
      std::complex<double> b = 1.0 - 2.0 * y;
      std::complex<double> disc = std::sqrt(b * b - 1.0);
      std::complex<double> z1 = b + disc, z2 = b - disc;
      zroots.push_back(std::abs(z1) < 1.0 ? z1 : z2);
    }
  }
  for (int i = 0; i < N; ++i) zroots.emplace_back(-1.0, 0.0);
  auto c = detail::poly_from_roots(zroots);
  std::vector<double> h(c.size());
  // reverse so that the leading tap is the largest (standard extremal-phase orientation)
  for (std::size_t i = 0; i < c.size(); ++i) h[i] = c[c.size() - 1 - i].real();
  double s = 0.0;
  for (double v : h) s += v;
  for (double& v : h) v *= std::numbers::sqrt2 / s;
  return h;
}

/// Highpass g_n = (-1)^n h_{2N-1-n}.
inline std::vector<double> quadrature_mirror(const std::vector<double>& h) {
  const std::size_t L = h.size();
  std::vector<double> g(L);
  for (std::size_t n = 0; n < L; ++n) g[n] = (n % 2 ? -1.0 : 1.0) * h[L - 1 - n];
  return g;
}

/// max_m |sum_n h_n h_{n+2m} - delta_{m0}| and |sum h - sqrt 2|.
inline double orthonormality_residual(const std::vector<double>& h) {
  double r = 0.0;
  const int L = static_cast<int>(h.size());
  for (int m = 0; 2 * m < L; ++m) {
    double s = 0.0;
    for (int n = 0; n + 2 * m < L; ++n) s += h[n] * h[n + 2 * m];
    r = std::max(r, std::abs(s - (m == 0 ? 1.0 : 0.0)));
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  return std::max(r, std::abs(sum - std::numbers::sqrt2));
}

struct WaveletFamily {
  int order = 3;        // N, vanishing moments of the mother wavelet
  int smoothness = 2;   // k; callers need k + 1 <= N
  int dilation = 5;     // w, odd, w Q contains the support of phi_Q
  int refine = 12;      // r, point values on 2^{-r} Z
  std::vector<double> lowpass;
  std::vector<double> highpass;
  std::vector<double> scaling_values;  // phi(i 2^{-r}), i = 0..(2N-1) 2^r
  std::vector<double> wavelet_values;  // psi(i 2^{-r})
  int cascade_iterations = 0;
  double cascade_residual = 0.0;

  double support_width() const { return 2.0 * order - 1.0; }
  double grid_step() const { return std::ldexp(1.0, -refine); }
};

/// Builds the order-N family and runs the cascade iteration to its fixed point.
inline WaveletFamily build_family(int N, int refine = 12, int k = -1, int w = 0) {
  if (N < 1) throw ConstructionError("order must be >= 1");
  if (refine < 6 || refine > 20) throw ConstructionError("refine must be in [6, 20]");
  WaveletFamily fam;
  fam.order = N;
  fam.smoothness = k < 0 ? N - 1 : k;
  if (fam.smoothness + 1 > N)
    throw ConstructionError("smoothness budget k needs k + 1 <= N vanishing moments");
  fam.dilation = w > 0 ? w : 2 * N - 1;
  if (fam.dilation % 2 == 0 || fam.dilation < 2 * N - 1)
    throw ConstructionError("dilation must be odd and >= 2N - 1");
  fam.refine = refine;
  fam.lowpass = daubechies_lowpass(N);
  fam.highpass = quadrature_mirror(fam.lowpass);
  if (orthonormality_residual(fam.lowpass) > 1e-12)
    throw ConstructionError("filter failed orthonormality check");

  // cascade on the grid 2^{-R}, R = refine + 1, starting from the box function
  const int R = refine + 1;
  const Index scaleR = Index{1} << R;
  const Index M = (2 * N - 1) * scaleR + 1;
  std::vector<double> phi(M, 0.0), next(M, 0.0);
  for (Index i = 0; i < scaleR && i < M; ++i) phi[i] = 1.0;
  if (N == 1) phi.back() = 0.0;
  const auto& h = fam.lowpass;
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (Index i = 0; i < M; ++i) {
      double s = 0.0;
      for (std::size_t n = 0; n < h.size(); ++n) {
        const Index j = 2 * i - static_cast<Index>(n) * scaleR;
        if (j >= 0 && j < M) s += h[n] * in[j];
      }
      out[i] = std::numbers::sqrt2 * s;
    }
  };
  const int cap = 4000;
  int it = 0;
  double change = 1.0;
  for (; it < cap && change > 1e-14; ++it) {
    apply(phi, next);
    change = 0.0;
    for (Index i = 0; i < M; ++i) change = std::max(change, std::abs(next[i] - phi[i]));
    std::swap(phi, next);
  }
  apply(phi, next);
  double residual = 0.0;
  for (Index i = 0; i < M; ++i) residual = std::max(residual, std::abs(next[i] - phi[i]));
  fam.cascade_iterations = it;
  fam.cascade_residual = residual;
  // Haar: the box function is its own fixed point but the refinement equation is
  // discontinuous at integers, so the residual is not meaningful there.
  if (N > 1 && residual > 1e-10)
    throw ConstructionError("cascade iteration did not converge");

  const Index Mr = (2 * N - 1) * (Index{1} << refine) + 1;
  fam.scaling_values.resize(Mr);
  fam.wavelet_values.resize(Mr);
  const auto& g = fam.highpass;
  for (Index i = 0; i < Mr; ++i) {
    fam.scaling_values[i] = phi[2 * i];
    double s = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      // psi(x) = sqrt2 sum g_n phi(2x - n), x = i 2^{-refine}; 2x - n on the 2^{-R} grid
      const Index j = 4 * i - static_cast<Index>(n) * scaleR;
      if (j >= 0 && j < M) s += g[n] * phi[j];
    }
    fam.wavelet_values[i] = std::numbers::sqrt2 * s;
  }
  return fam;
}

/// Riemann-sum moments int x^a psi(x) dx from the tabulated point values.
inline std::vector<double> wavelet_moments(const WaveletFamily& fam, int count) {
  std::vector<double> m(count, 0.0);
  const double dx = fam.grid_step();
  for (std::size_t i = 0; i < fam.wavelet_values.size(); ++i) {
    const double x = static_cast<double>(i) * dx;
    double p = 1.0;
    for (int a = 0; a < count; ++a) {
      m[a] += p * fam.wavelet_values[i] * dx;
      p *= x;
    }
  }
  return m;
}

template <Scalar T = double>
using CoefficientTree = std::map<DyadicCube, T>;

enum class AtomKind { cancellative, noncancellative };

/// Separable atom on the periodic grid: amplitude * prod_i factor_i[cell_i - start_i].
struct Atom {
  DyadicCube cube;
  AtomKind kind = AtomKind::cancellative;
  std::array<std::span<const double>, kMaxDim> factor{};
  IndexVec start{};
  double amplitude = 1.0;
};

namespace detail {

inline Index wrap(Index i, Index n) {
  Index r = i % n;
  return r < 0 ? r + n : r;
}

template <typename Fn>
void visit_atom(const Atom& a, Index n, int dim, Fn&& fn) {
  // fn(flat_index, weight)
  if (dim == 1) {
    const auto& f0 = a.factor[0];
    for (std::size_t t = 0; t < f0.size(); ++t)
      fn(wrap(a.start[0] + static_cast<Index>(t), n), a.amplitude * f0[t]);
    return;
  }
  std::array<std::size_t, kMaxDim> t{};
  while (true) {
    double v = a.amplitude;
    Index k = 0;
    for (int i = dim - 1; i >= 0; --i) {
      v *= a.factor[i][t[i]];
      k = k * n + wrap(a.start[i] + static_cast<Index>(t[i]), n);
    }
    fn(k, v);
    int i = 0;
    for (; i < dim; ++i) {
      if (++t[i] < a.factor[i].size()) break;
      t[i] = 0;
    }
    if (i == dim) break;
  }
}

}  // namespace detail

/// Pairing int atom * f with the midpoint rule.
template <Scalar T>
T pair(const Atom& a, const GridFunction<T>& f) {
  const auto& root = f.root();
  T s{};
  detail::visit_atom(a, root.cells_per_side(), root.dim, [&](Index k, double v) { s += v * f[k]; });
  return s * root.cell_volume();
}

template <Scalar T>
void accumulate(GridFunction<T>& out, const Atom& a, T coef) {
  detail::visit_atom(a, out.root().cells_per_side(), out.root().dim,
                     [&](Index k, double v) { out[k] += coef * v; });
}

template <Scalar T = double>
GridFunction<T> atom_samples(const RootBox& root, const Atom& a) {
  GridFunction<T> g(root);
  accumulate(g, a, T{1});
  return g;
}

/// L1-normalized sup, |Q| max |atom|.
inline double class_constant(const Atom& a, int dim) {
  double m = 1.0;
  for (int i = 0; i < dim; ++i) {
    double fm = 0.0;
    for (double v : a.factor[i]) fm = std::max(fm, std::abs(v));
    m *= fm;
  }
  return std::abs(a.amplitude) * m * a.cube.volume();
}

/// Wavelet resolution of a fixed root box by a fixed family.
class WaveletBasis {
 public:
  WaveletBasis(WaveletFamily fam, RootBox root) : fam_(std::move(fam)), root_(root) {
    const int levels = root_.levels();
    scaling_.resize(levels + 1);
    wavelet_.resize(levels + 1);
    scaling_[0] = {1.0};
    for (int s = 1; s <= levels; ++s) {
      scaling_[s] = upsample_filter(scaling_[s - 1], fam_.lowpass);
      wavelet_[s] = s == 1 ? fam_.highpass : upsample_filter(wavelet_[s - 1], fam_.lowpass);
    }
  }

  const WaveletFamily& family() const { return fam_; }
  const RootBox& root() const { return root_; }
  int dilation() const { return fam_.dilation; }

  /// Scales carrying wavelet coefficients: J+1..L.
  int coarsest_scale() const { return root_.top; }
  int finest_wavelet_scale() const { return root_.finest + 1; }

  std::span<const double> scaling_template(int level) const { return scaling_[level]; }
  std::span<const double> wavelet_template(int level) const { return wavelet_[level]; }

  /// Cell index of template[0] for a cube at the given level along one axis.
  Index template_start(Index pos, int level) const {
    const Index N = fam_.order;
    return (pos - (N - 1)) * (Index{1} << level) + (N - 1);
  }

  /// Cancellative atom phi_Q: wavelet factor in the first coordinate, scaling
  /// factors in the others.
  Atom wavelet(const DyadicCube& q) const {
    const int level = check(q);
    if (level == 0) throw GeometryError("no wavelet atom at the finest scale");
    Atom a = make(q, level, AtomKind::cancellative);
    a.factor[0] = wavelet_[level];
    return a;
  }

  /// Noncancellative atom chi_Q (unit integral).
  Atom scaling(const DyadicCube& q) const {
    const int level = check(q);
    return make(q, level, AtomKind::noncancellative);
  }

  bool interior(const DyadicCube& q) const { return root_.interior(q, fam_.dilation); }

  /// Q -> phi_Q(f) for every cube of scale J+1..L.
  template <Scalar T>
  CoefficientTree<T> analyze(const GridFunction<T>& f) const {
    CoefficientTree<T> t;
    for (int s = root_.top; s > root_.finest; --s)
      for (const auto& q : root_.cubes_at(s)) t.emplace(q, pair(wavelet(q), f));
    return t;
  }

  /// sum_Q |Q| t(Q) phi_Q.
  template <Scalar T>
  GridFunction<T> synthesize(const CoefficientTree<T>& t) const {
    GridFunction<T> out(root_);
    for (const auto& [q, c] : t) {
      if (c == T{}) continue;
      accumulate(out, wavelet(q), static_cast<T>(q.volume() * c));
    }
    return out;
  }

  /// sum over cubes of one scale of |Q| chi_Q(f) chi_Q.
  template <Scalar T>
  GridFunction<T> scaling_projection(const GridFunction<T>& f, int scale) const {
    GridFunction<T> out(root_);
    for (const auto& q : root_.cubes_at(scale)) {
      Atom a = scaling(q);
      accumulate(out, a, static_cast<T>(q.volume() * pair(a, f)));
    }
    return out;
  }

  /// L2 norm of
  ///   sum_{l(Q) > 2^ell} |Q| phi_Q(f) phi_Q + (coarse remainder at scale L)
  ///     - sum_{l(Q) = 2^ell} |Q| chi_Q(f) chi_Q.
  /// The coarse remainder stands in for the wavelets above the root scale.
  template <Scalar T>
  double high_low_check(const GridFunction<T>& f, int ell) const {
    if (ell <= root_.finest || ell > root_.top) throw GeometryError("high_low_check: scale out of range");
    GridFunction<T> high = scaling_projection(f, root_.top);
    for (int s = root_.top; s > ell; --s)
      for (const auto& q : root_.cubes_at(s)) {
        Atom a = wavelet(q);
        accumulate(high, a, static_cast<T>(q.volume() * pair(a, f)));
      }
    high -= scaling_projection(f, ell);
    return high.lp_norm(2.0);
  }

 private:
  static std::vector<double> upsample_filter(const std::vector<double>& c, const std::vector<double>& h) {
    std::vector<double> out(2 * (c.size() - 1) + h.size(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t n = 0; n < h.size(); ++n) out[2 * i + n] += c[i] * h[n];
    return out;
  }

  int check(const DyadicCube& q) const {
    if (!root_.admissible(q)) throw GeometryError("cube not admissible in root box: " + q.token());
    return q.scale - root_.finest;
  }

  Atom make(const DyadicCube& q, int level, AtomKind kind) const {
    Atom a;
    a.cube = q;
    a.kind = kind;
    for (int i = 0; i < root_.dim; ++i) {
      a.factor[i] = scaling_[level];
      a.start[i] = template_start(q.pos[i], level);
    }
    a.amplitude = 1.0 / std::sqrt(root_.cell_volume() * q.volume());
    return a;
  }

  WaveletFamily fam_;
  RootBox root_;
  std::vector<std::vector<double>> scaling_;
  std::vector<std::vector<double>> wavelet_;
};

/// CSV rows "cube,real,imag".
template <Scalar T>
void write_tree_csv(const CoefficientTree<T>& t, std::ostream& os) {
  os << "cube,real,imag\n" << std::setprecision(17);
  for (const auto& [q, c] : t) {
    if constexpr (is_complex<T>::value)
      os << csv_escape(q.token()) << ',' << c.real() << ',' << c.imag() << '\n';
    else
      os << csv_escape(q.token()) << ',' << c << ",0\n";
  }
}

inline CoefficientTree<std::complex<double>> read_tree_csv(std::istream& is) {
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CoefficientTree<std::complex<double>> t;
  const auto rows = parse_csv(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i == 0 && !r.empty() && r[0] == "cube") continue;
    if (r.size() < 2 || r.size() > 3) throw std::runtime_error("coefficient csv: expected cube,real[,imag]");
    t[DyadicCube::parse(r[0])] = {std::stod(r[1]), r.size() == 3 && !r[2].empty() ? std::stod(r[2]) : 0.0};
  }
  return t;
}

/// Real part of a stored tree; nonzero imaginary parts are an error.
inline CoefficientTree<double> real_tree(const CoefficientTree<std::complex<double>>& t) {
  CoefficientTree<double> r;
  for (const auto& [q, c] : t) {
    if (c.imag() != 0.0) throw std::runtime_error("coefficient tree has complex entries");
    r.emplace(q, c.real());
  }
  return r;
}

template <Scalar T>
CoefficientTree<T> scaled(const CoefficientTree<T>& t, T s) {
  CoefficientTree<T> r;
  for (const auto& [q, c] : t) r.emplace(q, s * c);
  return r;
}

template <Scalar T>
CoefficientTree<T> sum(const CoefficientTree<T>& a, const CoefficientTree<T>& b) {
  CoefficientTree<T> r = a;
  for (const auto& [q, c] : b) r[q] += c;
  return r;
}

}  // namespace dyadica
