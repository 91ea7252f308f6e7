#pragma once

// Intrinsic wavelet coefficients over a finite test dictionary, square
// functions and the sup-over-cubes Triebel-Lizorkin norms built from them.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dyadica/funcspace.hpp"
#include "dyadica/wavelet.hpp"

namespace dyadica {

/// Finite family of cancellative test atoms per cube.
///
/// Entry 0 is the canonical wavelet of the basis (kept with its own
/// normalization so that intrinsic coefficients dominate wavelet
/// coefficients). Entries 1..D-1 are (k+1)-fold differences of triangle
/// bumps, tensored with triangle bumps in the remaining coordinates and scaled
/// so that |Q| max|atom| = 1. Each has k+1 exact discrete vanishing moments in
/// the first coordinate and support inside wQ.
class TestDictionary {
 public:
  struct Shape {
    double width;   // hat half-width, in units of l(Q)
    double step;    // difference step, in units of l(Q)
    double offset;  // center shift, in units of l(Q)
  };

  TestDictionary(const WaveletBasis& basis, int size = 8) : basis_(&basis), size_(size) {
    if (size < 1) throw ParameterError("dictionary size must be >= 1");
    const RootBox& root = basis.root();
    const int k = basis.family().smoothness;
    const int w = basis.dilation();
    static const Shape table[] = {{0.5, 0.5, 0.0}, {1.0, 0.5, 0.0},  {0.25, 0.25, 0.0}, {0.5, 0.5, -0.5},
                                  {0.5, 0.5, 0.5}, {1.0, 1.0, 0.0}, {0.25, 0.5, 0.0}};
    for (int e = 1; e < size; ++e) {
      const Shape sh = table[(e - 1) % 7];
      std::vector<Entry> per_level;
      for (int s = 0; s <= root.levels(); ++s) per_level.push_back(make_entry(sh, s, k, w));
      entries_.push_back(std::move(per_level));
    }
  }

  int size() const { return size_; }
  const WaveletBasis& basis() const { return *basis_; }

  /// Atom e at cube Q; entry 0 does not exist at the finest scale.
  std::optional<Atom> atom(int e, const DyadicCube& q) const {
    const RootBox& root = basis_->root();
    if (!root.admissible(q)) throw GeometryError("dictionary: cube not admissible");
    if (e == 0) {
      if (q.scale == root.finest) return std::nullopt;
      return basis_->wavelet(q);
    }
    const int s = q.scale - root.finest;
    const Entry& en = entries_[e - 1][s];
    const Index S = Index{1} << s;
    Atom a;
    a.cube = q;
    a.kind = AtomKind::cancellative;
    a.factor[0] = en.cancel;
    a.start[0] = q.pos[0] * S + en.start_cancel;
    for (int i = 1; i < root.dim; ++i) {
      a.factor[i] = en.bump;
      a.start[i] = q.pos[i] * S + en.start_bump;
    }
    double mx = en.cancel_max;
    for (int i = 1; i < root.dim; ++i) mx *= en.bump_max;
    a.amplitude = 1.0 / (q.volume() * mx);
    return a;
  }

  std::vector<Atom> atoms(const DyadicCube& q) const {
    std::vector<Atom> out;
    for (int e = 0; e < size_; ++e)
      if (auto a = atom(e, q)) out.push_back(*a);
    return out;
  }

 private:
  struct Entry {
    std::vector<double> cancel;
    std::vector<double> bump;
    Index start_cancel = 0;  // relative to the first cell of Q
    Index start_bump = 0;
    double cancel_max = 1.0;
    double bump_max = 1.0;
  };

  static std::vector<double> hat(Index b) {
    std::vector<double> v(static_cast<std::size_t>(2 * b - 1));
    for (Index j = -(b - 1); j <= b - 1; ++j)
      v[static_cast<std::size_t>(j + b - 1)] = 1.0 - static_cast<double>(std::abs(j)) / static_cast<double>(b);
    return v;
  }

  static Entry make_entry(const Shape& sh, int s, int k, int w) {
    const Index S = Index{1} << s;
    const Index window = static_cast<Index>(w) * S;
    Index b = std::max<Index>(1, static_cast<Index>(std::llround(sh.width * static_cast<double>(S))));
    Index t = std::max<Index>(1, static_cast<Index>(std::llround(sh.step * static_cast<double>(S))));
    Index off = static_cast<Index>(std::llround(sh.offset * static_cast<double>(S)));
    const Index pad = static_cast<Index>((w - 1) / 2) * S;
    Entry en;
    while (true) {
      const Index len = 2 * b - 1 + (k + 1) * t;
      const Index diff = S - len;
      const Index start = (diff >= 0 ? diff / 2 : -((-diff + 1) / 2)) + off;
      if (start >= -pad && start + len <= S + pad && len <= window) {
        const auto h = hat(b);
        en.cancel.assign(static_cast<std::size_t>(len), 0.0);
        for (int i = 0; i <= k + 1; ++i) {
          const double c = (i % 2 ? -1.0 : 1.0) * detail::binomial(k + 1, i);
          for (std::size_t j = 0; j < h.size(); ++j) en.cancel[static_cast<std::size_t>(i * t) + j] += c * h[j];
        }
        en.start_cancel = start;
        break;
      }
      if (off != 0) off += off > 0 ? -1 : 1;
      else if (t > 1) --t;
      else if (b > 1) --b;
      else throw ConstructionError("dictionary atom does not fit in the dilated cube");
    }
    const Index bb = std::max<Index>(1, S / 2);
    en.bump = hat(bb);
    en.start_bump = (S - static_cast<Index>(en.bump.size())) / 2;
    en.cancel_max = 0.0;
    for (double v : en.cancel) en.cancel_max = std::max(en.cancel_max, std::abs(v));
    en.bump_max = 0.0;
    for (double v : en.bump) en.bump_max = std::max(en.bump_max, std::abs(v));
    return en;
  }

  const WaveletBasis* basis_;
  int size_;
  std::vector<std::vector<Entry>> entries_;  // [entry-1][level]
};

/// Psi_Q(f) = max over dictionary atoms at Q of |psi(f)|.
template <Scalar T>
double intrinsic_coeff(const GridFunction<T>& f, const DyadicCube& q, const TestDictionary& dict) {
  double m = 0.0;
  for (int e = 0; e < dict.size(); ++e)
    if (auto a = dict.atom(e, q)) m = std::max(m, std::abs(pair(*a, f)));
  return m;
}

struct NormSpec {
  double n = 0.0;  // smoothness
  double m = 0.0;  // scaling
  double p = 2.0;
  double q = 2.0;
};

/// Intrinsic coefficients of one function at every admissible cube, and the
/// norms derived from them.
class TLNormEvaluator {
 public:
  template <Scalar T>
  TLNormEvaluator(const GridFunction<T>& f, const TestDictionary& dict) : root_(f.root()) {
    for (int s = 0; s <= root_.levels(); ++s) {
      const auto cubes = root_.cubes_at(root_.finest + s);
      std::vector<double> v(cubes.size());
      for (std::size_t i = 0; i < cubes.size(); ++i) v[i] = intrinsic_coeff(f, cubes[i], dict);
      table_.push_back(std::move(v));
    }
  }

  /// From precomputed coefficients, table[s][i] at cube i (canonical order) of scale J+s.
  TLNormEvaluator(const RootBox& root, std::vector<std::vector<double>> table)
      : root_(root), table_(std::move(table)) {}

  const RootBox& root() const { return root_; }

  double coeff(const DyadicCube& q) const {
    const int s = q.scale - root_.finest;
    const Index m = root_.cubes_per_side(q.scale);
    Index k = 0;
    for (int i = root_.dim - 1; i >= 0; --i) k = k * m + q.pos[i];
    return table_[s][static_cast<std::size_t>(k)];
  }

  /// S^n_{q,R} f on the cells of R (zero elsewhere).
  RealGrid square_function(const DyadicCube& R, double n, double q) const {
    RealGrid out(root_);
    const bool sup = std::isinf(q);
    out.for_each_cell(root_.cells(R), [&](const IndexVec& c, Index k) {
      double acc = 0.0;
      for (int s = 0; s <= R.scale - root_.finest; ++s) {
        const double v = cell_coeff(c, s) / std::pow(std::ldexp(1.0, root_.finest + s), n);
        acc = sup ? std::max(acc, v) : acc + std::pow(v, q);
      }
      out[k] = sup ? acc : std::pow(acc, 1.0 / q);
    });
    return out;
  }

  /// sup over admissible R with scale in [min_scale, max_scale] of
  /// l(R)^{-m} <S^n_{q,R} f>_{p,R}.
  double norm(const NormSpec& spec, int min_scale, int max_scale) const {
    const RootBox& root = root_;
    const bool qsup = std::isinf(spec.q), psup = std::isinf(spec.p);
    const Index cells = root.cell_count();
    std::vector<double> acc(static_cast<std::size_t>(cells), 0.0);
    IndexVec c{};
    RealGrid shape(root);
    double best = 0.0;
    min_scale = std::max(min_scale, root.finest);
    max_scale = std::min(max_scale, root.top);
    for (int s = 0; s <= root.levels(); ++s) {
      const int scale = root.finest + s;
      const double len_n = std::pow(std::ldexp(1.0, scale), spec.n);
      std::vector<double> vals(static_cast<std::size_t>(cells));
      for (Index k = 0; k < cells; ++k) {
        shape.unflatten(k, c);
        const double v = cell_coeff(c, s) / len_n;
        double& a = acc[static_cast<std::size_t>(k)];
        a = qsup ? std::max(a, v) : a + std::pow(v, spec.q);
        const double sf = qsup ? a : std::pow(a, 1.0 / spec.q);
        vals[static_cast<std::size_t>(k)] = psup ? sf : std::pow(sf, spec.p);
      }
      if (scale < min_scale || scale > max_scale) continue;
      ScalePyramid pyr(root, std::move(vals), psup);
      const std::vector<double>& lvl = pyr.level(s);
      const double count = std::ldexp(1.0, s * root.dim);
      const double weight = std::pow(std::ldexp(1.0, scale), -spec.m);
      for (double v : lvl) {
        const double avg = psup ? v : std::pow(v / count, 1.0 / spec.p);
        best = std::max(best, weight * avg);
      }
    }
    return best;
  }

  double norm(const NormSpec& spec) const { return norm(spec, root_.finest, root_.top); }

  /// <S^n_{q,R} f>_{p,R}.
  double local_square_average(const DyadicCube& R, double n, double q, double p) const {
    return local_average(square_function(R, n, q), R, p);
  }

 private:
  double cell_coeff(const IndexVec& cell, int s) const {
    const Index m = root_.cells_per_side() >> s;
    Index k = 0;
    for (int i = root_.dim - 1; i >= 0; --i) k = k * m + (cell[i] >> s);
    return table_[s][static_cast<std::size_t>(k)];
  }

  RootBox root_;
  std::vector<std::vector<double>> table_;
};

template <Scalar T>
RealGrid square_function(const GridFunction<T>& f, const DyadicCube& R, double n, double q,
                         const TestDictionary& dict) {
  return TLNormEvaluator(f, dict).square_function(R, n, q);
}

template <Scalar T>
double tl_norm(const GridFunction<T>& f, const NormSpec& spec, const TestDictionary& dict) {
  const double k = dict.basis().family().smoothness;
  if (spec.n > k || spec.m > k) throw ParameterError("tl_norm: n and m must not exceed k");
  return TLNormEvaluator(f, dict).norm(spec);
}

template <Scalar T>
double bmo_norm(const GridFunction<T>& f, const TestDictionary& dict) {
  return tl_norm(f, NormSpec{0.0, 0.0, 2.0, 2.0}, dict);
}

}  // namespace dyadica
