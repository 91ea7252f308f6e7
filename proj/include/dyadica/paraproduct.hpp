#pragma once

// m-linear paraproducts with wavelet symbols, their adjoints, and the
// associated wavelet forms.

#include <complex>
#include <optional>
#include <vector>

#include "dyadica/funcspace.hpp"
#include "dyadica/parallel.hpp"
#include "dyadica/tlnorm.hpp"
#include "dyadica/wavelet.hpp"

namespace dyadica {

/// Pi_b(f_1..f_m) = sum_Q |Q| b_Q prod_j chi_Q(f_j) beta_Q.
///
/// beta_Q is the canonical wavelet unless a dictionary entry is chosen;
/// chi_Q is the unit-integral scaling atom, so zeta_Q is the pure tensor of
/// identical averages.
template <Scalar T = double>
struct ParaproductSpec {
  const WaveletBasis* basis = nullptr;
  CoefficientTree<T> symbol;
  int arity = 1;
  const TestDictionary* dictionary = nullptr;
  int beta_entry = 0;

  Atom beta(const DyadicCube& q) const {
    if (dictionary && beta_entry != 0) {
      auto a = dictionary->atom(beta_entry, q);
      if (!a) throw GeometryError("paraproduct: no beta atom at " + q.token());
      return *a;
    }
    return basis->wavelet(q);
  }
  Atom chi(const DyadicCube& q) const { return basis->scaling(q); }
};

namespace detail {

template <Scalar T>
void check_arity(std::size_t expected, std::size_t got) {
  if (expected != got) throw ParameterError("arity mismatch: expected " + std::to_string(expected) +
                                            " functions, got " + std::to_string(got));
}

template <Scalar T>
T zeta(const Atom& chi, const std::vector<GridFunction<T>>& fs, std::optional<std::size_t> skip = {}) {
  T z{1.0};
  for (std::size_t j = 0; j < fs.size(); ++j)
    if (!skip || *skip != j) z *= pair(chi, fs[j]);
  return z;
}

}  // namespace detail

template <Scalar T>
GridFunction<T> apply_paraproduct(const ParaproductSpec<T>& spec, const std::vector<GridFunction<T>>& fs, int threads = 1) {
  detail::check_arity<T>(static_cast<std::size_t>(spec.arity), fs.size());
  const RootBox& root = spec.basis->root();
  std::vector<std::pair<DyadicCube, T>> terms(spec.symbol.begin(), spec.symbol.end());
  const std::size_t chunks = chunk_count(terms.size(), threads);
  std::vector<GridFunction<T>> partial(chunks, GridFunction<T>(root));
  parallel_chunks(terms.size(), threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& [q, bq] = terms[i];
      if (bq == T{}) continue;
      const T coef = static_cast<T>(q.volume()) * bq * detail::zeta(spec.chi(q), fs);
      accumulate(partial[c], spec.beta(q), coef);
    }
  });
  GridFunction<T> out = std::move(partial[0]);
  for (std::size_t c = 1; c < chunks; ++c) out += partial[c];
  return out;
}

/// j-th adjoint (1-based): <Pi^{*,j}(f), g> = <Pi(f_1..g..f_m), f_j>, i.e.
///   sum_Q |Q| b_Q beta_Q(f_j) prod_{i != j} chi_Q(f_i) chi_Q.
template <Scalar T>
GridFunction<T> adjoint_apply(const ParaproductSpec<T>& spec, int j, const std::vector<GridFunction<T>>& fs) {
  detail::check_arity<T>(static_cast<std::size_t>(spec.arity), fs.size());
  if (j < 1 || j > spec.arity) throw ParameterError("adjoint slot out of range");
  const std::size_t slot = static_cast<std::size_t>(j - 1);
  GridFunction<T> out(spec.basis->root());
  for (const auto& [q, bq] : spec.symbol) {
    if (bq == T{}) continue;
    const Atom chi = spec.chi(q);
    const T coef = static_cast<T>(q.volume()) * bq * pair(spec.beta(q), fs[slot]) * detail::zeta(chi, fs, slot);
    accumulate(out, chi, coef);
  }
  return out;
}

/// V_Q(b, g, f) = sum_{R in D(Q), R in supp b} |R| b_R beta_R(g) prod_j chi_R(f_j).
template <Scalar T>
T localized_form(const ParaproductSpec<T>& spec, const DyadicCube& Q, const GridFunction<T>& g,
                 const std::vector<GridFunction<T>>& fs) {
  detail::check_arity<T>(static_cast<std::size_t>(spec.arity), fs.size());
  T s{};
  for (const auto& [r, br] : spec.symbol) {
    if (!r.inside(Q) || br == T{}) continue;
    s += static_cast<T>(r.volume()) * br * pair(spec.beta(r), g) * detail::zeta(spec.chi(r), fs);
  }
  return s;
}

/// Lambda(f, f_1..f_m) = sum_Q |Q| c_Q phi_Q(f) psi_Q(f_1..f_m) with
/// psi_Q = lead_Q (x) chi_Q (x) ... (x) chi_Q, lead_Q cancellative.
/// Cubes without an entry in `weights` do not contribute; when `localization`
/// is set, only cubes inside it do.
struct WaveletFormSpec {
  const WaveletBasis* basis = nullptr;
  const TestDictionary* dictionary = nullptr;
  int phi_entry = 0;
  int lead_entry = 0;
  int arity = 1;  // m
  std::map<DyadicCube, double> weights;
  std::optional<DyadicCube> localization;

  Atom pick(int entry, const DyadicCube& q) const {
    if (entry == 0 || !dictionary) return basis->wavelet(q);
    auto a = dictionary->atom(entry, q);
    if (!a) throw GeometryError("wavelet form: no atom at " + q.token());
    return *a;
  }
  Atom phi(const DyadicCube& q) const { return pick(phi_entry, q); }
  Atom lead(const DyadicCube& q) const { return pick(lead_entry, q); }

  /// Unit weights on every cube of scale J+1..L.
  static std::map<DyadicCube, double> all_cubes(const RootBox& root) {
    std::map<DyadicCube, double> w;
    for (int s = root.top; s > root.finest; --s)
      for (const auto& q : root.cubes_at(s)) w.emplace(q, 1.0);
    return w;
  }
};

template <Scalar T>
T form_eval(const WaveletFormSpec& spec, const GridFunction<T>& f, const std::vector<GridFunction<T>>& fs) {
  detail::check_arity<T>(static_cast<std::size_t>(spec.arity), fs.size());
  T s{};
  for (const auto& [q, c] : spec.weights) {
    if (c == 0.0) continue;
    if (spec.localization && !q.inside(*spec.localization)) continue;
    const T phi = pair(spec.phi(q), f);
    if (phi == T{}) continue;
    T psi = pair(spec.lead(q), fs[0]);
    const Atom chi = spec.basis->scaling(q);
    for (std::size_t j = 1; j < fs.size(); ++j) psi *= pair(chi, fs[j]);
    s += static_cast<T>(q.volume() * c) * phi * psi;
  }
  return s;
}

/// Form V of arity m+2 matched to a paraproduct: phi_Q canonical wavelet,
/// psi_Q = beta_Q (x) zeta_Q, summed over every cube carrying wavelets.
template <Scalar T>
WaveletFormSpec matched_form(const ParaproductSpec<T>& spec) {
  WaveletFormSpec v;
  v.basis = spec.basis;
  v.dictionary = spec.dictionary;
  v.phi_entry = 0;
  v.lead_entry = spec.beta_entry;
  v.arity = spec.arity + 1;
  v.weights = WaveletFormSpec::all_cubes(spec.basis->root());
  return v;
}

/// Lambda_{Q0}(f, f_1..f_m) = sum_{Q in D(Q0)} |Q| Psi_Q(f) Psi_Q(f_1) prod_{j>=2} <f_j>_{1,wQ}.
template <Scalar T>
double intrinsic_form(const DyadicCube& Q0, const GridFunction<T>& f, const std::vector<GridFunction<T>>& fs,
                      const TestDictionary& dict) {
  if (fs.empty()) throw ParameterError("intrinsic_form: needs at least one function after f");
  const RootBox& root = f.root();
  const int w = dict.basis().dilation();
  double s = 0.0;
  for (const auto& q : root.subcubes(Q0)) {
    const double a = intrinsic_coeff(f, q, dict);
    if (a == 0.0) continue;
    double t = q.volume() * a * intrinsic_coeff(fs[0], q, dict);
    for (std::size_t j = 1; j < fs.size() && t != 0.0; ++j) t *= local_average(fs[j], root.dilated_cells(q, w), 1.0);
    s += t;
  }
  return s;
}

}  // namespace dyadica
