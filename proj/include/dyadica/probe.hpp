#pragma once

// Refinement sweeps of the paraproduct bounds: ratio of the output Sobolev
// norm to the symbol norm times the input norms, over a random ensemble.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "dyadica/ensemble.hpp"
#include "dyadica/paraproduct.hpp"
#include "dyadica/tlnorm.hpp"

namespace dyadica {

enum class ProbeMode { bound, adjoint_pos, adjoint_neg, lebesgue };

inline const char* probe_mode_name(ProbeMode m) {
  switch (m) {
    case ProbeMode::bound: return "bound";
    case ProbeMode::adjoint_pos: return "adjoint_pos";
    case ProbeMode::adjoint_neg: return "adjoint_neg";
    case ProbeMode::lebesgue: return "lebesgue";
  }
  return "?";
}

/// Integrability index pi with num/pi = sum_j w_j / p_j. num == 0 is resolved
/// by `degenerate`; a vanishing right side gives infinity. Clamped to >= 1.
inline double integrability_index(double num, const std::vector<double>& w, const std::vector<double>& p,
                                  double offset, double degenerate) {
  if (num == 0.0) return degenerate;
  double s = offset;
  for (std::size_t j = 0; j < p.size(); ++j) s += w[j] * inverse(p[j]);
  if (s <= 0.0) return kInf;
  return std::max(1.0, num / s);
}

/// pi for the direct bound; n = 0 uses 1/pi = (1/m) sum 1/p_j.
inline double pi_bound(const std::vector<int>& n, const std::vector<double>& p) {
  int tot = 0;
  for (int v : n) tot += v;
  double mean = 0.0;
  for (double v : p) mean += inverse(v);
  mean /= static_cast<double>(p.size());
  const double fallback = mean == 0.0 ? kInf : std::max(1.0, 1.0 / mean);
  std::vector<double> w(n.begin(), n.end());
  return integrability_index(tot, w, p, 0.0, fallback);
}

/// pi^j_+ : (n - n_j)/pi = sum_{i != j} n_i/p_i; the degenerate case is 1.
inline double pi_adjoint_pos(const std::vector<int>& n, const std::vector<double>& p, std::size_t j) {
  int tot = 0;
  for (int v : n) tot += v;
  std::vector<double> w(n.begin(), n.end());
  w[j] = 0.0;
  return integrability_index(tot - n[j], w, p, 0.0, 1.0);
}

/// pi^j_- : (n - n_j + kappa)/pi = kappa + sum_{i != j} (n_i - kappa)/p_i.
inline double pi_adjoint_neg(const std::vector<int>& n, const std::vector<double>& p, std::size_t j, int kappa) {
  int tot = 0;
  for (int v : n) tot += v;
  std::vector<double> w;
  for (std::size_t i = 0; i < n.size(); ++i) w.push_back(i == j ? 0.0 : static_cast<double>(n[i] - kappa));
  return integrability_index(tot - n[j] + kappa, w, p, kappa, 1.0);
}

inline double plus_eps(double p, double eps) { return std::isinf(p) ? p : p + eps; }

struct ProbeSettings {
  int dim = 1;
  int top = 2;
  std::vector<int> finest{-6, -7, -8};
  int order = 3;  // wavelet N
  int smoothness = 2;
  int dilation = 5;
  int refine = 12;
  int dictionary = 8;
  int arity = 2;
  std::vector<int> kappas{-1, 0, 1};
  std::vector<std::vector<int>> splits;  // empty: every split with sum <= k
  std::vector<std::vector<double>> exponents{{4.0, 4.0}, {2.0, kInf}};
  double eps = 0.1;
  int members = 100;
  int symbol_terms = 6;
  int symbol_offset = 4;  // symbol cubes have scale >= coarsest finest scale + offset
  std::uint64_t seed = 1;
  double rhs_floor = 1e-12;
  bool adjoints = true;
  bool lebesgue = true;
  int threads = 1;
};

/// All n-tuples of nonnegative integers with sum <= k.
inline std::vector<std::vector<int>> all_splits(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(m), 0);
  while (true) {
    int s = 0;
    for (int v : cur) s += v;
    if (s <= k) out.push_back(cur);
    int j = 0;
    for (; j < m; ++j) {
      if (++cur[static_cast<std::size_t>(j)] <= k) break;
      cur[static_cast<std::size_t>(j)] = 0;
    }
    if (j == m) break;
  }
  return out;
}

struct ProbeRow {
  int member = 0;
  int finest = 0;
  ProbeMode mode = ProbeMode::bound;
  int slot = 0;  // adjoint index j (1-based), 0 otherwise
  int kappa = 0;
  std::vector<int> n;
  std::vector<double> p;
  double pi = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool skipped = false;  // rhs below the floor
};

struct ProbeSummary {
  std::string key;
  std::map<int, double> max_ratio;  // by finest scale
  double growth = 0.0;              // max over consecutive levels of max(J-1)/max(J)
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  std::vector<ProbeSummary> summary;
  double worst_growth = 0.0;
};

inline std::string probe_key(const ProbeRow& r) {
  std::string s = std::string(probe_mode_name(r.mode)) + " j=" + std::to_string(r.slot) + " kappa=" +
                  std::to_string(r.kappa) + " n=(";
  for (std::size_t i = 0; i < r.n.size(); ++i) s += (i ? "," : "") + std::to_string(r.n[i]);
  s += ") p=(";
  for (std::size_t i = 0; i < r.p.size(); ++i) {
    s += i ? "," : "";
    s += std::isinf(r.p[i]) ? std::string("inf") : std::to_string(static_cast<int>(r.p[i]));
  }
  return s + ")";
}

/// Growth of the max ratio from each finest scale to the next finer one.
inline std::vector<ProbeSummary> summarize_probe(const std::vector<ProbeRow>& rows, double* worst = nullptr) {
  std::map<std::string, ProbeSummary> by;
  for (const auto& r : rows) {
    if (r.skipped) continue;
    auto& s = by[probe_key(r)];
    s.key = probe_key(r);
    double& m = s.max_ratio[r.finest];
    m = std::max(m, r.ratio);
  }
  std::vector<ProbeSummary> out;
  double w = 0.0;
  for (auto& [k, s] : by) {
    (void)k;
    s.growth = 0.0;
    for (auto it = s.max_ratio.begin(); std::next(it) != s.max_ratio.end() && it != s.max_ratio.end(); ++it) {
      // map is ascending in scale: it is finer than next(it)
      const double coarse = std::next(it)->second, fine = it->second;
      if (coarse > 0.0) s.growth = std::max(s.growth, fine / coarse);
    }
    w = std::max(w, s.growth);
    out.push_back(s);
  }
  if (worst) *worst = w;
  return out;
}

namespace detail {

struct ProbeMember {
  CoefficientTree<double> symbol;
  std::vector<BumpSum> inputs;
};

/// Caches Sobolev norms of a sampled function by (kappa, r).
class NormCache {
 public:
  NormCache(const RealGrid& f, const WaveletBasis& basis) : f_(&f), basis_(&basis) {}
  double operator()(int kappa, double r) {
    const auto key = std::make_pair(kappa, r);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double v = sobolev_norm(*f_, kappa, r, *basis_);
    memo_.emplace(key, v);
    return v;
  }

 private:
  const RealGrid* f_;
  const WaveletBasis* basis_;
  std::map<std::pair<int, double>, double> memo_;
};

}  // namespace detail

/// Runs the sweep. Members are drawn once (on the coarsest grid, so the
/// symbols and inputs are the same continuous objects at every level).
inline ProbeReport theorem_probe(const ProbeSettings& st) {
  if (st.finest.empty()) throw ParameterError("theorem_probe: no refinement levels");
  const auto splits = st.splits.empty() ? all_splits(st.arity, st.smoothness) : st.splits;
  for (const auto& p : st.exponents)
    if (static_cast<int>(p.size()) != st.arity) throw ParameterError("theorem_probe: exponent tuple size != arity");
  for (const auto& n : splits) {
    int s = 0;
    for (int v : n) s += v;
    if (static_cast<int>(n.size()) != st.arity || s > st.smoothness)
      throw ParameterError("theorem_probe: split must have m entries with sum <= k");
  }
  for (int kp : st.kappas)
    if (std::abs(kp) > st.smoothness) throw ParameterError("theorem_probe: |kappa| must not exceed k");

  const WaveletFamily fam = build_family(st.order, st.refine, st.smoothness, st.dilation);
  const int coarsest = *std::max_element(st.finest.begin(), st.finest.end());
  const RootBox root0{st.dim, st.top, coarsest};
  const WaveletBasis basis0(fam, root0);
  std::vector<detail::ProbeMember> members(static_cast<std::size_t>(st.members));
  for (int i = 0; i < st.members; ++i) {
    Rng rng(st.seed * 1000003ULL + static_cast<std::uint64_t>(i));
    auto& m = members[static_cast<std::size_t>(i)];
    m.symbol = random_symbol(rng, basis0, coarsest + st.symbol_offset, st.top, st.symbol_terms);
    const double side = std::ldexp(1.0, st.top);
    for (int j = 0; j < st.arity; ++j) m.inputs.push_back(random_bumps(rng, root0, 2, side / 16, side / 4, side / 16));
  }

  ProbeReport rep;
  for (int J : st.finest) {
    const RootBox root{st.dim, st.top, J};
    const WaveletBasis basis(fam, root);
    const TestDictionary dict(basis, st.dictionary);
    auto per_member = parallel_map<std::vector<ProbeRow>>(members.size(), st.threads, [&](std::size_t i) {
      const auto& mem = members[i];
      std::vector<ProbeRow> rows;
      ParaproductSpec<double> spec;
      spec.basis = &basis;
      spec.arity = st.arity;
      spec.symbol = mem.symbol;
      std::vector<RealGrid> fs;
      for (const auto& b : mem.inputs) fs.push_back(b.sample(root));
      const TLNormEvaluator eb(basis.synthesize(mem.symbol), dict);
      std::map<std::tuple<double, double, double>, double> symnorm;
      auto F = [&](double sm, double sc, double p) {
        const auto key = std::make_tuple(sm, sc, p);
        auto it = symnorm.find(key);
        if (it == symnorm.end()) it = symnorm.emplace(key, eb.norm({sm, sc, p, 2.0})).first;
        return it->second;
      };
      std::vector<detail::NormCache> in;
      for (const auto& f : fs) in.emplace_back(f, basis);
      const RealGrid out = apply_paraproduct(spec, fs);
      detail::NormCache out_norm(out, basis);
      std::vector<RealGrid> adj;
      std::vector<detail::NormCache> adj_norm;
      if (st.adjoints)
        for (int j = 1; j <= st.arity; ++j) adj.push_back(adjoint_apply(spec, j, fs));
      for (const auto& a : adj) adj_norm.emplace_back(a, basis);

      auto push = [&](ProbeMode mode, int slot, int kappa, const std::vector<int>& n, const std::vector<double>& p,
                      double pi, double lhs, double rhs) {
        ProbeRow r{static_cast<int>(i), J, mode, slot, kappa, n, p, pi, lhs, rhs, 0.0, false};
        if (rhs < st.rhs_floor) r.skipped = true;
        else r.ratio = lhs / rhs;
        rows.push_back(std::move(r));
      };
      for (const auto& p : st.exponents) {
        const double r = ExponentTuple(p).r();
        for (const auto& n : splits) {
          int tot = 0;
          for (int v : n) tot += v;
          double inputs = 1.0;
          for (std::size_t j = 0; j < fs.size(); ++j) inputs *= in[j](n[j], p[j]);
          for (int kappa : st.kappas) {
            const double pi = pi_bound(n, p);
            push(ProbeMode::bound, 0, kappa, n, p, pi, out_norm(kappa, r),
                 F(kappa, -tot, plus_eps(pi, st.eps)) * inputs);
            if (!st.adjoints || kappa < 0) continue;
            for (std::size_t j = 0; j < adj.size(); ++j) {
              const int nj = n[j];
              const double pp = pi_adjoint_pos(n, p, j);
              push(ProbeMode::adjoint_pos, static_cast<int>(j + 1), kappa, n, p, pp, adj_norm[j](kappa, r),
                   F(kappa - nj, nj - tot, plus_eps(pp, st.eps)) * inputs);
              const double pm = pi_adjoint_neg(n, p, j, kappa);
              push(ProbeMode::adjoint_neg, static_cast<int>(j + 1), kappa, n, p, pm, adj_norm[j](-kappa, r),
                   F(-nj, nj - tot - kappa, plus_eps(pm, st.eps)) * inputs);
            }
          }
        }
        if (st.lebesgue) {
          double inputs = 1.0;
          for (std::size_t j = 0; j < fs.size(); ++j) inputs *= fs[j].lp_norm(p[j]);
          push(ProbeMode::lebesgue, 0, 0, std::vector<int>(fs.size(), 0), p, 2.0, out.lp_norm(r),
               eb.norm({0.0, 0.0, 2.0, 2.0}) * inputs);
        }
      }
      return rows;
    });
    for (auto& v : per_member) rep.rows.insert(rep.rows.end(), v.begin(), v.end());
  }
  rep.summary = summarize_probe(rep.rows, &rep.worst_growth);
  return rep;
}

// ------------------------------------------------------------ lacunary family

struct LacunaryRow {
  int depth = 0;
  int finest = 0;
  double bmo = 0.0;
  double fnorm = 0.0;       // F^{0,-n}_{pi+eps,2}
  double power_fnorm = 0.0;  // same norm of the b_Q = l(Q)^n family on the same cubes
  double power_bmo = 0.0;
  double max_ratio = 0.0;   // probe ratio over the input ensemble
};

struct LacunarySettings {
  std::vector<int> depths{4, 6, 8};
  int top = 2;
  int margin = 3;  // finest = -(depth + margin)
  int order = 3;
  int smoothness = 2;
  int dilation = 5;
  int refine = 12;
  int dictionary = 8;
  std::vector<int> n{1, 0};
  std::vector<double> p{2.0, kInf};
  double eps = 0.1;
  int members = 20;
  std::uint64_t seed = 7;
};

/// Symbols outside BMO-controlled growth: the BMO norm grows with the depth
/// while the F^{0,-n}_{pi+eps,2} norm and the bound ratio stay flat.
inline std::vector<LacunaryRow> lacunary_probe(const LacunarySettings& st) {
  const WaveletFamily fam = build_family(st.order, st.refine, st.smoothness, st.dilation);
  int tot = 0;
  for (int v : st.n) tot += v;
  const double pi = pi_bound(st.n, st.p);
  const double pe = plus_eps(pi, st.eps);
  const double r = ExponentTuple(st.p).r();
  std::vector<std::vector<BumpSum>> inputs;
  {
    const RootBox root0{1, st.top, -6};
    const double side = std::ldexp(1.0, st.top);
    for (int i = 0; i < st.members; ++i) {
      Rng rng(st.seed * 1000003ULL + static_cast<std::uint64_t>(i));
      std::vector<BumpSum> v;
      for (std::size_t j = 0; j < st.p.size(); ++j) v.push_back(random_bumps(rng, root0, 2, side / 16, side / 4, side / 16));
      inputs.push_back(std::move(v));
    }
  }
  std::vector<LacunaryRow> out;
  for (int depth : st.depths) {
    const RootBox root{1, st.top, -(depth + st.margin)};
    const WaveletBasis basis(fam, root);
    const TestDictionary dict(basis, st.dictionary);
    LacunaryRow row;
    row.depth = depth;
    row.finest = root.finest;
    ParaproductSpec<double> spec;
    spec.basis = &basis;
    spec.arity = static_cast<int>(st.p.size());
    spec.symbol = lacunary_symbol(root, depth, pe);
    const TLNormEvaluator eb(basis.synthesize(spec.symbol), dict);
    row.bmo = eb.norm({0.0, 0.0, 2.0, 2.0});
    row.fnorm = eb.norm({0.0, static_cast<double>(-tot), pe, 2.0});
    const TLNormEvaluator ep(basis.synthesize(power_symbol(root, depth, tot)), dict);
    row.power_bmo = ep.norm({0.0, 0.0, 2.0, 2.0});
    row.power_fnorm = ep.norm({0.0, static_cast<double>(-tot), pe, 2.0});
    for (const auto& ins : inputs) {
      std::vector<RealGrid> fs;
      double den = row.fnorm;
      for (std::size_t j = 0; j < ins.size(); ++j) {
        fs.push_back(ins[j].sample(root));
        den *= sobolev_norm(fs.back(), st.n[j], st.p[j], basis);
      }
      if (den < 1e-12) continue;
      row.max_ratio = std::max(row.max_ratio, sobolev_norm(apply_paraproduct(spec, fs), 0, r, basis) / den);
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace dyadica
