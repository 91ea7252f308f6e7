#pragma once

// The acceptance criteria as runnable checks, shared by the CLI `suite`
// subcommand and the acceptance binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dyadica/config.hpp"
#include "dyadica/czform.hpp"
#include "dyadica/ensemble.hpp"
#include "dyadica/paraproduct.hpp"
#include "dyadica/probe.hpp"
#include "dyadica/report.hpp"
#include "dyadica/sparse.hpp"
#include "dyadica/tlnorm.hpp"
#include "dyadica/wavelet.hpp"

namespace dyadica {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;

  std::string line() const {
    std::ostringstream o;
    o << (passed ? "[PASS] " : "[FAIL] ") << id << ' ' << name << ": " << detail << " (" << std::fixed;
    o.precision(1);
    o << seconds << " s)";
    return o.str();
  }
};

struct SuiteContext {
  std::optional<std::filesystem::path> out;  // artifacts are written only when set
  int threads = 1;
  std::string config_hash;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline WaveletFamily family_of(const ExperimentConfig& c) {
  return build_family(c.order, c.refine, c.smoothness, c.dilation);
}

inline std::optional<std::filesystem::path> artifact(const SuiteContext& ctx, const std::string& name) {
  if (!ctx.out) return std::nullopt;
  std::filesystem::create_directories(*ctx.out);
  return *ctx.out / name;
}

template <typename Fn>
CriterionResult timed(int id, std::string name, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline double mean_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

// 1: orthonormality of the interior wavelets and the high-low identity.
inline CriterionResult criterion_wavelet(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(1, "wavelet resolution", [&](CriterionResult& r) {
    double worst_gram = 0.0, worst_hl = 0.0;
    std::size_t atoms = 0;
    std::optional<CsvWriter> csv;
    if (auto p = detail::artifact(ctx, "wavelet.csv"))
      csv.emplace(*p, std::vector<std::string>{"config_hash", "N", "interior_atoms", "gram_error", "high_low_residual"});
    for (int N : {2, 3}) {
      const RootBox root{1, 2, -6};
      const WaveletBasis basis(build_family(N, cfg.refine), root);
      std::vector<RealGrid> v;
      for (int s = root.top; s > root.finest; --s)
        for (const auto& q : root.cubes_at(s))
          if (basis.interior(q)) v.push_back(std::sqrt(q.volume()) * atom_samples(root, basis.wavelet(q)));
      double gram = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i; j < v.size(); ++j)
          gram = std::max(gram, std::abs(v[i].pair(v[j]) - (i == j ? 1.0 : 0.0)));
      Rng rng(cfg.seed + static_cast<std::uint64_t>(N));
      double hl = 0.0;
      for (int t = 0; t < 50; ++t) {
        const RealGrid f = t % 2 == 0 ? random_bumps(rng, root, 3, 0.125, 1.0, 0.25).sample(root)
                                      : random_atom_function(rng, basis, root.finest + 2, root.top, 6);
        const double nf = f.lp_norm(2.0);
        if (nf == 0.0) continue;
        for (int ell = root.top; ell > root.finest; --ell) hl = std::max(hl, basis.high_low_check(f, ell) / nf);
      }
      worst_gram = std::max(worst_gram, gram);
      worst_hl = std::max(worst_hl, hl);
      atoms += v.size();
      if (csv)
        csv->row({ctx.config_hash, std::to_string(N), std::to_string(v.size()), format_number(gram), format_number(hl)});
    }
    r.passed = worst_gram < 1e-8 && worst_hl < 1e-6;
    r.detail = "gram_err=" + detail::sci(worst_gram) + " (tol 1e-8, " + std::to_string(atoms) +
               " atoms), high_low=" + detail::sci(worst_hl) + " (tol 1e-6)";
  });
}

// 2: <Pi_b(f), g> against the matched wavelet form evaluated at the symbol's avatar.
inline CriterionResult criterion_duality(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(2, "paraproduct duality", [&](CriterionResult& r) {
    const RootBox root{1, 2, -6};
    const WaveletBasis basis(detail::family_of(cfg), root);
    Rng rng(cfg.seed + 2);
    double worst = 0.0;
    std::optional<CsvWriter> csv;
    if (auto p = detail::artifact(ctx, "duality.csv"))
      csv.emplace(*p, std::vector<std::string>{"config_hash", "trial", "m", "pairing", "form", "relative_error"});
    const int lo = root.finest + 2;
    for (int t = 0; t < 50; ++t) {
      const int m = 1 + t % 3;
      ParaproductSpec<double> spec;
      spec.basis = &basis;
      spec.arity = m;
      spec.symbol = random_symbol(rng, basis, lo, root.top, 8);
      std::vector<RealGrid> fs;
      for (int j = 0; j < m; ++j) fs.push_back(random_atom_function(rng, basis, lo, root.top, 6) +
                                                 random_bumps(rng, root, 2, 0.25, 1.0, 0.25, true).sample(root));
      CoefficientTree<double> gt = random_symbol(rng, basis, lo, root.top, 6);
      for (const auto& [q, b] : spec.symbol) gt[q] += gaussian(rng) * b;
      const RealGrid g = basis.synthesize(gt);
      const double lhs = apply_paraproduct(spec, fs).pair(g);
      std::vector<RealGrid> args{g};
      args.insert(args.end(), fs.begin(), fs.end());
      const double rhs = form_eval(matched_form(spec), basis.synthesize(spec.symbol), args);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      const double rel = std::abs(lhs - rhs) / scale;
      worst = std::max(worst, rel);
      if (csv)
        csv->row({ctx.config_hash, std::to_string(t), std::to_string(m), format_number(lhs), format_number(rhs),
                  format_number(rel)});
    }
    r.passed = worst < 1e-8;
    r.detail = "max relative error=" + detail::sci(worst) + " over 50 trials, m in {1,2,3} (tol 1e-8)";
  });
}

// 3: ||f||_{F^{n,m}_{p,q}} <= ||f||_{F^{n+u,m-u}_{r,s}} on a parameter lattice.
inline CriterionResult criterion_embeddings(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(3, "norm embeddings", [&](CriterionResult& r) {
    const RootBox root{1, 2, -6};
    const WaveletBasis basis(detail::family_of(cfg), root);
    const TestDictionary dict(basis, cfg.dictionary);
    Rng rng(cfg.seed + 3);
    int checks = 0, violations = 0;
    double worst = 0.0;  // max of lhs/rhs
    for (int t = 0; t < 100; ++t) {
      const RealGrid f = random_function(rng, basis);
      const TLNormEvaluator ev(f, dict);
      for (double n : {0.0, 1.0})
        for (double m : {0.0, 1.0})
          for (double u : {0.0, 1.0})
            for (auto [p, rr] : {std::pair{1.0, 2.0}, std::pair{2.0, 4.0}})
              for (auto [q, s] : {std::pair{kInf, 2.0}, std::pair{2.0, 1.0}}) {
                const double lhs = ev.norm({n, m, p, q});
                const double rhs = ev.norm({n + u, m - u, rr, s});
                ++checks;
                if (lhs > rhs + 1e-9 * std::max(1.0, rhs)) ++violations;
                if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
              }
    }
    if (auto p = detail::artifact(ctx, "embeddings.csv")) {
      CsvWriter csv(*p, {"config_hash", "checks", "violations", "max_ratio"});
      csv.row({ctx.config_hash, std::to_string(checks), std::to_string(violations), format_number(worst)});
    }
    r.passed = violations == 0;
    r.detail = std::to_string(violations) + " violations in " + std::to_string(checks) +
               " checks, max lhs/rhs=" + detail::sci(worst);
  });
}

// 4: p-independence of F^{0,0}_{p,2} up to a constant.
inline CriterionResult criterion_john_nirenberg(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(4, "John-Nirenberg", [&](CriterionResult& r) {
    const RootBox root{1, 2, -6};
    const WaveletBasis basis(detail::family_of(cfg), root);
    const TestDictionary dict(basis, cfg.dictionary);
    Rng rng(cfg.seed + 4);
    double worst = 0.0;
    std::vector<double> idx, ratios;
    for (int t = 0; t < 100; ++t) {
      const RealGrid f = random_function(rng, basis);
      const TLNormEvaluator ev(f, dict);
      double lo = kInf, hi = 0.0;
      for (double p : {1.0, 2.0, 4.0}) {
        const double v = ev.norm({0.0, 0.0, p, 2.0});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi == 0.0) continue;
      const double ratio = hi / lo;
      worst = std::max(worst, ratio);
      idx.push_back(t);
      ratios.push_back(ratio);
    }
    if (auto p = detail::artifact(ctx, "john_nirenberg.dat")) write_plot_data(*p, idx, ratios, "member max/min");
    r.passed = worst <= 16.0;
    r.detail = "max over members of max_p/min_p=" + detail::sci(worst) + " (bound 16)";
  });
}

namespace detail {

/// Random inputs for the stopping constructions on the root cube.
struct SparseTrial {
  CoefficientTree<double> b, g;
  BumpSum f1, f2;
};

inline SparseTrial sparse_trial(Rng& rng, const WaveletBasis& coarse, int offset) {
  const RootBox& root = coarse.root();
  const double side = std::ldexp(1.0, root.top);
  SparseTrial t;
  t.b = random_symbol(rng, coarse, root.finest + offset, root.top, 6);
  t.g = random_symbol(rng, coarse, root.finest + offset, root.top, 6);
  t.f1 = random_bumps(rng, root, 3, side / 32, side / 4, side / 16);
  t.f2 = random_bumps(rng, root, 3, side / 32, side / 4, side / 16, true);
  return t;
}

}  // namespace detail

// 5: every parent's stopping children pack below the target, within the cap.
inline CriterionResult criterion_packing(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(5, "stopping-time packing", [&](CriterionResult& r) {
    const RootBox root{1, 2, -6};
    const WaveletBasis basis(detail::family_of(cfg), root);
    const TestDictionary dict(basis, cfg.dictionary);
    const DyadicCube Q0(1, root.top, {});
    Rng rng(cfg.seed + 5);
    std::optional<CsvWriter> csv;
    if (auto p = detail::artifact(ctx, "packing.csv"))
      csv.emplace(*p, std::vector<std::string>{"config_hash", "trial", "mode", "cubes", "generations", "max_ratio",
                                               "target", "max_theta", "cap_hit"});
    int bad = 0;
    double worst_ratio[2] = {0.0, 0.0}, worst_theta[2] = {0.0, 0.0};
    for (int t = 0; t < 100; ++t) {
      const auto tr = detail::sparse_trial(rng, basis, 2);
      const RealGrid b = basis.synthesize(tr.b), g = basis.synthesize(tr.g);
      const RealGrid f1 = tr.f1.sample(root), f2 = tr.f2.sample(root);
      for (int mode = 0; mode < 2; ++mode) {
        StoppingConfig sc = StoppingConfig::for_mode(mode == 0 ? StoppingMode::intest : StoppingMode::mainiter);
        sc.theta = cfg.theta;
        sc.theta_cap = cfg.theta_cap;
        sc.n = cfg.sparse_n;
        SparseInputs in;
        if (mode == 0) {
          in.b = b;
          in.g = g;
          in.f = {RealGrid(root), f2};
        } else {
          in.f = {f1, f2};
        }
        const SparseCollection col = build_sparse(Q0, in, sc, dict);
        bool cap = col.truncated;
        for (const auto& pk : col.packing) {
          cap = cap || pk.cap_hit;
          if (pk.ratio > sc.packing_target) ++bad;
        }
        if (cap) ++bad;
        worst_ratio[mode] = std::max(worst_ratio[mode], col.max_ratio());
        worst_theta[mode] = std::max(worst_theta[mode], col.max_theta);
        if (csv)
          csv->row({ctx.config_hash, std::to_string(t), mode == 0 ? "intest" : "mainiter",
                    std::to_string(col.cubes.size()), std::to_string(col.generations()),
                    format_number(col.max_ratio()), format_number(sc.packing_target), format_number(col.max_theta),
                    cap ? "1" : "0"});
      }
    }
    r.passed = bad == 0;
    r.detail = "intest max ratio=" + detail::sci(worst_ratio[0]) + " (target 2^-6, max theta " +
               detail::sci(worst_theta[0]) + "), mainiter max ratio=" + detail::sci(worst_ratio[1]) +
               " (target 1/4, max theta " + detail::sci(worst_theta[1]) + "), failures=" + std::to_string(bad);
  });
}

// 6: intrinsic form against its sparse bound, stable under refinement; Taylor
// telescoping constants logged.
inline CriterionResult criterion_sparse(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(6, "sparse domination", [&](CriterionResult& r) {
    const WaveletFamily fam = detail::family_of(cfg);
    const std::vector<int> levels{-6, -7, -8};
    const WaveletBasis coarse(fam, RootBox{1, 2, levels.front()});
    Rng rng(cfg.seed + 6);
    std::vector<detail::SparseTrial> trials;
    for (int t = 0; t < 200; ++t) trials.push_back(detail::sparse_trial(rng, coarse, cfg.symbol_offset));
    std::map<int, double> worst;
    double holder = 0.0, split3 = 0.0, split4 = 0.0;
    bool finite = true;
    std::optional<CsvWriter> csv;
    if (auto p = detail::artifact(ctx, "sparse_domination.csv"))
      csv.emplace(*p, std::vector<std::string>{"config_hash", "trial", "finest", "lhs", "sparse_rhs", "holder_rhs",
                                               "sparse_ratio", "holder_ratio", "cubes"});
    for (int J : levels) {
      const RootBox root{1, 2, J};
      const WaveletBasis basis(fam, root);
      const TestDictionary dict(basis, cfg.dictionary);
      const DyadicCube Q0(1, root.top, {});
      auto reps = parallel_map<DominationReport>(trials.size(), ctx.threads, [&](std::size_t i) {
        const auto& t = trials[i];
        return verify_domination(Q0, basis.synthesize(t.b), basis.synthesize(t.g), {t.f2.sample(root)}, dict, 4.0,
                                 2.0, {4.0});
      });
      for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& rep = reps[i];
        const double sr = rep.sparse_ratio();
        if (!std::isfinite(sr)) finite = false;
        worst[J] = std::max(worst[J], sr);
        holder = std::max(holder, rep.holder_ratio());
        if (csv)
          csv->row({ctx.config_hash, std::to_string(i), std::to_string(J), format_number(rep.lhs),
                    format_number(rep.sparse_rhs), format_number(rep.holder_rhs), format_number(sr),
                    format_number(rep.holder_ratio()), std::to_string(rep.collection.cubes.size())});
      }
      if (J == levels.front())
        for (std::size_t i = 0; i < 10; ++i)
          for (int n = 1; n <= cfg.smoothness; ++n) {
            const RealGrid f1 = trials[i].f1.sample(root);
            StoppingConfig sc = StoppingConfig::for_mode(StoppingMode::mainiter);
            sc.n = n;
            SparseInputs in;
            in.f = {f1};
            const auto col = build_sparse(Q0, in, sc, dict);
            const auto tel = taylor_telescoping(f1, Q0, n, col.members(), fam.dilation, root.finest + 2);
            split3 = std::max(split3, tel.split3);
            split4 = std::max(split4, tel.split4);
          }
    }
    double growth = 0.0;
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (worst[levels[i - 1]] > 0.0) growth = std::max(growth, worst[levels[i]] / worst[levels[i - 1]]);
    if (auto p = detail::artifact(ctx, "sparse_constant.dat")) {
      std::vector<double> x, y;
      for (int J : levels) {
        x.push_back(J);
        y.push_back(worst[J]);
      }
      write_plot_data(*p, x, y, "finest scale vs max lhs/sparse_rhs");
    }
    const bool tel_ok = std::isfinite(split3) && std::isfinite(split4);
    r.passed = finite && tel_ok && growth <= cfg.growth_cap;
    std::string cs;
    for (int J : levels) cs += (cs.empty() ? "" : ",") + detail::sci(worst[J]);
    r.detail = "C(J=-6,-7,-8)=" + cs + ", growth=" + detail::sci(growth) + " (cap " + detail::sci(cfg.growth_cap) +
               "), holder ratio max=" + detail::sci(holder) + ", telescoping constants " + detail::sci(split3) + ", " +
               detail::sci(split4);
  });
}

inline void write_probe_report(const ProbeReport& rep, const std::filesystem::path& dir, const std::string& hash) {
  std::filesystem::create_directories(dir);
  {
    CsvWriter csv(dir / "theorem_probe.csv", {"config_hash", "member", "finest", "mode", "j", "kappa", "n", "p", "pi",
                                              "lhs", "rhs", "ratio", "skipped"});
    auto join = [](const auto& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(static_cast<double>(v[i]));
      return s;
    };
    auto rows = rep.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const ProbeRow& a, const ProbeRow& b) {
      return std::tie(a.finest, a.member) > std::tie(b.finest, b.member);
    });
    for (const auto& r : rows)
      csv.row({hash, std::to_string(r.member), std::to_string(r.finest), probe_mode_name(r.mode),
               std::to_string(r.slot), std::to_string(r.kappa), join(r.n), join(r.p), format_number(r.pi),
               format_number(r.lhs), format_number(r.rhs), r.skipped ? "" : format_number(r.ratio),
               r.skipped ? "1" : "0"});
  }
  CsvWriter sum(dir / "theorem_probe_summary.csv", {"config_hash", "key", "finest", "max_ratio", "growth"});
  for (const auto& s : rep.summary)
    for (auto it = s.max_ratio.rbegin(); it != s.max_ratio.rend(); ++it)
      sum.row({hash, s.key, std::to_string(it->first), format_number(it->second), format_number(s.growth)});
}

// 7: refinement stability of the bound ratios (direct and adjoint).
inline CriterionResult criterion_theorem(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(7, "paraproduct bound probe", [&](CriterionResult& r) {
    ProbeSettings st = cfg.probe_settings(ctx.threads);
    st.finest = {-6, -7, -8};
    st.members = 100;
    st.arity = 2;
    st.kappas = {-1, 0, 1};
    st.splits.clear();
    st.exponents = {{4.0, 4.0}, {2.0, kInf}};
    const ProbeReport rep = theorem_probe(st);
    bool finite = true;
    std::size_t used = 0;
    for (const auto& row : rep.rows)
      if (!row.skipped) {
        ++used;
        if (!std::isfinite(row.ratio)) finite = false;
      }
    std::string worst_key;
    for (const auto& s : rep.summary)
      if (s.growth == rep.worst_growth) worst_key = s.key;
    if (ctx.out) write_probe_report(rep, *ctx.out, ctx.config_hash);
    r.passed = finite && rep.worst_growth <= cfg.growth_cap;
    r.detail = std::to_string(rep.summary.size()) + " configurations, " + std::to_string(used) +
               " ratios, worst growth=" + detail::sci(rep.worst_growth) + " at [" + worst_key + "] (cap " +
               detail::sci(cfg.growth_cap) + ")";
  });
}

// 8: lacunary symbols: BMO grows with depth, F^{0,-n} and the bound ratio stay flat.
inline CriterionResult criterion_beyond_bmo(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(8, "beyond-BMO separation", [&](CriterionResult& r) {
    LacunarySettings st;
    st.order = cfg.order;
    st.smoothness = cfg.smoothness;
    st.dilation = cfg.dilation;
    st.refine = cfg.refine;
    st.dictionary = cfg.dictionary;
    st.eps = cfg.eps;
    st.seed = cfg.seed + 8;
    const auto rows = lacunary_probe(st);
    bool grow = true;
    double fmin = kInf, fmax = 0.0, rmin = kInf, rmax = 0.0;
    for (const auto& row : rows) {
      if (row.bmo < rows.front().bmo * row.depth / rows.front().depth) grow = false;
      fmin = std::min(fmin, row.fnorm);
      fmax = std::max(fmax, row.fnorm);
      rmin = std::min(rmin, row.max_ratio);
      rmax = std::max(rmax, row.max_ratio);
    }
    if (ctx.out) {
      const auto p = detail::artifact(ctx, "beyond_bmo.csv");
      CsvWriter csv(*p, {"config_hash", "depth", "finest", "bmo", "f_norm", "max_ratio", "power_bmo", "power_f_norm"});
      std::vector<double> x, yb, yf;
      for (const auto& row : rows) {
        csv.row({ctx.config_hash, std::to_string(row.depth), std::to_string(row.finest), format_number(row.bmo),
                 format_number(row.fnorm), format_number(row.max_ratio), format_number(row.power_bmo),
                 format_number(row.power_fnorm)});
        x.push_back(row.depth);
        yb.push_back(row.bmo);
        yf.push_back(row.fnorm);
      }
      write_plot_data(*ctx.out / "beyond_bmo_bmo.dat", x, yb, "depth vs bmo norm");
      write_plot_data(*ctx.out / "beyond_bmo_f.dat", x, yf, "depth vs F^{0,-n} norm");
    }
    const bool flat = fmax <= 2.0 * fmin && rmin > 0.0 && rmax <= 2.0 * rmin;
    r.passed = grow && flat;
    std::string bmo;
    for (const auto& row : rows) bmo += (bmo.empty() ? "" : ",") + detail::sci(row.bmo);
    r.detail = "bmo(L=4,6,8)=" + bmo + ", F-norm spread=" + detail::sci(fmax / fmin) +
               ", ratio spread=" + detail::sci(rmin > 0 ? rmax / rmin : kInf) + " (bound 2)";
  });
}

// 9: summation-by-parts identity for canonical atoms against smooth inputs.
inline CriterionResult criterion_anti_ibp(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(9, "anti-integration by parts", [&](CriterionResult& r) {
    const RootBox root{1, 2, -8};
    const WaveletBasis basis(detail::family_of(cfg), root);
    Rng rng(cfg.seed + 9);
    double worst = 0.0, cls = 0.0;
    int pairs = 0;
    for (int t = 0; t < 20; ++t) {
      const RealGrid f = random_bumps(rng, root, 3, 0.25, 1.0, 0.25).sample(root);
      double fmax = 0.0;
      for (double v : f.samples()) fmax = std::max(fmax, std::abs(v));
      for (int s = root.finest + 2; s <= root.top; ++s) {
        const auto cubes = interior_cubes(basis, s);
        for (int c = 0; c < 4 && !cubes.empty(); ++c) {
          const auto& q = cubes[static_cast<std::size_t>(uniform_index(rng, 0, static_cast<Index>(cubes.size()) - 1))];
          for (int k = 1; k <= std::min(2, cfg.smoothness); ++k) {
            const AntiIbpReport rep = anti_ibp_check(f, basis.wavelet(q), k);
            if (std::max(std::abs(rep.lhs), std::abs(rep.rhs)) < 1e-13 * fmax) continue;
            ++pairs;
            worst = std::max(worst, rep.relative_gap());
            cls = std::max(cls, rep.class_constant);
          }
        }
      }
    }
    if (auto p = detail::artifact(ctx, "anti_ibp.csv")) {
      CsvWriter csv(*p, {"config_hash", "pairs", "max_relative_gap", "max_class_constant"});
      csv.row({ctx.config_hash, std::to_string(pairs), format_number(worst), format_number(cls)});
    }
    r.passed = pairs > 0 && worst < 1e-4;
    r.detail = "max relative gap=" + detail::sci(worst) + " over " + std::to_string(pairs) +
               " atom/input pairs, k in {1,2} (tol 1e-4), class constant " + detail::sci(cls);
  });
}

namespace detail {

inline BumpSum dilate(const BumpSum& b, double factor, double center) {
  BumpSum out = b;
  for (std::size_t t = 0; t < out.amp.size(); ++t) {
    out.radius[t] /= factor;
    for (auto& c : out.center[t]) c = center + (c - center) / factor;
  }
  return out;
}

}  // namespace detail

// 10: testing symbols of planted forms and the Sobolev bound under dilation.
inline CriterionResult criterion_testbench(const ExperimentConfig& cfg, const SuiteContext& ctx) {
  return detail::timed(10, "T(1) bench", [&](CriterionResult& r) {
    const RootBox root{1, 2, -7};
    const WaveletBasis basis(build_family(cfg.order, cfg.refine, cfg.smoothness, cfg.dilation), root);
    const TestDictionary dict(basis, cfg.dictionary);
    const int k = 1;
    Rng rng(cfg.seed + 10);

    // plant and recover
    auto pp = std::make_shared<ParaproductSpec<double>>();
    pp->basis = &basis;
    pp->arity = 1;
    pp->symbol = random_symbol(rng, basis, root.finest + 3, root.top, 16);
    KernelSpec planted;
    planted.name = "planted";
    planted.kind = KernelKind::planted_paraproduct;
    planted.arity = 1;
    planted.k = k;
    planted.paraproduct = pp;
    std::vector<DyadicCube> cubes;
    for (const auto& [q, b] : pp->symbol)
      if (b != 0.0) cubes.push_back(q);
    const TestingSymbols ts = testing_symbols(planted, basis, k, cubes, cfg.cutoff_radius);
    std::vector<double> consts;
    std::map<int, std::vector<double>> by_scale;
    double oracle_err = 0.0;
    const auto& b0 = ts.gamma.at(std::vector<MultiIndex>{MultiIndex{}});
    for (const auto& q : cubes) {
      const double bq = pp->symbol.at(q);
      const double c = b0.at(q) / (std::pow(q.side(), k) * bq);
      consts.push_back(c);
      by_scale[q.scale].push_back(c);
      // brute-force pairing: l^k |Q| b_Q chi_Q(Tr 1) <beta_Q, phi_Q>
      const RealGrid one = truncated_monomial(root, q, MultiIndex{}, cfg.cutoff_radius);
      const double oracle = std::pow(q.side(), k) * q.volume() * bq * pair(basis.scaling(q), one) *
                            atom_samples(root, basis.wavelet(q)).pair(atom_samples(root, basis.wavelet(q)));
      oracle_err = std::max(oracle_err, std::abs(b0.at(q) - oracle) / std::max(std::abs(oracle), 1e-300));
    }
    const double mean = detail::mean_abs(consts);
    const auto [lo, hi] = std::minmax_element(consts.begin(), consts.end());
    const double variation = mean > 0.0 ? (*hi - *lo) / mean : kInf;

    // zero kernel
    KernelSpec zero;
    zero.arity = 1;
    zero.k = k;
    const TestingSymbols tz = testing_symbols(zero, basis, k, cubes, cfg.cutoff_radius);
    const double zero_norm = testing_norm(tz, cfg.testing_p, cfg.testing_q, dict).total();

    // Sobolev bound under dyadic dilation of the inputs
    const double tnorm = testing_norm(ts, cfg.testing_p, cfg.testing_q, dict).total();
    std::vector<BumpSum> base;
    for (int t = 0; t < 20; ++t) base.push_back(random_bumps(rng, root, 2, 0.25, 1.0, 0.5));
    std::vector<double> sweep_x, sweep_y;
    double growth = 0.0, prev = 0.0;
    for (int s = 0; s <= 2; ++s) {
      std::vector<std::vector<RealGrid>> tuples;
      for (const auto& b : base) tuples.push_back({detail::dilate(b, std::ldexp(1.0, s), 2.0).sample(root)});
      const BenchReport br = sobolev_bound_bench(planted, basis, tuples, {cfg.testing_p}, k, tnorm);
      if (s > 0 && prev > 0.0) growth = std::max(growth, br.max_ratio / prev);
      prev = br.max_ratio;
      sweep_x.push_back(s);
      sweep_y.push_back(br.max_ratio);
    }
    if (ctx.out) {
      const auto p = detail::artifact(ctx, "testbench.csv");
      CsvWriter csv(*p, {"config_hash", "kernel", "item", "value"});
      csv.row({ctx.config_hash, "planted", "recovery_variation", format_number(variation)});
      csv.row({ctx.config_hash, "planted", "recovery_mean", format_number(mean)});
      csv.row({ctx.config_hash, "planted", "oracle_error", format_number(oracle_err)});
      csv.row({ctx.config_hash, "planted", "cutoff_sensitivity", format_number(ts.cutoff_sensitivity)});
      csv.row({ctx.config_hash, "planted", "testing_norm", format_number(tnorm)});
      csv.row({ctx.config_hash, "zero", "testing_norm", format_number(zero_norm)});
      for (const auto& [sc, v] : by_scale)
        csv.row({ctx.config_hash, "planted", "scale_" + std::to_string(sc) + "_mean", format_number(detail::mean_abs(v))});
      write_plot_data(*ctx.out / "testbench_dilation.dat", sweep_x, sweep_y, "dilation exponent vs max bench ratio");
    }
    r.passed = variation < 0.05 && oracle_err < 1e-8 && zero_norm == 0.0 && growth <= cfg.growth_cap;
    r.detail = "recovery constant mean=" + detail::sci(mean) + " variation=" + detail::sci(variation) +
               " (tol 5%), oracle err=" + detail::sci(oracle_err) + ", zero-kernel norm=" + detail::sci(zero_norm) +
               ", dilation growth=" + detail::sci(growth) + " (cap " + detail::sci(cfg.growth_cap) + ")";
  });
}

using CriterionFn = CriterionResult (*)(const ExperimentConfig&, const SuiteContext&);

struct CriterionEntry {
  const char* suite;
  CriterionFn fn;
};

/// Criteria in id order, tagged with the suite that runs them.
inline const std::vector<CriterionEntry>& criteria() {
  static const std::vector<CriterionEntry> t{
      {"wavelet", criterion_wavelet},         {"paraproduct", criterion_duality},
      {"norms", criterion_embeddings},        {"norms", criterion_john_nirenberg},
      {"sparse", criterion_packing},          {"sparse", criterion_sparse},
      {"theorem", criterion_theorem},         {"theorem", criterion_beyond_bmo},
      {"wavelet", criterion_anti_ibp},        {"testbench", criterion_testbench},
  };
  return t;
}

inline std::vector<std::string> suite_names() {
  return {"wavelet", "norms", "sparse", "paraproduct", "testbench", "theorem"};
}

/// Runs the named suites (all when empty) and writes summary.csv when an
/// output directory is set. Unknown names throw ParameterError before anything runs.
inline std::vector<CriterionResult> run_suite(const std::vector<std::string>& names, const ExperimentConfig& cfg,
                                              const SuiteContext& ctx,
                                              const std::function<void(const CriterionResult&)>& report = {}) {
  const auto known = suite_names();
  for (const auto& n : names)
    if (std::find(known.begin(), known.end(), n) == known.end()) throw ParameterError("unknown suite '" + n + "'");
  std::vector<CriterionResult> out;
  for (const auto& e : criteria()) {
    if (!names.empty() && std::find(names.begin(), names.end(), e.suite) == names.end()) continue;
    out.push_back(e.fn(cfg, ctx));
    if (report) report(out.back());
  }
  if (auto p = detail::artifact(ctx, "summary.csv")) {
    CsvWriter csv(*p, {"config_hash", "criterion", "name", "passed"});
    for (const auto& r : out) csv.row({ctx.config_hash, std::to_string(r.id), r.name, r.passed ? "1" : "0"});
  }
  return out;
}

}  // namespace dyadica
