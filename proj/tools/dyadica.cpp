// dyadica: experiment driver.
//
//   dyadica <suite|norms|paraproduct|sparse|testbench|theorem-probe>
//           --config <path> --out <dir> [--seed N] [--threads N]
//
// Exit status: 0 success, 1 failed criterion, 2 usage or configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "dyadica/config.hpp"
#include "dyadica/czform.hpp"
#include "dyadica/ensemble.hpp"
#include "dyadica/paraproduct.hpp"
#include "dyadica/probe.hpp"
#include "dyadica/report.hpp"
#include "dyadica/sparse.hpp"
#include "dyadica/suites.hpp"

namespace fs = std::filesystem;
using namespace dyadica;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "configuration file (key = value, [sections])")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory")->required();
  sub->add_option("--seed", c.seed, "override ensemble.seed");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config, false);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const Common& c, const ExperimentConfig& cfg) {
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ofstream echo(dir / "config.resolved.ini");
  echo << "; hash " << cfg.hash() << '\n' << cfg.canonical();
  return dir;
}

std::vector<RealGrid> load_inputs(const ExperimentConfig& cfg) {
  std::vector<RealGrid> out;
  for (const auto& p : cfg.inputs) {
    out.push_back(read_binary(p));
    const RootBox& r = out.back().root();
    if (r.dim != cfg.dim || r.top != cfg.top || r.finest != cfg.finest)
      throw ConfigError("input " + p + " does not match the configured root box");
  }
  return out;
}

CoefficientTree<double> load_symbol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open symbol file " + path);
  return real_tree(read_tree_csv(in));
}

std::vector<RealGrid> random_inputs(Rng& rng, const RootBox& root, std::size_t count) {
  std::vector<RealGrid> v;
  const double side = std::ldexp(1.0, root.top);
  for (std::size_t j = 0; j < count; ++j) v.push_back(random_bumps(rng, root, 2, side / 16, side / 4, side / 16).sample(root));
  return v;
}

// ------------------------------------------------------------------ suite

int run_suite_cmd(const Common& c, const std::vector<std::string>& names) {
  const ExperimentConfig cfg = load(c);
  SuiteContext ctx;
  ctx.out = prepare_out(c, cfg);
  ctx.threads = c.threads;
  ctx.config_hash = cfg.hash();
  int failed = 0;
  const auto res = run_suite(names, cfg, ctx, [&](const CriterionResult& r) {
    std::cout << r.line() << std::endl;
    if (!r.passed) ++failed;
  });
  std::cout << res.size() - static_cast<std::size_t>(failed) << "/" << res.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}

// ------------------------------------------------------------------ norms

int run_norms(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = prepare_out(c, cfg);
  const RootBox root = cfg.root();
  const WaveletBasis basis(detail::family_of(cfg), root);
  const TestDictionary dict(basis, cfg.dictionary);
  std::vector<RealGrid> fns = load_inputs(cfg);
  std::vector<std::string> labels = cfg.inputs;
  if (fns.empty()) {
    Rng rng(cfg.seed);
    for (int i = 0; i < cfg.count; ++i) {
      fns.push_back(random_function(rng, basis));
      labels.push_back("random_" + std::to_string(i));
    }
  }
  CsvWriter csv(dir / "norms.csv", {"config_hash", "function", "n", "m", "p", "q", "value"});
  const std::string h = cfg.hash();
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const TLNormEvaluator ev(fns[i], dict);
    for (double n : cfg.norm_n)
      for (double m : cfg.norm_m)
        for (double p : cfg.norm_p)
          for (double q : cfg.norm_q)
            csv.row({h, labels[i], format_number(n), format_number(m), format_number(p), format_number(q),
                     format_number(ev.norm({n, m, p, q}))});
    csv.row({h, labels[i], "0", "0", "bmo", "2", format_number(ev.norm({0.0, 0.0, 2.0, 2.0}))});
  }
  std::cout << "norms: " << fns.size() << " functions -> " << (dir / "norms.csv").string() << std::endl;
  return 0;
}

// ------------------------------------------------------------ paraproduct

int run_paraproduct(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = prepare_out(c, cfg);
  const RootBox root = cfg.root();
  const WaveletBasis basis(detail::family_of(cfg), root);
  const TestDictionary dict(basis, cfg.dictionary);
  Rng rng(cfg.seed);
  const auto& p = cfg.exponents.front();
  const std::size_t m = p.size();
  ParaproductSpec<double> spec;
  spec.basis = &basis;
  spec.arity = static_cast<int>(m);
  spec.symbol = cfg.symbol.empty() ? random_symbol(rng, basis, std::min(root.finest + cfg.symbol_offset, root.top),
                                                   root.top, 6)
                                   : load_symbol(cfg.symbol);
  std::vector<RealGrid> in = load_inputs(cfg);
  if (in.empty()) in = random_inputs(rng, root, m);
  if (in.size() != m) throw ConfigError("paraproduct: need one input per exponent");
  const RealGrid out = apply_paraproduct(spec, in, c.threads);
  write_binary(out, (dir / "paraproduct.bin").string());
  for (int j = 1; j <= spec.arity; ++j)
    write_binary(adjoint_apply(spec, j, in), (dir / ("adjoint_" + std::to_string(j) + ".bin")).string());
  const TLNormEvaluator eb(basis.synthesize(spec.symbol), dict);
  const double r = ExponentTuple(p).r();
  CsvWriter csv(dir / "paraproduct.csv", {"config_hash", "kappa", "n", "pi", "lhs", "rhs", "ratio"});
  const auto splits = cfg.splits.empty() ? all_splits(static_cast<int>(m), cfg.smoothness) : cfg.splits;
  for (int kappa : cfg.kappas)
    for (const auto& n : splits) {
      int tot = 0;
      std::string ns;
      for (std::size_t j = 0; j < n.size(); ++j) {
        tot += n[j];
        ns += (j ? " " : "") + std::to_string(n[j]);
      }
      const double pi = pi_bound(n, p);
      double rhs = eb.norm({double(kappa), double(-tot), plus_eps(pi, cfg.eps), 2.0});
      for (std::size_t j = 0; j < m; ++j) rhs *= sobolev_norm(in[j], n[j], p[j], basis);
      const double lhs = sobolev_norm(out, kappa, r, basis);
      csv.row({cfg.hash(), std::to_string(kappa), ns, format_number(pi), format_number(lhs), format_number(rhs),
               rhs < 1e-12 ? "" : format_number(lhs / rhs)});
    }
  std::cout << "paraproduct: " << spec.symbol.size() << " symbol terms, arity " << m << " -> " << dir.string()
            << std::endl;
  return 0;
}

// ----------------------------------------------------------------- sparse

int run_sparse(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = prepare_out(c, cfg);
  const RootBox root = cfg.root();
  const WaveletBasis basis(detail::family_of(cfg), root);
  const TestDictionary dict(basis, cfg.dictionary);
  const DyadicCube Q0(root.dim, root.top, {});
  Rng rng(cfg.seed);
  const int lo = std::min(root.finest + 2, root.top);
  std::vector<RealGrid> rest = load_inputs(cfg);
  const std::string h = cfg.hash();
  SparseCollection col;
  if (cfg.stopping == "intest") {
    const RealGrid b = cfg.b_input.empty() ? random_atom_function(rng, basis, lo, root.top, 6) : read_binary(cfg.b_input);
    const RealGrid g = cfg.g_input.empty() ? random_atom_function(rng, basis, lo, root.top, 6) : read_binary(cfg.g_input);
    if (rest.empty()) rest.push_back(random_bumps(rng, root, 3, 0.1, 1.0, 0.2, true).sample(root));
    // p = q = p_j = (number of remaining functions) + 2 satisfies the Hoelder condition
    const double pe = static_cast<double>(rest.size() + 2);
    StoppingConfig sc = StoppingConfig::for_mode(StoppingMode::intest);
    sc.theta = cfg.theta;
    sc.theta_cap = cfg.theta_cap;
    if (cfg.packing > 0.0) sc.packing_target = cfg.packing;
    const DominationReport rep =
        verify_domination(Q0, b, g, rest, dict, pe, pe, std::vector<double>(rest.size(), pe), sc);
    col = rep.collection;
    CsvWriter csv(dir / "sparse_report.csv", {"config_hash", "mode", "lhs", "sparse_rhs", "holder_rhs", "sparse_ratio",
                                              "holder_ratio"});
    csv.row({h, "intest", format_number(rep.lhs), format_number(rep.sparse_rhs), format_number(rep.holder_rhs),
             format_number(rep.sparse_ratio()), format_number(rep.holder_ratio())});
  } else {
    if (rest.empty()) rest = random_inputs(rng, root, 2);
    StoppingConfig sc = StoppingConfig::for_mode(StoppingMode::mainiter);
    sc.theta = cfg.theta;
    sc.theta_cap = cfg.theta_cap;
    sc.n = cfg.sparse_n;
    if (cfg.packing > 0.0) sc.packing_target = cfg.packing;
    SparseInputs in;
    in.f = rest;
    col = build_sparse(Q0, in, sc, dict);
    const auto tel = taylor_telescoping(rest[0], Q0, cfg.sparse_n, col.members(), cfg.dilation, root.finest + 2);
    CsvWriter csv(dir / "sparse_report.csv", {"config_hash", "mode", "telescoping_split3", "telescoping_split4"});
    csv.row({h, "mainiter", format_number(tel.split3), format_number(tel.split4)});
  }
  {
    CsvWriter csv(dir / "sparse_collection.csv", {"config_hash", "cube", "generation", "parent", "theta"});
    for (const auto& s : col.cubes)
      csv.row({h, s.cube.token(), std::to_string(s.generation), s.parent ? s.parent->token() : "",
               format_number(s.theta)});
  }
  {
    CsvWriter csv(dir / "sparse_packing.csv",
                  {"config_hash", "parent", "generation", "children_mass", "ratio", "theta", "cap_hit"});
    for (const auto& p : col.packing)
      csv.row({h, p.parent.token(), std::to_string(p.generation), format_number(p.children_mass),
               format_number(p.ratio), format_number(p.theta), p.cap_hit ? "1" : "0"});
  }
  std::cout << "sparse (" << cfg.stopping << "): " << col.cubes.size() << " cubes, " << col.generations()
            << " generations, max packing ratio " << format_number(col.max_ratio()) << std::endl;
  return 0;
}

// -------------------------------------------------------------- testbench

std::vector<double> load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel table " + path);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) v.push_back(std::stod(tok));
  return v;
}

int run_testbench(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = prepare_out(c, cfg);
  const RootBox root = cfg.root();
  const WaveletBasis basis(detail::family_of(cfg), root);
  const TestDictionary dict(basis, cfg.dictionary);
  Rng rng(cfg.seed);
  const int lo = std::min(root.finest + 3, root.top);

  std::vector<KernelEntry> entries = cfg.kernels;
  if (entries.empty()) {
    entries.push_back({"zero", "zero", 1, 1.0, 0.0, 1, 0.5, "", ""});
    entries.push_back({"planted", "planted_paraproduct", 1, 1.0, 0.0, 1, 0.5, "", ""});
    entries.push_back({"planted_form", "planted_wavelet_form", 1, 1.0, 0.0, 1, 0.5, "", ""});
    entries.push_back({"hilbert", "cz_odd", 1, 1.0 / 3.141592653589793, 4.0 * root.spacing(), 1, 1.0, "", ""});
  }
  std::vector<DyadicCube> cubes;
  for (int s = root.top; s >= lo; --s) {
    const auto at = interior_cubes(basis, s);
    for (std::size_t i = 0; i < at.size() && i < 6; ++i) cubes.push_back(at[i * at.size() / std::min<std::size_t>(6, at.size())]);
  }
  CsvWriter csv(dir / "testbench.csv", {"config_hash", "kernel", "kind", "wbp", "finfty", "low", "mid", "top", "adjoint",
                                        "testing_norm", "bench_max_ratio", "unstable", "cutoff_sensitivity"});
  for (const auto& e : entries) {
    KernelSpec K;
    K.name = e.name;
    K.arity = e.arity;
    K.scale = e.scale;
    K.eps_trunc = e.eps_trunc;
    K.k = e.k;
    K.delta = e.delta;
    if (e.kind == "zero") K.kind = KernelKind::zero;
    else if (e.kind == "cz_odd") K.kind = KernelKind::cz_odd;
    else if (e.kind == "tabulated") {
      K.kind = KernelKind::tabulated;
      K.table = load_table(e.table);
    } else if (e.kind == "planted_paraproduct") {
      K.kind = KernelKind::planted_paraproduct;
      auto pp = std::make_shared<ParaproductSpec<double>>();
      pp->basis = &basis;
      pp->arity = e.arity;
      pp->symbol = e.symbol.empty() ? random_symbol(rng, basis, lo, root.top, 12) : load_symbol(e.symbol);
      K.paraproduct = pp;
    } else {
      K.kind = KernelKind::planted_wavelet_form;
      auto wf = std::make_shared<WaveletFormSpec>();
      wf->basis = &basis;
      wf->arity = e.arity;
      const auto sym = e.symbol.empty() ? random_symbol(rng, basis, lo, root.top, 12) : load_symbol(e.symbol);
      for (const auto& [q, v] : sym) wf->weights[q] = v;
      K.wavelet_form = wf;
    }
    if (K.k > cfg.smoothness) throw ConfigError("kernel." + e.name + ": k exceeds wavelet.smoothness");
    const TestingSymbols ts = testing_symbols(K, basis, K.k, cubes, cfg.cutoff_radius);
    const TestingNormParts parts = testing_norm(ts, cfg.testing_p, cfg.testing_q, dict);
    std::vector<std::vector<RealGrid>> tuples;
    for (int t = 0; t < 4; ++t) tuples.push_back(random_inputs(rng, root, static_cast<std::size_t>(K.arity)));
    std::string bench = "";
    try {
      const BenchReport br = sobolev_bound_bench(K, basis, tuples,
                                                 std::vector<double>(static_cast<std::size_t>(K.arity),
                                                                     cfg.testing_p * K.arity),
                                                 K.k, parts.total());
      bench = format_number(br.max_ratio);
    } catch (const QuadratureRefusal& err) {
      std::cerr << "testbench: " << e.name << ": bench skipped: " << err.what() << std::endl;
    }
    csv.row({cfg.hash(), e.name, e.kind, format_number(wbp_check(K, basis, cubes)), format_number(finfty_constant(ts, dict)),
             format_number(parts.low), format_number(parts.mid), format_number(parts.top), format_number(parts.adjoint),
             format_number(parts.total()), bench, std::to_string(ts.unstable.size()),
             format_number(ts.cutoff_sensitivity)});
    std::cout << "testbench: " << e.name << " (" << e.kind << ") testing norm " << format_number(parts.total())
              << std::endl;
  }
  return 0;
}

// ---------------------------------------------------------- theorem-probe

int run_probe(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const fs::path dir = prepare_out(c, cfg);
  const ProbeReport rep = theorem_probe(cfg.probe_settings(c.threads));
  write_probe_report(rep, dir, cfg.hash());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < rep.summary.size(); ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(rep.summary[i].growth);
  }
  write_plot_data(dir / "theorem_probe_growth.dat", x, y, "configuration index vs growth factor");

  LacunarySettings ls;
  ls.order = cfg.order;
  ls.smoothness = cfg.smoothness;
  ls.dilation = cfg.dilation;
  ls.refine = cfg.refine;
  ls.dictionary = cfg.dictionary;
  ls.eps = cfg.eps;
  ls.seed = cfg.seed;
  const auto lac = lacunary_probe(ls);
  CsvWriter csv(dir / "beyond_bmo.csv", {"config_hash", "depth", "finest", "bmo", "f_norm", "max_ratio", "power_bmo",
                                         "power_f_norm"});
  for (const auto& r : lac)
    csv.row({cfg.hash(), std::to_string(r.depth), std::to_string(r.finest), format_number(r.bmo),
             format_number(r.fnorm), format_number(r.max_ratio), format_number(r.power_bmo),
             format_number(r.power_fnorm)});
  std::size_t skipped = 0;
  for (const auto& r : rep.rows) skipped += r.skipped;
  std::cout << "theorem-probe: " << rep.rows.size() << " rows (" << skipped << " skipped), " << rep.summary.size()
            << " configurations, worst growth " << format_number(rep.worst_growth) << " (cap "
            << format_number(cfg.growth_cap) << ")" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadica: dyadic wavelet experiments"};
  app.require_subcommand(1);
  Common common;
  std::vector<std::string> names;

  auto* suite = app.add_subcommand("suite", "run acceptance suites (all when no name is given)");
  add_common(suite, common);
  suite->add_option("names", names, "wavelet, norms, sparse, paraproduct, testbench, theorem");
  auto* norms = app.add_subcommand("norms", "Triebel-Lizorkin type norms of input functions");
  add_common(norms, common);
  auto* para = app.add_subcommand("paraproduct", "apply a paraproduct and its adjoints");
  add_common(para, common);
  auto* sparse = app.add_subcommand("sparse", "stopping-time collection and sparse bound");
  add_common(sparse, common);
  auto* bench = app.add_subcommand("testbench", "testing symbols and bounds for registry kernels");
  add_common(bench, common);
  auto* probe = app.add_subcommand("theorem-probe", "refinement sweep of the paraproduct bounds");
  add_common(probe, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*suite) return run_suite_cmd(common, names);
    if (*norms) return run_norms(common);
    if (*para) return run_paraproduct(common);
    if (*sparse) return run_sparse(common);
    if (*bench) return run_testbench(common);
    if (*probe) return run_probe(common);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
