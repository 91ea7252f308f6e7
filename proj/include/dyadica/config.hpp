#pragma once

// Experiment configuration: INI-style `key = value` text with [sections].

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/funcspace.hpp"
#include "dyadica/probe.hpp"
#include "dyadica/report.hpp"

namespace dyadica {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
  if (t == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(key + ": not a number: '" + t + "'");
  return v;
}

inline long long parse_int(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(key + ": not an integer: '" + t + "'");
  return v;
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!t.empty() && t[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a seed: '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(key + ": not a seed: '" + t + "'");
  return v;
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

template <typename I>
std::string join_ints(const std::vector<I>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace detail

/// One registry kernel ([kernel.NAME] section).
struct KernelEntry {
  std::string name;
  std::string kind = "zero";  // zero | cz_odd | tabulated | planted_paraproduct | planted_wavelet_form
  int arity = 1;
  double scale = 1.0;
  double eps_trunc = 0.0;
  int k = 1;
  double delta = 0.5;
  std::string symbol;  // coefficient CSV for planted kernels
  std::string table;   // whitespace numbers for tabulated kernels
};

struct ExperimentConfig {
  // root box
  int dim = 1;
  int top = 2;
  int finest = -6;
  // wavelet
  int order = 3;
  int smoothness = 2;
  int refine = 12;
  int dilation = 5;
  int dictionary = 8;
  // exponent tuples and smoothness budget
  std::vector<std::vector<double>> exponents{{4.0, 4.0}, {2.0, kInf}};
  std::vector<int> kappas{-1, 0, 1};
  std::vector<std::vector<int>> splits;  // empty: all with sum <= k
  double eps = 0.1;
  // ensemble
  int count = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> generators{"atoms", "bumps", "plateau"};
  int symbol_offset = 4;
  // tolerances
  double growth_cap = 1.25;
  double equality_eps = 1e-8;
  // refinement sweep
  std::vector<int> sweep{-6, -7, -8};
  // sparse
  std::string stopping = "intest";
  double theta = 16.0;
  double theta_cap = 1048576.0;
  double packing = 0.0;  // 0: default for the mode
  int sparse_n = 1;
  // norms
  std::vector<double> norm_n{0.0};
  std::vector<double> norm_m{0.0};
  std::vector<double> norm_p{2.0};
  std::vector<double> norm_q{2.0};
  // testbench
  double cutoff_radius = 8.0;
  double testing_p = 2.0;
  double testing_q = 4.0;
  std::vector<KernelEntry> kernels;
  // inputs for the single-shot subcommands
  std::vector<std::string> inputs;
  std::string symbol;
  std::string g_input;
  std::string b_input;
  // output
  std::string out_dir = "out";

  RootBox root() const { return RootBox{dim, top, finest}; }

  /// Derived integrability index of the first split and exponent tuple.
  double pi() const {
    const auto s = splits.empty() ? std::vector<int>(exponents.front().size(), 0) : splits.front();
    return pi_bound(s, exponents.front());
  }

  void validate() const {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("root.dim must lie in [1, 3]");
    if (finest >= top) throw ConfigError("root.finest must be below root.top");
    if (static_cast<long long>(top - finest) * dim > 24) throw ConfigError("grid too large: (top - finest) * dim > 24");
    if (order < 1) throw ConfigError("wavelet.order must be positive");
    if (smoothness < 0 || smoothness + 1 > order) throw ConfigError("wavelet.smoothness must satisfy 0 <= k <= N - 1");
    if (dilation < 2 * order - 1 || dilation % 2 == 0) throw ConfigError("wavelet.dilation must be odd and >= 2N - 1");
    if (dictionary < 1) throw ConfigError("dictionary.size must be positive");
    if (exponents.empty()) throw ConfigError("exponents.tuples is empty");
    const std::size_t m = exponents.front().size();
    for (const auto& p : exponents) {
      if (p.size() != m) throw ConfigError("exponent tuples must share one arity");
      for (double v : p)
        if (!(v > 1.0)) throw ConfigError("exponents must satisfy p_j > 1");
    }
    for (int kp : kappas)
      if (kp < -smoothness || kp > smoothness) throw ConfigError("kappa must lie in [-k, k]");
    for (const auto& n : splits) {
      if (n.size() != m) throw ConfigError("each split needs one entry per exponent");
      int tot = 0;
      for (int v : n) {
        if (v < 0 || v > smoothness) throw ConfigError("split entries must lie in [0, k]");
        tot += v;
      }
      if (tot > smoothness) throw ConfigError("split sum n must not exceed k");
    }
    if (!(eps > 0.0)) throw ConfigError("smoothness.eps must be positive");
    if (count < 1) throw ConfigError("ensemble.count must be positive");
    for (const auto& g : generators)
      if (g != "atoms" && g != "bumps" && g != "plateau" && g != "lacunary")
        throw ConfigError("unknown generator '" + g + "'");
    if (!(growth_cap >= 1.0)) throw ConfigError("tolerances.growth_cap must be >= 1");
    if (!(equality_eps > 0.0)) throw ConfigError("tolerances.equality_eps must be positive");
    if (sweep.empty()) throw ConfigError("sweep.finest is empty");
    for (int J : sweep)
      if (J >= top) throw ConfigError("sweep levels must be below root.top");
    if (stopping != "intest" && stopping != "mainiter") throw ConfigError("sparse.mode must be intest or mainiter");
    if (!(theta > 1.0) || theta_cap < theta) throw ConfigError("sparse.theta must exceed 1 and not exceed theta_cap");
    if (packing < 0.0 || packing >= 1.0) throw ConfigError("sparse.packing must lie in [0, 1)");
    if (sparse_n < 0 || sparse_n > smoothness) throw ConfigError("sparse.n must lie in [0, k]");
    if (!(testing_p >= 1.0 && testing_q > testing_p)) throw ConfigError("testbench needs 1 <= p < q");
    if (!(cutoff_radius > 0.0)) throw ConfigError("testbench.cutoff_radius must be positive");
    for (const auto& k : kernels) {
      static const std::set<std::string> kinds{"zero", "cz_odd", "tabulated", "planted_paraproduct",
                                               "planted_wavelet_form"};
      if (!kinds.count(k.kind)) throw ConfigError("kernel." + k.name + ": unknown kind '" + k.kind + "'");
      if (k.arity < 1) throw ConfigError("kernel." + k.name + ": arity must be positive");
      if (k.eps_trunc < 0.0) throw ConfigError("kernel." + k.name + ": eps_trunc must be >= 0");
      if (k.kind == "tabulated" && (k.arity != 1 || k.table.empty()))
        throw ConfigError("kernel." + k.name + ": tabulated kernels are bilinear and need a table");
      if (k.kind == "planted_paraproduct" && k.symbol.empty())
        throw ConfigError("kernel." + k.name + ": planted_paraproduct needs a symbol file");
    }
  }

  /// Resolved configuration as INI text in fixed order; parse_config reads it back
  /// to an identical configuration. The output directory is not part of it.
  std::string canonical() const {
    std::ostringstream o;
    o << "[root]\ndim = " << dim << "\ntop = " << top << "\nfinest = " << finest << '\n';
    o << "[wavelet]\norder = " << order << "\nsmoothness = " << smoothness << "\nrefine = " << refine
      << "\ndilation = " << dilation << '\n';
    o << "[dictionary]\nsize = " << dictionary << '\n';
    o << "[exponents]\ntuples = ";
    for (std::size_t i = 0; i < exponents.size(); ++i) o << (i ? " | " : "") << detail::join_numbers(exponents[i]);
    o << "\n[smoothness]\nkappa = " << detail::join_ints(kappas) << "\nn = ";
    if (splits.empty()) o << "all";
    for (std::size_t i = 0; i < splits.size(); ++i) o << (i ? " | " : "") << detail::join_ints(splits[i]);
    o << "\neps = " << format_number(eps) << '\n';
    o << "[ensemble]\ncount = " << count << "\nseed = " << seed << "\ngenerators = ";
    for (std::size_t i = 0; i < generators.size(); ++i) o << (i ? "," : "") << generators[i];
    o << "\nsymbol_offset = " << symbol_offset << '\n';
    o << "[tolerances]\ngrowth_cap = " << format_number(growth_cap) << "\nequality_eps = " << format_number(equality_eps)
      << '\n';
    o << "[sweep]\nfinest = " << detail::join_ints(sweep) << '\n';
    o << "[sparse]\nmode = " << stopping << "\ntheta = " << format_number(theta)
      << "\ntheta_cap = " << format_number(theta_cap) << "\npacking = " << format_number(packing)
      << "\nn = " << sparse_n << '\n';
    o << "[norms]\nn = " << detail::join_numbers(norm_n) << "\nm = " << detail::join_numbers(norm_m)
      << "\np = " << detail::join_numbers(norm_p) << "\nq = " << detail::join_numbers(norm_q) << '\n';
    o << "[testbench]\ncutoff_radius = " << format_number(cutoff_radius) << "\np = " << format_number(testing_p)
      << "\nq = " << format_number(testing_q) << '\n';
    if (!inputs.empty() || !symbol.empty() || !g_input.empty() || !b_input.empty()) {
      o << "[inputs]\n";
      if (!inputs.empty()) {
        o << "files = ";
        for (std::size_t i = 0; i < inputs.size(); ++i) o << (i ? "," : "") << inputs[i];
        o << '\n';
      }
      if (!symbol.empty()) o << "symbol = " << symbol << '\n';
      if (!g_input.empty()) o << "g = " << g_input << '\n';
      if (!b_input.empty()) o << "b = " << b_input << '\n';
    }
    for (const auto& k : kernels) {
      o << "[kernel." << k.name << "]\nkind = " << k.kind << "\narity = " << k.arity
        << "\nscale = " << format_number(k.scale) << "\neps_trunc = " << format_number(k.eps_trunc) << "\nk = " << k.k
        << "\ndelta = " << format_number(k.delta) << '\n';
      if (!k.symbol.empty()) o << "symbol = " << k.symbol << '\n';
      if (!k.table.empty()) o << "table = " << k.table << '\n';
    }
    return o.str();
  }

  std::string hash() const { return hex64(fnv1a(canonical())); }

  ProbeSettings probe_settings(int threads = 1) const {
    ProbeSettings st;
    st.dim = dim;
    st.top = top;
    st.finest = sweep;
    st.order = order;
    st.smoothness = smoothness;
    st.dilation = dilation;
    st.refine = refine;
    st.dictionary = dictionary;
    st.arity = static_cast<int>(exponents.front().size());
    st.kappas = kappas;
    st.splits = splits;
    st.exponents = exponents;
    st.eps = eps;
    st.members = count;
    st.symbol_offset = symbol_offset;
    st.seed = seed;
    st.threads = threads;
    return st;
  }
};

namespace detail {

inline std::vector<std::vector<double>> parse_tuples(const std::string& key, const std::string& s) {
  std::vector<std::vector<double>> out;
  for (const auto& part : split(s, "|;")) {
    if (part.empty()) continue;
    std::vector<double> t;
    for (const auto& v : split(part, ",")) t.push_back(parse_double(key, v));
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<int> parse_ints(const std::string& key, const std::string& s) {
  std::vector<int> out;
  for (const auto& v : split(s, ",")) out.push_back(static_cast<int>(parse_int(key, v)));
  return out;
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& v : split(s, ",")) out.push_back(parse_double(key, v));
  return out;
}

}  // namespace detail

/// Reads a configuration from INI text. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(std::istream& in, bool validate = true) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c;
  using detail::parse_double;
  using detail::parse_int;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
    if (section.rfind("kernel.", 0) == 0) {
      KernelEntry k;
      k.name = section.substr(7);
      if (k.name.empty()) throw ConfigError("kernel section without a name");
      for (const auto& [key, node] : body) {
        const std::string v = detail::trim(node.data());
        const std::string full = section + "." + key;
        if (key == "kind") k.kind = v;
        else if (key == "arity") k.arity = static_cast<int>(parse_int(full, v));
        else if (key == "scale") k.scale = parse_double(full, v);
        else if (key == "eps_trunc") k.eps_trunc = parse_double(full, v);
        else if (key == "k") k.k = static_cast<int>(parse_int(full, v));
        else if (key == "delta") k.delta = parse_double(full, v);
        else if (key == "symbol") k.symbol = v;
        else if (key == "table") k.table = v;
        else throw ConfigError("unknown key " + full);
      }
      c.kernels.push_back(std::move(k));
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string v = detail::trim(node.data());
      const std::string full = section + "." + key;
      if (full == "root.dim") c.dim = static_cast<int>(parse_int(full, v));
      else if (full == "root.top") c.top = static_cast<int>(parse_int(full, v));
      else if (full == "root.finest") c.finest = static_cast<int>(parse_int(full, v));
      else if (full == "wavelet.order") c.order = static_cast<int>(parse_int(full, v));
      else if (full == "wavelet.smoothness") c.smoothness = static_cast<int>(parse_int(full, v));
      else if (full == "wavelet.refine") c.refine = static_cast<int>(parse_int(full, v));
      else if (full == "wavelet.dilation") c.dilation = static_cast<int>(parse_int(full, v));
      else if (full == "dictionary.size") c.dictionary = static_cast<int>(parse_int(full, v));
      else if (full == "exponents.tuples") c.exponents = detail::parse_tuples(full, v);
      else if (full == "smoothness.kappa") c.kappas = detail::parse_ints(full, v);
      else if (full == "smoothness.n") {
        c.splits.clear();
        if (v != "all")
          for (const auto& t : detail::parse_tuples(full, v)) {
            std::vector<int> s;
            for (double x : t) {
              if (x != std::floor(x)) throw ConfigError(full + ": entries must be integers");
              s.push_back(static_cast<int>(x));
            }
            c.splits.push_back(std::move(s));
          }
      }
      else if (full == "smoothness.eps") c.eps = parse_double(full, v);
      else if (full == "ensemble.count") c.count = static_cast<int>(parse_int(full, v));
      else if (full == "ensemble.seed") c.seed = detail::parse_seed(full, v);
      else if (full == "ensemble.generators") c.generators = detail::split(v, ",");
      else if (full == "ensemble.symbol_offset") c.symbol_offset = static_cast<int>(parse_int(full, v));
      else if (full == "tolerances.growth_cap") c.growth_cap = parse_double(full, v);
      else if (full == "tolerances.equality_eps") c.equality_eps = parse_double(full, v);
      else if (full == "sweep.finest") c.sweep = detail::parse_ints(full, v);
      else if (full == "sparse.mode") c.stopping = v;
      else if (full == "sparse.theta") c.theta = parse_double(full, v);
      else if (full == "sparse.theta_cap") c.theta_cap = parse_double(full, v);
      else if (full == "sparse.packing") c.packing = parse_double(full, v);
      else if (full == "sparse.n") c.sparse_n = static_cast<int>(parse_int(full, v));
      else if (full == "norms.n") c.norm_n = detail::parse_doubles(full, v);
      else if (full == "norms.m") c.norm_m = detail::parse_doubles(full, v);
      else if (full == "norms.p") c.norm_p = detail::parse_doubles(full, v);
      else if (full == "norms.q") c.norm_q = detail::parse_doubles(full, v);
      else if (full == "testbench.cutoff_radius") c.cutoff_radius = parse_double(full, v);
      else if (full == "testbench.p") c.testing_p = parse_double(full, v);
      else if (full == "testbench.q") c.testing_q = parse_double(full, v);
      else if (full == "inputs.files") c.inputs = detail::split(v, ",");
      else if (full == "inputs.symbol") c.symbol = v;
      else if (full == "inputs.g") c.g_input = v;
      else if (full == "inputs.b") c.b_input = v;
      else if (full == "output.dir") c.out_dir = v;
      else throw ConfigError("unknown key " + full);
    }
  }
  if (validate) c.validate();
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text, bool validate = true) {
  std::istringstream in(text);
  return parse_config(in, validate);
}

inline ExperimentConfig load_config(const std::string& path, bool validate = true) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, validate);
}

}  // namespace dyadica
