#pragma once

// Stopping-time construction of sparse collections and the sparse bounds
// they produce for intrinsic and localized wavelet forms.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "dyadica/funcspace.hpp"
#include "dyadica/paraproduct.hpp"
#include "dyadica/tlnorm.hpp"

namespace dyadica {

enum class StoppingMode {
  intest,    // stop on square functions of b, g and maximal averages of f_j, j >= 2
  mainiter,  // stop on M(1_{wQ} |grad^n f_1|) over the whole dilate wZ
};

struct StoppingConfig {
  StoppingMode mode = StoppingMode::intest;
  double theta = 16.0;
  double theta_cap = 1048576.0;  // 2^20
  double packing_target = 1.0 / 64.0;
  int max_depth = 64;
  int n = 0;  // derivative order for mainiter mode

  static StoppingConfig for_mode(StoppingMode m) {
    StoppingConfig c;
    c.mode = m;
    c.packing_target = m == StoppingMode::intest ? 1.0 / 64.0 : 0.25;
    return c;
  }
  void validate() const {
    if (!(theta > 1.0)) throw ParameterError("stopping threshold must exceed 1");
    if (!(packing_target > 0.0 && packing_target < 1.0)) throw ParameterError("packing target must lie in (0,1)");
    if (max_depth < 1) throw ParameterError("max_depth must be positive");
  }
};

/// Inputs of a stopping construction: b and g for intest mode, f[0] = f_1 in
/// mainiter mode, f[1..] are the remaining functions.
struct SparseInputs {
  std::optional<RealGrid> b;
  std::optional<RealGrid> g;
  std::vector<RealGrid> f;
};

struct SelectedCube {
  DyadicCube cube;
  int generation = 0;
  std::optional<DyadicCube> parent;
  double theta = 0.0;  // threshold used when this cube's children were selected
};

struct ParentPacking {
  DyadicCube parent;
  int generation = 0;  // generation of the parent
  double children_mass = 0.0;
  double ratio = 0.0;
  double theta = 0.0;
  bool cap_hit = false;
};

struct SparseCollection {
  DyadicCube root;
  std::vector<SelectedCube> cubes;  // generation order, canonical within a generation
  std::vector<ParentPacking> packing;
  bool truncated = false;
  double max_theta = 0.0;

  std::vector<DyadicCube> members() const {
    std::vector<DyadicCube> v;
    for (const auto& c : cubes) v.push_back(c.cube);
    return v;
  }
  int generations() const {
    int g = 0;
    for (const auto& c : cubes) g = std::max(g, c.generation);
    return g;
  }
  double max_ratio() const {
    double r = 0.0;
    for (const auto& p : packing) r = std::max(r, p.ratio);
    return r;
  }
  /// Measure of generation t cubes divided by that of generation t-1.
  std::vector<double> generation_ratios() const {
    std::vector<double> mass(static_cast<std::size_t>(generations()) + 1, 0.0);
    for (const auto& c : cubes) mass[static_cast<std::size_t>(c.generation)] += c.cube.volume();
    std::vector<double> r;
    for (std::size_t t = 1; t < mass.size(); ++t) r.push_back(mass[t - 1] > 0 ? mass[t] / mass[t - 1] : 0.0);
    return r;
  }
  double total_mass() const {
    double m = 0.0;
    for (const auto& c : cubes) m += c.cube.volume();
    return m;
  }
};

namespace detail {

/// min over the cells of every dyadic subcube, by levels (max pyramid of negatives).
inline ScalePyramid min_pyramid(const RootBox& root, const std::vector<double>& cells) {
  std::vector<double> neg(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) neg[i] = -cells[i];
  // ScalePyramid's max mode starts from 0, so shift to keep values nonnegative
  double lo = 0.0;
  for (double v : neg) lo = std::min(lo, v);
  for (double& v : neg) v -= lo;
  ScalePyramid p(root, std::move(neg), true);
  return p;
}

}  // namespace detail

/// Per-cube stopping scores for one anchor cube: a cube Q strictly inside the
/// anchor is a stopping candidate at threshold Theta iff score(Q) > Theta.
class StoppingScores {
 public:
  StoppingScores(const SparseInputs& in, const DyadicCube& Q0, const StoppingConfig& cfg,
                 const TestDictionary* dict, const TLNormEvaluator* eb, const TLNormEvaluator* eg)
      : root_(in.f.empty() ? (in.b ? in.b->root() : in.g->root()) : in.f[0].root()), anchor_(Q0) {
    const int w = dict ? dict->basis().dilation() : 1;
    if (cfg.mode == StoppingMode::intest) {
      std::vector<std::vector<double>> ratios;
      auto add_square = [&](const TLNormEvaluator* ev) {
        if (!ev) return;
        RealGrid s = ev->square_function(Q0, 0.0, 2.0);
        const double avg = local_average(s, Q0, 1.0);
        ratios.push_back(normalized(s, avg));
      };
      add_square(eb);
      add_square(eg);
      for (std::size_t j = 1; j < in.f.size(); ++j) {
        const CellBox box = root_.dilated_cells(Q0, w);
        const RealGrid mf = maximal(in.f[j].restricted(box), 1.0);
        ratios.push_back(normalized(mf, local_average(in.f[j], box, 1.0)));
      }
      score_levels_.assign(static_cast<std::size_t>(root_.levels()) + 1, {});
      for (const auto& r : ratios) {
        // value at cube = min over its cells of r; score = max over criteria
        std::vector<double> neg(r.size());
        double shift = 0.0;
        for (double v : r) shift = std::max(shift, v);
        for (std::size_t i = 0; i < r.size(); ++i) neg[i] = shift - r[i];
        ScalePyramid p(root_, std::move(neg), true);
        for (int s = 0; s <= root_.levels(); ++s) {
          auto& dst = score_levels_[static_cast<std::size_t>(s)];
          const auto& src = p.level(s);
          if (dst.empty()) dst.assign(src.size(), 0.0);
          for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(dst[i], shift - src[i]);
        }
      }
      if (ratios.empty())
        for (int s = 0; s <= root_.levels(); ++s)
          score_levels_.push_back(std::vector<double>(static_cast<std::size_t>(
                                                          ScalePyramid::ipow(root_.cubes_per_side(root_.finest + s), root_.dim)),
                                                      0.0));
    } else {
      if (in.f.empty()) throw ParameterError("mainiter mode needs f_1");
      const CellBox wq = root_.dilated_cells(Q0, w);
      const RealGrid grad = cfg.n == 0 ? in.f[0].abs() : gradient_magnitude(in.f[0], cfg.n);
      const double avg = local_average(grad, wq, 1.0);
      const RealGrid mf = maximal(grad.restricted(wq), 1.0);
      const std::vector<double> r = normalized(mf, avg);
      wide_ = true;
      for (const auto& z : root_.subcubes(Q0)) {
        double m = std::numeric_limits<double>::infinity();
        mf.for_each_cell(root_.dilated_cells(z, w), [&](const IndexVec&, Index k) { m = std::min(m, r[k]); });
        wide_scores_.emplace(z, std::isinf(m) ? 0.0 : m);
      }
    }
  }

  double score(const DyadicCube& q) const {
    if (wide_) return wide_scores_.at(q);
    const int s = q.scale - root_.finest;
    const Index m = root_.cubes_per_side(q.scale);
    Index k = 0;
    for (int i = root_.dim - 1; i >= 0; --i) k = k * m + q.pos[i];
    return score_levels_[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
  }

  /// Maximal cubes strictly inside the anchor with score > theta, canonical top-down order.
  std::vector<DyadicCube> select(double theta) const {
    std::vector<DyadicCube> out;
    if (anchor_.scale <= root_.finest) return out;
    std::deque<DyadicCube> work;
    for (const auto& c : root_.children(anchor_)) work.push_back(c);
    std::vector<DyadicCube> next;
    while (!work.empty()) {
      // process level by level to keep canonical order
      next.clear();
      for (const auto& q : work) {
        if (score(q) > theta)
          out.push_back(q);
        else if (q.scale > root_.finest)
          for (const auto& c : root_.children(q)) next.push_back(c);
      }
      work.assign(next.begin(), next.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<double> normalized(const RealGrid& v, double avg) const {
    std::vector<double> r(v.size(), 0.0);
    if (avg <= 0.0) return r;
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = v[static_cast<Index>(k)] / avg;
    return r;
  }

  RootBox root_;
  DyadicCube anchor_;
  bool wide_ = false;
  std::vector<std::vector<double>> score_levels_;
  std::map<DyadicCube, double> wide_scores_;
};

/// Stopping children of Q0 at a fixed threshold.
inline std::vector<DyadicCube> stopping_children(const DyadicCube& Q0, const SparseInputs& in,
                                                 const StoppingConfig& cfg, const TestDictionary& dict) {
  cfg.validate();
  std::optional<TLNormEvaluator> eb, eg;
  if (cfg.mode == StoppingMode::intest) {
    if (in.b) eb.emplace(*in.b, dict);
    if (in.g) eg.emplace(*in.g, dict);
  }
  StoppingScores sc(in, Q0, cfg, &dict, eb ? &*eb : nullptr, eg ? &*eg : nullptr);
  return sc.select(cfg.theta);
}

/// Iterated stopping construction. For every selected cube the threshold
/// starts at cfg.theta and doubles until its children pack below the target.
inline SparseCollection build_sparse(const DyadicCube& Q0, const SparseInputs& in, const StoppingConfig& cfg,
                                     const TestDictionary& dict) {
  cfg.validate();
  std::optional<TLNormEvaluator> eb, eg;
  if (cfg.mode == StoppingMode::intest) {
    if (in.b) eb.emplace(*in.b, dict);
    if (in.g) eg.emplace(*in.g, dict);
  }
  SparseCollection col;
  col.root = Q0;
  col.cubes.push_back({Q0, 0, std::nullopt, 0.0});
  std::size_t head = 0;
  while (head < col.cubes.size()) {
    const SelectedCube cur = col.cubes[head];
    const std::size_t idx = head++;
    if (cur.generation >= cfg.max_depth) {
      col.truncated = true;
      continue;
    }
    StoppingScores sc(in, cur.cube, cfg, &dict, eb ? &*eb : nullptr, eg ? &*eg : nullptr);
    double theta = cfg.theta;
    std::vector<DyadicCube> kids;
    bool cap = false;
    while (true) {
      kids = sc.select(theta);
      double mass = 0.0;
      for (const auto& k : kids) mass += k.volume();
      if (mass <= cfg.packing_target * cur.cube.volume()) break;
      if (theta * 2.0 > cfg.theta_cap) {
        cap = true;
        break;
      }
      theta *= 2.0;
    }
    double mass = 0.0;
    for (const auto& k : kids) mass += k.volume();
    col.cubes[idx].theta = theta;
    col.max_theta = std::max(col.max_theta, theta);
    col.packing.push_back({cur.cube, cur.generation, mass, mass / cur.cube.volume(), theta, cap});
    for (const auto& k : kids) col.cubes.push_back({k, cur.generation + 1, cur.cube, 0.0});
  }
  return col;
}

/// Stopped square function of f over the non-stopped cubes G(Q0), relative
/// to Theta <S^0_{2,Q0} f>_{1,Q0}; returns the max over cells of Q0 (<= 1 expected).
inline double stopped_square_ratio(const TLNormEvaluator& ev, const DyadicCube& Q0,
                                   const std::vector<DyadicCube>& stopping, double theta) {
  const RootBox& root = ev.root();
  const double avg = local_average(ev.square_function(Q0, 0.0, 2.0), Q0, 1.0);
  RealGrid acc(root);
  for (const auto& g : root.subcubes(Q0)) {
    bool stopped = false;
    for (const auto& s : stopping)
      if (g.inside(s)) {
        stopped = true;
        break;
      }
    if (stopped) continue;
    const double c = ev.coeff(g);
    if (c == 0.0) continue;
    acc.for_each_cell(root.cells(g), [&](const IndexVec&, Index k) { acc[k] += c * c; });
  }
  double mx = 0.0;
  acc.for_each_cell(root.cells(Q0), [&](const IndexVec&, Index k) { mx = std::max(mx, std::sqrt(acc[k])); });
  if (avg == 0.0) return mx == 0.0 ? 0.0 : kInf;
  return mx / (theta * avg);
}

/// sum_{Q in S} |Q| <S^0_{2,Q} b>_{1,Q} <S^0_{2,Q} g>_{1,Q} prod_{j>=2} <f_j>_{1,wQ}.
inline double sparse_form_eval(const std::vector<DyadicCube>& S, const TLNormEvaluator& eb,
                               const TLNormEvaluator& eg, const std::vector<RealGrid>& rest, int w) {
  double total = 0.0;
  for (const auto& q : S) {
    double t = q.volume() * eb.local_square_average(q, 0.0, 2.0, 1.0);
    if (t == 0.0) continue;
    t *= eg.local_square_average(q, 0.0, 2.0, 1.0);
    for (const auto& f : rest) t *= local_average(f, eb.root().dilated_cells(q, w), 1.0);
    total += t;
  }
  return total;
}

struct DominationReport {
  double lhs = 0.0;
  double sparse_rhs = 0.0;
  double holder_rhs = 0.0;
  double sparse_ratio() const { return sparse_rhs > 1e-300 ? lhs / sparse_rhs : (lhs == 0.0 ? 0.0 : kInf); }
  double holder_ratio() const { return holder_rhs > 1e-300 ? lhs / holder_rhs : (lhs == 0.0 ? 0.0 : kInf); }
  SparseCollection collection;
};

/// Checks 1/p + 1/q + sum_{j>=2} 1/p_j = 1.
inline void check_holder(double p, double q, const std::vector<double>& pj) {
  double s = inverse(p) + inverse(q);
  for (double v : pj) s += inverse(v);
  if (std::abs(s - 1.0) > 1e-12) throw ParameterError("exponents violate 1/p + 1/q + sum 1/p_j = 1");
  if (!(p > 1.0 && q > 1.0)) throw ParameterError("exponents must exceed 1");
  for (double v : pj)
    if (!(v > 1.0)) throw ParameterError("exponents must exceed 1");
}

/// Intrinsic-form domination: lhs = Lambda_{Q0}(b, g, f_2..f_m) against the
/// sparse bound and the Hoelder bound |Q0| l(Q0)^{-theta} ||b||_{F^{0,-theta}_{p,2}}
/// <g>_{q,wQ0} prod <f_j>_{p_j,wQ0}.
inline DominationReport verify_domination(const DyadicCube& Q0, const RealGrid& b, const RealGrid& g,
                                          const std::vector<RealGrid>& rest, const TestDictionary& dict,
                                          double p, double q, const std::vector<double>& pj,
                                          StoppingConfig cfg = StoppingConfig::for_mode(StoppingMode::intest),
                                          double theta_exp = 0.0) {
  check_holder(p, q, pj);
  if (pj.size() != rest.size()) throw ParameterError("one exponent per remaining function");
  const int w = dict.basis().dilation();
  DominationReport rep;
  std::vector<RealGrid> slots{g};
  slots.insert(slots.end(), rest.begin(), rest.end());
  rep.lhs = intrinsic_form(Q0, b, slots, dict);
  SparseInputs in{b, g, {}};
  in.f.push_back(RealGrid(b.root()));  // placeholder for f_1, unused in intest mode
  in.f.insert(in.f.end(), rest.begin(), rest.end());
  cfg.mode = StoppingMode::intest;
  rep.collection = build_sparse(Q0, in, cfg, dict);
  TLNormEvaluator eb(b, dict), eg(g, dict);
  rep.sparse_rhs = sparse_form_eval(rep.collection.members(), eb, eg, rest, w);
  const RootBox& root = b.root();
  const CellBox wq = root.dilated_cells(Q0, w);
  double h = Q0.volume() * std::pow(Q0.side(), -theta_exp) * eb.norm({0.0, -theta_exp, p, 2.0}) *
             local_average(g, wq, q);
  for (std::size_t j = 0; j < rest.size(); ++j) h *= local_average(rest[j], wq, pj[j]);
  rep.holder_rhs = h;
  return rep;
}

/// Main-iteration domination: lhs = |V_Q(b, g, f_1 - P^n_Q f_1, f_2..)| against
/// ||b||_{F^{0,-n}_{p,2}} sum_{Z in Z(Q)} |Z| <g>_{q,wZ} <grad^n f_1>_{1,wZ} prod <f_u>_{p_u,wZ}.
inline DominationReport verify_mainiter(const ParaproductSpec<double>& spec, const DyadicCube& Q,
                                        const RealGrid& g, const std::vector<RealGrid>& fs, int n,
                                        const TestDictionary& dict, double p, double q,
                                        const std::vector<double>& pj, double symbol_norm) {
  check_holder(p, q, pj);
  if (fs.size() != pj.size() + 1) throw ParameterError("one exponent per function f_2..f_m");
  const RootBox& root = g.root();
  const int w = dict.basis().dilation();
  std::vector<RealGrid> args = fs;
  if (n > 0) {
    Jet jet(fs[0], n - 1);
    args[0] -= taylor_polynomial(jet, Q, n).on(root, root.all_cells());
  }
  DominationReport rep;
  rep.lhs = std::abs(localized_form(spec, Q, g, args));
  StoppingConfig cfg = StoppingConfig::for_mode(StoppingMode::mainiter);
  cfg.n = n;
  SparseInputs in;
  in.f = fs;
  rep.collection = build_sparse(Q, in, cfg, dict);
  const RealGrid grad = n == 0 ? fs[0].abs() : gradient_magnitude(fs[0], n);
  double s = 0.0;
  for (const auto& z : rep.collection.members()) {
    const CellBox wz = root.dilated_cells(z, w);
    double t = z.volume() * local_average(g, wz, q) * local_average(grad, wz, 1.0);
    for (std::size_t u = 1; u < fs.size(); ++u) t *= local_average(fs[u], wz, pj[u - 1]);
    s += t;
  }
  rep.sparse_rhs = symbol_norm * s;
  rep.holder_rhs = rep.sparse_rhs;
  return rep;
}

struct TelescopingReport {
  double split3 = 0.0;  // max over P in D(Q) of <f - P_Q f>_{1,wP} / (l(Q)^n inf_P M(1_{wQ} grad^n f))
  double split4 = 0.0;  // max over Z in S, P in D(Z) of <P_Z f - P_Q f>_{1,wP} / (l(Q)^n inf_Z M(...))
};

/// Measured constants of the two Taylor telescoping bounds. Cubes P below
/// min_scale are skipped to bound the cost.
inline TelescopingReport taylor_telescoping(const RealGrid& f, const DyadicCube& Q, int n,
                                            const std::vector<DyadicCube>& stopping, int w, int min_scale) {
  const RootBox& root = f.root();
  TelescopingReport rep;
  if (n <= 0) return rep;
  Jet jet(f, n);
  const CellBox wq = root.dilated_cells(Q, w);
  const RealGrid M = maximal(jet.gradient_magnitude(n).restricted(wq), 1.0);
  const ScalePyramid mins = detail::min_pyramid(root, std::vector<double>(M.samples().begin(), M.samples().end()));
  double shift = 0.0;
  for (Index k = 0; k < root.cell_count(); ++k) shift = std::max(shift, M[k]);
  auto inf_on = [&](const DyadicCube& c) { return shift - mins.at(c); };
  const double lq = std::pow(Q.side(), n);
  const RealGrid PQ = taylor_polynomial(jet, Q, n).on(root, root.all_cells());
  const RealGrid rem = f - PQ;
  for (const auto& P : root.subcubes(Q, min_scale)) {
    const double den = lq * inf_on(P);
    const double num = local_average(rem, root.dilated_cells(P, w), 1.0);
    if (den > 0.0) rep.split3 = std::max(rep.split3, num / den);
  }
  for (const auto& Z : stopping) {
    if (!Z.inside(Q) || Z == Q) continue;
    const double den = lq * inf_on(Z);
    const RealGrid diff = taylor_polynomial(jet, Z, n).on(root, root.all_cells()) - PQ;
    for (const auto& P : root.subcubes(Z, min_scale)) {
      const double num = local_average(diff, root.dilated_cells(P, w), 1.0);
      if (den > 0.0) rep.split4 = std::max(rep.split4, num / den);
    }
  }
  return rep;
}

}  // namespace dyadica
