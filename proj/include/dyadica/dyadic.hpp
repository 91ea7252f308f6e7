#pragma once

// Dyadic grid geometry on a truncated root box [0, 2^L)^d.
//
// A cube is identified by its scale exponent and integer position; all
// containment and enumeration logic is integer arithmetic. Floating point
// only appears in the derived quantities (side length, center, distances).

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dyadica {

inline constexpr int kMaxDim = 3;

using Index = std::int64_t;
using IndexVec = std::array<Index, kMaxDim>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open dyadic cube prod_i [pos_i 2^scale, (pos_i + 1) 2^scale).
struct DyadicCube {
  int dim = 1;
  int scale = 0;
  IndexVec pos{};

  DyadicCube() = default;
  DyadicCube(int d, int s, IndexVec p) : dim(d), scale(s), pos(p) {
    if (d < 1 || d > kMaxDim) throw GeometryError("dimension out of range");
    for (int i = d; i < kMaxDim; ++i) pos[i] = 0;
  }
  static DyadicCube line(int s, Index p) { return DyadicCube(1, s, {p, 0, 0}); }

  double side() const { return std::ldexp(1.0, scale); }
  double volume() const { return std::ldexp(1.0, scale * dim); }
  double center(int i) const { return (static_cast<double>(pos[i]) + 0.5) * side(); }
  double corner(int i) const { return static_cast<double>(pos[i]) * side(); }

  DyadicCube parent() const {
    DyadicCube p = *this;
    p.scale += 1;
    for (int i = 0; i < dim; ++i) p.pos[i] = floor_div2(pos[i]);
    return p;
  }

  /// Ancestor at a coarser (or equal) scale.
  DyadicCube ancestor(int s) const {
    if (s < scale) throw GeometryError("ancestor scale below cube scale");
    DyadicCube a = *this;
    a.scale = s;
    for (int i = 0; i < dim; ++i) a.pos[i] = pos[i] >> (s - scale);
    return a;
  }

  /// True if *this is a (not necessarily strict) subset of other.
  bool inside(const DyadicCube& other) const {
    if (other.dim != dim || other.scale < scale) return false;
    return ancestor(other.scale) == other;
  }

  bool disjoint(const DyadicCube& other) const {
    return !inside(other) && !other.inside(*this);
  }

  friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
    return a.dim == b.dim && a.scale == b.scale && a.pos == b.pos;
  }

  /// Canonical order: scale descending, then lexicographic in pos with the
  /// first coordinate varying fastest (matches the grid sample order).
  friend std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b) {
    if (a.dim != b.dim) return a.dim <=> b.dim;
    if (a.scale != b.scale) return b.scale <=> a.scale;
    for (int i = kMaxDim - 1; i >= 0; --i)
      if (a.pos[i] != b.pos[i]) return a.pos[i] <=> b.pos[i];
    return std::strong_ordering::equal;
  }

  /// "d:scale:pos1,...,posd"
  std::string token() const {
    std::ostringstream os;
    os << dim << ':' << scale << ':';
    for (int i = 0; i < dim; ++i) os << (i ? "," : "") << pos[i];
    return os.str();
  }

  static DyadicCube parse(std::string_view tok) {
    auto c1 = tok.find(':');
    auto c2 = tok.find(':', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw GeometryError("malformed cube token: " + std::string(tok));
    int d = std::stoi(std::string(tok.substr(0, c1)));
    int s = std::stoi(std::string(tok.substr(c1 + 1, c2 - c1 - 1)));
    IndexVec p{};
    std::string rest(tok.substr(c2 + 1));
    std::istringstream is(rest);
    std::string item;
    int i = 0;
    while (std::getline(is, item, ',')) {
      if (i >= kMaxDim) throw GeometryError("too many coordinates in cube token");
      p[i++] = std::stoll(item);
    }
    if (i != d) throw GeometryError("cube token coordinate count mismatch");
    return DyadicCube(d, s, p);
  }

 private:
  static Index floor_div2(Index v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }
};

struct CubeHash {
  std::size_t operator()(const DyadicCube& q) const noexcept {
    std::size_t h = std::hash<int>{}(q.scale * 31 + q.dim);
    for (int i = 0; i < q.dim; ++i) h = h * 1000003u ^ std::hash<Index>{}(q.pos[i]);
    return h;
  }
};

/// max{|c(Q) - c(S)|, l(Q), l(S)} with the Euclidean center distance.
inline double long_distance(const DyadicCube& q, const DyadicCube& s) {
  if (q.dim != s.dim) throw GeometryError("long_distance: dimension mismatch");
  double d2 = 0.0;
  for (int i = 0; i < q.dim; ++i) {
    double t = q.center(i) - s.center(i);
    d2 += t * t;
  }
  return std::max({std::sqrt(d2), q.side(), s.side()});
}

struct RescaledPoint {
  std::vector<double> argument;
  double weight = 1.0;
};

/// Argument and weight of Sy^p_Q f(x) = l(Q)^{-nd/p} f((x - (c(Q),...,c(Q))) / l(Q)),
/// x in R^{dn}. p = infinity is passed as std::numeric_limits<double>::infinity().
inline RescaledPoint rescale_point(const DyadicCube& q, double p, const std::vector<double>& x,
                                   int arity) {
  const int d = q.dim;
  if (static_cast<int>(x.size()) != d * arity)
    throw GeometryError("rescale_point: point has wrong length");
  RescaledPoint out;
  out.argument.resize(x.size());
  for (int j = 0; j < arity; ++j)
    for (int i = 0; i < d; ++i)
      out.argument[j * d + i] = (x[j * d + i] - q.center(i)) / q.side();
  out.weight = std::isinf(p) ? 1.0 : std::pow(q.side(), -static_cast<double>(arity * d) / p);
  return out;
}

/// Axis-aligned box of grid cells [lo_i, hi_i) in units of the finest spacing.
/// Used for dilated cubes wQ, which are not dyadic.
struct CellBox {
  int dim = 1;
  IndexVec lo{};
  IndexVec hi{};

  Index extent(int i) const { return hi[i] - lo[i]; }
  Index count() const {
    Index c = 1;
    for (int i = 0; i < dim; ++i) c *= std::max<Index>(0, extent(i));
    return c;
  }
  CellBox intersect(const CellBox& o) const {
    CellBox b = *this;
    for (int i = 0; i < dim; ++i) {
      b.lo[i] = std::max(lo[i], o.lo[i]);
      b.hi[i] = std::max(b.lo[i], std::min(hi[i], o.hi[i]));
    }
    return b;
  }
  bool contains(const CellBox& o) const {
    for (int i = 0; i < dim; ++i)
      if (o.lo[i] < lo[i] || o.hi[i] > hi[i]) return false;
    return true;
  }
};

/// Desk-scale truncation of the dyadic grid: cubes of scale J..L inside [0, 2^L)^d.
struct RootBox {
  int dim = 1;
  int top = 0;     // L
  int finest = -8; // J

  RootBox() = default;
  RootBox(int d, int L, int J) : dim(d), top(L), finest(J) {
    if (d < 1 || d > kMaxDim) throw GeometryError("RootBox: dimension out of range");
    if (L <= J) throw GeometryError("RootBox: requires L > J");
    if (L - J > 24) throw GeometryError("RootBox: too many levels");
  }

  int levels() const { return top - finest; }
  Index cells_per_side() const { return Index{1} << levels(); }
  Index cell_count() const {
    Index c = 1;
    for (int i = 0; i < dim; ++i) c *= cells_per_side();
    return c;
  }
  double spacing() const { return std::ldexp(1.0, finest); }
  double cell_volume() const { return std::ldexp(1.0, finest * dim); }
  double volume() const { return std::ldexp(1.0, top * dim); }
  int scale_count() const { return levels() + 1; }

  DyadicCube root_cube() const { return DyadicCube(dim, top, IndexVec{}); }

  Index cubes_per_side(int scale) const { return Index{1} << (top - scale); }

  bool admissible(const DyadicCube& q) const {
    if (q.dim != dim || q.scale < finest || q.scale > top) return false;
    for (int i = 0; i < dim; ++i)
      if (q.pos[i] < 0 || q.pos[i] >= cubes_per_side(q.scale)) return false;
    return true;
  }

  /// Grid cells covered by a cube.
  CellBox cells(const DyadicCube& q) const {
    CellBox b;
    b.dim = dim;
    const Index w = Index{1} << (q.scale - finest);
    for (int i = 0; i < dim; ++i) {
      b.lo[i] = q.pos[i] * w;
      b.hi[i] = b.lo[i] + w;
    }
    return b;
  }

  /// Cells of the center-preserving dilate wQ (w odd).
  CellBox dilated_cells(const DyadicCube& q, int w) const {
    if (w < 1 || w % 2 == 0) throw GeometryError("dilation factor must be an odd positive integer");
    CellBox b = cells(q);
    const Index pad = static_cast<Index>((w - 1) / 2) * (Index{1} << (q.scale - finest));
    for (int i = 0; i < dim; ++i) {
      b.lo[i] -= pad;
      b.hi[i] += pad;
    }
    return b;
  }

  CellBox all_cells() const { return cells(root_cube()); }

  /// Cube is interior if its w-dilate lies in the root box.
  bool interior(const DyadicCube& q, int w) const {
    return all_cells().contains(dilated_cells(q, w));
  }

  /// Finest-scale cube holding a cell.
  DyadicCube cell_cube(const IndexVec& cell) const { return DyadicCube(dim, finest, cell); }

  std::vector<DyadicCube> children(const DyadicCube& q) const {
    if (q.scale <= finest) throw GeometryError("children: cube already at the finest scale");
    std::vector<DyadicCube> out;
    const int n = 1 << dim;
    out.reserve(n);
    for (int mask = 0; mask < n; ++mask) {
      IndexVec p{};
      for (int i = 0; i < dim; ++i) p[i] = 2 * q.pos[i] + ((mask >> i) & 1);
      out.emplace_back(dim, q.scale - 1, p);
    }
    return out;
  }

  /// All cubes at one scale, lexicographic.
  std::vector<DyadicCube> cubes_at(int scale) const {
    std::vector<DyadicCube> out;
    const Index m = cubes_per_side(scale);
    Index total = 1;
    for (int i = 0; i < dim; ++i) total *= m;
    out.reserve(static_cast<std::size_t>(total));
    IndexVec p{};
    for (Index t = 0; t < total; ++t) {
      Index r = t;
      for (int i = 0; i < dim; ++i) {
        p[i] = r % m;
        r /= m;
      }
      out.emplace_back(dim, scale, p);
    }
    return out;
  }

  /// D(Q) restricted to scales >= min_scale, canonical order.
  std::vector<DyadicCube> subcubes(const DyadicCube& q, int min_scale) const {
    std::vector<DyadicCube> out;
    min_scale = std::max(min_scale, finest);
    for (int s = q.scale; s >= min_scale; --s) {
      const Index m = Index{1} << (q.scale - s);
      Index total = 1;
      for (int i = 0; i < dim; ++i) total *= m;
      IndexVec p{};
      for (Index t = 0; t < total; ++t) {
        Index r = t;
        for (int i = 0; i < dim; ++i) {
          p[i] = q.pos[i] * m + r % m;
          r /= m;
        }
        out.emplace_back(dim, s, p);
      }
    }
    return out;
  }

  std::vector<DyadicCube> subcubes(const DyadicCube& q) const { return subcubes(q, finest); }

  friend bool operator==(const RootBox&, const RootBox&) = default;
};

}  // namespace dyadica
