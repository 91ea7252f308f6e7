#pragma once

// Sampled functions on the root box. Sample i is the value at the midpoint of
// grid cell i; integrals are midpoint sums with weight h^d. Outside the root
// box functions are zero.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dyadica/dyadic.hpp"

namespace dyadica {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, std::complex<double>>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <Scalar T = double>
class GridFunction {
 public:
  using value_type = T;

  GridFunction() = default;
  explicit GridFunction(const RootBox& root) : root_(root), data_(root.cell_count(), T{}) {}
  GridFunction(const RootBox& root, std::vector<T> samples) : root_(root), data_(std::move(samples)) {
    if (static_cast<Index>(data_.size()) != root_.cell_count())
      throw GeometryError("GridFunction: sample count does not match root extents");
  }

  /// Samples a callable at cell midpoints. The callable takes std::span<const double> of
  /// length d.
  template <typename F>
  static GridFunction sample(const RootBox& root, F&& f) {
    GridFunction g(root);
    const double h = root.spacing();
    std::array<double, kMaxDim> x{};
    IndexVec cell{};
    for (Index k = 0; k < root.cell_count(); ++k) {
      g.unflatten(k, cell);
      for (int i = 0; i < root.dim; ++i) x[i] = (static_cast<double>(cell[i]) + 0.5) * h;
      g.data_[k] = static_cast<T>(f(std::span<const double>(x.data(), root.dim)));
    }
    return g;
  }

  const RootBox& root() const { return root_; }
  std::size_t size() const { return data_.size(); }
  std::span<T> samples() { return data_; }
  std::span<const T> samples() const { return data_; }
  T& operator[](Index k) { return data_[static_cast<std::size_t>(k)]; }
  const T& operator[](Index k) const { return data_[static_cast<std::size_t>(k)]; }

  Index flatten(const IndexVec& cell) const {
    const Index n = root_.cells_per_side();
    Index k = 0;
    for (int i = root_.dim - 1; i >= 0; --i) k = k * n + cell[i];
    return k;
  }
  void unflatten(Index k, IndexVec& cell) const {
    const Index n = root_.cells_per_side();
    for (int i = 0; i < root_.dim; ++i) {
      cell[i] = k % n;
      k /= n;
    }
  }
  bool in_root(const IndexVec& cell) const {
    const Index n = root_.cells_per_side();
    for (int i = 0; i < root_.dim; ++i)
      if (cell[i] < 0 || cell[i] >= n) return false;
    return true;
  }
  /// Zero-extended access.
  T at(const IndexVec& cell) const { return in_root(cell) ? data_[flatten(cell)] : T{}; }

  GridFunction& operator+=(const GridFunction& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  GridFunction& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(T s, GridFunction a) { return a *= s; }

  /// Pointwise product.
  GridFunction times(const GridFunction& o) const {
    check_same(o);
    GridFunction r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] *= o.data_[k];
    return r;
  }

  GridFunction<double> abs() const {
    GridFunction<double> r(root_);
    for (std::size_t k = 0; k < data_.size(); ++k) r[static_cast<Index>(k)] = std::abs(data_[k]);
    return r;
  }

  /// Restriction to a cell box (zero elsewhere).
  GridFunction restricted(const CellBox& box) const {
    GridFunction r(root_);
    for_each_cell(box.intersect(root_.all_cells()), [&](const IndexVec&, Index k) { r.data_[k] = data_[k]; });
    return r;
  }

  /// ||f||_{L^p} with midpoint weights; p = kInf gives the max.
  double lp_norm(double p) const {
    if (std::isinf(p)) {
      double m = 0.0;
      for (const auto& v : data_) m = std::max(m, std::abs(v));
      return m;
    }
    double s = 0.0;
    for (const auto& v : data_) s += std::pow(std::abs(v), p);
    return std::pow(s * root_.cell_volume(), 1.0 / p);
  }

  double max_abs() const { return lp_norm(kInf); }

  /// Bilinear pairing int f g (no conjugation).
  T pair(const GridFunction& o) const {
    check_same(o);
    T s{};
    for (std::size_t k = 0; k < data_.size(); ++k) s += data_[k] * o.data_[k];
    return s * root_.cell_volume();
  }

  T integral() const {
    T s{};
    for (const auto& v : data_) s += v;
    return s * root_.cell_volume();
  }

  /// Visits the cells of a box that lie inside the root, first coordinate fastest.
  template <typename F>
  void for_each_cell(const CellBox& box, F&& fn) const {
    const CellBox b = box.intersect(root_.all_cells());
    if (b.count() == 0) return;
    IndexVec c = b.lo;
    while (true) {
      fn(static_cast<const IndexVec&>(c), flatten(c));
      int i = 0;
      for (; i < root_.dim; ++i) {
        if (++c[i] < b.hi[i]) break;
        c[i] = b.lo[i];
      }
      if (i == root_.dim) break;
    }
  }

  template <Scalar U>
  GridFunction<U> cast() const {
    GridFunction<U> r(root_);
    for (std::size_t k = 0; k < data_.size(); ++k) {
      if constexpr (is_complex<T>::value && !is_complex<U>::value)
        r[static_cast<Index>(k)] = data_[k].real();
      else
        r[static_cast<Index>(k)] = static_cast<U>(data_[k]);
    }
    return r;
  }

 private:
  void check_same(const GridFunction& o) const {
    if (!(root_ == o.root_)) throw GeometryError("GridFunction: root boxes differ");
  }

  RootBox root_{};
  std::vector<T> data_;
};

using RealGrid = GridFunction<double>;
using ComplexGrid = GridFunction<std::complex<double>>;

// Binary format: 32-byte header of four little-endian int64 (d, L, J, count),
// followed by count IEEE doubles in grid order.

inline void write_binary(const RealGrid& f, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  const std::int64_t header[4] = {f.root().dim, f.root().top, f.root().finest,
                                  static_cast<std::int64_t>(f.size())};
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  os.write(reinterpret_cast<const char*>(f.samples().data()),
           static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline RealGrid read_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::int64_t header[4];
  is.read(reinterpret_cast<char*>(header), sizeof header);
  if (!is) throw std::runtime_error("truncated header: " + path);
  RootBox root(static_cast<int>(header[0]), static_cast<int>(header[1]), static_cast<int>(header[2]));
  if (header[3] != root.cell_count()) throw std::runtime_error("sample count mismatch in " + path);
  std::vector<double> data(static_cast<std::size_t>(header[3]));
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated sample block: " + path);
  return RealGrid(root, std::move(data));
}

/// Small-case CSV: one row per cell, "x1,...,xd,value".
inline void write_csv(const RealGrid& f, std::ostream& os) {
  const int d = f.root().dim;
  for (int i = 0; i < d; ++i) os << 'x' << (i + 1) << ',';
  os << "value\n";
  os << std::setprecision(17);
  const double h = f.root().spacing();
  IndexVec c{};
  for (Index k = 0; k < static_cast<Index>(f.size()); ++k) {
    f.unflatten(k, c);
    for (int i = 0; i < d; ++i) os << (static_cast<double>(c[i]) + 0.5) * h << ',';
    os << f[k] << '\n';
  }
}

}  // namespace dyadica
