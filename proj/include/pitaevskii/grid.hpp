#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitaevskii {

inline constexpr int kMaxDim = 3;

/// Uniform periodic grid on the d-torus [0,len_0) x ... x [0,len_{d-1}).
///
/// Nodes are stored row-major with axis 0 slowest. Wavenumbers follow the
/// DFT convention {0, 1, ..., n/2-1, -n/2, ..., -1} scaled by 2*pi/len, so
/// the Nyquist mode is kept (as -n/2) and stays indexable.
class Grid {
 public:
  int dim() const { return dim_; }
  std::size_t n(int axis) const { return n_[axis]; }
  double len(int axis) const { return len_[axis]; }
  double dx(int axis) const { return len_[axis] / static_cast<double>(n_[axis]); }
  std::size_t size() const { return size_; }

  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= len_[a];
    return v;
  }
  double cell_volume() const { return volume() / static_cast<double>(size_); }
  double min_dx() const {
    double h = dx(0);
    for (int a = 1; a < dim_; ++a) h = std::min(h, dx(a));
    return h;
  }

  /// Integer wavenumber of index i along axis.
  long int_wavenumber(int axis, std::size_t i) const {
    const auto n = static_cast<long>(n_[axis]);
    const auto ii = static_cast<long>(i);
    return ii < n / 2 ? ii : ii - n;
  }
  /// Physical wavenumber table for an axis.
  std::span<const double> k(int axis) const { return k_[axis]; }
  /// Largest physical |k| along any axis (the Nyquist magnitude).
  double k_max() const {
    double km = 0.0;
    for (int a = 0; a < dim_; ++a)
      km = std::max(km, std::numbers::pi * static_cast<double>(n_[a]) / len_[a]);
    return km;
  }

  /// Strides for row-major flattening; unused axes have n=1.
  std::array<std::size_t, kMaxDim> multi_index(std::size_t flat) const {
    std::array<std::size_t, kMaxDim> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = flat % n_[a];
      flat /= n_[a];
    }
    return idx;
  }
  double coordinate(int axis, std::size_t i) const { return static_cast<double>(i) * dx(axis); }

  friend bool operator==(const Grid& a, const Grid& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.n_[i] != b.n_[i] || a.len_[i] != b.len_[i]) return false;
    return true;
  }

 private:
  friend Grid make_grid_value(int, std::span<const std::size_t>, std::span<const double>);

  int dim_ = 0;
  std::array<std::size_t, kMaxDim> n_{1, 1, 1};
  std::array<double, kMaxDim> len_{1.0, 1.0, 1.0};
  std::size_t size_ = 0;
  std::array<std::vector<double>, kMaxDim> k_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline Grid make_grid_value(int d, std::span<const std::size_t> n, std::span<const double> len) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (n.size() != static_cast<std::size_t>(d) || len.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("grid: n and len must have d entries");
  Grid g;
  g.dim_ = d;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    if (n[a] < 4) throw std::invalid_argument("grid: n[" + std::to_string(a) + "] must be >= 4");
    if (n[a] % 2 != 0) throw std::invalid_argument("grid: n[" + std::to_string(a) + "] must be even");
    if (!(len[a] > 0.0) || !std::isfinite(len[a]))
      throw std::invalid_argument("grid: len[" + std::to_string(a) + "] must be positive");
    if (total > std::numeric_limits<std::size_t>::max() / n[a] ||
        total * n[a] > static_cast<std::size_t>(std::numeric_limits<int>::max()))
      throw std::invalid_argument("grid: point count exceeds index range");
    total *= n[a];
    g.n_[a] = n[a];
    g.len_[a] = len[a];
  }
  g.size_ = total;
  for (int a = 0; a < d; ++a) {
    const double scale = 2.0 * std::numbers::pi / g.len_[a];
    g.k_[a].resize(g.n_[a]);
    for (std::size_t i = 0; i < g.n_[a]; ++i)
      g.k_[a][i] = scale * static_cast<double>(g.int_wavenumber(a, i));
  }
  return g;
}

/// Builds a shared, immutable grid. Throws std::invalid_argument on odd or
/// too-small n, non-positive lengths, or d outside [1,3].
inline GridPtr make_grid(int d, std::span<const std::size_t> n, std::span<const double> len) {
  return std::make_shared<const Grid>(make_grid_value(d, n, len));
}

inline GridPtr make_grid(std::initializer_list<std::size_t> n, std::initializer_list<double> len) {
  std::vector<std::size_t> nv(n);
  std::vector<double> lv(len);
  return make_grid(static_cast<int>(nv.size()), nv, lv);
}

}  // namespace pitaevskii
