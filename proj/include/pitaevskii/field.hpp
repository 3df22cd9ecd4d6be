#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pitaevskii/grid.hpp"

namespace pitaevskii {

using cplx = std::complex<double>;

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch");
}

/// Nodal samples of a scalar quantity on a grid. T is double or cplx.
template <class T>
class Field {
 public:
  using value_type = T;

  Field() = default;
  explicit Field(GridPtr grid, T fill = T{}) : grid_(std::move(grid)), v_(grid_->size(), fill) {}
  Field(GridPtr grid, std::vector<T> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->size()) throw std::invalid_argument("field: value count does not match grid");
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  std::span<T> values() { return v_; }
  std::span<const T> values() const { return v_; }
  std::vector<T>& raw() { return v_; }
  const std::vector<T>& raw() const { return v_; }

  T& operator[](std::size_t i) { return v_[i]; }
  const T& operator[](std::size_t i) const { return v_[i]; }

  Field& operator+=(const Field& o) {
    require_same_grid(grid(), o.grid());
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(grid(), o.grid());
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Field& operator*=(T s) {
    for (auto& x : v_) x *= s;
    return *this;
  }
  /// this += s * o
  Field& axpy(T s, const Field& o) {
    require_same_grid(grid(), o.grid());
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(T s, Field a) { return a *= s; }
  friend Field operator*(Field a, T s) { return a *= s; }

  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](const T& x) {
      if constexpr (std::is_same_v<T, cplx>)
        return std::isfinite(x.real()) && std::isfinite(x.imag());
      else
        return std::isfinite(x);
    });
  }

  friend bool operator==(const Field& a, const Field& b) {
    return a.grid() == b.grid() && a.v_ == b.v_;
  }

 private:
  GridPtr grid_;
  std::vector<T> v_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

/// d-component field; components beyond grid.dim() are never allocated.
template <class T>
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const GridPtr& grid) {
    comp_.reserve(grid->dim());
    for (int a = 0; a < grid->dim(); ++a) comp_.emplace_back(grid);
  }
  explicit VectorField(std::vector<Field<T>> comps) : comp_(std::move(comps)) {
    if (comp_.empty()) throw std::invalid_argument("vector field needs components");
    if (static_cast<int>(comp_.size()) != comp_[0].grid().dim())
      throw std::invalid_argument("vector field: component count must equal grid dimension");
    for (auto& c : comp_) require_same_grid(c.grid(), comp_[0].grid());
  }

  int dim() const { return static_cast<int>(comp_.size()); }
  const Grid& grid() const { return comp_.at(0).grid(); }
  const GridPtr& grid_ptr() const { return comp_.at(0).grid_ptr(); }
  std::size_t size() const { return comp_.empty() ? 0 : comp_[0].size(); }

  Field<T>& operator[](int a) { return comp_[a]; }
  const Field<T>& operator[](int a) const { return comp_[a]; }

  VectorField& operator+=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) comp_[a] += o.comp_[a];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) comp_[a] -= o.comp_[a];
    return *this;
  }
  VectorField& operator*=(T s) {
    for (auto& c : comp_) c *= s;
    return *this;
  }
  VectorField& axpy(T s, const VectorField& o) {
    for (int a = 0; a < dim(); ++a) comp_[a].axpy(s, o.comp_[a]);
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(T s, VectorField a) { return a *= s; }

  bool all_finite() const {
    return std::all_of(comp_.begin(), comp_.end(), [](const Field<T>& c) { return c.all_finite(); });
  }
  friend bool operator==(const VectorField& a, const VectorField& b) { return a.comp_ == b.comp_; }

 private:
  std::vector<Field<T>> comp_;
};

using RealVectorField = VectorField<double>;

/// Samples f(x) at every node; x has grid.dim() meaningful entries.
template <class T, class F>
Field<T> sample(const GridPtr& grid, F&& f) {
  Field<T> out(grid);
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto idx = grid->multi_index(i);
    for (int a = 0; a < grid->dim(); ++a) x[a] = grid->coordinate(a, idx[a]);
    out[i] = static_cast<T>(f(x));
  }
  return out;
}

inline ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
  return out;
}

inline RealField real_part(const ComplexField& f) {
  RealField out(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

/// Pointwise product of two fields of possibly different scalar types.
template <class A, class B>
auto pointwise(const Field<A>& a, const Field<B>& b) {
  require_same_grid(a.grid(), b.grid());
  using R = decltype(A{} * B{});
  Field<R> out(a.grid_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

/// Pointwise Euclidean dot product.
inline RealField dot(const RealVectorField& a, const RealVectorField& b) {
  RealField out(a.grid_ptr());
  for (int c = 0; c < a.dim(); ++c)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[c][i] * b[c][i];
  return out;
}

inline RealField magnitude_squared(const RealVectorField& a) { return dot(a, a); }

}  // namespace pitaevskii
