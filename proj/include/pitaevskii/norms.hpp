#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pitaevskii/spectral.hpp"

namespace pitaevskii {

/// Which norm to evaluate.
///   Lp        (sum |f|^p dV)^(1/p); p = inf gives the nodal max.
///   SobolevH  spectral: V * sum (1+|k|^2)^s |fhat|^2, or |k|^(2s) when homogeneous.
///   W1p       (||f||_p^p + || |grad f| ||_p^p)^(1/p).
struct NormSpec {
  enum class Kind { Lp, SobolevH, W1p };
  Kind kind = Kind::Lp;
  double p = 2.0;
  double s = 0.0;
  bool homogeneous = false;

  static NormSpec lp(double p) { return {Kind::Lp, p, 0.0, false}; }
  static NormSpec linf() { return lp(std::numeric_limits<double>::infinity()); }
  static NormSpec h(double s, bool homogeneous = false) { return {Kind::SobolevH, 2.0, s, homogeneous}; }
  static NormSpec w1p(double p) { return {Kind::W1p, p, 0.0, false}; }

  void validate() const {
    if (kind != Kind::SobolevH && !(p >= 1.0)) throw std::invalid_argument("norm: p must be >= 1");
    if (kind == Kind::SobolevH && !std::isfinite(s)) throw std::invalid_argument("norm: s must be finite");
  }
};

namespace detail {

inline double lp_of_magnitudes(std::span<const double> mag, double p, double cell) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : mag) m = std::max(m, x);
    return m;
  }
  // Scale by the max first so high powers of large/small values do not over/underflow.
  double m = 0.0;
  for (double x : mag) m = std::max(m, x);
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  if (p == 2.0) {
    for (double x : mag) acc += (x / m) * (x / m);
  } else {
    for (double x : mag) acc += std::pow(x / m, p);
  }
  return m * std::pow(acc * cell, 1.0 / p);
}

inline double sobolev_weight(double k2, double s, bool homogeneous) {
  if (homogeneous) return k2 == 0.0 ? 0.0 : std::pow(k2, s);
  return std::pow(1.0 + k2, s);
}

}  // namespace detail

/// Squared spectral Sobolev norm summed over the given coefficient arrays.
inline double sobolev_squared_from_spectra(const SpectralPlan& plan, std::span<const std::vector<cplx>> spectra,
                                           double s, bool homogeneous) {
  const auto k2 = plan.k_squared();
  double acc = 0.0;
  for (const auto& spec : spectra)
    for (std::size_t i = 0; i < spec.size(); ++i)
      acc += detail::sobolev_weight(k2[i], s, homogeneous) * std::norm(spec[i]);
  return acc * plan.grid().volume();
}

template <class T>
double norm(const Field<T>& f, const NormSpec& spec) {
  spec.validate();
  const Grid& g = f.grid();
  switch (spec.kind) {
    case NormSpec::Kind::Lp: {
      std::vector<double> mag(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) mag[i] = std::abs(f[i]);
      return detail::lp_of_magnitudes(mag, spec.p, g.cell_volume());
    }
    case NormSpec::Kind::SobolevH: {
      const auto plan = plan_for(f.grid_ptr());
      const std::vector<std::vector<cplx>> spectra{plan->spectrum(f)};
      return std::sqrt(sobolev_squared_from_spectra(*plan, spectra, spec.s, spec.homogeneous));
    }
    case NormSpec::Kind::W1p: {
      const auto plan = plan_for(f.grid_ptr());
      const auto grad = plan->gradient(f);
      std::vector<double> mag(f.size()), gmag(f.size(), 0.0);
      for (std::size_t i = 0; i < f.size(); ++i) {
        mag[i] = std::abs(f[i]);
        for (int a = 0; a < grad.dim(); ++a) gmag[i] += std::norm(grad[a][i]);
        gmag[i] = std::sqrt(gmag[i]);
      }
      const double a = detail::lp_of_magnitudes(mag, spec.p, g.cell_volume());
      const double b = detail::lp_of_magnitudes(gmag, spec.p, g.cell_volume());
      if (std::isinf(spec.p)) return std::max(a, b);
      const double m = std::max(a, b);
      if (m == 0.0) return 0.0;
      return m * std::pow(std::pow(a / m, spec.p) + std::pow(b / m, spec.p), 1.0 / spec.p);
    }
  }
  throw std::invalid_argument("norm: unknown kind");
}

/// Vector norms: Lp of the pointwise Euclidean magnitude; Sobolev norms sum
/// the component contributions.
template <class T>
double norm(const VectorField<T>& v, const NormSpec& spec) {
  spec.validate();
  if (spec.kind == NormSpec::Kind::SobolevH) {
    const auto plan = plan_for(v.grid_ptr());
    std::vector<std::vector<cplx>> spectra;
    for (int a = 0; a < v.dim(); ++a) spectra.push_back(plan->spectrum(v[a]));
    return std::sqrt(sobolev_squared_from_spectra(*plan, spectra, spec.s, spec.homogeneous));
  }
  if (spec.kind == NormSpec::Kind::Lp) {
    RealField mag(v.grid_ptr());
    for (int a = 0; a < v.dim(); ++a)
      for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += std::norm(v[a][i]);
    for (auto& x : mag.raw()) x = std::sqrt(x);
    return norm(mag, spec);
  }
  // W1p: Frobenius magnitude of the Jacobian.
  const auto plan = plan_for(v.grid_ptr());
  std::vector<double> mag(v.size(), 0.0), gmag(v.size(), 0.0);
  for (int a = 0; a < v.dim(); ++a) {
    const auto grad = plan->gradient(v[a]);
    for (std::size_t i = 0; i < v.size(); ++i) {
      mag[i] += std::norm(v[a][i]);
      for (int b = 0; b < grad.dim(); ++b) gmag[i] += std::norm(grad[b][i]);
    }
  }
  for (auto& x : mag) x = std::sqrt(x);
  for (auto& x : gmag) x = std::sqrt(x);
  const double cell = v.grid().cell_volume();
  const double a = detail::lp_of_magnitudes(mag, spec.p, cell);
  const double b = detail::lp_of_magnitudes(gmag, spec.p, cell);
  if (std::isinf(spec.p)) return std::max(a, b);
  const double m = std::max(a, b);
  if (m == 0.0) return 0.0;
  return m * std::pow(std::pow(a / m, spec.p) + std::pow(b / m, spec.p), 1.0 / spec.p);
}

/// <f, g> = sum conj(f) g dV (conjugate-linear in the first argument).
template <class A, class B>
cplx inner_product(const Field<A>& f, const Field<B>& g) {
  require_same_grid(f.grid(), g.grid());
  cplx acc{};
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::conj(cplx(f[i])) * cplx(g[i]);
  return acc * f.grid().cell_volume();
}

template <class T>
double integral(const Field<T>& f) requires std::is_same_v<T, double> {
  double acc = 0.0;
  for (double x : f.values()) acc += x;
  return acc * f.grid().cell_volume();
}

inline double l2_squared(const ComplexField& f) { return inner_product(f, f).real(); }
inline double l2_squared(const RealField& f) { return inner_product(f, f).real(); }
inline double l2_squared(const RealVectorField& v) {
  double s = 0.0;
  for (int a = 0; a < v.dim(); ++a) s += l2_squared(v[a]);
  return s;
}
template <class T>
double grad_l2_squared(const Field<T>& f) {
  return std::pow(norm(f, NormSpec::h(1.0, true)), 2);
}

}  // namespace pitaevskii
