#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "pitaevskii/field.hpp"

namespace pitaevskii {

namespace detail {

// FFTW planning and plan destruction are not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
std::vector<cplx> complexify(const Field<T>& f) {
  if constexpr (std::is_same_v<T, cplx>) {
    return f.raw();
  } else {
    std::vector<cplx> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
    return out;
  }
}

template <class T>
Field<T> decomplexify(const GridPtr& grid, std::vector<cplx>&& v) {
  if constexpr (std::is_same_v<T, cplx>) {
    return Field<T>(grid, std::move(v));
  } else {
    Field<T> out(grid);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
  }
}

}  // namespace detail

/// Fourier transforms and the diagonal multipliers of the discrete calculus.
///
/// Spectra are normalized so that f(x_j) = sum_k fhat_k exp(i k.x_j); a
/// single mode exp(i k.x) has coefficient exactly 1. Immutable after
/// construction; safe to share across threads.
class SpectralPlan {
 public:
  explicit SpectralPlan(GridPtr grid, bool dealias_enabled = true)
      : grid_(std::move(grid)), dealias_enabled_(dealias_enabled) {
    const Grid& g = *grid_;
    const std::size_t total = g.size();
    int dims[kMaxDim];
    for (int a = 0; a < g.dim(); ++a) dims[a] = static_cast<int>(g.n(a));
    {
      std::vector<cplx> scratch(total);
      auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
      std::lock_guard lock(detail::fftw_planner_mutex());
      fwd_ = fftw_plan_dft(g.dim(), dims, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      bwd_ = fftw_plan_dft(g.dim(), dims, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (fwd_ == nullptr || bwd_ == nullptr) throw std::runtime_error("fftw planning failed");

    k2_.resize(total);
    kappa2_.resize(total);
    keep_.resize(total);
    for (int a = 0; a < g.dim(); ++a) kappa_[a].resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      const auto idx = g.multi_index(i);
      double k2 = 0.0, kap2 = 0.0;
      bool keep = true;
      for (int a = 0; a < g.dim(); ++a) {
        const double k = g.k(a)[idx[a]];
        const long ki = g.int_wavenumber(a, idx[a]);
        const bool nyquist = 2 * std::abs(ki) == static_cast<long>(g.n(a));
        kappa_[a][i] = nyquist ? 0.0 : k;
        k2 += k * k;
        kap2 += kappa_[a][i] * kappa_[a][i];
        if (3 * std::abs(ki) > static_cast<long>(g.n(a))) keep = false;
      }
      k2_[i] = k2;
      kappa2_[i] = kap2;
      keep_[i] = keep ? 1 : 0;
    }
    neg_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      const auto idx = g.multi_index(i);
      std::size_t flat = 0;
      for (int a = 0; a < g.dim(); ++a) flat = flat * g.n(a) + (g.n(a) - idx[a]) % g.n(a);
      neg_[i] = flat;
    }
  }

  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  ~SpectralPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
  }

  /// Shared plan for a grid, cached by grid value. With dealias_enabled =
  /// false, dealias() is the identity.
  static std::shared_ptr<const SpectralPlan> for_grid(const GridPtr& grid, bool dealias_enabled = true) {
    static std::mutex m;
    static std::map<std::tuple<int, std::array<std::size_t, kMaxDim>, std::array<double, kMaxDim>, bool>,
                    std::shared_ptr<const SpectralPlan>>
        cache;
    std::array<std::size_t, kMaxDim> n{1, 1, 1};
    std::array<double, kMaxDim> len{0, 0, 0};
    for (int a = 0; a < grid->dim(); ++a) {
      n[a] = grid->n(a);
      len[a] = grid->len(a);
    }
    const auto key = std::make_tuple(grid->dim(), n, len, dealias_enabled);
    std::lock_guard lock(m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto plan = std::make_shared<const SpectralPlan>(grid, dealias_enabled);
    cache.emplace(key, plan);
    return plan;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  /// |k|^2 per flat mode index (Nyquist included).
  std::span<const double> k_squared() const { return k2_; }
  /// Wavenumber used by first derivatives along an axis (Nyquist zeroed).
  std::span<const double> derivative_wavenumber(int axis) const { return kappa_[axis]; }
  bool retained_by_dealias(std::size_t mode) const { return keep_[mode] != 0; }
  bool dealias_enabled() const { return dealias_enabled_; }

  // ---- raw transforms -------------------------------------------------

  void forward_inplace(std::vector<cplx>& v) const {
    check_size(v.size());
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(v.data()), reinterpret_cast<fftw_complex*>(v.data()));
    const double inv = 1.0 / static_cast<double>(v.size());
    for (auto& x : v) x *= inv;
  }
  void inverse_inplace(std::vector<cplx>& v) const {
    check_size(v.size());
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(v.data()), reinterpret_cast<fftw_complex*>(v.data()));
  }

  template <class T>
  std::vector<cplx> spectrum(const Field<T>& f) const {
    check(f.grid());
    auto v = detail::complexify(f);
    forward_inplace(v);
    return v;
  }
  template <class T>
  Field<T> synthesize(std::vector<cplx> spec) const {
    inverse_inplace(spec);
    return detail::decomplexify<T>(grid_, std::move(spec));
  }

  /// Applies a diagonal Fourier multiplier m(mode index).
  template <class T, class M>
  Field<T> apply_multiplier(const Field<T>& f, M&& mult) const {
    auto s = spectrum(f);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= mult(i);
    return synthesize<T>(std::move(s));
  }

  // ---- differential operators ----------------------------------------

  template <class T>
  VectorField<T> gradient(const Field<T>& f) const {
    const auto s = spectrum(f);
    std::vector<std::vector<cplx>> d(grid_->dim(), std::vector<cplx>(s.size()));
    for (int a = 0; a < grid_->dim(); ++a)
      for (std::size_t i = 0; i < s.size(); ++i) d[a][i] = cplx(0.0, kappa_[a][i]) * s[i];
    return synthesize_all<T>(std::move(d));
  }

  template <class T>
  Field<T> divergence(const VectorField<T>& v) const {
    check(v.grid());
    const auto s = spectra(v);
    std::vector<cplx> acc(grid_->size(), cplx{});
    for (int a = 0; a < grid_->dim(); ++a)
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += cplx(0.0, kappa_[a][i]) * s[a][i];
    return synthesize<T>(std::move(acc));
  }

  /// Spectra of every component (real pairs share one transform).
  template <class T>
  std::vector<std::vector<cplx>> spectra(const VectorField<T>& v) const {
    check(v.grid());
    const int d = v.dim();
    std::vector<std::vector<cplx>> out(d);
    if constexpr (std::is_same_v<T, double>) {
      const std::size_t n = grid_->size();
      for (int a = 0; a < d; a += 2) {
        out[a].resize(n);
        if (a + 1 < d) {
          out[a + 1].resize(n);
          pair_forward(v[a].raw().data(), v[a + 1].raw().data(), out[a], out[a + 1]);
        } else {
          out[a] = spectrum(v[a]);
        }
      }
    } else {
      for (int a = 0; a < d; ++a) out[a] = spectrum(v[a]);
    }
    return out;
  }

  /// Inverse of spectra(); real components assume Hermitian input.
  template <class T>
  VectorField<T> synthesize_all(std::vector<std::vector<cplx>> s) const {
    const int d = static_cast<int>(s.size());
    std::vector<Field<T>> comps;
    comps.reserve(d);
    if constexpr (std::is_same_v<T, double>) {
      for (int a = 0; a < d; a += 2) {
        if (a + 1 < d) {
          RealField x(grid_), y(grid_);
          pair_inverse(s[a], s[a + 1], x.raw().data(), y.raw().data());
          comps.push_back(std::move(x));
          comps.push_back(std::move(y));
        } else {
          comps.push_back(synthesize<T>(std::move(s[a])));
        }
      }
    } else {
      for (int a = 0; a < d; ++a) comps.push_back(synthesize<T>(std::move(s[a])));
    }
    return VectorField<T>(std::move(comps));
  }

  template <class T>
  Field<T> partial(const Field<T>& f, int axis) const {
    return apply_multiplier(f, [&](std::size_t i) { return cplx(0.0, kappa_[axis][i]); });
  }

  template <class T>
  Field<T> laplacian(const Field<T>& f) const {
    return apply_multiplier(f, [&](std::size_t i) { return cplx(-k2_[i], 0.0); });
  }
  template <class T>
  VectorField<T> laplacian(const VectorField<T>& v) const {
    auto s = spectra(v);
    for (auto& c : s)
      for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -k2_[i];
    return synthesize_all<T>(std::move(s));
  }

  /// 2/3-rule truncation: zeroes every mode with some |k_i| > n_i/3.
  template <class T>
  Field<T> dealias(const Field<T>& f) const {
    if (!dealias_enabled_) {
      check(f.grid());
      return f;
    }
    return apply_multiplier(f, [&](std::size_t i) { return keep_[i] ? 1.0 : 0.0; });
  }
  template <class T>
  VectorField<T> dealias(const VectorField<T>& v) const {
    if (!dealias_enabled_) {
      check(v.grid());
      return v;
    }
    auto s = spectra(v);
    for (auto& c : s)
      for (std::size_t i = 0; i < c.size(); ++i)
        if (!keep_[i]) c[i] = cplx{};
    return synthesize_all<T>(std::move(s));
  }

  /// Solves (I - alpha*Laplacian) out = f.
  template <class T>
  Field<T> helmholtz_solve(const Field<T>& f, double alpha) const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("helmholtz_solve: alpha must be >= 0");
    return apply_multiplier(f, [&](std::size_t i) { return 1.0 / (1.0 + alpha * k2_[i]); });
  }

  /// Inverse of the first-derivative Laplacian sum_a d_a d_a; modes it
  /// annihilates (the mean, pure-Nyquist) map to zero.
  template <class T>
  Field<T> inverse_laplacian(const Field<T>& f) const {
    return apply_multiplier(f, [&](std::size_t i) { return kappa2_[i] > 0.0 ? -1.0 / kappa2_[i] : 0.0; });
  }

  /// Leray projection: returns (P v, chi) with v = P v + grad chi and
  /// div(P v) = 0. The mean mode passes through unchanged; chi has zero mean.
  std::pair<RealVectorField, RealField> leray_project(const RealVectorField& v) const {
    check(v.grid());
    const int d = grid_->dim();
    auto s = spectra(v);
    std::vector<cplx> chi(grid_->size(), cplx{});
    for (std::size_t i = 0; i < grid_->size(); ++i) {
      if (kappa2_[i] == 0.0) continue;
      cplx kv{};
      for (int a = 0; a < d; ++a) kv += kappa_[a][i] * s[a][i];
      const cplx coef = kv / kappa2_[i];
      for (int a = 0; a < d; ++a) s[a][i] -= kappa_[a][i] * coef;
      chi[i] = cplx(0.0, -1.0) * coef;
    }
    return {synthesize_all<double>(std::move(s)), synthesize<double>(std::move(chi))};
  }

  struct VariableDensityProjection {
    RealVectorField projected;
    RealField pressure;
    int iterations = 0;
    double relative_residual = 0.0;
  };

  /// Removes the pressure acceleration rho^{-1} grad p from a, with p solving
  /// div(rho^{-1} grad p) = div(a), so the result is divergence-free. Uses
  /// conjugate gradients preconditioned by the constant-density inverse
  /// Laplacian; exact in one iteration when rho is uniform. If warm is
  /// non-null and non-empty it holds the Fourier coefficients of an initial
  /// pressure guess; it receives the final coefficients.
  VariableDensityProjection project_variable_density(const RealVectorField& a, const RealField& rho,
                                                     double rel_tol = 1e-13, int max_iter = 500,
                                                     std::vector<cplx>* warm = nullptr) const {
    check(a.grid());
    check(rho.grid());
    const std::size_t n = grid_->size();
    const int d = grid_->dim();
    std::vector<double> w(n);
    double wmin = 1.0 / rho[0], wmax = wmin;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 1.0 / rho[i];
      wmin = std::min(wmin, w[i]);
      wmax = std::max(wmax, w[i]);
    }
    const double wbar = 0.5 * (wmin + wmax);

    // CG runs on Fourier coefficients; transforms of real pairs are packed
    // into one complex transform.
    using Spec = std::vector<cplx>;
    std::vector<double> gx(n), gy(n);
    Spec X(n), Y(n);
    auto apply_A = [&](const Spec& p, Spec& out) {  // -div(w grad p)
      std::fill(out.begin(), out.end(), cplx{});
      for (int c = 0; c < d; c += 2) {
        const bool pair = c + 1 < d;
        for (std::size_t i = 0; i < n; ++i) {
          X[i] = cplx(0.0, kappa_[c][i]) * p[i];
          Y[i] = pair ? cplx(0.0, kappa_[c + 1][i]) * p[i] : cplx{};
        }
        pair_inverse(X, Y, gx.data(), gy.data());
        for (std::size_t i = 0; i < n; ++i) {
          gx[i] *= w[i];
          gy[i] *= w[i];
        }
        pair_forward(gx.data(), gy.data(), X, Y);
        for (std::size_t i = 0; i < n; ++i) {
          out[i] -= cplx(0.0, kappa_[c][i]) * X[i];
          if (pair) out[i] -= cplx(0.0, kappa_[c + 1][i]) * Y[i];
        }
      }
    };
    auto precondition = [&](const Spec& r, Spec& z) {
      for (std::size_t i = 0; i < n; ++i) z[i] = kappa2_[i] > 0.0 ? r[i] / (wbar * kappa2_[i]) : cplx{};
    };
    auto inner = [&](const Spec& x, const Spec& y) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
      return s;
    };

    Spec b(n, cplx{});
    {
      const auto s = spectra(a);
      for (int c = 0; c < d; ++c)
        for (std::size_t i = 0; i < n; ++i) b[i] -= cplx(0.0, kappa_[c][i]) * s[c][i];
    }
    Spec p(n, cplx{});
    const double bnorm = std::sqrt(inner(b, b));
    VariableDensityProjection out{a, RealField(grid_), 0, 0.0};
    if (bnorm > 0.0) {
      Spec r = b, z(n), dir(n), Ad(n);
      if (warm && warm->size() == n) {
        p = *warm;
        apply_A(p, Ad);
        for (std::size_t i = 0; i < n; ++i) r[i] -= Ad[i];
      }
      precondition(r, z);
      dir = z;
      double rz = inner(r, z);
      double rnorm = std::sqrt(inner(r, r));
      int it = 0;
      while (it < max_iter && rnorm > rel_tol * bnorm) {
        apply_A(dir, Ad);
        const double dAd = inner(dir, Ad);
        if (!(dAd > 0.0)) break;
        const double alpha = rz / dAd;
        for (std::size_t i = 0; i < n; ++i) {
          p[i] += alpha * dir[i];
          r[i] -= alpha * Ad[i];
        }
        ++it;
        const double rnew = std::sqrt(inner(r, r));
        if (rnew >= rnorm && it > 20) {
          rnorm = rnew;
          break;  // stagnated at round-off
        }
        rnorm = rnew;
        precondition(r, z);
        const double rz_new = inner(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) dir[i] = z[i] + beta * dir[i];
      }
      out.iterations = it;
      out.relative_residual = rnorm / bnorm;
      for (int c = 0; c < d; c += 2) {
        const bool pair = c + 1 < d;
        for (std::size_t i = 0; i < n; ++i) {
          X[i] = cplx(0.0, kappa_[c][i]) * p[i];
          Y[i] = pair ? cplx(0.0, kappa_[c + 1][i]) * p[i] : cplx{};
        }
        pair_inverse(X, Y, gx.data(), gy.data());
        for (std::size_t i = 0; i < n; ++i) {
          out.projected[c][i] -= w[i] * gx[i];
          if (pair) out.projected[c + 1][i] -= w[i] * gy[i];
        }
      }
      if (warm) *warm = p;
      out.pressure = synthesize<double>(std::move(p));
    }
    return out;
  }

 private:
  // Forward transforms of two real arrays with one complex FFT.
  void pair_forward(const double* x, const double* y, std::vector<cplx>& X, std::vector<cplx>& Y) const {
    const std::size_t n = grid_->size();
    std::vector<cplx>& z = scratch_;
    z.resize(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = cplx(x[i], y[i]);
    forward_inplace(z);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx zm = std::conj(z[neg_[i]]);
      X[i] = 0.5 * (z[i] + zm);
      Y[i] = cplx(0.0, -0.5) * (z[i] - zm);
    }
  }
  // Inverse transforms of two Hermitian spectra with one complex FFT.
  void pair_inverse(const std::vector<cplx>& X, const std::vector<cplx>& Y, double* x, double* y) const {
    const std::size_t n = grid_->size();
    std::vector<cplx>& z = scratch_;
    z.resize(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = X[i] + cplx(0.0, 1.0) * Y[i];
    inverse_inplace(z);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = z[i].real();
      y[i] = z[i].imag();
    }
  }

  void check(const Grid& g) const { require_same_grid(*grid_, g); }
  void check_size(std::size_t s) const {
    if (s != grid_->size()) throw std::invalid_argument("grid mismatch");
  }

  GridPtr grid_;
  bool dealias_enabled_ = true;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
  std::vector<double> k2_;
  std::vector<double> kappa2_;
  std::array<std::vector<double>, kMaxDim> kappa_;
  std::vector<unsigned char> keep_;
  std::vector<std::size_t> neg_;  // flat index of -k
  static inline thread_local std::vector<cplx> scratch_;
};

using PlanPtr = std::shared_ptr<const SpectralPlan>;

inline PlanPtr plan_for(const GridPtr& grid, bool dealias_enabled = true) {
  return SpectralPlan::for_grid(grid, dealias_enabled);
}

}  // namespace pitaevskii
