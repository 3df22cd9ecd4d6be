#pragma once

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "pitaevskii/model.hpp"

namespace pitaevskii {

/// Plane-wave / uniform-field reduction of the full system. With
/// psi = a(t) e^{ik.x}, u = U(t), rho = rho(t) and beta = 1/2|k-U|^2 + mu|a|^2:
///
///   a'   = -Lambda beta a - i (1/2|k|^2 + mu|a|^2) a
///   rho' = 2 Lambda beta |a|^2
///   rho U' = 2 Lambda |a|^2 beta (k - U)
///
/// rho + |a|^2 and rho U + k|a|^2 are conserved.
struct OracleSample {
  double t = 0.0;
  cplx a;
  std::array<double, kMaxDim> U{0, 0, 0};
  double rho = 0.0;
};

struct OracleResult {
  std::vector<OracleSample> samples;
  double mass_drift = 0.0;      // max |(rho + |a|^2)(t) - (rho + |a|^2)(0)|
  double momentum_drift = 0.0;  // max_i |(rho U + k|a|^2)_i(t) - (...)(0)|
};

namespace detail {

struct PlaneWaveSystem {
  double lambda, mu;
  int dim;
  std::array<double, kMaxDim> k;

  // x = [Re a, Im a, rho, U_0 .. U_{d-1}]
  void operator()(const std::vector<double>& x, std::vector<double>& dxdt, double) const {
    const cplx a(x[0], x[1]);
    const double a2 = std::norm(a);
    double kmu2 = 0.0, k2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      kmu2 += (k[i] - x[3 + i]) * (k[i] - x[3 + i]);
      k2 += k[i] * k[i];
    }
    const double beta = 0.5 * kmu2 + mu * a2;
    const cplx da = -lambda * beta * a - cplx(0.0, 0.5 * k2 + mu * a2) * a;
    dxdt[0] = da.real();
    dxdt[1] = da.imag();
    dxdt[2] = 2.0 * lambda * beta * a2;
    for (int i = 0; i < dim; ++i) dxdt[3 + i] = 2.0 * lambda * a2 * beta * (k[i] - x[3 + i]) / x[2];
  }
};

}  // namespace detail

/// Integrates the reduction with an adaptive Dormand-Prince 5(4) pair (absolute
/// and relative tolerance tol) and samples it at the requested times, which
/// must be nondecreasing and start at >= 0.
inline OracleResult reduced_ode_oracle(const Params& p, std::span<const double> k, cplx a0,
                                       std::span<const double> U0, double rho0, std::span<const double> times,
                                       double tol) {
  namespace ode = boost::numeric::odeint;
  if (!(rho0 > 0.0)) throw std::invalid_argument("oracle: rho0 must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("oracle: tol must be > 0");
  if (tol < 1e-15) throw std::runtime_error("oracle: tolerance not achievable in double precision");
  if (k.size() != U0.size() || k.empty() || k.size() > kMaxDim)
    throw std::invalid_argument("oracle: k and U0 must have the same dimension (1..3)");
  if (times.empty()) throw std::invalid_argument("oracle: no output times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw std::invalid_argument("oracle: output times must be nondecreasing");

  const int d = static_cast<int>(k.size());
  detail::PlaneWaveSystem sys{p.lambda, p.mu, d, {0, 0, 0}};
  for (int i = 0; i < d; ++i) sys.k[i] = k[i];

  std::vector<double> x(3 + d);
  x[0] = a0.real();
  x[1] = a0.imag();
  x[2] = rho0;
  for (int i = 0; i < d; ++i) x[3 + i] = U0[i];

  OracleResult out;
  const double mass0 = rho0 + std::norm(a0);
  std::array<double, kMaxDim> mom0{0, 0, 0};
  for (int i = 0; i < d; ++i) mom0[i] = rho0 * U0[i] + sys.k[i] * std::norm(a0);

  auto record = [&](const std::vector<double>& s, double t) {
    OracleSample smp;
    smp.t = t;
    smp.a = cplx(s[0], s[1]);
    smp.rho = s[2];
    for (int i = 0; i < d; ++i) smp.U[i] = s[3 + i];
    out.mass_drift = std::max(out.mass_drift, std::abs(smp.rho + std::norm(smp.a) - mass0));
    for (int i = 0; i < d; ++i)
      out.momentum_drift =
          std::max(out.momentum_drift, std::abs(smp.rho * smp.U[i] + sys.k[i] * std::norm(smp.a) - mom0[i]));
    out.samples.push_back(smp);
  };

  std::vector<double> tv(times.begin(), times.end());
  // integrate_times needs a start time; prepend 0 if the first sample is later.
  const bool prepend = tv.front() > 0.0;
  if (prepend) tv.insert(tv.begin(), 0.0);
  const double span = tv.back() - tv.front();
  const double dt0 = span > 0.0 ? std::min(1e-3, span * 1e-3) : 1e-3;
  bool skip_first = prepend;
  try {
    auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<std::vector<double>>());
    ode::integrate_times(
        stepper, sys, x, tv.begin(), tv.end(), dt0,
        [&](const std::vector<double>& s, double t) {
          if (skip_first) {
            skip_first = false;
            return;
          }
          record(s, t);
        },
        ode::max_step_checker(1000000));
  } catch (const ode::no_progress_error&) {
    throw std::runtime_error("oracle: tolerance not achievable");
  } catch (const ode::step_adjustment_error&) {
    throw std::runtime_error("oracle: tolerance not achievable");
  }
  for (const auto& s : out.samples)
    if (!std::isfinite(s.a.real()) || !std::isfinite(s.rho)) throw std::runtime_error("oracle: non-finite solution");
  return out;
}

/// Closed form for k = 0, U = 0: |a(t)|^2 = |a0|^2 / (1 + 2 Lambda mu |a0|^2 t).
inline double uniform_decay_closed_form(const Params& p, double a0_sq, double t) {
  return a0_sq / (1.0 + 2.0 * p.lambda * p.mu * a0_sq * t);
}

}  // namespace pitaevskii
