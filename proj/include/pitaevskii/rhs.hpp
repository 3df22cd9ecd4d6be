#pragma once

#include "pitaevskii/model.hpp"

namespace pitaevskii {

// Right-hand sides of the coupled system
//
//   d_t psi + Lambda B psi = (i/2) Lap psi - i mu |psi|^2 psi
//   B = 1/2 (-i grad - u)^2 + mu |psi|^2 = -1/2 Lap + i u.grad + 1/2 |u|^2 + mu |psi|^2
//   d_t rho + div(rho u) = 2 Lambda Re(conj(psi) B psi)
//   rho (d_t u + u.grad u) + grad p - nu Lap u = -2 Lambda Im(grad conj(psi) B psi)
//                                                - 2 Lambda u Re(conj(psi) B psi)
//
// Every nonlinear product is 2/3-dealiased before it is used.

/// The part of B psi that is not -1/2 Lap psi:
/// dealias(i u.grad psi + 1/2 |u|^2 psi + mu |psi|^2 psi).
inline ComplexField coupling_nonlinear(const SpectralPlan& plan, const ComplexField& psi, const RealVectorField& u,
                                       double mu) {
  const auto grad = plan.gradient(psi);
  ComplexField out(psi.grid_ptr());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    cplx adv{};
    double u2 = 0.0;
    for (int a = 0; a < u.dim(); ++a) {
      adv += u[a][i] * grad[a][i];
      u2 += u[a][i] * u[a][i];
    }
    out[i] = cplx(0.0, 1.0) * adv + (0.5 * u2 + mu * std::norm(psi[i])) * psi[i];
  }
  return plan.dealias(out);
}

inline ComplexField apply_B(const SpectralPlan& plan, const ComplexField& psi, const RealVectorField& u, double mu) {
  // One forward transform of psi feeds both grad psi and Lap psi.
  const auto spec = plan.spectrum(psi);
  const auto k2 = plan.k_squared();
  std::vector<std::vector<cplx>> g(u.dim(), std::vector<cplx>(spec.size()));
  for (int a = 0; a < u.dim(); ++a) {
    const auto kap = plan.derivative_wavenumber(a);
    for (std::size_t i = 0; i < spec.size(); ++i) g[a][i] = cplx(0.0, kap[i]) * spec[i];
  }
  const auto grad = plan.synthesize_all<cplx>(std::move(g));
  std::vector<cplx> prod(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    cplx adv{};
    double u2 = 0.0;
    for (int a = 0; a < u.dim(); ++a) {
      adv += u[a][i] * grad[a][i];
      u2 += u[a][i] * u[a][i];
    }
    prod[i] = cplx(0.0, 1.0) * adv + (0.5 * u2 + mu * std::norm(psi[i])) * psi[i];
  }
  plan.forward_inplace(prod);
  for (std::size_t i = 0; i < prod.size(); ++i) {
    if (plan.dealias_enabled() && !plan.retained_by_dealias(i))
      prod[i] = cplx{};
    else
      prod[i] += 0.5 * k2[i] * spec[i];
  }
  return plan.synthesize<cplx>(std::move(prod));
}

/// B psi for the state's own (psi, u).
inline ComplexField apply_B(const State& s, const Params& p) {
  s.check_consistent();
  return apply_B(*plan_for(s.grid_ptr()), s.psi, s.u, p.mu);
}

/// d_t psi = -Lambda B psi + (i/2) Lap psi - i mu |psi|^2 psi.
inline ComplexField nls_rhs(const SpectralPlan& plan, const ComplexField& psi, const RealVectorField& u,
                            const Params& p) {
  auto out = apply_B(plan, psi, u, p.mu);
  out *= cplx(-p.lambda, 0.0);
  out.axpy(cplx(0.0, 0.5), plan.laplacian(psi));
  ComplexField cubic(psi.grid_ptr());
  for (std::size_t i = 0; i < psi.size(); ++i) cubic[i] = std::norm(psi[i]) * psi[i];
  out.axpy(cplx(0.0, -p.mu), plan.dealias(cubic));
  return out;
}

inline ComplexField nls_rhs(const State& s, const Params& p) {
  s.check_consistent();
  return nls_rhs(*plan_for(s.grid_ptr()), s.psi, s.u, p);
}

/// 2 Lambda Re(conj(psi) B psi) given a precomputed B psi.
inline RealField continuity_source(const SpectralPlan& plan, const ComplexField& psi, const ComplexField& bpsi,
                                   const Params& p) {
  RealField out(psi.grid_ptr());
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] = 2.0 * p.lambda * (std::conj(psi[i]) * bpsi[i]).real();
  return plan.dealias(out);
}

inline RealField continuity_source(const State& s, const Params& p) {
  const auto plan = plan_for(s.grid_ptr());
  return continuity_source(*plan, s.psi, apply_B(s, p), p);
}

/// -2 Lambda Im(grad conj(psi) B psi) - 2 Lambda u Re(conj(psi) B psi).
inline RealVectorField momentum_source_nonconservative(const SpectralPlan& plan, const ComplexField& psi,
                                                       const RealVectorField& u, const ComplexField& bpsi,
                                                       const Params& p) {
  const auto grad = plan.gradient(psi);
  RealVectorField out(psi.grid_ptr());
  for (int a = 0; a < u.dim(); ++a) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double exch = (std::conj(psi[i]) * bpsi[i]).real();
      out[a][i] = -2.0 * p.lambda * (std::conj(grad[a][i]) * bpsi[i]).imag() - 2.0 * p.lambda * u[a][i] * exch;
    }
  }
  return plan.dealias(out);
}

inline RealVectorField momentum_source_nonconservative(const State& s, const Params& p) {
  const auto plan = plan_for(s.grid_ptr());
  return momentum_source_nonconservative(*plan, s.psi, s.u, apply_B(s, p), p);
}

/// -2 Lambda Im(grad conj(psi) B psi) + Lambda grad Im(conj(psi) B psi) + (mu/2) grad |psi|^4,
/// the source of the momentum-form equation for rho u. Cross-validation only.
inline RealVectorField momentum_source_conservative(const State& s, const Params& p) {
  s.check_consistent();
  const auto plan = plan_for(s.grid_ptr());
  const auto bpsi = apply_B(s, p);
  const auto grad = plan->gradient(s.psi);
  RealField im_exch(s.grid_ptr()), quartic(s.grid_ptr());
  for (std::size_t i = 0; i < s.psi.size(); ++i) {
    im_exch[i] = (std::conj(s.psi[i]) * bpsi[i]).imag();
    quartic[i] = std::pow(std::norm(s.psi[i]), 2);
  }
  const auto g_im = plan->gradient(plan->dealias(im_exch));
  const auto g_q = plan->gradient(plan->dealias(quartic));
  RealVectorField out(s.grid_ptr());
  for (int a = 0; a < s.u.dim(); ++a) {
    RealField flux(s.grid_ptr());
    for (std::size_t i = 0; i < s.psi.size(); ++i)
      flux[i] = -2.0 * p.lambda * (std::conj(grad[a][i]) * bpsi[i]).imag();
    out[a] = plan->dealias(flux);
    out[a].axpy(p.lambda, g_im[a]);
    out[a].axpy(0.5 * p.mu, g_q[a]);
  }
  return out;
}

/// -u.grad u, dealiased.
inline RealVectorField advection(const SpectralPlan& plan, const RealVectorField& u) {
  RealVectorField out(u.grid_ptr());
  for (int c = 0; c < u.dim(); ++c) {
    const auto g = plan.gradient(u[c]);
    for (std::size_t i = 0; i < u.size(); ++i) {
      double s = 0.0;
      for (int a = 0; a < u.dim(); ++a) s += u[a][i] * g[a][i];
      out[c][i] = -s;
    }
  }
  return plan.dealias(out);
}

/// Pre-projection acceleration -u.grad u + rho^{-1}(nu Lap u + S) with S the
/// non-conservative momentum source built from bpsi. Throws
/// DensityFloorViolation when rho < epsilon anywhere.
inline RealVectorField nse_rhs(const SpectralPlan& plan, const ComplexField& psi, const RealVectorField& u,
                               const RealField& rho, const ComplexField& bpsi, const Params& p, double t) {
  check_density_floor(rho, p.epsilon, t);
  auto forcing = momentum_source_nonconservative(plan, psi, u, bpsi, p);
  if (p.nu != 0.0) forcing.axpy(p.nu, plan.laplacian(u));
  for (int a = 0; a < u.dim(); ++a)
    for (std::size_t i = 0; i < u.size(); ++i) forcing[a][i] /= rho[i];
  auto out = advection(plan, u);
  out += plan.dealias(forcing);
  return out;
}

inline RealVectorField nse_rhs(const State& s, const Params& p) {
  s.check_consistent();
  const auto plan = plan_for(s.grid_ptr());
  return nse_rhs(*plan, s.psi, s.u, s.rho, apply_B(*plan, s.psi, s.u, p.mu), p, s.t);
}

/// Divergence-free acceleration d_t u: nse_rhs with the variable-density
/// pressure removed.
inline RealVectorField fluid_acceleration(const SpectralPlan& plan, const ComplexField& psi, const RealVectorField& u,
                                          const RealField& rho, const ComplexField& bpsi, const Params& p, double t) {
  return plan.project_variable_density(nse_rhs(plan, psi, u, rho, bpsi, p, t), rho).projected;
}

/// -div(rho u), dealiased.
inline RealField density_transport(const SpectralPlan& plan, const RealField& rho, const RealVectorField& u) {
  RealVectorField flux(u.grid_ptr());
  for (int a = 0; a < u.dim(); ++a)
    for (std::size_t i = 0; i < u.size(); ++i) flux[a][i] = rho[i] * u[a][i];
  auto out = plan.divergence(plan.dealias(flux));
  out *= -1.0;
  return out;
}

}  // namespace pitaevskii
