#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pitaevskii/rhs.hpp"

namespace pitaevskii {

/// Per-step scalars. Column order of the CSV rendering is csv_columns().
struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;   // 1/2||sqrt(rho)u||^2 + 1/2||grad psi||^2 + mu/2 ||psi||_4^4
  double d_visc = 0.0;   // nu ||grad u||^2
  double d_relax = 0.0;  // 2 Lambda ||B psi||^2
  double m_sf = 0.0;     // ||psi||^2
  double m_fluid = 0.0;  // int rho
  double rho_min = 0.0;
  double rho_max = 0.0;
  double X = 0.0;  // 1 + ||Lap psi||^2 + nu ||grad u||^2
  double Y = 0.0;  // Lambda ||grad B psi||^2 + ||sqrt(rho) d_t u||^2 + nu^2/M' ||Lap u||^2
  double sob_psi = 0.0;   // ||psi||_{H^{5/2+delta}}
  double sob_u = 0.0;     // ||u||_{H^{3/2+delta}}
  double sob_bpsi = 0.0;  // ||B psi||_{H^{3/2+delta}}
  double dt_psi = 0.0;    // finite-difference ||d_t psi||_{L^2}
  double dt_u = 0.0;      // finite-difference ||d_t u||_{L^2}
  double dt_rho = 0.0;    // finite-difference ||d_t rho||_{H^-1}
  std::array<double, 3> momentum{0.0, 0.0, 0.0};  // int rho u + Im(conj(psi) grad psi)
  double div_u = 0.0;     // ||div u||_inf
  double step_dt = 0.0;   // step that produced this record (0 for the initial one)

  static constexpr std::array<const char*, 21> csv_columns() {
    return {"t",      "E",      "D_visc", "D_relax", "m_sf",   "m_fluid", "rho_min",
            "rho_max", "X",     "Y",      "sob_psi", "sob_u",  "sob_Bpsi", "dt_psi",
            "dt_u",   "dt_rho", "P_x",    "P_y",     "P_z",    "div_u",   "dt"};
  }

  bool all_finite() const {
    const double v[] = {t, energy, d_visc, d_relax, m_sf, m_fluid, rho_min, rho_max, X, Y, sob_psi, sob_u,
                        sob_bpsi, dt_psi, dt_u, dt_rho, momentum[0], momentum[1], momentum[2], div_u};
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

/// Energy functional.
inline double energy(const State& s, const Params& p) {
  s.check_consistent();
  double kinetic = 0.0, quartic = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    double u2 = 0.0;
    for (int a = 0; a < s.u.dim(); ++a) u2 += s.u[a][i] * s.u[a][i];
    kinetic += s.rho[i] * u2;
    quartic += std::pow(std::norm(s.psi[i]), 2);
  }
  const double cell = s.grid().cell_volume();
  const double grad2 = std::pow(norm(s.psi, NormSpec::h(1.0, true)), 2);
  return 0.5 * kinetic * cell + 0.5 * grad2 + 0.5 * p.mu * quartic * cell;
}

/// Total momentum int rho u + Im(conj(psi) grad psi), padded to 3 components.
inline std::array<double, 3> total_momentum(const State& s) {
  const auto plan = plan_for(s.grid_ptr());
  const auto grad = plan->gradient(s.psi);
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int a = 0; a < s.u.dim(); ++a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.rho.size(); ++i)
      acc += s.rho[i] * s.u[a][i] + (std::conj(s.psi[i]) * grad[a][i]).imag();
    out[a] = acc * s.grid().cell_volume();
  }
  return out;
}

inline double h_minus_one(const RealField& f) { return norm(f, NormSpec::h(-1.0)); }

/// Finite-difference time-derivative norms between two states.
struct DtNorms {
  double t = 0.0;
  double psi = 0.0;  // ||d_t psi||_{L^2}
  double u = 0.0;    // ||d_t u||_{L^2}
  double rho = 0.0;  // ||d_t rho||_{H^-1}
};

inline DtNorms difference_quotient_norms(const State& a, const State& b) {
  const double h = b.t - a.t;
  if (!(h != 0.0)) throw std::invalid_argument("difference quotient needs distinct times");
  DtNorms out;
  out.psi = std::sqrt(l2_squared(b.psi - a.psi)) / std::abs(h);
  out.u = std::sqrt(l2_squared(b.u - a.u)) / std::abs(h);
  out.rho = h_minus_one(b.rho - a.rho) / std::abs(h);
  return out;
}

/// Time-derivative norms for a snapshot sequence: centered differences in the
/// interior, one-sided at the ends.
inline std::vector<DtNorms> time_derivative_report(std::span<const State> snapshots) {
  if (snapshots.size() < 2) throw std::invalid_argument("time_derivative_report needs >= 2 snapshots");
  std::vector<DtNorms> out;
  const std::size_t n = snapshots.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    DtNorms d = difference_quotient_norms(snapshots[lo], snapshots[hi]);
    d.t = snapshots[i].t;
    out.push_back(d);
  }
  return out;
}

/// All per-record quantities for a state. Finite-difference norms are filled
/// from `previous` when given, else left at zero.
inline DiagnosticsRecord compute_record(const State& s, const Params& p, const State* previous = nullptr) {
  s.check_consistent();
  const auto plan = plan_for(s.grid_ptr());
  const Grid& g = s.grid();
  DiagnosticsRecord r;
  r.t = s.t;
  r.energy = energy(s, p);

  std::vector<std::vector<cplx>> uspec;
  for (int a = 0; a < s.u.dim(); ++a) uspec.push_back(plan->spectrum(s.u[a]));
  const double grad_u2 = sobolev_squared_from_spectra(*plan, uspec, 1.0, true);
  const double lap_u2 = sobolev_squared_from_spectra(*plan, uspec, 2.0, true);
  r.d_visc = p.nu * grad_u2;

  const auto bpsi = apply_B(*plan, s.psi, s.u, p.mu);
  const std::vector<std::vector<cplx>> bspec{plan->spectrum(bpsi)};
  r.d_relax = 2.0 * p.lambda * l2_squared(bpsi);
  r.m_sf = l2_squared(s.psi);
  r.m_fluid = integral(s.rho);
  r.rho_min = *std::min_element(s.rho.raw().begin(), s.rho.raw().end());
  r.rho_max = *std::max_element(s.rho.raw().begin(), s.rho.raw().end());

  const std::vector<std::vector<cplx>> psispec{plan->spectrum(s.psi)};
  const double lap_psi2 = sobolev_squared_from_spectra(*plan, psispec, 2.0, true);
  r.X = 1.0 + lap_psi2 + p.nu * grad_u2;

  // Instantaneous d_t u for Y; density-floor checks are the integrator's job.
  const double grad_b2 = sobolev_squared_from_spectra(*plan, bspec, 1.0, true);
  double accel2 = 0.0;
  if (r.rho_min > 0.0) {
    Params unchecked = p;
    unchecked.epsilon = 0.0;
    const auto dtu = fluid_acceleration(*plan, s.psi, s.u, s.rho, bpsi, unchecked, s.t);
    for (int a = 0; a < dtu.dim(); ++a)
      for (std::size_t i = 0; i < s.rho.size(); ++i) accel2 += s.rho[i] * dtu[a][i] * dtu[a][i];
    accel2 *= g.cell_volume();
  }
  r.Y = p.lambda * grad_b2 + accel2 + (p.nu * p.nu / p.M_prime()) * lap_u2;

  r.sob_psi = std::sqrt(sobolev_squared_from_spectra(*plan, psispec, 2.5 + p.delta, false));
  r.sob_u = std::sqrt(sobolev_squared_from_spectra(*plan, uspec, 1.5 + p.delta, false));
  r.sob_bpsi = std::sqrt(sobolev_squared_from_spectra(*plan, bspec, 1.5 + p.delta, false));

  if (previous != nullptr) {
    const auto d = difference_quotient_norms(*previous, s);
    r.dt_psi = d.psi;
    r.dt_u = d.u;
    r.dt_rho = d.rho;
  }
  r.momentum = total_momentum(s);
  r.div_u = norm(plan->divergence(s.u), NormSpec::linf());
  return r;
}

/// Energy-equality residual r(t) = E(t) + int_0^t (D_visc + D_relax) - E_0,
/// trapezoid rule in time over the record times.
inline std::vector<double> energy_budget(std::span<const DiagnosticsRecord> records) {
  if (records.size() < 2) throw std::invalid_argument("energy_budget needs >= 2 records");
  std::vector<double> r(records.size(), 0.0);
  const double e0 = records[0].energy;
  double dissipated = 0.0;
  for (std::size_t n = 1; n < records.size(); ++n) {
    const double h = records[n].t - records[n - 1].t;
    dissipated += 0.5 * h *
                  (records[n].d_visc + records[n].d_relax + records[n - 1].d_visc + records[n - 1].d_relax);
    r[n] = records[n].energy + dissipated - e0;
  }
  return r;
}

/// Q_T from the highest-order estimate, with gamma from params.
inline double q_horizon(const Params& p, double X0, double E1, double T) {
  const double Mp = p.M_prime();
  return p.lambda * Mp / (p.nu * p.nu) * X0 +
         (p.lambda * Mp / (p.nu * p.nu * p.epsilon) + p.gamma) * X0 * X0 * T + p.lambda * E1 * E1 * T;
}

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;   // rhs - lhs; negative means violated
  bool passed = false;
  bool asserted = true;  // false: reported as an observation only
};

struct BoundsReference {
  double m_sf0 = 0.0;         // ||psi_0||^2
  double X0 = 1.0;
  double Y_integral = 0.0;    // int_0^t Y so far
  double rel_tol = 1e-8;
};

/// Evaluates the pointwise-in-time bounds for one record.
inline std::vector<BoundCheck> bounds_report(const DiagnosticsRecord& rec, const Params& p,
                                             const BoundsReference& ref) {
  std::vector<BoundCheck> out;
  auto add = [&](std::string name, double lhs, double rhs, double slack, bool asserted) {
    out.push_back({std::move(name), lhs, rhs, rhs - lhs, lhs <= rhs + slack, asserted});
  };
  const double psi_norm = std::sqrt(rec.m_sf), psi0_norm = std::sqrt(ref.m_sf0);
  add("superfluid_mass", psi_norm, psi0_norm, ref.rel_tol * psi0_norm, true);
  {
    BoundCheck lower{"density_lower", p.epsilon, rec.rho_min, rec.rho_min - p.epsilon, rec.rho_min > p.epsilon, true};
    out.push_back(lower);
  }
  add("density_upper", rec.rho_max, p.M_prime(), ref.rel_tol * p.M_prime(), true);
  add("higher_order_X", rec.X, 2.0 * ref.X0, 0.0, false);
  add("higher_order_Y_integral", ref.Y_integral, 31.0 * ref.X0, 0.0, false);
  return out;
}

inline bool asserted_bounds_pass(std::span<const BoundCheck> checks) {
  for (const auto& c : checks)
    if (c.asserted && !c.passed) return false;
  return true;
}

}  // namespace pitaevskii
