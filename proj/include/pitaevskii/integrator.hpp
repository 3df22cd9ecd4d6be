#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pitaevskii/diagnostics.hpp"

namespace pitaevskii {

/// Sub-flow integrator: integrating-factor (Lawson) Runge-Kutta with the
/// stiff linear part propagated exactly in Fourier space.
enum class Scheme { LawsonRK4, LawsonRK2 };

inline const char* scheme_name(Scheme s) { return s == Scheme::LawsonRK4 ? "lawson-rk4" : "lawson-rk2"; }

inline Scheme parse_scheme(const std::string& name) {
  if (name == "lawson-rk4") return Scheme::LawsonRK4;
  if (name == "lawson-rk2") return Scheme::LawsonRK2;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected lawson-rk4 or lawson-rk2)");
}

struct StepConfig {
  double dt_init = 1e-3;
  double cfl = 0.4;
  double dt_min = 1e-8;
  double dt_max = 1e-2;
  bool adaptive = false;
  Scheme nls_scheme = Scheme::LawsonRK4;
  Scheme fluid_scheme = Scheme::LawsonRK4;
  bool dealias = true;

  void validate() const {
    if (!(dt_min > 0.0)) throw std::invalid_argument("dt_min must be > 0");
    if (!(dt_min <= dt_init && dt_init <= dt_max)) throw std::invalid_argument("need dt_min <= dt_init <= dt_max");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  }
  friend bool operator==(const StepConfig&, const StepConfig&) = default;
};

/// Non-finite values appeared during a step.
class BlowUp : public std::runtime_error {
 public:
  explicit BlowUp(double last_valid_time)
      : std::runtime_error("blow-up: non-finite values after t=" + std::to_string(last_valid_time)),
        last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// The step-size floor was reached while the CFL bound still required smaller steps.
class CflViolation : public std::runtime_error {
 public:
  CflViolation(double t, double required)
      : std::runtime_error("cfl violation at t=" + std::to_string(t) + ": required dt=" + std::to_string(required) +
                           " is below dt_min"),
        t_(t),
        required_(required) {}
  double time() const { return t_; }
  double required_dt() const { return required_; }

 private:
  double t_;
  double required_;
};

namespace detail {

inline std::vector<cplx> exp_multiplier(const SpectralPlan& plan, cplx rate_per_k2, double h) {
  const auto k2 = plan.k_squared();
  std::vector<cplx> m(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) m[i] = std::exp(-rate_per_k2 * k2[i] * h);
  return m;
}

template <class T>
Field<T> apply_table(const SpectralPlan& plan, const Field<T>& f, const std::vector<cplx>& table) {
  return plan.apply_multiplier(f, [&](std::size_t i) { return table[i]; });
}

template <class T>
VectorField<T> apply_table(const SpectralPlan& plan, const VectorField<T>& v, const std::vector<cplx>& table) {
  std::vector<Field<T>> c;
  for (int a = 0; a < v.dim(); ++a) c.push_back(apply_table(plan, v[a], table));
  return VectorField<T>(std::move(c));
}

// Superfluid sub-flow over h with u frozen:
//   psi_t = ((Lambda+i)/2) Lap psi + N(psi),  rho_t = 2 Lambda Re(conj(psi) B psi).
inline void nls_substep(const SpectralPlan& plan, ComplexField& psi, RealField& rho, const RealVectorField& u,
                        const Params& p, double h, Scheme scheme) {
  const cplx rate(0.5 * p.lambda, 0.5);  // linear part is -rate*|k|^2
  auto nonlinear = [&](const ComplexField& y) {
    auto n = coupling_nonlinear(plan, y, u, p.mu);
    n *= cplx(-p.lambda, 0.0);
    ComplexField cubic(y.grid_ptr());
    for (std::size_t i = 0; i < y.size(); ++i) cubic[i] = std::norm(y[i]) * y[i];
    n.axpy(cplx(0.0, -p.mu), plan.dealias(cubic));
    return n;
  };
  auto source = [&](const ComplexField& y) { return continuity_source(plan, y, apply_B(plan, y, u, p.mu), p); };

  if (scheme == Scheme::LawsonRK2) {
    const auto e1 = exp_multiplier(plan, rate, h);
    const auto k1 = nonlinear(psi);
    const auto s1 = source(psi);
    const auto y1 = apply_table(plan, psi + h * k1, e1);
    const auto k2 = nonlinear(y1);
    const auto s2 = source(y1);
    auto next = apply_table(plan, psi, e1);
    next.axpy(0.5 * h, apply_table(plan, k1, e1));
    next.axpy(0.5 * h, k2);
    psi = std::move(next);
    rho.axpy(0.5 * h, s1);
    rho.axpy(0.5 * h, s2);
    return;
  }

  const auto e_half = exp_multiplier(plan, rate, 0.5 * h);
  const auto e_full = exp_multiplier(plan, rate, h);
  const auto psi_half = apply_table(plan, psi, e_half);

  const auto k1 = nonlinear(psi);
  const auto s1 = source(psi);
  const auto ya = apply_table(plan, psi + (0.5 * h) * k1, e_half);
  const auto k2 = nonlinear(ya);
  const auto s2 = source(ya);
  auto yb = psi_half;
  yb.axpy(0.5 * h, k2);
  const auto k3 = nonlinear(yb);
  const auto s3 = source(yb);
  auto yc = apply_table(plan, psi, e_full);
  yc.axpy(h, apply_table(plan, k3, e_half));
  const auto k4 = nonlinear(yc);
  const auto s4 = source(yc);

  auto next = apply_table(plan, psi, e_full);
  next.axpy(h / 6.0, apply_table(plan, k1, e_full));
  next.axpy(h / 3.0, apply_table(plan, k2 + k3, e_half));
  next.axpy(h / 6.0, k4);
  psi = std::move(next);
  rho.axpy(h / 6.0, s1);
  rho.axpy(h / 3.0, s2 + s3);
  rho.axpy(h / 6.0, s4);
}

// Normal-fluid sub-flow over h with psi frozen:
//   u_t = (nu/rho_ref) Lap u + [P_rho(nse_rhs) - (nu/rho_ref) Lap u],  rho_t = -div(rho u).
inline void fluid_substep(const SpectralPlan& plan, const ComplexField& psi, RealVectorField& u, RealField& rho,
                          const Params& p, double t, double h, Scheme scheme) {
  const double visc = p.nu / p.rho_ref();
  const cplx rate(visc, 0.0);
  std::vector<cplx> pressure;  // warm start carried across stages
  auto rhs = [&](const RealVectorField& uu, const RealField& rr, double tt) {
    const auto bpsi = apply_B(plan, psi, uu, p.mu);
    auto acc = plan.project_variable_density(nse_rhs(plan, psi, uu, rr, bpsi, p, tt), rr, 1e-13, 500, &pressure)
                   .projected;
    if (visc != 0.0) acc.axpy(-visc, plan.laplacian(uu));
    return std::make_pair(std::move(acc), density_transport(plan, rr, uu));
  };

  if (scheme == Scheme::LawsonRK2) {
    const auto e1 = exp_multiplier(plan, rate, h);
    const auto [k1, r1] = rhs(u, rho, t);
    const auto u1 = apply_table(plan, u + h * k1, e1);
    auto rho1 = rho;
    rho1.axpy(h, r1);
    const auto [k2, r2] = rhs(u1, rho1, t + h);
    auto next = apply_table(plan, u, e1);
    next.axpy(0.5 * h, apply_table(plan, k1, e1));
    next.axpy(0.5 * h, k2);
    u = std::move(next);
    rho.axpy(0.5 * h, r1);
    rho.axpy(0.5 * h, r2);
    return;
  }

  const auto e_half = exp_multiplier(plan, rate, 0.5 * h);
  const auto e_full = exp_multiplier(plan, rate, h);

  const auto [k1, r1] = rhs(u, rho, t);
  const auto ua = apply_table(plan, u + (0.5 * h) * k1, e_half);
  auto rhoa = rho;
  rhoa.axpy(0.5 * h, r1);
  const auto [k2, r2] = rhs(ua, rhoa, t + 0.5 * h);
  auto ub = apply_table(plan, u, e_half);
  ub.axpy(0.5 * h, k2);
  auto rhob = rho;
  rhob.axpy(0.5 * h, r2);
  const auto [k3, r3] = rhs(ub, rhob, t + 0.5 * h);
  auto uc = apply_table(plan, u, e_full);
  uc.axpy(h, apply_table(plan, k3, e_half));
  auto rhoc = rho;
  rhoc.axpy(h, r3);
  const auto [k4, r4] = rhs(uc, rhoc, t + h);

  auto next = apply_table(plan, u, e_full);
  next.axpy(h / 6.0, apply_table(plan, k1, e_full));
  next.axpy(h / 3.0, apply_table(plan, k2 + k3, e_half));
  next.axpy(h / 6.0, k4);
  u = std::move(next);
  rho.axpy(h / 6.0, r1);
  rho.axpy(h / 3.0, r2 + r3);
  rho.axpy(h / 6.0, r4);
}

/// One Strang step NLS(dt/2) -> fluid(dt) -> NLS(dt/2). dt may be negative
/// (used for reversibility checks); no density-floor check on the output.
inline State strang_step(const SpectralPlan& plan, const State& s, const Params& p, double dt,
                         const StepConfig& cfg) {
  State out = s;
  nls_substep(plan, out.psi, out.rho, out.u, p, 0.5 * dt, cfg.nls_scheme);
  fluid_substep(plan, out.psi, out.u, out.rho, p, s.t + 0.5 * dt, dt, cfg.fluid_scheme);
  nls_substep(plan, out.psi, out.rho, out.u, p, 0.5 * dt, cfg.nls_scheme);
  // Remove divergence accumulated from round-off.
  out.u = plan.leray_project(out.u).first;
  out.t = s.t + dt;
  return out;
}

}  // namespace detail

/// Advances the state by dt > 0. Throws DensityFloorViolation if rho drops
/// below epsilon (during the fluid stages or at the end of the step) and
/// BlowUp if non-finite values appear.
inline State step(const State& s, const Params& p, double dt, const StepConfig& cfg = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  s.check_consistent();
  const auto plan = plan_for(s.grid_ptr(), cfg.dealias);
  State out = detail::strang_step(*plan, s, p, dt, cfg);
  if (!out.all_finite()) throw BlowUp(s.t);
  check_density_floor(out.rho, p.epsilon, out.t);
  return out;
}

/// CFL-limited step: clamp(cfl * dx / (||u||_inf + c0), dt_min, dt_max) with
/// c0 = max(1, k_max/2). Returns cfg.dt_init when cfg.adaptive is false.
inline double adaptive_dt(const State& s, const StepConfig& cfg) {
  if (!cfg.adaptive) return cfg.dt_init;
  const double umax = norm(s.u, NormSpec::linf());
  const double c0 = std::max(1.0, 0.5 * s.grid().k_max());
  const double dt = cfg.cfl * s.grid().min_dx() / (umax + c0);
  if (dt < cfg.dt_min) throw CflViolation(s.t, dt);
  return std::min(dt, cfg.dt_max);
}

using Observer = std::function<void(double, const State&, const DiagnosticsRecord&)>;

struct RunOptions {
  std::size_t snapshot_every = 0;  // steps between stored snapshots; 0 = none
  bool keep_initial_snapshot = true;
};

/// Why a run stopped before its horizon.
struct StopEvent {
  enum class Kind { DensityFloor, BlowUp, Cfl };
  Kind kind = Kind::DensityFloor;
  double time = 0.0;
  std::string message;
  std::optional<double> value;                     // density value for floor violations
  std::optional<std::array<double, kMaxDim>> location;
};

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  std::vector<State> snapshots;
  State final_state;
  std::optional<StopEvent> stop;

  bool completed() const { return !stop.has_value(); }
};

/// Initial-data checks and ingest: rho in [m, M], u projected, psi dealiased.
inline State prepare_initial_state(State s, const Params& p, bool dealias = true) {
  p.validate();
  s.check_consistent();
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    if (!(s.rho[i] >= p.m && s.rho[i] <= p.M))
      throw std::invalid_argument("initial density must lie in [m, M] pointwise");
  const auto plan = plan_for(s.grid_ptr(), dealias);
  s.u = plan->leray_project(s.u).first;
  s.psi = plan->dealias(s.psi);
  return s;
}

/// Integrates from the initial state to horizon T, recording diagnostics at
/// every accepted step. Physics events (density floor, blow-up, CFL) end the
/// run early and are reported in Trajectory::stop; the trajectory keeps all
/// records up to the last valid step. Observers see every record including
/// the initial one and must not mutate the state.
inline Trajectory run(const State& initial, const Params& p, const StepConfig& cfg, double T,
                      std::span<const Observer> observers = {}, const RunOptions& opts = {}) {
  cfg.validate();
  if (!(T >= 0.0)) throw std::invalid_argument("run: horizon must be >= 0");
  Trajectory traj;
  State cur = prepare_initial_state(initial, p, cfg.dealias);

  auto emit = [&](const State& s, const DiagnosticsRecord& r) {
    for (const auto& obs : observers) obs(s.t, s, r);
    traj.records.push_back(r);
  };
  emit(cur, compute_record(cur, p));
  if (opts.keep_initial_snapshot && opts.snapshot_every > 0) traj.snapshots.push_back(cur);

  // Fixed steps land exactly on T: dt is rescaled to T / ceil(T / dt_init).
  std::size_t fixed_steps = 0;
  double fixed_dt = 0.0;
  if (!cfg.adaptive && T > 0.0) {
    fixed_steps = static_cast<std::size_t>(std::ceil(T / cfg.dt_init - 1e-9));
    fixed_steps = std::max<std::size_t>(fixed_steps, 1);
    fixed_dt = T / static_cast<double>(fixed_steps);
  }

  // T is measured from the initial time, so a reloaded snapshot continues its clock.
  const double t0 = cur.t, t_end = t0 + T;
  std::size_t n = 0;
  try {
    while (cfg.adaptive ? cur.t - t0 < T * (1.0 - 1e-14) : n < fixed_steps) {
      double dt = cfg.adaptive ? adaptive_dt(cur, cfg) : fixed_dt;
      if (cfg.adaptive && cur.t + dt > t_end) dt = t_end - cur.t;
      State next = step(cur, p, dt, cfg);
      ++n;
      if (!cfg.adaptive) next.t = t0 + static_cast<double>(n) * fixed_dt;
      auto rec = compute_record(next, p, &cur);
      rec.step_dt = dt;
      if (!rec.all_finite()) throw BlowUp(cur.t);
      emit(next, rec);
      if (opts.snapshot_every > 0 && n % opts.snapshot_every == 0) traj.snapshots.push_back(next);
      cur = std::move(next);
    }
  } catch (const DensityFloorViolation& e) {
    traj.stop = StopEvent{StopEvent::Kind::DensityFloor, e.time(), e.what(), e.value(), e.location()};
  } catch (const BlowUp& e) {
    traj.stop = StopEvent{StopEvent::Kind::BlowUp, e.last_valid_time(), e.what(), std::nullopt, std::nullopt};
  } catch (const CflViolation& e) {
    traj.stop = StopEvent{StopEvent::Kind::Cfl, e.time(), e.what(), std::nullopt, std::nullopt};
  }
  traj.final_state = std::move(cur);
  return traj;
}

}  // namespace pitaevskii
