#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pitaevskii/initial_conditions.hpp"
#include "pitaevskii/integrator.hpp"

namespace pitaevskii {

/// Squared difference norms between a perturbed ("weak") state A and the
/// base ("moderate") state B at the same time.
struct DifferenceRecord {
  double t = 0.0;
  double phi = 0.0;        // ||psi - psi~||^2
  double grad_phi = 0.0;   // ||grad(psi - psi~)||^2
  double Phi = 0.0;        // ||u - u~||^2
  double sigma = 0.0;      // ||rho - rho~||^2
  double D = 0.0;          // grad_phi + Phi + sigma
  double H = 0.0;          // driver bundle, filled by the experiment
};

inline DifferenceRecord difference_norms(const State& a, const State& b) {
  a.check_consistent();
  b.check_consistent();
  require_same_grid(a.grid(), b.grid());
  if (a.t != b.t) throw std::invalid_argument("difference_norms: states at different times");
  DifferenceRecord r;
  r.t = a.t;
  const auto phi = a.psi - b.psi;
  r.phi = l2_squared(phi);
  r.grad_phi = std::pow(norm(phi, NormSpec::h(1.0, true)), 2);
  r.Phi = l2_squared(a.u - b.u);
  r.sigma = l2_squared(a.rho - b.rho);
  r.D = r.grad_phi + r.Phi + r.sigma;
  return r;
}

/// The driver monomials; their sum is H(t). Coefficients hidden in the
/// estimates are absorbed by the fitted constant.
struct GronwallBundle {
  static constexpr std::size_t kTerms = 12;
  static constexpr std::array<const char*, kTerms> names() {
    return {"u_H1^4",         "ut_H1^4",         "psi_H2^4",      "psit_H2^4",
            "psi_H1^4(1+mu^2)", "u_H2^2",        "ut_H2^2",       "ut_H1^2*ut_H2^2",
            "Bpsi_L2*Bpsi_H1", "dt_ut_L3^2",     "grad_rhot_L3^2", "ut_H1^2*Btpsit_L2^2"};
  }
  std::array<double, kTerms> terms{};
  double total() const {
    double s = 0.0;
    for (double x : terms) s += x;
    return s;
  }
};

/// Evaluates the bundle on the weak state a and moderate state b; dt_ub is
/// the time derivative of the moderate velocity (from its trajectory).
inline GronwallBundle gronwall_bundle(const State& a, const State& b, const Params& p, const RealVectorField* dt_ub) {
  if (dt_ub == nullptr) throw std::invalid_argument("gronwall_bundle: missing d_t u~ data");
  require_same_grid(a.grid(), b.grid());
  const auto plan = plan_for(b.grid_ptr());
  auto sq = [](double x) { return x * x; };
  const double u_h1 = norm(a.u, NormSpec::h(1.0)), ut_h1 = norm(b.u, NormSpec::h(1.0));
  const double u_h2 = norm(a.u, NormSpec::h(2.0)), ut_h2 = norm(b.u, NormSpec::h(2.0));
  const double psi_h2 = norm(a.psi, NormSpec::h(2.0)), psit_h2 = norm(b.psi, NormSpec::h(2.0));
  const double psi_h1 = norm(a.psi, NormSpec::h(1.0));
  const auto bpsi = apply_B(*plan, a.psi, a.u, p.mu);
  const auto btpsit = apply_B(*plan, b.psi, b.u, p.mu);

  GronwallBundle g;
  g.terms[0] = sq(sq(u_h1));
  g.terms[1] = sq(sq(ut_h1));
  g.terms[2] = sq(sq(psi_h2));
  g.terms[3] = sq(sq(psit_h2));
  g.terms[4] = sq(sq(psi_h1)) * (1.0 + p.mu * p.mu);
  g.terms[5] = sq(u_h2);
  g.terms[6] = sq(ut_h2);
  g.terms[7] = sq(ut_h1) * sq(ut_h2);
  g.terms[8] = norm(bpsi, NormSpec::lp(2.0)) * norm(bpsi, NormSpec::h(1.0));
  g.terms[9] = sq(norm(*dt_ub, NormSpec::lp(3.0)));
  g.terms[10] = sq(norm(plan->gradient(b.rho), NormSpec::lp(3.0)));
  g.terms[11] = sq(ut_h1) * l2_squared(btpsit);
  return g;
}

struct PerturbationSpec {
  enum class Target { Psi, U, Rho, All };
  Target target = Target::Psi;
  std::vector<long> mode{1, 1, 1};  // pattern cos(k.x); missing entries 0
  double amplitude = 1e-6;          // relative amplitude delta_p (0 allowed: control run)

  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
      throw std::invalid_argument("perturbation amplitude must be >= 0");
  }
  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

inline const char* target_name(PerturbationSpec::Target t) {
  switch (t) {
    case PerturbationSpec::Target::Psi: return "psi";
    case PerturbationSpec::Target::U: return "u";
    case PerturbationSpec::Target::Rho: return "rho";
    case PerturbationSpec::Target::All: return "all";
  }
  return "psi";
}

inline PerturbationSpec::Target parse_target(const std::string& s) {
  if (s == "psi") return PerturbationSpec::Target::Psi;
  if (s == "u") return PerturbationSpec::Target::U;
  if (s == "rho") return PerturbationSpec::Target::Rho;
  if (s == "all") return PerturbationSpec::Target::All;
  throw std::invalid_argument("unknown perturbation target '" + s + "' (expected psi, u, rho or all)");
}

/// Applies the perturbation to an ingested state. The velocity perturbation
/// is projected to be divergence-free; density is clipped into [m, M].
inline State perturb(const State& base, const Params& p, const PerturbationSpec& spec) {
  spec.validate();
  State s = base;
  if (spec.amplitude == 0.0) return s;
  const auto& grid = base.grid_ptr();
  const auto k = physical_wavenumber(*grid, spec.mode);
  auto phase_at = [&](const auto& x) {
    double ph = 0.0;
    for (int a = 0; a < grid->dim(); ++a) ph += k[a] * x[a];
    return ph;
  };
  const auto pattern = sample<double>(grid, [&](const auto& x) { return std::cos(phase_at(x)); });
  const bool all = spec.target == PerturbationSpec::Target::All;

  if (all || spec.target == PerturbationSpec::Target::Psi) {
    const double scale = spec.amplitude * std::max(norm(base.psi, NormSpec::linf()), 1e-300);
    for (std::size_t i = 0; i < s.psi.size(); ++i) s.psi[i] += scale * pattern[i];
  }
  if (all || spec.target == PerturbationSpec::Target::U) {
    RealVectorField v(grid);
    for (int a = 0; a < grid->dim(); ++a)
      v[a] = sample<double>(grid, [&](const auto& x) { return std::sin(phase_at(x) + a); });
    v = plan_for(grid)->leray_project(v).first;
    const double vmax = norm(v, NormSpec::linf());
    if (vmax > 0.0) {
      const double scale = spec.amplitude * std::max(norm(base.u, NormSpec::linf()), 1.0) / vmax;
      s.u.axpy(scale, v);
    }
  }
  if (all || spec.target == PerturbationSpec::Target::Rho) {
    const double scale = spec.amplitude * (p.M - p.m);
    for (std::size_t i = 0; i < s.rho.size(); ++i) s.rho[i] = std::clamp(s.rho[i] + scale * pattern[i], p.m, p.M);
  }
  return s;
}

struct StabilityRow {
  DifferenceRecord diff;
  GronwallBundle bundle;
  double H_integral = 0.0;  // int_0^t H
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double c_hat = 0.0;              // fitted on [0, T/2]
  double envelope_max_ratio = 0.0; // max over (T/2, T] of D / (D0 exp(c_hat int H))
  double envelope_margin = 10.0;
  bool envelope_pass = false;
  double sup_growth = 0.0;         // sup_t D(t) / D(0)
  bool determinism_ok = true;      // false if D(0) = 0 but D > 0 later
  bool completed = true;           // both runs reached T
  std::optional<StopEvent> stop;
  double H_integral_total = 0.0;
};

/// Fits c_hat on the first half of the rows and checks the envelope on the
/// second half. Rows must carry D, H and H_integral.
inline void fit_envelope(StabilityReport& rep, double T) {
  auto& rows = rep.rows;
  if (rows.empty()) return;
  const double D0 = rows.front().diff.D;
  rep.sup_growth = 0.0;
  rep.determinism_ok = true;
  if (D0 == 0.0) {
    for (const auto& r : rows)
      if (r.diff.D != 0.0) rep.determinism_ok = false;
    rep.c_hat = 0.0;
    rep.envelope_max_ratio = rep.determinism_ok ? 0.0 : std::numeric_limits<double>::infinity();
    rep.envelope_pass = rep.determinism_ok;
    return;
  }
  double c = 0.0;
  for (std::size_t n = 0; n + 1 < rows.size() && rows[n + 1].diff.t <= 0.5 * T * (1.0 + 1e-12); ++n) {
    const double dH = rows[n + 1].H_integral - rows[n].H_integral;
    if (!(dH > 0.0) || rows[n].diff.D <= 0.0 || rows[n + 1].diff.D <= 0.0) continue;
    c = std::max(c, (std::log(rows[n + 1].diff.D) - std::log(rows[n].diff.D)) / dH);
  }
  rep.c_hat = c;
  double worst = 0.0;
  for (const auto& r : rows) {
    rep.sup_growth = std::max(rep.sup_growth, r.diff.D / D0);
    if (r.diff.t > 0.5 * T * (1.0 + 1e-12)) {
      const double ratio = r.diff.D / (D0 * std::exp(rep.c_hat * r.H_integral));
      worst = std::max(worst, ratio);
    }
  }
  rep.envelope_max_ratio = worst;
  rep.envelope_pass = std::isfinite(worst) && worst <= rep.envelope_margin;
}

/// Runs base and perturbed trajectories in lockstep from the same data and
/// records difference norms and the driver bundle at every step. The base run
/// plays the moderate solution; d_t u~ comes from centered differences of its
/// states.
inline StabilityReport stability_experiment(const State& initial, const Params& p, const StepConfig& cfg,
                                            const PerturbationSpec& spec, double T) {
  cfg.validate();
  spec.validate();
  if (!(T > 0.0)) throw std::invalid_argument("stability_experiment: horizon must be > 0");
  State base = prepare_initial_state(initial, p, cfg.dealias);
  base.t = 0.0;  // row times and the fit window are measured from 0
  // Re-preparing an already prepared state is not bitwise idempotent.
  State weak = spec.amplitude == 0.0 ? base : prepare_initial_state(perturb(base, p, spec), p, cfg.dealias);

  StabilityReport rep;
  std::vector<State> base_hist{base};  // sliding window of base states around the pending row
  std::vector<State> weak_hist{weak};
  std::vector<double> times{0.0};

  std::size_t fixed_steps = 0;
  double fixed_dt = 0.0;
  if (!cfg.adaptive) {
    fixed_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / cfg.dt_init - 1e-9)));
    fixed_dt = T / static_cast<double>(fixed_steps);
  }

  // Emits the row for window entry `mid` given its neighbours lo/hi in the window.
  auto emit = [&](std::size_t lo, std::size_t mid, std::size_t hi) {
    const double h = base_hist[hi].t - base_hist[lo].t;
    RealVectorField dtu = base_hist[hi].u - base_hist[lo].u;
    dtu *= 1.0 / h;
    StabilityRow row;
    row.diff = difference_norms(weak_hist[mid], base_hist[mid]);
    row.bundle = gronwall_bundle(weak_hist[mid], base_hist[mid], p, &dtu);
    row.diff.H = row.bundle.total();
    if (!rep.rows.empty()) {
      const auto& prev = rep.rows.back();
      row.H_integral = prev.H_integral + 0.5 * (row.diff.t - prev.diff.t) * (row.diff.H + prev.diff.H);
    }
    rep.rows.push_back(row);
  };

  std::size_t n = 0;
  try {
    while (cfg.adaptive ? base.t < T * (1.0 - 1e-14) : n < fixed_steps) {
      double dt = cfg.adaptive ? std::min(adaptive_dt(base, cfg), T - base.t) : fixed_dt;
      State nb = step(base, p, dt, cfg);
      State nw = step(weak, p, dt, cfg);
      ++n;
      if (!cfg.adaptive) nb.t = nw.t = static_cast<double>(n) * fixed_dt;
      base_hist.push_back(nb);
      weak_hist.push_back(nw);
      // The window holds up to three states; emit the middle (or first) one.
      if (base_hist.size() == 2) {
        emit(0, 0, 1);
      } else {
        emit(0, 1, 2);
        base_hist.erase(base_hist.begin());
        weak_hist.erase(weak_hist.begin());
      }
      base = std::move(nb);
      weak = std::move(nw);
    }
  } catch (const DensityFloorViolation& e) {
    rep.completed = false;
    rep.stop = StopEvent{StopEvent::Kind::DensityFloor, e.time(), e.what(), e.value(), e.location()};
  } catch (const BlowUp& e) {
    rep.completed = false;
    rep.stop = StopEvent{StopEvent::Kind::BlowUp, e.last_valid_time(), e.what(), std::nullopt, std::nullopt};
  } catch (const CflViolation& e) {
    rep.completed = false;
    rep.stop = StopEvent{StopEvent::Kind::Cfl, e.time(), e.what(), std::nullopt, std::nullopt};
  }
  // Final state: one-sided difference.
  if (base_hist.size() >= 2) {
    const std::size_t last = base_hist.size() - 1;
    emit(last - 1, last, last);
  }
  rep.H_integral_total = rep.rows.empty() ? 0.0 : rep.rows.back().H_integral;
  fit_envelope(rep, rep.completed ? T : (rep.rows.empty() ? T : rep.rows.back().diff.t));
  return rep;
}

}  // namespace pitaevskii
