#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pitaevskii/pitaevskii.hpp"

using namespace pitaevskii;

namespace {

// Process exit codes.
constexpr int kOk = 0;
constexpr int kPhysicsStop = 1;  // density floor, blow-up, CFL; also a failed asserted invariant
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string in_dir(const std::string& dir, const std::string& name) {
  if (dir.empty() || name.empty() || std::filesystem::path(name).is_absolute()) return name;
  return (std::filesystem::path(dir) / name).string();
}

std::string describe_stop(const StopEvent& e, int dim) {
  std::ostringstream os;
  switch (e.kind) {
    case StopEvent::Kind::DensityFloor: os << "density floor violated"; break;
    case StopEvent::Kind::BlowUp: os << "blow-up"; break;
    case StopEvent::Kind::Cfl: os << "CFL step below dt_min"; break;
  }
  os << " at t = " << format_double(e.time);
  if (e.location) {
    os << ", x = (";
    for (int a = 0; a < dim; ++a) os << (a ? ", " : "") << format_double((*e.location)[a]);
    os << ")";
  }
  if (e.value) os << ", rho = " << format_double(*e.value);
  return os.str();
}

void write_stop(std::ostream& os, const StopEvent& e, int dim) {
  os << "# stop = " << describe_stop(e, dim) << '\n' << "# stop_time = " << format_double(e.time) << '\n';
}

/// The invariants every compliant run must keep, checked record by record.
struct RunAudit {
  double sf_mass_max_rise = 0.0;  // max relative per-step increase of ||psi||^2
  double total_mass_drift = 0.0;  // max relative drift of int rho + ||psi||^2
  double rho_max = 0.0;
  double energy_residual = 0.0;   // max |r| / E0
  bool bounds_ok = true;

  bool passed(const Params& p) const {
    return sf_mass_max_rise <= 1e-8 && total_mass_drift <= 1e-8 && rho_max <= p.M_prime() * (1.0 + 1e-8) && bounds_ok;
  }
};

RunAudit audit(std::span<const DiagnosticsRecord> recs, const Params& p) {
  RunAudit a;
  if (recs.empty()) return a;
  const double total0 = recs[0].m_sf + recs[0].m_fluid;
  BoundsReference ref;
  ref.m_sf0 = recs[0].m_sf;
  ref.X0 = recs[0].X;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (i > 0) {
      a.sf_mass_max_rise = std::max(a.sf_mass_max_rise, (r.m_sf - recs[i - 1].m_sf) / std::max(recs[i - 1].m_sf, 1e-300));
      ref.Y_integral += 0.5 * (r.t - recs[i - 1].t) * (r.Y + recs[i - 1].Y);
    }
    a.total_mass_drift = std::max(a.total_mass_drift, std::abs(r.m_sf + r.m_fluid - total0) / total0);
    a.rho_max = std::max(a.rho_max, r.rho_max);
    a.bounds_ok = a.bounds_ok && asserted_bounds_pass(bounds_report(r, p, ref));
  }
  if (recs.size() >= 2 && recs[0].energy != 0.0)
    for (double r : energy_budget(recs)) a.energy_residual = std::max(a.energy_residual, std::abs(r) / recs[0].energy);
  return a;
}

void write_audit(std::ostream& os, const RunAudit& a, const Params& p) {
  os << "# energy_residual_max = " << format_double(a.energy_residual) << '\n'
     << "# sf_mass_max_rise = " << format_double(a.sf_mass_max_rise) << '\n'
     << "# total_mass_drift = " << format_double(a.total_mass_drift) << '\n'
     << "# rho_max = " << format_double(a.rho_max) << '\n'
     << "# invariants = " << (a.passed(p) ? "pass" : "fail") << '\n';
}

State initial_state(const Config& c, const GridPtr& g, const std::string& from) {
  if (from.empty()) return make_initial_state(g, c.params, c.ic);
  return read_snapshot(from, g.get()).state;
}

// ---- subcommands ------------------------------------------------------------

int simulate(const Config& c, const std::string& dir, const std::string& from) {
  const auto g = c.grid.make();
  const State s0 = initial_state(c, g, from);
  const std::string prefix = in_dir(dir, c.output.snapshot_prefix);
  std::vector<Observer> obs;
  std::size_t index = 0;
  if (!prefix.empty() && c.output.snapshot_every > 0) {
    obs.emplace_back([&](double, const State& s, const DiagnosticsRecord&) {
      if (index % c.output.snapshot_every == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "_%06zu.pitv", index);
        write_snapshot(s, c.params, prefix + name);
      }
      ++index;
    });
  }
  const auto tr = run(s0, c.params, c.integrator, c.experiment.T, obs);
  if (!prefix.empty()) write_snapshot(tr.final_state, c.params, prefix + "_final.pitv");
  write_timeseries(tr.records, in_dir(dir, c.output.timeseries), c.output.csv_every);

  const auto a = audit(tr.records, c.params);
  std::ofstream rep(in_dir(dir, c.output.report));
  if (!rep) throw IoError("cannot open '" + in_dir(dir, c.output.report) + "' for writing");
  rep << "# simulate\n# completed = " << (tr.completed() ? "true" : "false") << '\n'
      << "# t_final = " << format_double(tr.final_state.t) << '\n'
      << "# steps = " << tr.records.size() - 1 << '\n';
  write_audit(rep, a, c.params);
  std::cout << "steps " << tr.records.size() - 1 << ", t = " << tr.final_state.t
            << ", max |r|/E0 = " << a.energy_residual << '\n';
  if (tr.stop) {
    write_stop(rep, *tr.stop, c.grid.d);
    std::cout << "stopped: " << describe_stop(*tr.stop, c.grid.d) << '\n';
    return kPhysicsStop;
  }
  if (!a.passed(c.params)) {
    std::cout << "asserted invariant failed (see " << in_dir(dir, c.output.report) << ")\n";
    return kPhysicsStop;
  }
  return kOk;
}

int stability(const Config& c, const std::string& dir, const std::vector<double>& amplitudes) {
  const auto g = c.grid.make();
  const State s0 = make_initial_state(g, c.params, c.ic);
  std::vector<double> amps = amplitudes;
  if (amps.empty()) amps.push_back(c.experiment.perturbation.amplitude);
  int code = kOk;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    PerturbationSpec spec = c.experiment.perturbation;
    spec.amplitude = amps[i];
    const auto rep = stability_experiment(s0, c.params, c.integrator, spec, c.experiment.T);
    std::string path = in_dir(dir, c.output.report);
    if (amps.size() > 1) {
      const auto dot = path.rfind('.');
      const std::string suffix = "_" + std::to_string(i);
      path = dot == std::string::npos ? path + suffix : path.substr(0, dot) + suffix + path.substr(dot);
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_stability_report(os, rep);
    std::cout << "amplitude " << amps[i] << ": D(0) = " << (rep.rows.empty() ? 0.0 : rep.rows[0].diff.D)
              << ", sup D/D(0) = " << rep.sup_growth << ", C = " << rep.c_hat
              << ", envelope ratio = " << rep.envelope_max_ratio << (rep.envelope_pass ? " (pass)" : " (FAIL)") << '\n';
    if (rep.stop) {
      std::cout << "stopped: " << describe_stop(*rep.stop, c.grid.d) << '\n';
      return kPhysicsStop;
    }
    if (!rep.determinism_ok) std::cout << "determinism failure: D(0) = 0 but D > 0 later\n";
    if (!rep.envelope_pass || !rep.determinism_ok) code = kPhysicsStop;
    if (amps[i] > 0.0) {
      lo = std::min(lo, rep.sup_growth);
      hi = std::max(hi, rep.sup_growth);
    }
  }
  if (hi > 0.0 && hi > 2.0 * lo) {
    std::cout << "linear response failed: sup D/D(0) ranges over [" << lo << ", " << hi << "]\n";
    code = kPhysicsStop;
  }
  return code;
}

int convergence(const Config& c, const std::string& dir) {
  const auto g = c.grid.make();
  const State s0 = make_initial_state(g, c.params, c.ic);
  const std::string path = in_dir(dir, c.output.report);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "study,level,dt,n,energy_residual_max,energy_T,self_error,order\n";
  bool ok = true;

  // Time refinement: dt halved per level; self-convergence of the final state.
  std::vector<double> resid;
  std::vector<State> finals;
  for (int k = 0; k < c.experiment.refinements; ++k) {
    StepConfig cfg = c.integrator;
    cfg.adaptive = false;
    cfg.dt_init = c.integrator.dt_init / std::pow(2.0, k);
    const auto tr = run(s0, c.params, cfg, c.experiment.T);
    if (tr.stop) {
      std::cout << "stopped: " << describe_stop(*tr.stop, c.grid.d) << '\n';
      return kPhysicsStop;
    }
    const auto a = audit(tr.records, c.params);
    ok = ok && a.passed(c.params);
    resid.push_back(a.energy_residual);
    finals.push_back(tr.final_state);
    double self = std::numeric_limits<double>::quiet_NaN(), order = self;
    if (k >= 1) {
      const auto& f = finals[k], & e = finals[k - 1];
      self = std::sqrt(l2_squared(f.psi - e.psi) + l2_squared(f.u - e.u) + l2_squared(f.rho - e.rho));
    }
    if (k >= 1 && resid[k] > 0.0) order = std::log2(resid[k - 1] / resid[k]);
    os << "dt," << k << ',' << format_double(cfg.dt_init) << ',' << g->n(0) << ',' << format_double(a.energy_residual)
       << ',' << format_double(tr.records.back().energy) << ',' << format_double(self) << ',' << format_double(order)
       << '\n';
    std::cout << "dt = " << cfg.dt_init << ": max |r|/E0 = " << a.energy_residual;
    if (k >= 1) std::cout << " (order " << order << "), self-difference " << self;
    std::cout << '\n';
  }

  // Space refinement: coarser grids at the base dt; E(T) differences shrink spectrally.
  double prev_energy = std::numeric_limits<double>::quiet_NaN();
  for (int k = c.experiment.refinements - 1; k >= 0; --k) {
    GridConfig gc = c.grid;
    bool fits = true;
    for (auto& n : gc.n) {
      n >>= k;
      fits = fits && n >= 8 && n % 2 == 0;
    }
    if (!fits) continue;
    const auto gk = gc.make();
    const auto tr = run(make_initial_state(gk, c.params, c.ic), c.params, c.integrator, c.experiment.T);
    if (tr.stop) {
      std::cout << "stopped: " << describe_stop(*tr.stop, c.grid.d) << '\n';
      return kPhysicsStop;
    }
    const double e = tr.records.back().energy;
    const double diff = std::abs(e - prev_energy);
    os << "dx," << k << ',' << format_double(c.integrator.dt_init) << ',' << gk->n(0) << ','
       << format_double(audit(tr.records, c.params).energy_residual) << ',' << format_double(e) << ','
       << format_double(diff) << ",nan\n";
    std::cout << "n = " << gk->n(0) << ": E(T) = " << format_double(e);
    if (std::isfinite(diff)) std::cout << ", change " << diff;
    std::cout << '\n';
    prev_energy = e;
  }
  if (!ok) {
    std::cout << "asserted invariant failed\n";
    return kPhysicsStop;
  }
  return kOk;
}

int validate(const Config& c, const std::string& dir) {
  GridConfig vg = c.grid;
  vg.n.assign(c.grid.d, static_cast<std::size_t>(c.experiment.validate_n));
  const auto samples = validator_samples(vg.make(), c.experiment.samples, c.experiment.seed);
  const auto rep = inequality_validator<double>(samples, c.experiment.cap);
  const auto props = rhs_property_suite(c.grid.make(), c.params, 100, c.experiment.seed);

  const std::string path = in_dir(dir, c.output.report);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "check,max_ratio,evaluated,skipped,asserted\n";
  for (const auto& r : rep.results) {
    os << r.name << ',' << format_double(r.max_ratio) << ',' << r.evaluated << ',' << r.skipped << ','
       << (r.asserted ? "true" : "false") << '\n';
    std::cout << r.name << ": max ratio " << r.max_ratio << (r.asserted ? "" : " (observation)") << '\n';
  }
  os << "source_form," << format_double(props.source_form_max) << ',' << props.states << ",0,true\n"
     << "quadratic_form," << format_double(props.quadratic_form_max) << ',' << props.states << ",0,true\n";
  for (const auto& n : rep.notices) {
    os << "# " << n << '\n';
    std::cout << "note: " << n << '\n';
  }
  std::cout << "source-form identity: " << props.source_form_max << ", quadratic form: " << props.quadratic_form_max
            << " (" << props.states << " states)\n";
  return rep.passed() && props.passed() ? kOk : kPhysicsStop;
}

int oracle(const Config& c, const std::string& dir, bool compare) {
  std::vector<double> k(c.grid.d, 0.0), U(c.grid.d, 0.0);
  const auto g = c.grid.make();
  const auto kv = physical_wavenumber(*g, c.ic.mode);
  for (int a = 0; a < c.grid.d; ++a) {
    k[a] = kv[a];
    if (a < static_cast<int>(c.ic.velocity.size())) U[a] = c.ic.velocity[a];
  }
  const cplx a0 = std::polar(c.ic.amplitude, c.ic.phase);
  const double rho0 = c.ic.rho > 0.0 ? c.ic.rho : 0.5 * (c.params.m + c.params.M);
  const int samples = std::max(2, c.experiment.samples);
  std::vector<double> times(samples);
  for (int i = 0; i < samples; ++i) times[i] = c.experiment.T * i / (samples - 1);
  const auto res = reduced_ode_oracle(c.params, k, a0, U, rho0, times, c.experiment.oracle_tol);

  const std::string path = in_dir(dir, c.output.timeseries);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "t,re_a,im_a,abs_a,rho";
  for (int a = 0; a < c.grid.d; ++a) os << ",U_" << a;
  os << '\n';
  for (const auto& s : res.samples) {
    os << format_double(s.t) << ',' << format_double(s.a.real()) << ',' << format_double(s.a.imag()) << ','
       << format_double(std::abs(s.a)) << ',' << format_double(s.rho);
    for (int a = 0; a < c.grid.d; ++a) os << ',' << format_double(s.U[a]);
    os << '\n';
  }
  const auto& last = res.samples.back();
  std::cout << "t = " << last.t << ": |a| = " << std::abs(last.a) << ", rho = " << last.rho
            << ", mass drift " << res.mass_drift << ", momentum drift " << res.momentum_drift << '\n';
  bool ok = res.mass_drift <= 10 * c.experiment.oracle_tol * std::max(1.0, rho0 + std::norm(a0)) &&
            res.momentum_drift <= 10 * c.experiment.oracle_tol * std::max(1.0, rho0 + std::norm(a0));
  if (!compare) return ok ? kOk : kPhysicsStop;

  // PDE run from the same uniform state; compare at T.
  if (c.ic.family != "plane_wave") throw UsageError("oracle --compare needs ic.family = plane_wave");
  const auto tr = run(make_initial_state(g, c.params, c.ic), c.params, c.integrator, c.experiment.T);
  if (tr.stop) {
    std::cout << "stopped: " << describe_stop(*tr.stop, c.grid.d) << '\n';
    return kPhysicsStop;
  }
  const auto& f = tr.final_state;
  const cplx a_pde = f.psi[0];  // plane wave: value at the origin is a
  double u_err = 0.0, u_scale = 0.0;
  for (int a = 0; a < c.grid.d; ++a) {
    u_err = std::max(u_err, std::abs(f.u[a][0] - last.U[a]));
    u_scale = std::max(u_scale, std::abs(last.U[a]));
  }
  const double e_abs = std::abs(std::abs(a_pde) - std::abs(last.a)) / std::abs(last.a);
  const double e_phase = std::abs(std::arg(a_pde / last.a));
  const double e_rho = std::abs(f.rho[0] - last.rho) / last.rho;
  const double e_u = u_scale > 0.0 ? u_err / u_scale : u_err;
  std::cout << "PDE vs oracle: |a| " << e_abs << ", phase " << e_phase << ", rho " << e_rho << ", U " << e_u << '\n';
  ok = ok && std::max({e_abs, e_phase, e_rho, e_u}) <= 1e-6;
  return ok ? kOk : kPhysicsStop;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pitaevskii superfluid / normal-fluid solver"};
  app.require_subcommand(1);
  std::string config_path, out_dir, from;
  std::vector<double> amplitudes;
  bool compare = false;

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "configuration file")->required();
    sub->add_option("-o,--out-dir", out_dir, "directory for output files");
    return sub;
  };
  auto* sim = add("simulate", "run one trajectory and write the diagnostics time series");
  sim->add_option("--from", from, "start from a snapshot instead of the configured initial condition");
  auto* stab = add("stability", "paired-trajectory stability experiment");
  stab->add_option("--amplitudes", amplitudes, "sweep these perturbation amplitudes")->delimiter(',');
  auto* conv = add("convergence", "time-step and grid refinement study");
  auto* val = add("validate", "functional-inequality validator and coupling-term identities");
  auto* orc = add("oracle", "reduced plane-wave ODE reference trajectory");
  orc->add_flag("--compare", compare, "also run the PDE and compare at the horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const Config c = load_config(config_path);
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    if (sim->parsed()) return simulate(c, out_dir, from);
    if (stab->parsed()) return stability(c, out_dir, amplitudes);
    if (conv->parsed()) return convergence(c, out_dir);
    if (val->parsed()) return validate(c, out_dir);
    if (orc->parsed()) return oracle(c, out_dir, compare);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ":\n" << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
