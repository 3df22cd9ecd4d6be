#include <gtest/gtest.h>

#include "support.hpp"

using namespace pitaevskii;
using namespace testing_support;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST(Oracle, UniformDecayClosedForm) {
  Params p;
  p.lambda = 0.7;
  p.mu = 1.3;
  const cplx a0(0.8, -0.5);
  const std::vector<double> k{0, 0}, U{0, 0};
  const auto times = linspace(0.0, 2.0, 21);
  const auto res = reduced_ode_oracle(p, k, a0, U, 1.2, times, 1e-12);
  ASSERT_EQ(res.samples.size(), times.size());
  for (const auto& s : res.samples) {
    EXPECT_NEAR(std::norm(s.a), uniform_decay_closed_form(p, std::norm(a0), s.t), 1e-10);
    EXPECT_NEAR(s.rho + std::norm(s.a), 1.2 + std::norm(a0), 1e-10);
  }
  EXPECT_DOUBLE_EQ(uniform_decay_closed_form(p, 2.0, 0.0), 2.0);
}

TEST(Oracle, ConservationDriftWithinTolerance) {
  const Params p;
  const std::vector<double> k{2, -1, 1}, U{0.3, 0.1, -0.2};
  const auto times = linspace(0.0, 1.0, 11);
  for (double tol : {1e-8, 1e-10, 1e-12}) {
    const auto res = reduced_ode_oracle(p, k, cplx(0.6, 0.2), U, 1.5, times, tol);
    EXPECT_LE(res.mass_drift, 10 * tol);
    EXPECT_LE(res.momentum_drift, 10 * tol);
  }
}

TEST(Oracle, NoRelaxationRotatesPhaseOnly) {
  Params p;
  p.lambda = 0.0;
  p.mu = 0.5;
  const cplx a0(0.6, 0.0);
  const std::vector<double> k{1, 2}, U{0.4, 0.0};
  const auto times = linspace(0.0, 1.0, 5);
  const auto res = reduced_ode_oracle(p, k, a0, U, 1.0, times, 1e-12);
  for (const auto& s : res.samples) {
    const double omega = 0.5 * 5.0 + p.mu * std::norm(a0);
    EXPECT_LT(std::abs(s.a - a0 * std::exp(cplx(0.0, -omega * s.t))), 1e-10);
    EXPECT_DOUBLE_EQ(s.rho, 1.0);
    EXPECT_DOUBLE_EQ(s.U[0], 0.4);
  }
}

TEST(Oracle, LateFirstSampleAndRepeatedTimes) {
  const Params p;
  const std::vector<double> k{1}, U{0};
  const std::vector<double> times{0.5, 0.5, 1.0};
  const auto res = reduced_ode_oracle(p, k, cplx(0.5, 0), U, 1.0, times, 1e-10);
  ASSERT_EQ(res.samples.size(), 3u);
  EXPECT_DOUBLE_EQ(res.samples[0].t, 0.5);
  EXPECT_EQ(res.samples[0].a, res.samples[1].a);
}

TEST(Oracle, RejectsBadInput) {
  const Params p;
  const std::vector<double> k{1, 0}, U{0, 0}, U1{0}, t{0.0, 1.0}, back{1.0, 0.5};
  EXPECT_THROW(reduced_ode_oracle(p, k, 1.0, U, 0.0, t, 1e-10), std::invalid_argument);
  EXPECT_THROW(reduced_ode_oracle(p, k, 1.0, U, 1.0, t, 0.0), std::invalid_argument);
  EXPECT_THROW(reduced_ode_oracle(p, k, 1.0, U, 1.0, t, 1e-17), std::runtime_error);
  EXPECT_THROW(reduced_ode_oracle(p, k, 1.0, U1, 1.0, t, 1e-10), std::invalid_argument);
  EXPECT_THROW(reduced_ode_oracle(p, k, 1.0, U, 1.0, back, 1e-10), std::invalid_argument);
  EXPECT_THROW(reduced_ode_oracle(p, k, 1.0, U, 1.0, std::vector<double>{}, 1e-10), std::invalid_argument);
}

// The full solver keeps a plane wave a plane wave; its amplitude, density and
// velocity follow the reduced system.
TEST(Oracle, AgreesWithFullSolverOnCoarseGrid) {
  const auto g = torus({8, 8});
  const Params p;
  const cplx a0(0.7, 0.1);
  const std::array<double, 3> k{1, 1, 0};
  InitialCondition ic;
  ic.family = "plane_wave";
  ic.amplitude = std::abs(a0);
  ic.phase = std::arg(a0);
  ic.mode = {1, 1};
  ic.velocity = {0.2, -0.1};
  ic.rho = 1.3;
  const State s0 = make_initial_state(g, p, ic);
  ASSERT_LT(std::abs(s0.psi[0] - a0), 1e-14);
  StepConfig cfg;
  cfg.dt_init = 1e-3;
  const auto tr = run(s0, p, cfg, 0.2);
  ASSERT_TRUE(tr.completed());
  const std::vector<double> kv{1, 1}, U{0.2, -0.1}, times{0.2};
  const auto o = reduced_ode_oracle(p, kv, a0, U, 1.3, times, 1e-12).samples.back();
  const auto& f = tr.final_state;
  const auto expect_psi = plane_wave(g, o.a, k);
  EXPECT_LT(max_abs(f.psi - expect_psi), 1e-6 * std::abs(o.a));
  EXPECT_LT(max_abs(f.rho - RealField(g, o.rho)), 1e-6 * o.rho);
  const double speed = std::hypot(o.U[0], o.U[1]);
  EXPECT_LT(max_abs(f.u[0] - RealField(g, o.U[0])), 1e-6 * speed);
  EXPECT_LT(max_abs(f.u[1] - RealField(g, o.U[1])), 1e-6 * speed);
}
