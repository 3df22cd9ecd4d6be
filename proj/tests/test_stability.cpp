#include <gtest/gtest.h>

#include "support.hpp"

using namespace pitaevskii;
using namespace testing_support;

namespace {

constexpr double kArea = kTwoPi * kTwoPi;

}  // namespace

TEST(DifferenceNorms, SymmetricAndZeroOnEqualStates) {
  const auto g = torus({16, 16});
  const Params p;
  const auto a = random_state(g, p, 3), b = random_state(g, p, 4);
  const auto ab = difference_norms(a, b), ba = difference_norms(b, a);
  EXPECT_DOUBLE_EQ(ab.phi, ba.phi);
  EXPECT_DOUBLE_EQ(ab.grad_phi, ba.grad_phi);
  EXPECT_DOUBLE_EQ(ab.Phi, ba.Phi);
  EXPECT_DOUBLE_EQ(ab.sigma, ba.sigma);
  EXPECT_DOUBLE_EQ(ab.D, ab.grad_phi + ab.Phi + ab.sigma);
  const auto aa = difference_norms(a, a);
  EXPECT_EQ(aa.D, 0.0);
  EXPECT_EQ(aa.phi, 0.0);
  State late = b;
  late.t = 1.0;
  EXPECT_THROW(difference_norms(a, late), std::invalid_argument);
}

TEST(Perturb, SingleModeAmplitudeScaling) {
  const auto g = torus({16, 16});
  const Params p;
  State base = make_state(g);
  base.psi = ComplexField(g, cplx(0.5, 0.0));
  base.rho = RealField(g, 1.5);
  PerturbationSpec spec;
  spec.mode = {1, 2};
  for (double eta : {1e-2, 1e-4}) {
    spec.amplitude = eta;
    const auto d = difference_norms(perturb(base, p, spec), base);
    // psi + eta * 0.5 cos(k.x): ||.||^2 = (0.5 eta)^2 V / 2, gradient picks up |k|^2 = 5
    EXPECT_NEAR(d.phi, std::pow(0.5 * eta, 2) * kArea / 2, 1e-12 * d.phi);
    EXPECT_NEAR(d.grad_phi, 5.0 * d.phi, 1e-10 * d.phi);
    EXPECT_EQ(d.Phi, 0.0);
    EXPECT_EQ(d.sigma, 0.0);
  }
  spec.amplitude = 0.0;
  EXPECT_EQ(difference_norms(perturb(base, p, spec), base).D, 0.0);
  spec.amplitude = -1.0;
  EXPECT_THROW(perturb(base, p, spec), std::invalid_argument);
}

TEST(Perturb, VelocityStaysDivergenceFreeAndDensityInBounds) {
  const auto g = torus({16, 16});
  const Params p;
  const auto base = random_state(g, p, 5);
  PerturbationSpec spec;
  spec.target = PerturbationSpec::Target::All;
  spec.amplitude = 0.9;
  const auto s = perturb(base, p, spec);
  EXPECT_LT(norm(plan_for(g)->divergence(s.u - base.u), NormSpec::linf()), 1e-12);
  for (double r : s.rho.values()) {
    EXPECT_GE(r, p.m);
    EXPECT_LE(r, p.M);
  }
  EXPECT_GT(difference_norms(s, base).Phi, 0.0);
}

TEST(GronwallBundle, ZeroFieldsAndMissingData) {
  const auto g = torus({8, 8});
  const Params p;
  State s = make_state(g);
  s.rho = RealField(g, 1.5);
  RealVectorField zero(g);
  const auto b = gronwall_bundle(s, s, p, &zero);
  EXPECT_EQ(b.total(), 0.0);
  EXPECT_THROW(gronwall_bundle(s, s, p, nullptr), std::invalid_argument);
}

TEST(GronwallBundle, PlaneWaveHandEvaluation) {
  const auto g = torus({16, 16});
  Params p;
  p.mu = 0.8;
  const cplx a(0.6, 0.3);
  const std::array<double, 3> k{1, 2, 0};
  State s = make_state(g);
  s.psi = plane_wave(g, a, k);
  s.rho = RealField(g, 1.5);
  RealVectorField zero(g);
  const auto b = gronwall_bundle(s, s, p, &zero);
  const double a2 = std::norm(a), k2 = 5.0, beta = 0.5 * k2 + p.mu * a2;
  const double h2sq = kArea * a2 * std::pow(1 + k2, 2), h1sq = kArea * a2 * (1 + k2);
  std::array<double, GronwallBundle::kTerms> expect{};
  expect[2] = expect[3] = h2sq * h2sq;
  expect[4] = h1sq * h1sq * (1 + p.mu * p.mu);
  expect[8] = beta * beta * kArea * a2 * std::sqrt(1 + k2);
  for (std::size_t i = 0; i < expect.size(); ++i)
    EXPECT_NEAR(b.terms[i], expect[i], 1e-11 * std::max(1.0, expect[i])) << GronwallBundle::names()[i];
}

TEST(Envelope, RecoversExponentialRate) {
  StabilityReport rep;
  const double c = 1.7, H = 2.0;
  for (int n = 0; n <= 20; ++n) {
    StabilityRow r;
    r.diff.t = 0.05 * n;
    r.diff.H = H;
    r.H_integral = H * r.diff.t;
    r.diff.D = 1e-8 * std::exp(c * r.H_integral);
    rep.rows.push_back(r);
  }
  fit_envelope(rep, 1.0);
  EXPECT_NEAR(rep.c_hat, c, 1e-9);
  EXPECT_NEAR(rep.envelope_max_ratio, 1.0, 1e-9);
  EXPECT_TRUE(rep.envelope_pass);
  EXPECT_NEAR(rep.sup_growth, std::exp(c * H), 1e-6);

  // faster growth in the second half breaks the envelope
  for (auto& r : rep.rows)
    if (r.diff.t > 0.5) r.diff.D *= std::exp(10.0 * (r.diff.t - 0.5));
  fit_envelope(rep, 1.0);
  EXPECT_FALSE(rep.envelope_pass);
}

TEST(Envelope, DecayingDifferenceFitsZeroRate) {
  StabilityReport rep;
  for (int n = 0; n <= 10; ++n) {
    StabilityRow r;
    r.diff.t = 0.1 * n;
    r.H_integral = r.diff.t;
    r.diff.D = std::exp(-r.diff.t);
    rep.rows.push_back(r);
  }
  fit_envelope(rep, 1.0);
  EXPECT_EQ(rep.c_hat, 0.0);
  EXPECT_TRUE(rep.envelope_pass);
  EXPECT_DOUBLE_EQ(rep.sup_growth, 1.0);
}

TEST(StabilityExperiment, ZeroPerturbationIsDeterministic) {
  const auto g = torus({16, 16});
  const Params p;
  PerturbationSpec spec;
  spec.amplitude = 0.0;
  StepConfig cfg;
  cfg.dt_init = 1e-2;
  const auto rep = stability_experiment(random_state(g, p, 9), p, cfg, spec, 0.1);
  ASSERT_EQ(rep.rows.size(), 11u);
  for (const auto& r : rep.rows) EXPECT_EQ(r.diff.D, 0.0);
  EXPECT_TRUE(rep.determinism_ok);
  EXPECT_TRUE(rep.envelope_pass);
}

TEST(StabilityExperiment, SmallPerturbationStaysInEnvelope) {
  const auto g = torus({16, 16});
  const Params p;
  PerturbationSpec spec;
  spec.amplitude = 1e-6;
  spec.target = PerturbationSpec::Target::All;
  StepConfig cfg;
  cfg.dt_init = 1e-2;
  const auto rep = stability_experiment(random_state(g, p, 9), p, cfg, spec, 0.2);
  ASSERT_TRUE(rep.completed);
  ASSERT_EQ(rep.rows.size(), 21u);
  EXPECT_GT(rep.rows.front().diff.D, 0.0);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    EXPECT_GE(rep.rows[i].H_integral, rep.rows[i - 1].H_integral);
    EXPECT_NEAR(rep.rows[i].diff.t, 0.01 * i, 1e-14);
  }
  EXPECT_TRUE(rep.envelope_pass);
  EXPECT_GE(rep.c_hat, 0.0);
  EXPECT_DOUBLE_EQ(rep.H_integral_total, rep.rows.back().H_integral);
  EXPECT_THROW(stability_experiment(random_state(g, p, 9), p, cfg, spec, 0.0), std::invalid_argument);
}

TEST(PerturbationTarget, NamesRoundTrip) {
  using T = PerturbationSpec::Target;
  for (T t : {T::Psi, T::U, T::Rho, T::All}) EXPECT_EQ(parse_target(target_name(t)), t);
  EXPECT_THROW(parse_target("phi"), std::invalid_argument);
}
