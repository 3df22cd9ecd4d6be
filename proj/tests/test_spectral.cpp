#include <gtest/gtest.h>

#include "support.hpp"

using namespace pitaevskii;
using namespace testing_support;

TEST(Spectral, GradientOfPlaneWave) {
  const auto g = torus({16, 16});
  const auto plan = plan_for(g);
  const std::array<double, 3> k{2.0, -3.0, 0.0};
  const auto f = plane_wave(g, 1.0, k);
  const auto grad = plan->gradient(f);
  for (int a = 0; a < 2; ++a)
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(std::abs(grad[a][i] - cplx(0.0, k[a]) * f[i]), 1e-12);
}

TEST(Spectral, LaplacianOfConstantIsZero) {
  const auto g = torus({8, 8, 8});
  const auto lap = plan_for(g)->laplacian(RealField(g, 3.0));
  EXPECT_LT(max_abs(lap), 1e-14);
}

TEST(Spectral, DivergenceOfGradientMatchesLaplacian) {
  const auto g = torus({32, 32});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(2);
  const auto f = random_smooth_field<double>(g, rng, 6, false);
  const auto lap = plan->laplacian(f);
  const auto dg = plan->divergence(plan->gradient(f));
  EXPECT_LT(max_abs(dg - lap), 1e-12 * max_abs(lap));
}

TEST(Spectral, DerivativesAgainstAnalytic) {
  const auto g = make_grid({32, 16}, {3.0, 5.0});
  const auto plan = plan_for(g);
  const double k0 = kTwoPi / 3.0, k1 = 2 * kTwoPi / 5.0;
  const auto f = sample<double>(g, [&](const auto& x) { return std::sin(k0 * x[0]) * std::cos(k1 * x[1]); });
  const auto dfdx = sample<double>(g, [&](const auto& x) { return k0 * std::cos(k0 * x[0]) * std::cos(k1 * x[1]); });
  const auto dfdy = sample<double>(g, [&](const auto& x) { return -k1 * std::sin(k0 * x[0]) * std::sin(k1 * x[1]); });
  EXPECT_LT(max_abs(plan->partial(f, 0) - dfdx), 1e-12);
  EXPECT_LT(max_abs(plan->partial(f, 1) - dfdy), 1e-12);
  EXPECT_LT(max_abs(plan->laplacian(f) + (k0 * k0 + k1 * k1) * f), 1e-11);
}

TEST(Leray, GradientIsAnnihilated) {
  const auto g = torus({16, 16});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(4);
  const auto chi = random_smooth_field<double>(g, rng, 4, true);
  const auto [pv, pot] = plan->leray_project(plan->gradient(chi));
  EXPECT_LT(max_abs(pv), 1e-12 * max_abs(chi));
  EXPECT_LT(max_abs(pot - chi), 1e-12 * max_abs(chi));
}

TEST(Leray, SolenoidalFieldUnchanged) {
  const auto g = torus({16, 16});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(6);
  const auto chi = random_smooth_field<double>(g, rng, 4, true);
  RealVectorField v(g);
  v[0] = -1.0 * plan->partial(chi, 1);
  v[1] = plan->partial(chi, 0);
  const auto pv = plan->leray_project(v).first;
  EXPECT_LT(max_abs(pv - v), 1e-13 * max_abs(v));
}

TEST(Leray, RandomFieldDivergenceFreeIdempotentOrthogonal) {
  const auto g = torus({16, 16, 16});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(8);
  RealVectorField v(g);
  for (int a = 0; a < 3; ++a) v[a] = random_smooth_field<double>(g, rng, 5, false);
  const auto [pv, pot] = plan->leray_project(v);
  EXPECT_LT(max_abs(plan->divergence(pv)), 1e-12 * max_abs(v));
  EXPECT_LT(max_abs(plan->leray_project(pv).first - pv), 1e-13 * max_abs(v));
  EXPECT_LT(max_abs(pv + plan->gradient(pot) - v), 1e-12 * max_abs(v));
  // mean mode is kept
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(integral(pv[a]), integral(v[a]), 1e-12 * g->volume());
  const auto chi = random_smooth_field<double>(g, rng, 5, true);
  const auto gchi = plan->gradient(chi);
  double ip = 0.0;
  for (int a = 0; a < 3; ++a) ip += inner_product(pv[a], gchi[a]).real();
  EXPECT_LT(std::abs(ip), 1e-12 * std::sqrt(l2_squared(pv) * l2_squared(gchi)));
}

TEST(Dealias, LowModeKeptHighModesZeroed) {
  const auto g = torus({12});
  const auto plan = plan_for(g);
  const auto low = plane_wave(g, 1.0, {4.0, 0, 0});  // 3*4 = 12 <= 12: kept
  EXPECT_LT(max_abs(plan->dealias(low) - low), 1e-14);
  const auto high = plane_wave(g, 1.0, {5.0, 0, 0});
  EXPECT_LT(max_abs(plan->dealias(high)), 1e-14);
  const auto nyq = plane_wave(g, 1.0, {6.0, 0, 0});
  EXPECT_LT(max_abs(plan->dealias(nyq)), 1e-14);
}

TEST(Dealias, ReducesEnergyAndCanBeDisabled) {
  const auto g = torus({16, 16});
  std::mt19937_64 rng(1);
  const auto f = random_smooth_field<cplx>(g, rng, 8, false);
  EXPECT_LE(l2_squared(plan_for(g)->dealias(f)), l2_squared(f));
  EXPECT_EQ(plan_for(g, false)->dealias(f), f);
}

TEST(Helmholtz, IdentityPlaneWaveAndResidual) {
  const auto g = torus({16, 16});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(12);
  const auto f = random_smooth_field<cplx>(g, rng, 6, false);
  EXPECT_LT(max_abs(plan->helmholtz_solve(f, 0.0) - f), 1e-14 * max_abs(f));
  const auto e = plane_wave(g, 1.0, {1.0, 2.0, 0});
  EXPECT_LT(max_abs(plan->helmholtz_solve(e, 1.0) - (1.0 / 6.0) * e), 1e-14);
  const double alpha = 0.37;
  const auto u = plan->helmholtz_solve(f, alpha);
  auto back = u;
  back.axpy(-alpha, plan->laplacian(u));
  EXPECT_LT(max_abs(back - f), 1e-12 * max_abs(f));
  EXPECT_THROW(plan->helmholtz_solve(f, -1.0), std::invalid_argument);
}

TEST(Spectral, TranslationEquivariance) {
  const auto g = torus({16, 16});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(21);
  const auto f = random_smooth_field<double>(g, rng, 5, false);
  auto shift = [&](const RealField& h) {  // shift by 3 nodes along axis 1
    RealField out(g);
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) out[i * 16 + (j + 3) % 16] = h[i * 16 + j];
    return out;
  };
  EXPECT_LT(max_abs(plan->laplacian(shift(f)) - shift(plan->laplacian(f))), 1e-11);
  EXPECT_LT(max_abs(plan->partial(shift(f), 0) - shift(plan->partial(f, 0))), 1e-11);
}

TEST(Spectral, GridMismatchThrows) {
  const auto plan = plan_for(torus({8}));
  EXPECT_THROW(plan->gradient(RealField(torus({16}))), std::invalid_argument);
}

TEST(VariableDensityProjection, DivergenceFreeAndExactForUniformDensity) {
  const auto g = torus({32, 32});
  const auto plan = plan_for(g);
  std::mt19937_64 rng(31);
  RealVectorField a(g);
  for (int c = 0; c < 2; ++c) a[c] = random_smooth_field<double>(g, rng, 5, false);
  // uniform rho reduces to the Leray projection
  const auto uni = plan->project_variable_density(a, RealField(g, 1.7));
  EXPECT_LT(max_abs(uni.projected - plan->leray_project(a).first), 1e-12 * max_abs(a));
  // variable rho: div(out) = 0 and the removed part is rho^{-1} grad p
  RealField rho = random_smooth_field<double>(g, rng, 3, true);
  const double rmax = max_abs(rho);
  for (auto& x : rho.raw()) x = 1.5 + 0.4 * x / rmax;
  const auto res = plan->project_variable_density(a, rho);
  EXPECT_LT(res.relative_residual, 1e-12);
  EXPECT_LT(max_abs(plan->divergence(res.projected)), 1e-10 * max_abs(a));
  const auto gp = plan->gradient(res.pressure);
  RealVectorField removed = a - res.projected;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < rho.size(); ++i) removed[c][i] -= gp[c][i] / rho[i];
  EXPECT_LT(max_abs(removed), 1e-10 * max_abs(a));
}
