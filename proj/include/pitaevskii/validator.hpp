#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pitaevskii/initial_conditions.hpp"
#include "pitaevskii/norms.hpp"
#include "pitaevskii/rhs.hpp"

namespace pitaevskii {

/// Empirical constants for the functional inequalities used in the
/// uniqueness argument. Each ratio is LHS / RHS:
///
///   poincare       ||f||_2 / ||grad f||_2                       (mean-zero f)
///   ladyzhenskaya  ||f||_4 / (||f||_2^{1/4} ||grad f||_2^{3/4})  (3D only)
///   agmon          ||f||_inf / (||f||_{H1}^{1/2} ||f||_{H2}^{1/2})
///   lebesgue       ||f||_3 / (||f||_2^{1/2} ||f||_6^{1/2})
///   sobolev        ||f||_6 / ||f||_{H1}                          (observation)
struct InequalityResult {
  std::string name;
  double max_ratio = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // zero fields
  bool asserted = true;
};

struct ValidatorReport {
  std::vector<InequalityResult> results;
  std::vector<std::string> notices;
  double cap = 100.0;

  bool passed() const {
    for (const auto& r : results)
      if (r.asserted && (!std::isfinite(r.max_ratio) || r.max_ratio > cap)) return false;
    return true;
  }
  const InequalityResult* find(const std::string& name) const {
    for (const auto& r : results)
      if (r.name == name) return &r;
    return nullptr;
  }
};

template <class T>
ValidatorReport inequality_validator(std::span<const Field<T>> fields, double cap = 100.0) {
  ValidatorReport rep;
  rep.cap = cap;
  if (fields.empty()) return rep;
  const int d = fields.front().grid().dim();
  const bool three_d = d == 3;
  if (!three_d)
    rep.notices.push_back("d=" + std::to_string(d) + ": ladyzhenskaya skipped (its exponents are three-dimensional)");

  std::vector<InequalityResult> res{{"poincare"}, {"ladyzhenskaya"}, {"agmon"}, {"lebesgue"}, {"sobolev", 0.0, 0, 0, false}};
  auto update = [](InequalityResult& r, double lhs, double rhs) {
    if (rhs == 0.0) {
      ++r.skipped;
      return;
    }
    r.max_ratio = std::max(r.max_ratio, lhs / rhs);
    ++r.evaluated;
  };
  for (const auto& f : fields) {
    const double l2 = norm(f, NormSpec::lp(2.0));
    if (l2 == 0.0) {
      for (auto& r : res) ++r.skipped;
      continue;
    }
    const double grad = norm(f, NormSpec::h(1.0, true));
    const double h1 = norm(f, NormSpec::h(1.0));
    const double h2 = norm(f, NormSpec::h(2.0));
    const double l3 = norm(f, NormSpec::lp(3.0));
    const double l4 = norm(f, NormSpec::lp(4.0));
    const double l6 = norm(f, NormSpec::lp(6.0));
    const double linf = norm(f, NormSpec::linf());
    update(res[0], l2, grad);
    if (three_d) update(res[1], l4, std::pow(l2, 0.25) * std::pow(grad, 0.75));
    update(res[2], linf, std::sqrt(h1 * h2));
    update(res[3], l3, std::sqrt(l2 * l6));
    update(res[4], l6, h1);
  }
  for (auto& r : res)
    if (three_d || r.name != "ladyzhenskaya") rep.results.push_back(r);
  return rep;
}

/// Random band-limited mean-zero real fields for the validator.
inline std::vector<RealField> validator_samples(const GridPtr& grid, std::size_t count, std::uint64_t seed,
                                                int kmax = 4) {
  std::mt19937_64 rng(seed);
  std::vector<RealField> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_smooth_field<double>(grid, rng, kmax, true));
  return out;
}

/// Identities of the coupling terms, checked on random band-limited states.
///
///   source_form     ||Leray(S_c - S_nc - dealias(2 Lambda u Re(conj(psi) B psi)))||_inf / scale
///   quadratic_form  |Re<psi, B psi> - (1/2 ||(-i grad - u) psi||^2 + mu ||psi||_4^4)| / rhs
///
/// Both are relative errors; the worst state is kept.
struct RhsPropertyReport {
  std::size_t states = 0;
  double source_form_max = 0.0;
  double quadratic_form_max = 0.0;
  bool passed(double tol = 1e-10) const { return source_form_max <= tol && quadratic_form_max <= tol; }
};

inline RhsPropertyReport rhs_property_suite(const GridPtr& grid, const Params& p, std::size_t count,
                                            std::uint64_t seed, int kmax = 4) {
  std::size_t nmin = grid->n(0);
  for (int a = 1; a < grid->dim(); ++a) nmin = std::min(nmin, grid->n(a));
  InitialCondition ic;
  ic.family = "random";
  ic.amplitude = 1.0;
  ic.velocity = {0.7};
  ic.kmax = std::max(1, std::min<int>(kmax, static_cast<int>(nmin / 3)));
  const auto plan = plan_for(grid);
  const int d = grid->dim();
  RhsPropertyReport rep;
  for (std::size_t n = 0; n < count; ++n) {
    ic.seed = seed + n;
    const State s = make_initial_state(grid, p, ic);
    const auto bpsi = apply_B(*plan, s.psi, s.u, p.mu);

    const auto snc = momentum_source_nonconservative(s, p);
    auto diff = momentum_source_conservative(s, p) - snc;
    RealVectorField drag(grid);
    for (int a = 0; a < d; ++a)
      for (std::size_t i = 0; i < drag.size(); ++i)
        drag[a][i] = 2.0 * p.lambda * s.u[a][i] * (std::conj(s.psi[i]) * bpsi[i]).real();
    diff -= plan->dealias(drag);
    const double scale = std::max(norm(snc, NormSpec::linf()) + norm(drag, NormSpec::linf()), 1e-300);
    rep.source_form_max =
        std::max(rep.source_form_max, norm(plan->leray_project(diff).first, NormSpec::linf()) / scale);

    const double lhs = inner_product(s.psi, bpsi).real();
    const auto grad = plan->gradient(s.psi);
    double cov = 0.0;
    for (std::size_t i = 0; i < s.psi.size(); ++i)
      for (int a = 0; a < d; ++a) cov += std::norm(cplx(0.0, -1.0) * grad[a][i] - s.u[a][i] * s.psi[i]);
    cov *= grid->cell_volume();
    const double rhs = 0.5 * cov + p.mu * std::pow(norm(s.psi, NormSpec::lp(4.0)), 4);
    rep.quadratic_form_max = std::max(rep.quadratic_form_max, std::abs(lhs - rhs) / std::max(rhs, 1e-300));
    ++rep.states;
  }
  return rep;
}

}  // namespace pitaevskii
