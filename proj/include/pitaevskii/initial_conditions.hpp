#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pitaevskii/model.hpp"

namespace pitaevskii {

/// Named smooth initial-data families.
///
///   smooth      psi = A(1 + 0.5 e^{i th0} + 0.3 e^{-i th1} + 0.2 e^{i(th0+th1)} + 0.2 e^{i th2}),
///               u = U (sin th0 cos th1 cos th2, -cos th0 sin th1 cos th2, 0) projected,
///               rho = (m+M)/2 + 0.4 (M-m) cos th0 cos th1, with th_a = 2 pi x_a / len_a
///               (terms on absent axes dropped).
///   plane_wave  psi = A e^{i phase} e^{i k.x}, u = U uniform, rho uniform.
///   constant    psi = A e^{i phase}, u = U uniform, rho uniform.
///   floor_dip   psi = A (1 + 0.5 cos th0), u = 0, rho = m. Re(conj(psi) B psi) < 0 near
///               th0 = pi, so the density there decreases from m.
///   random      band-limited random psi, u and rho (seeded), |k_int| <= kmax.
struct InitialCondition {
  std::string family = "smooth";
  double amplitude = 0.5;
  double phase = 0.0;
  std::vector<double> velocity{0.5};  // smooth: amplitude in [0]; uniform families: the vector U
  std::vector<long> mode{1};          // plane_wave integer wavenumbers (missing entries 0)
  double rho = 0.0;                   // uniform density; 0 selects (m+M)/2
  std::uint64_t seed = 1;
  int kmax = 3;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

inline const std::vector<std::string>& initial_condition_families() {
  static const std::vector<std::string> names{"smooth", "plane_wave", "constant", "floor_dip", "random"};
  return names;
}

/// Physical wavenumber vector for integer mode indices on a grid.
inline std::array<double, kMaxDim> physical_wavenumber(const Grid& g, std::span<const long> mode) {
  std::array<double, kMaxDim> k{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    const long m = a < static_cast<int>(mode.size()) ? mode[a] : 0;
    k[a] = 2.0 * std::numbers::pi * static_cast<double>(m) / g.len(a);
  }
  return k;
}

namespace detail {

inline std::array<double, kMaxDim> angles(const Grid& g, const std::array<double, kMaxDim>& x) {
  std::array<double, kMaxDim> th{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) th[a] = 2.0 * std::numbers::pi * x[a] / g.len(a);
  return th;
}

inline double component(std::span<const double> v, int a) {
  return a < static_cast<int>(v.size()) ? v[a] : 0.0;
}

}  // namespace detail

/// Band-limited random field: independent normal coefficients on every mode
/// with |k_int,a| <= kmax, weighted by exp(-|k_int|^2 / kmax^2). Modes are drawn
/// in a grid-independent order, so the same seed gives the same function on
/// any grid that resolves it. Real fields take the real part.
template <class T>
Field<T> random_smooth_field(const GridPtr& grid, std::mt19937_64& rng, int kmax, bool zero_mean) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = grid->dim();
  const auto plan = plan_for(grid);
  std::vector<cplx> spec(grid->size(), cplx{});
  const int span = 2 * kmax + 1;
  int total = 1;
  for (int a = 0; a < d; ++a) total *= span;
  for (int c = 0; c < total; ++c) {
    int rem = c;
    std::array<long, kMaxDim> m{0, 0, 0};
    double k2 = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      m[a] = rem % span - kmax;
      rem /= span;
      k2 += static_cast<double>(m[a] * m[a]);
    }
    const double re = normal(rng), im = normal(rng);
    bool representable = true;
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const auto n = static_cast<long>(grid->n(a));
      if (2 * std::abs(m[a]) >= n) representable = false;
      flat = flat * grid->n(a) + static_cast<std::size_t>((m[a] + n) % n);
    }
    if (!representable) continue;
    if (zero_mean && k2 == 0.0) continue;
    spec[flat] = cplx(re, im) * std::exp(-k2 / (kmax * kmax));
  }
  return plan->synthesize<T>(std::move(spec));
}

/// Builds the named initial state. Throws std::invalid_argument for unknown
/// families.
inline State make_initial_state(const GridPtr& grid, const Params& p, const InitialCondition& ic) {
  const Grid& g = *grid;
  const int d = g.dim();
  const double rho_uniform = ic.rho > 0.0 ? ic.rho : p.rho_ref();
  State s = make_state(grid);
  const cplx amp = std::polar(ic.amplitude, ic.phase);

  if (ic.family == "smooth") {
    const double U = detail::component(ic.velocity, 0);
    s.psi = sample<cplx>(grid, [&](const auto& x) {
      const auto th = detail::angles(g, x);
      const cplx i(0.0, 1.0);
      cplx v = 1.0 + 0.5 * std::exp(i * th[0]);
      if (d > 1) v += 0.3 * std::exp(-i * th[1]) + 0.2 * std::exp(i * (th[0] + th[1]));
      if (d > 2) v += 0.2 * std::exp(i * th[2]);
      return amp * v;
    });
    if (d > 1) {
      s.u[0] = sample<double>(grid, [&](const auto& x) {
        const auto th = detail::angles(g, x);
        return U * std::sin(th[0]) * std::cos(th[1]) * (d > 2 ? std::cos(th[2]) : 1.0);
      });
      s.u[1] = sample<double>(grid, [&](const auto& x) {
        const auto th = detail::angles(g, x);
        return -U * std::cos(th[0]) * std::sin(th[1]) * (d > 2 ? std::cos(th[2]) : 1.0);
      });
    }
    s.rho = sample<double>(grid, [&](const auto& x) {
      const auto th = detail::angles(g, x);
      return p.rho_ref() + 0.4 * (p.M - p.m) * std::cos(th[0]) * (d > 1 ? std::cos(th[1]) : 1.0);
    });
  } else if (ic.family == "plane_wave" || ic.family == "constant") {
    const auto k = ic.family == "plane_wave" ? physical_wavenumber(g, ic.mode) : std::array<double, kMaxDim>{0, 0, 0};
    s.psi = sample<cplx>(grid, [&](const auto& x) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += k[a] * x[a];
      return amp * std::exp(cplx(0.0, phase));
    });
    for (int a = 0; a < d; ++a) s.u[a] = RealField(grid, detail::component(ic.velocity, a));
    s.rho = RealField(grid, rho_uniform);
  } else if (ic.family == "floor_dip") {
    s.psi = sample<cplx>(grid, [&](const auto& x) {
      const auto th = detail::angles(g, x);
      return amp * (1.0 + 0.5 * std::cos(th[0]));
    });
    s.rho = RealField(grid, p.m);
  } else if (ic.family == "random") {
    std::mt19937_64 rng(ic.seed);
    s.psi = random_smooth_field<cplx>(grid, rng, ic.kmax, false);
    const double psi_max = norm(s.psi, NormSpec::linf());
    if (psi_max > 0.0) s.psi *= cplx(ic.amplitude / psi_max, 0.0);
    const double U = detail::component(ic.velocity, 0);
    for (int a = 0; a < d; ++a) s.u[a] = random_smooth_field<double>(grid, rng, ic.kmax, false);
    s.u = plan_for(grid)->leray_project(s.u).first;
    const double umax = norm(s.u, NormSpec::linf());
    if (umax > 0.0) s.u *= U / umax;
    auto r = random_smooth_field<double>(grid, rng, ic.kmax, true);
    const double rmax = norm(r, NormSpec::linf());
    for (std::size_t i = 0; i < r.size(); ++i)
      s.rho[i] = p.rho_ref() + (rmax > 0.0 ? 0.45 * (p.M - p.m) * r[i] / rmax : 0.0);
  } else {
    throw std::invalid_argument("unknown initial-condition family '" + ic.family + "'");
  }
  return s;
}

}  // namespace pitaevskii
