#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pitaevskii/norms.hpp"

namespace pitaevskii {

/// Model constants. M' = M + m - epsilon is derived, never stored.
struct Params {
  double lambda = 0.5;   // relaxation / mutual friction
  double mu = 1.0;       // self-interaction
  double nu = 0.05;      // viscosity
  double m = 1.0;        // initial density lower bound
  double M = 2.0;        // initial density upper bound
  double epsilon = 0.5;  // allowed density infimum
  double delta = 0.25;   // Sobolev index offset in the highest-order norms
  double gamma = 1.0;    // constant in Q_T (not fixed canonically)

  double M_prime() const { return M + m - epsilon; }
  double rho_ref() const { return 0.5 * (m + M); }

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
    if (!(mu >= 0.0) || !std::isfinite(mu)) fail("mu must be >= 0");
    if (!(nu >= 0.0) || !std::isfinite(nu)) fail("nu must be >= 0");
    if (!(m > 0.0) || !std::isfinite(m)) fail("m must be > 0");
    if (!(M >= m) || !std::isfinite(M)) fail("M must satisfy M >= m");
    if (!(epsilon > 0.0 && epsilon < m)) fail("epsilon must lie in (0, m)");
    if (!(delta > 0.0 && delta < 0.5)) fail("delta must lie in (0, 1/2)");
    if (!std::isfinite(gamma)) fail("gamma must be finite");
  }

  friend bool operator==(const Params&, const Params&) = default;
};

/// One trajectory point (t, psi, u, rho). u is kept divergence-free by the
/// integrator; pressure is never stored.
struct State {
  double t = 0.0;
  ComplexField psi;
  RealVectorField u;
  RealField rho;

  const GridPtr& grid_ptr() const { return psi.grid_ptr(); }
  const Grid& grid() const { return psi.grid(); }

  void check_consistent() const {
    require_same_grid(psi.grid(), rho.grid());
    require_same_grid(psi.grid(), u.grid());
    if (u.dim() != psi.grid().dim()) throw std::invalid_argument("state: velocity dimension mismatch");
  }
  bool all_finite() const { return std::isfinite(t) && psi.all_finite() && u.all_finite() && rho.all_finite(); }

  friend bool operator==(const State& a, const State& b) {
    return a.t == b.t && a.psi == b.psi && a.u == b.u && a.rho == b.rho;
  }
};

inline State make_state(const GridPtr& grid) {
  return State{0.0, ComplexField(grid), RealVectorField(grid), RealField(grid, 1.0)};
}

/// Raised when density falls below the allowed infimum epsilon.
class DensityFloorViolation : public std::runtime_error {
 public:
  DensityFloorViolation(double t, std::size_t node, std::array<double, kMaxDim> x, double value, double floor)
      : std::runtime_error(describe(t, x, value, floor)), t_(t), node_(node), x_(x), value_(value), floor_(floor) {}

  double time() const { return t_; }
  std::size_t node() const { return node_; }
  const std::array<double, kMaxDim>& location() const { return x_; }
  double value() const { return value_; }
  double floor() const { return floor_; }

 private:
  static std::string describe(double t, std::array<double, kMaxDim> x, double v, double floor) {
    std::ostringstream os;
    os.precision(17);
    os << "density-floor violation at t=" << t << " x=(" << x[0] << ", " << x[1] << ", " << x[2]
       << "): rho=" << v << " < epsilon=" << floor;
    return os.str();
  }
  double t_;
  std::size_t node_;
  std::array<double, kMaxDim> x_;
  double value_;
  double floor_;
};

/// Throws DensityFloorViolation if min rho < epsilon.
inline void check_density_floor(const RealField& rho, double epsilon, double t) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < rho.size(); ++i)
    if (rho[i] < rho[worst]) worst = i;
  if (!(rho[worst] >= epsilon)) {
    const auto idx = rho.grid().multi_index(worst);
    std::array<double, kMaxDim> x{0, 0, 0};
    for (int a = 0; a < rho.grid().dim(); ++a) x[a] = rho.grid().coordinate(a, idx[a]);
    throw DensityFloorViolation(t, worst, x, rho[worst], epsilon);
  }
}

}  // namespace pitaevskii
