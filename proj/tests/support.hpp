#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "pitaevskii/pitaevskii.hpp"

namespace testing_support {

using namespace pitaevskii;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline GridPtr torus(std::initializer_list<std::size_t> n) {
  std::vector<double> len(n.size(), kTwoPi);
  std::vector<std::size_t> nv(n);
  return make_grid(static_cast<int>(nv.size()), nv, len);
}

/// Band-limited random state (every field inside the 2/3 band for kmax <= n/3).
inline State random_state(const GridPtr& g, const Params& p, std::uint64_t seed, int kmax = 3, double amp = 1.0,
                          double vel = 0.7) {
  InitialCondition ic;
  ic.family = "random";
  ic.amplitude = amp;
  ic.velocity = {vel};
  ic.seed = seed;
  ic.kmax = kmax;
  return make_initial_state(g, p, ic);
}

inline ComplexField plane_wave(const GridPtr& g, cplx a, const std::array<double, kMaxDim>& k) {
  return sample<cplx>(g, [&](const auto& x) {
    double ph = 0.0;
    for (int i = 0; i < g->dim(); ++i) ph += k[i] * x[i];
    return a * std::exp(cplx(0.0, ph));
  });
}

template <class T>
double max_abs(const Field<T>& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs(const RealVectorField& v) {
  double m = 0.0;
  for (int a = 0; a < v.dim(); ++a) m = std::max(m, max_abs(v[a]));
  return m;
}

}  // namespace testing_support
