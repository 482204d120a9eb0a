#pragma once

#include <numbers>
#include <random>

#include "tcur/currents.hpp"
#include "tcur/grid.hpp"

namespace tcur::random {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Random trigonometric polynomial with spatial modes |k| <= kmax and a
/// polynomial-in-time envelope a + b t + c t^2.
inline ScalarField random_smooth(const PeriodicGrid& g, std::mt19937_64& rng, int kmax = 3, double amplitude = 1.0,
                                 bool time_dependent = true) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  struct Mode {
    int k1, k2;
    double c, s, a, b;
  };
  std::vector<Mode> modes;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = (g.dim() == 2 ? -kmax : 0); k2 <= (g.dim() == 2 ? kmax : 0); ++k2)
      modes.push_back({k1, k2, U(rng), U(rng), time_dependent ? U(rng) : 0.0, time_dependent ? U(rng) : 0.0});
  const double norm = amplitude / static_cast<double>(modes.size());
  return ScalarField::from_function(g, [&](double t, const Point& x) {
    double v = 0.0;
    for (const Mode& m : modes) {
      const double ph = kTwoPi * (m.k1 * x[0] + (g.dim() == 2 ? m.k2 * x[1] : 0.0));
      v += (m.c * std::cos(ph) + m.s * std::sin(ph)) * (1.0 + m.a * t + m.b * t * t);
    }
    return norm * v;
  });
}

inline VectorField random_smooth_vector(const PeriodicGrid& g, std::mt19937_64& rng, int kmax = 3,
                                        double amplitude = 1.0, bool time_dependent = true) {
  std::vector<ScalarField> c;
  for (int j = 0; j < g.dim(); ++j) c.push_back(random_smooth(g, rng, kmax, amplitude, time_dependent));
  return VectorField(std::move(c));
}

inline Current1Diffuse random_current(const PeriodicGrid& g, std::mt19937_64& rng, int kmax = 3) {
  return Current1Diffuse(random_smooth(g, rng, kmax), random_smooth_vector(g, rng, kmax));
}

inline OneForm random_form(const PeriodicGrid& g, std::mt19937_64& rng, int kmax = 3) {
  return OneForm(random_smooth(g, rng, kmax), random_smooth_vector(g, rng, kmax));
}

}  // namespace tcur::random
