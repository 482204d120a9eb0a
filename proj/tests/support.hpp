#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "tcur/currents.hpp"
#include "tcur/grid.hpp"
#include "tcur/random_fields.hpp"

namespace tcur::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using random::random_current;
using random::random_form;
using random::random_smooth;
using random::random_smooth_vector;

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

inline double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tcur::testing
