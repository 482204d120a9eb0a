#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcur/grid.hpp"

namespace tcur {

/// Continuity equation d_t rho + div(u rho) = 0 with initial datum rho0.
struct ContinuityProblem {
  VectorField u;
  std::vector<double> rho0;
  NormExponents exponents;
  /// int_0^1 ||div(u)^-(t)||_inf dt, rectangle rule in time.
  double divergence_bound = 0.0;

  static ContinuityProblem make(VectorField u, std::vector<double> rho0, NormExponents exponents = NormExponents::from_p(2.0));
  const PeriodicGrid& grid() const noexcept { return u.grid(); }
};

enum class ContinuityScheme { kSemiLagrangian, kFiniteVolume };

struct ContinuityOptions {
  /// RK4 substeps per dt for the semi-Lagrangian characteristics.
  int substeps = 4;
  /// Forward-Euler steps per dt for the finite-volume scheme.
  int fv_substeps = 1;
};

/// Semi-Lagrangian: rho(t, y) = rho0(Phi^{-1}(t, y)) det D_x Phi^{-1}(t, y), rho0
/// interpolated cubically. Finite volume: first-order upwind with face velocities
/// averaged from neighboring cells, exactly conservative.
ScalarField solve_continuity(const ContinuityProblem& problem, ContinuityScheme scheme,
                             const ContinuityOptions& options = {});

/// Largest finite-volume step keeping the upwind update monotone.
double max_stable_step(const VectorField& u);

/// max over random test functions xi supported in [0, 0.9] x T^d of
///   | int int rho (d_t xi + u . grad xi) + int xi(0) rho0 | / ||xi||_{C^1},
/// with analytic derivatives of xi and a third-order end-corrected time quadrature.
double weak_residual(const ScalarField& rho, const ContinuityProblem& problem, int n_forms, std::uint64_t seed = 1);

struct RoughFieldSpec {
  double p = 2.0;
  double decay_alpha = 1.75;
  std::uint64_t seed = 1;
  int mode_cap = 32;
  double mean = 0.5;
  /// Sup of the fluctuation; mean > amplitude keeps u_1 > 0 (sign-definite in d = 1).
  double amplitude = 0.25;
};

struct RoughField {
  VectorField u;
  double sup_norm = 0.0;
  /// Discrete W^{1,p} seminorm: sum over components of ||grad u_j||_p on one slice.
  double sobolev_seminorm = 0.0;
  /// max neighbor difference quotient.
  double lipschitz_seminorm = 0.0;
  double divergence_bound = 0.0;
  bool warning = false;
  std::string message;
};

/// Time-independent Fourier series with coefficient magnitudes |k|^-alpha for
/// 1 <= |k|_inf <= mode_cap: sines sharing a node at a point x0 drawn from a
/// seeded mt19937_64, so the gradient at x0 is the full sum of |k|^{1-alpha}.
RoughField rough_field(const RoughFieldSpec& spec, const PeriodicGrid& grid);

}  // namespace tcur
