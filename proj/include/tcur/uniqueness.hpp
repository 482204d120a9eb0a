#pragma once

#include <string>
#include <vector>

#include "tcur/currents.hpp"
#include "tcur/grid.hpp"
#include "tcur/mollify.hpp"

namespace tcur {

/// Upper bounds on the flat norm of D = T_a - T_b, the difference of two
/// solution currents for the same velocity and initial datum, at one delta.
///
/// With T_delta the regularization of D, r = dT_delta and R the horizontal
/// current with dR = r, D splits as (D - D_delta + R) + D_delta - R and
///   bound1 >= F(D - D_delta + R)  (primitive decomposition, M(S) + M(L))
///   bound2 >= F(D_delta)          (D_delta ~ psi_# P with P horizontal, dP = r~)
///   bound3 = ||r||_1 >= M(R).
struct UniquenessRow {
  double delta = 0.0;
  double bound1 = 0.0;
  double bound2 = 0.0;
  double bound3 = 0.0;
  double total = 0.0;
  /// Vertical mass of D - D_delta + R, the a-priori estimate behind bound1.
  double vertical_mass = 0.0;
  /// ||r~||_1 / ||r||_1 - 1 for r~ the push-forward of r under psi^{-1}.
  double transport_mass_error = 0.0;
  /// M(D_delta - psi_# P), the discretization part of bound2.
  double straightening_residual = 0.0;
};

struct UniquenessResult {
  double mass_difference = 0.0;  // M(D)
  double boundary_mass = 0.0;    // M(dD)
  std::vector<UniquenessRow> rows;
  double min_total = 0.0;
  double argmin_delta = 0.0;
};

struct UniquenessOptions {
  std::string kernel = "bump";
  int flow_substeps = 4;
};

/// `deltas` must all admit a resolved kernel on the grid.
UniquenessResult uniqueness_bounds(const ScalarField& rho_a, const ScalarField& rho_b, const VectorField& u,
                                   const std::vector<double>& deltas, const UniquenessOptions& options = {});

}  // namespace tcur
