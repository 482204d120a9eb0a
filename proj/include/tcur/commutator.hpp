#pragma once

#include <array>
#include <vector>

#include "tcur/grid.hpp"
#include "tcur/mollify.hpp"

namespace tcur {

/// r_delta = eta_delta * div(u rho) - div(u_delta rho_delta).
ScalarField commutator(const VectorField& u, const ScalarField& rho, const MollifierKernel& k,
                       DerivativeScheme scheme = DerivativeScheme::kSpectral);

/// Split of r_delta:
///   t1 = eta * (div(u) rho) - div(u_delta) rho_delta
///   t2 = eta * (u . grad rho) - u_delta . grad rho_delta
///   t3 = eta * (u . grad rho) - u . grad rho_delta
///   t4 = (u - u_delta) . grad rho_delta
/// t3 + t4 = t2 holds sample-wise; t1 + t2 = r_delta up to the discrete
/// product rule, which is exact for the spectral operator on band-limited products.
struct CommutatorTerms {
  ScalarField t1, t2, t3, t4;
};

CommutatorTerms decompose_commutator(const VectorField& u, const ScalarField& rho, const MollifierKernel& k,
                                     DerivativeScheme scheme = DerivativeScheme::kSpectral);

/// Factors of t4 = sum_j A_j B_j with
///   A_j(x) = int eta(y) (u_j(x) - u_j(x - delta y)) / delta dy
///   B_j(x) = int d_j eta(y) rho(x - delta y) dy,
/// evaluated by direct lattice sums with the analytic profile gradient.
struct ProductForm {
  VectorField difference_quotient;  // A
  VectorField kernel_gradient;      // B
  ScalarField product;              // sum_j A_j B_j, an independent evaluation of t4
  /// int |A| |B| dx dt (Euclidean norms), the Cauchy-Schwarz bound on ||t4||_1.
  double bound = 0.0;
};

/// Requires a kernel with an analytic profile gradient.
ProductForm product_form(const VectorField& u, const ScalarField& rho, const MollifierKernel& k);

/// Brute-force periodic convolution by lattice sums, the oracle for `mollify`.
ScalarField convolve_direct(const ScalarField& f, const MollifierKernel& k);

struct SweepOptions {
  DerivativeScheme scheme = DerivativeScheme::kSpectral;
  /// Kernel family used at each delta: "bump" or "skewed".
  std::string kernel = "bump";
  double skew = 0.5;
  /// If > 0, u and rho are first mollified at this many cells (>= 2) before the sweep.
  int presmooth_cells = 0;
};

struct CommutatorReport {
  std::vector<double> delta_values;
  std::vector<double> l1_norms;
  std::vector<std::array<double, 4>> term_norms;
  /// ||(u - u_delta) / delta||_1 summed over components: decays for even kernels, plateaus otherwise.
  std::vector<double> difference_quotient_norms;
  double fitted_rate = 0.0;
  double fit_residual = 0.0;
  /// Round-off level of ||r_delta||_1: 1e-12 max(1, ||u||_inf ||rho||_1 / h).
  double roundoff_floor = 0.0;
  /// Every norm is at or below the round-off floor.
  bool vanishing = false;
  /// False when some norm is at round-off level (log-log fit undefined).
  bool rate_defined = false;
  bool monotone = false;
};

/// Norms per delta; `deltas` must be strictly decreasing.
CommutatorReport commutator_sweep(const VectorField& u, const ScalarField& rho, const std::vector<double>& deltas,
                                  const SweepOptions& options = {});

/// Ordinary least squares slope of log y on log x, with the RMS residual.
struct RateFit {
  double slope = 0.0;
  double residual = 0.0;
};
RateFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tcur
