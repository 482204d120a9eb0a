#pragma once

#include <optional>

#include "tcur/currents.hpp"

namespace tcur {

struct FlatNormOptions {
  /// Guard on n^d * n_t * d, the number of 2-current samples.
  std::size_t max_variables = 8192;
  double lp_tolerance = 1e-10;
  int max_iterations = 200;
  /// Relative duality gap above which the certificate carries a warning.
  double gap_warning = 1e-6;
  DerivativeScheme scheme = DerivativeScheme::kSpectral;
};

/// Primal decomposition T = dS + L, a feasible dual form, and the gap between them.
struct FlatNormCertificate {
  double value = 0.0;   // primal objective M(S) + M(L)
  double dual = 0.0;    // pair(T, omega) for a strictly feasible omega
  double gap = 0.0;     // value - dual
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool gap_warning = false;
  std::optional<FlatDecomposition> primal;
  std::optional<OneForm> omega;
};

/// Discrete flat norm over grid-supported diffuse decompositions.
///
/// Primal: min M(S) + M(L) s.t. T = dS + L, with F_j(0, .) = 0. The L^1 objectives
/// are linearized by sign splitting. Dual: max pair(T, omega) over |tau|, |xi^j| <= 1
/// with the adjoint of the discrete boundary of omega bounded by 1.
FlatNormCertificate flat_norm_lp(const Current1Diffuse& T, const FlatNormOptions& options = {});

}  // namespace tcur
