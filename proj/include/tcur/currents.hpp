#pragma once

#include <utility>
#include <vector>

#include "tcur/grid.hpp"

namespace tcur {

/// Diffuse 1-current f_t e_t + sum_j f_j e_j on the slab.
struct Current1Diffuse {
  ScalarField f_t;
  VectorField f_vec;

  Current1Diffuse(ScalarField time_part, VectorField space_part);
  static Current1Diffuse zeros(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const noexcept { return f_t.grid(); }
  int dim() const noexcept { return f_vec.dim(); }
};

Current1Diffuse operator+(const Current1Diffuse& a, const Current1Diffuse& b);
Current1Diffuse operator-(const Current1Diffuse& a, const Current1Diffuse& b);
Current1Diffuse operator*(double s, const Current1Diffuse& a);

/// Diffuse 2-current sum_j F_j e_t ^ e_j.
struct Current2Diffuse {
  VectorField F;

  explicit Current2Diffuse(VectorField coefficients) : F(std::move(coefficients)) {}
  static Current2Diffuse zeros(const PeriodicGrid& grid);
  const PeriodicGrid& grid() const noexcept { return F.grid(); }
};

/// Boundary of a 1-current: an L^1 density on the open slab plus a density on {0} x T^d.
struct BoundaryDistribution {
  ScalarField interior;
  std::vector<double> initial_surface;

  /// ||interior||_1 + ||initial_surface||_1.
  double mass() const;
};

/// omega = tau dt + xi^j dx_j.
struct OneForm {
  ScalarField tau;
  VectorField xi;

  OneForm(ScalarField time_part, VectorField space_part);
  const PeriodicGrid& grid() const noexcept { return tau.grid(); }
};

/// Space-time 2-form; axis 0 is t, axis j >= 1 is x_j. Stores the coefficient of
/// dz_a ^ dz_b for a < b.
class TwoForm {
 public:
  explicit TwoForm(const PeriodicGrid& grid);
  const ScalarField& operator()(int a, int b) const { return components_[index(a, b)]; }
  ScalarField& operator()(int a, int b) { return components_[index(a, b)]; }
  const PeriodicGrid& grid() const noexcept { return components_.front().grid(); }

 private:
  std::size_t index(int a, int b) const;
  int axes_;
  std::vector<ScalarField> components_;
};

// Duality pairings (space-time quadrature).
double pair(const Current1Diffuse& T, const OneForm& w);
double pair(const Current2Diffuse& S, const TwoForm& beta);
/// <dT, xi> for a test function sampled on the grid.
double pair(const BoundaryDistribution& g, const ScalarField& xi);

OneForm exterior_derivative(const ScalarField& xi, DerivativeScheme scheme = DerivativeScheme::kSpectral);
TwoForm exterior_derivative(const OneForm& w, DerivativeScheme scheme = DerivativeScheme::kSpectral);

/// dT: interior -(d_t f_t + sum_j d_j f_j), initial surface -f_t(0, .).
BoundaryDistribution boundary1(const Current1Diffuse& T, DerivativeScheme scheme = DerivativeScheme::kSpectral);

/// dS: f_t = sum_j d_j F_j, f_j = -d_t F_j. Throws "surface term" when some
/// F_j(0, .) does not vanish.
Current1Diffuse boundary2(const Current2Diffuse& S, DerivativeScheme scheme = DerivativeScheme::kSpectral);

struct PrimitiveOptions {
  /// Null-boundary tolerance relative to mass(T).
  double boundary_tolerance = 1e-8;
  DerivativeScheme scheme = DerivativeScheme::kSpectral;
  /// Skip the null-boundary precondition (used when building explicit decompositions).
  bool check_boundary = true;
};

/// S with F_j(t) = -int_0^t f_j ds, so that dS = T whenever dT = 0.
Current2Diffuse primitive_two_current(const Current1Diffuse& T, const PrimitiveOptions& options = {});

double mass(const Current1Diffuse& T);
double mass2(const Current2Diffuse& S);
double vertical_mass(const Current1Diffuse& T);
double horizontal_mass(const Current1Diffuse& T);
/// (horizontal f_t e_t, vertical f_j e_j).
std::pair<Current1Diffuse, Current1Diffuse> split(const Current1Diffuse& T);
/// Mass carried by the last stored slice; zero for currents supported in [0,1).
double final_slice_mass(const Current1Diffuse& T);

/// M = -G e_t with G(t) = int_0^t g ds; requires a vanishing surface part.
Current1Diffuse horizontal_from_boundary(const BoundaryDistribution& g);
Current1Diffuse horizontal_from_boundary(const ScalarField& interior);

struct FlatDecomposition {
  Current2Diffuse S;
  Current1Diffuse L;
};

/// M(S) + M(L) for a decomposition with T = dS + L (checked to `tolerance` * mass(T)).
double flat_bound_constructive(const Current1Diffuse& T, const FlatDecomposition& decomposition,
                               DerivativeScheme scheme = DerivativeScheme::kSpectral, double tolerance = 1e-9);

/// Primitive S of T together with the remainder L = T - dS; no null-boundary check.
FlatDecomposition primitive_decomposition(const Current1Diffuse& T,
                                          DerivativeScheme scheme = DerivativeScheme::kSpectral);

}  // namespace tcur
