#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tcur/currents.hpp"
#include "tcur/grid.hpp"
#include "tcur/spectral.hpp"

namespace tcur {

/// Shape of a mollifier on the unit ball B(0,1); evaluated at y with |y| < 1.
using KernelProfile = std::function<double(const Point&)>;

/// exp(-1 / (1 - |y|^2)) inside the unit ball, 0 outside.
double bump_profile(const Point& y, int dim);
/// Gradient of `bump_profile`.
Point bump_profile_gradient(const Point& y, int dim);
/// (1 + skew * y_1) * bump: nonnegative for |skew| < 1, not even for skew != 0.
double skewed_profile(const Point& y, int dim, double skew);
Point skewed_profile_gradient(const Point& y, int dim, double skew);

using KernelGradient = std::function<Point(const Point&)>;

/// Sampled eta_delta = delta^{-d} eta(x / delta) on the spatial lattice,
/// renormalized to unit discrete mass.
class MollifierKernel {
 public:
  static MollifierKernel bump(const PeriodicGrid& grid, double delta);
  /// Deliberately non-even kernel for moment-dependence studies.
  static MollifierKernel skewed(const PeriodicGrid& grid, double delta, double skew = 0.5);
  static MollifierKernel from_profile(const PeriodicGrid& grid, double delta, KernelProfile profile,
                                      std::string name = "custom");
  /// Radial profile tabulated as (radius, value) pairs on [0, 1], linearly interpolated.
  static MollifierKernel from_table(const PeriodicGrid& grid, double delta, const std::vector<double>& radius,
                                    const std::vector<double>& value);

  double delta() const noexcept { return delta_; }
  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }
  /// Weights indexed like a spatial slice; entry i sits at the periodic offset of cell i from cell 0.
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Fourier multiplier h^d * DFT(weights).
  const spectral::Spectrum& multiplier() const noexcept { return multiplier_; }
  /// Normalization constant (discrete mass before renormalization).
  double raw_mass() const noexcept { return raw_mass_; }
  /// Profile used to build the weights, before scaling and normalization.
  const KernelProfile& profile() const noexcept { return profile_; }
  /// Analytic profile gradient, empty for custom and tabulated profiles.
  const KernelGradient& profile_gradient() const noexcept { return gradient_; }
  /// Centered offset of weight i, components in [-1/2, 1/2).
  Point offset(std::size_t i) const;
  /// w(x) == w(-x) bit-for-bit on the lattice.
  bool is_even() const;

 private:
  MollifierKernel(const PeriodicGrid& grid, double delta, KernelProfile profile, std::string name);

  PeriodicGrid grid_;
  int dim_;
  int n_;
  double delta_;
  double raw_mass_ = 0.0;
  std::string name_;
  KernelProfile profile_;
  KernelGradient gradient_;
  std::vector<double> weights_;
  spectral::Spectrum multiplier_;
};

/// Slice-wise periodic convolution eta_delta * f (space only).
ScalarField mollify(const ScalarField& f, const MollifierKernel& k);
VectorField mollify(const VectorField& v, const MollifierKernel& k);

/// Order 0: discrete mass. Order 1: first moment sum h^d w(x) x.
std::vector<double> kernel_moment(const MollifierKernel& k, int order);

/// T_delta = rho_delta e_t + rho_delta u_delta^i e_i.
Current1Diffuse regularized_current(const ScalarField& rho, const VectorField& u, const MollifierKernel& k);

/// T = rho e_t + rho u^i e_i.
Current1Diffuse solution_current(const ScalarField& rho, const VectorField& u);

}  // namespace tcur
