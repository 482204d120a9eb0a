#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "tcur/currents.hpp"
#include "tcur/grid.hpp"

namespace tcur {

/// Spatial d x d matrix, row-major with stride d (entries beyond d*d unused).
using SpaceMatrix = std::array<double, kMaxDim * kMaxDim>;

double determinant(const SpaceMatrix& m, int dim);
SpaceMatrix inverse(const SpaceMatrix& m, int dim);

struct FlowOptions {
  int substeps = 4;
  /// Reuse the forward integrator for the inverse when u does not depend on time.
  bool autonomous_shortcut = true;
};

/// Sampled flow of a velocity field on every grid node and time sample.
///
/// Positions live on the universal cover: Phi(t, x) - x is periodic but Phi
/// itself is not wrapped, so Jacobians carry no winding artifacts.
class FlowMap {
 public:
  FlowMap(const VectorField& u, int substeps);

  const PeriodicGrid& grid() const noexcept { return u_.grid(); }
  int dim() const noexcept { return u_.dim(); }
  int substeps() const noexcept { return substeps_; }
  const VectorField& velocity_field() const noexcept { return u_; }

  Point position(int k, std::size_t i) const;
  SpaceMatrix jacobian(int k, std::size_t i) const;
  double determinant(int k, std::size_t i) const { return determinants.values()[flat(k, i)]; }
  /// u(t_k, Phi(t_k, x_i)).
  Point transported_velocity(int k, std::size_t i) const;
  Point inverse_position(int k, std::size_t i) const;
  SpaceMatrix inverse_jacobian(int k, std::size_t i) const;
  double inverse_determinant(int k, std::size_t i) const { return inverse_determinants.values()[flat(k, i)]; }
  /// u(t_k, x_i) from the stored velocity samples.
  Point node_velocity(int k, std::size_t i) const;

  std::vector<ScalarField> positions;          // d channels
  std::vector<ScalarField> jacobians;          // d*d channels, (a, b) -> a*d + b
  ScalarField determinants;
  std::vector<ScalarField> velocities;         // d channels
  std::vector<ScalarField> inverse_positions;  // d channels
  std::vector<ScalarField> inverse_jacobians;  // d*d channels
  ScalarField inverse_determinants;
  InterpolationDiagnostics diagnostics;

 private:
  std::size_t flat(int k, std::size_t i) const { return static_cast<std::size_t>(k) * grid().slice_size() + i; }

  VectorField u_;
  int substeps_;
};

/// Position and Jacobian of a single trajectory.
struct TrajectoryState {
  Point x{};
  SpaceMatrix jacobian{};
};

/// RK4 integration of dX/dt = u(t, X), dM/dt = Du(t, X) M between arbitrary
/// times (t1 < t0 integrates backward). Steps are dt / substeps, shortened to
/// land on t1.
TrajectoryState integrate_trajectory(const VectorField& u, double t0, double t1, const Point& x, int substeps = 4,
                                     InterpolationDiagnostics* diag = nullptr);

FlowMap compute_flow(const VectorField& u, const FlowOptions& options = {});
inline FlowMap compute_flow(const VectorField& u, int substeps) {
  FlowOptions o;
  o.substeps = substeps;
  return compute_flow(u, o);
}

/// Jacobian of the sampled positions by spatial differentiation of Phi - x.
std::vector<ScalarField> jacobian_by_differences(const FlowMap& flow, DerivativeScheme scheme = DerivativeScheme::kSpectral);

enum class InverseSampling {
  /// Interpolate the stored inverse determinant at Phi(t, x).
  kInterpolated,
  /// Integrate backward from Phi(t, x) afresh.
  kRetraced,
};

/// max |det D_x Phi(t, x) * det D_x Phi^{-1}(t, Phi(t, x)) - 1| over the lattice.
double jacobian_identity_error(const FlowMap& flow, InverseSampling sampling = InverseSampling::kInterpolated);

enum class Orientation { kForward, kInverse };

/// psi(t, x) = (t, Phi(t, x)) or its inverse. The time component is the identity.
class SpaceTimeDiffeo {
 public:
  SpaceTimeDiffeo(const FlowMap& flow, Orientation orientation) : flow_(&flow), orientation_(orientation) {}
  static SpaceTimeDiffeo forward(const FlowMap& flow) { return {flow, Orientation::kForward}; }
  static SpaceTimeDiffeo inverse(const FlowMap& flow) { return {flow, Orientation::kInverse}; }

  const FlowMap& flow() const noexcept { return *flow_; }
  Orientation orientation() const noexcept { return orientation_; }
  const PeriodicGrid& grid() const noexcept { return flow_->grid(); }
  SpaceTimeDiffeo inverted() const {
    return {*flow_, orientation_ == Orientation::kForward ? Orientation::kInverse : Orientation::kForward};
  }

  /// Spatial part of F(t_k, x_i).
  Point image(int k, std::size_t i) const;
  /// Spatial part of F^{-1}(t_k, x_i).
  Point preimage(int k, std::size_t i) const;
  /// (d+1) x (d+1) Jacobian DF at the node, row-major, index 0 = time.
  std::vector<double> jacobian(int k, std::size_t i) const;
  /// D(F^{-1}) at the node.
  std::vector<double> inverse_jacobian(int k, std::size_t i) const;

 private:
  const FlowMap* flow_;
  Orientation orientation_;
};

/// (rho / det DF) o F^{-1}, i.e. rho(F^{-1} y) det D(F^{-1})(y).
ScalarField pushforward_density(const SpaceTimeDiffeo& F, const ScalarField& rho);

/// (DF f / det DF) o F^{-1}, with f resampled at F^{-1}(y) by cubic interpolation.
Current1Diffuse pushforward_current(const SpaceTimeDiffeo& F, const Current1Diffuse& T);

/// F^# w (y) = DF(y)^T w(F(y)).
OneForm pullback_form(const SpaceTimeDiffeo& F, const OneForm& w);
/// F^# beta via 2x2 minors of DF.
TwoForm pullback_form(const SpaceTimeDiffeo& F, const TwoForm& beta);
/// xi o F.
ScalarField pullback_function(const SpaceTimeDiffeo& F, const ScalarField& xi);

struct Straightening {
  Current1Diffuse straightened;
  /// Vertical mass of the straightened current.
  double defect = 0.0;
};

/// Push-forward of T under psi^{-1}; for T = T_delta and the flow of u_delta
/// the result is horizontal up to discretization error.
Straightening straighten(const Current1Diffuse& T_delta, const FlowMap& flow);

/// Channels: positions, jacobians, determinants, velocities, inverse positions,
/// inverse jacobians, inverse determinants.
void write_flow(const std::filesystem::path& path, const FlowMap& flow);

}  // namespace tcur
