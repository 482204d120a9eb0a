#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace tcur {

inline constexpr int kMaxDim = 2;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A point of the torus [0,1)^d; components beyond d are ignored.
using Point = std::array<double, kMaxDim>;

/// Discretization of the slab (0,1) x T^d.
///
/// Spatial samples sit at cell centers x_i = (i + 1/2) h, time samples at
/// t_k = k dt for k = 0 .. n_t - 1 (time index 0 is t = 0; t = 1 is not stored).
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int cells, int time_steps);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  int n_t() const noexcept { return n_t_; }
  double h() const noexcept { return 1.0 / n_; }
  double dt() const noexcept { return 1.0 / n_t_; }
  double time(int k) const noexcept { return k * dt(); }

  /// Number of spatial samples per time slice, n^d.
  std::size_t slice_size() const noexcept { return slice_size_; }
  std::size_t size() const noexcept { return slice_size_ * static_cast<std::size_t>(n_t_); }
  double cell_volume() const noexcept;
  /// Space-time quadrature weight h^d dt.
  double weight() const noexcept { return cell_volume() * dt(); }

  /// Multi-index of a flat spatial index; x_1 is the slowest axis.
  std::array<int, kMaxDim> multi_index(std::size_t i) const noexcept;
  std::size_t flat_index(const std::array<int, kMaxDim>& idx) const noexcept;
  Point center(std::size_t i) const noexcept;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int dim_;
  int n_;
  int n_t_;
  std::size_t slice_size_;
};

/// Time-indexed samples of a real field, t-major then x_1-major.
class ScalarField {
 public:
  explicit ScalarField(const PeriodicGrid& grid);
  ScalarField(const PeriodicGrid& grid, std::vector<double> values);

  static ScalarField from_function(const PeriodicGrid& grid,
                                   const std::function<double(double, const Point&)>& f);
  /// Same spatial array in every time slice.
  static ScalarField constant_in_time(const PeriodicGrid& grid, std::span<const double> slice);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> slice(int k) const noexcept;
  std::span<double> slice(int k) noexcept;

  double operator()(int k, std::size_t i) const noexcept { return values_[k * grid_.slice_size() + i]; }
  double& operator()(int k, std::size_t i) noexcept { return values_[k * grid_.slice_size() + i]; }

  /// Throws ErrorKind::kNumerical on NaN/Inf.
  void check_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField operator*(const ScalarField& a, const ScalarField& b);

class VectorField {
 public:
  explicit VectorField(std::vector<ScalarField> components);
  static VectorField zeros(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const noexcept { return components_.front().grid(); }
  int dim() const noexcept { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int j) const noexcept { return components_[j]; }
  ScalarField& operator[](int j) noexcept { return components_[j]; }
  const std::vector<ScalarField>& components() const noexcept { return components_; }

 private:
  std::vector<ScalarField> components_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(const VectorField& v, const ScalarField& s);

/// Hoelder pair (p, q) with 1/p + 1/q = 1.
struct NormExponents {
  double p;
  double q;

  static NormExponents from_p(double p);
  void validate() const;
};

double conjugate_exponent(double p);

// Norms and quadrature. Midpoint rule in space, rectangle weights dt in time,
// so the unit-volume slab integrates 1 exactly.
double integral(const ScalarField& f);
double slice_integral(const ScalarField& f, int k);
double inner(const ScalarField& f, const ScalarField& g);
/// L^p((0,1) x T^d).
double lp_norm(const ScalarField& f, double p);
/// L^p(T^d) per time index.
std::vector<double> slice_lp_norms(const ScalarField& f, double p);
/// L^inf(0,1; L^p(T^d)) as the max over slices.
double sup_time_lp_norm(const ScalarField& f, double p);
double spatial_lp_norm(const PeriodicGrid& grid, std::span<const double> slice, double p);

enum class DerivativeScheme { kSpectral, kCentral };

/// Periodic derivative along a spatial axis.
ScalarField derivative(const ScalarField& f, int axis, DerivativeScheme scheme = DerivativeScheme::kSpectral);
void derivative_slice(const PeriodicGrid& grid, std::span<const double> in, std::span<double> out, int axis,
                      DerivativeScheme scheme = DerivativeScheme::kSpectral);
ScalarField divergence(const VectorField& v, DerivativeScheme scheme = DerivativeScheme::kSpectral);
VectorField gradient(const ScalarField& f, DerivativeScheme scheme = DerivativeScheme::kSpectral);

/// d/dt with one-sided second-order stencils on the first and last slices.
ScalarField time_derivative(const ScalarField& f);

/// Trapezoidal G(t_k) = int_0^{t_k} f ds; G(0) = 0.
ScalarField cumulative_time_integral(const ScalarField& f);

struct InterpolationDiagnostics {
  std::size_t queries = 0;
  std::size_t clamped = 0;
};

/// Periodic 4-point Lagrange stencil at a fixed point; reusable across slices and fields.
class SliceStencil {
 public:
  SliceStencil(const PeriodicGrid& grid, const Point& x);
  double apply(std::span<const double> slice) const;

 private:
  int dim_;
  int n_;
  std::array<std::array<double, 4>, kMaxDim> weights_{};
  std::array<std::array<int, 4>, kMaxDim> nodes_{};
};

/// Periodic 4-point Lagrange interpolation of one slice.
double interpolate_slice(const PeriodicGrid& grid, std::span<const double> slice, const Point& x);
/// Cubic in space, linear in time; t is clamped to [0, 1 - dt].
double interpolate(const ScalarField& f, double t, const Point& x, InterpolationDiagnostics* diag = nullptr);

/// Shortest signed periodic displacement b - a on the unit circle, in [-1/2, 1/2).
double periodic_delta(double a, double b) noexcept;
double wrap_unit(double x) noexcept;

}  // namespace tcur
