#include "tcur/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tcur/error.hpp"
#include "tcur/spectral.hpp"

namespace tcur {

PeriodicGrid::PeriodicGrid(int dim, int cells, int time_steps) : dim_(dim), n_(cells), n_t_(time_steps) {
  require(dim >= 1 && dim <= kMaxDim, "PeriodicGrid: dimension must be 1 or 2");
  require(cells >= 8 && (cells & (cells - 1)) == 0, "PeriodicGrid: n must be a power of two >= 8");
  require(time_steps >= 8, "PeriodicGrid: n_t must be >= 8");
  slice_size_ = 1;
  for (int a = 0; a < dim; ++a) slice_size_ *= static_cast<std::size_t>(cells);
}

double PeriodicGrid::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h();
  return v;
}

std::array<int, kMaxDim> PeriodicGrid::multi_index(std::size_t i) const noexcept {
  std::array<int, kMaxDim> idx{};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(i % n_);
    i /= n_;
  }
  return idx;
}

std::size_t PeriodicGrid::flat_index(const std::array<int, kMaxDim>& idx) const noexcept {
  std::size_t i = 0;
  for (int a = 0; a < dim_; ++a) {
    const int wrapped = ((idx[a] % n_) + n_) % n_;
    i = i * n_ + wrapped;
  }
  return i;
}

Point PeriodicGrid::center(std::size_t i) const noexcept {
  const auto idx = multi_index(i);
  Point x{};
  for (int a = 0; a < dim_; ++a) x[a] = (idx[a] + 0.5) * h();
  return x;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const PeriodicGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(),
          "ScalarField: expected " + std::to_string(grid_.size()) + " samples, got " + std::to_string(values_.size()));
  check_finite();
}

ScalarField ScalarField::from_function(const PeriodicGrid& grid,
                                       const std::function<double(double, const Point&)>& f) {
  ScalarField out(grid);
  for (int k = 0; k < grid.n_t(); ++k) {
    const double t = grid.time(k);
    for (std::size_t i = 0; i < grid.slice_size(); ++i) out(k, i) = f(t, grid.center(i));
  }
  out.check_finite();
  return out;
}

ScalarField ScalarField::constant_in_time(const PeriodicGrid& grid, std::span<const double> slice) {
  require(slice.size() == grid.slice_size(), "constant_in_time: slice size mismatch");
  ScalarField out(grid);
  for (int k = 0; k < grid.n_t(); ++k) std::copy(slice.begin(), slice.end(), out.slice(k).begin());
  out.check_finite();
  return out;
}

std::span<const double> ScalarField::slice(int k) const noexcept {
  return std::span<const double>(values_).subspan(k * grid_.slice_size(), grid_.slice_size());
}

std::span<double> ScalarField::slice(int k) noexcept {
  return std::span<double>(values_).subspan(k * grid_.slice_size(), grid_.slice_size());
}

void ScalarField::check_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorKind::kNumerical, "ScalarField: non-finite sample");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require(grid_ == o.grid_, "ScalarField: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require(grid_ == o.grid_, "ScalarField: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require(a.grid() == b.grid(), "ScalarField: grid mismatch");
  ScalarField out(a.grid());
  auto o = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  return out;
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  require(!components_.empty(), "VectorField: no components");
  const PeriodicGrid& g = components_.front().grid();
  require(static_cast<int>(components_.size()) == g.dim(), "VectorField: component count must equal d");
  for (const auto& c : components_) require(c.grid() == g, "VectorField: components on different grids");
}

VectorField VectorField::zeros(const PeriodicGrid& grid) {
  return VectorField(std::vector<ScalarField>(grid.dim(), ScalarField(grid)));
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  std::vector<ScalarField> c;
  for (int j = 0; j < a.dim(); ++j) c.push_back(a[j] + b[j]);
  return VectorField(std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  std::vector<ScalarField> c;
  for (int j = 0; j < a.dim(); ++j) c.push_back(a[j] - b[j]);
  return VectorField(std::move(c));
}

VectorField operator*(const VectorField& v, const ScalarField& s) {
  std::vector<ScalarField> c;
  for (int j = 0; j < v.dim(); ++j) c.push_back(v[j] * s);
  return VectorField(std::move(c));
}

// ---------------------------------------------------------------------------

double conjugate_exponent(double p) {
  require(p >= 1.0, "conjugate_exponent: p must be >= 1");
  if (p == 1.0) return kInfinity;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

NormExponents NormExponents::from_p(double p) {
  NormExponents e{p, conjugate_exponent(p)};
  e.validate();
  return e;
}

void NormExponents::validate() const {
  require(p >= 1.0 && q >= 1.0, "NormExponents: p, q must lie in [1, inf]");
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
  require(std::abs(ip + iq - 1.0) <= 1e-12, "NormExponents: 1/p + 1/q must equal 1");
}

namespace {

void check_exponent(double p) { require(p >= 1.0, "lp_norm: exponent must be in [1, inf]"); }

// Accumulates sum |v|^p (or max |v| for p = inf) with a finiteness check.
double power_sum(std::span<const double> v, double p) {
  double acc = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorKind::kNumerical, "lp_norm: non-finite sample");
    const double a = std::abs(x);
    if (std::isinf(p))
      acc = std::max(acc, a);
    else if (p == 1.0)
      acc += a;
    else
      acc += std::pow(a, p);
  }
  return acc;
}

}  // namespace

double integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().weight();
}

double slice_integral(const ScalarField& f, int k) {
  double s = 0.0;
  for (double v : f.slice(k)) s += v;
  return s * f.grid().cell_volume();
}

double inner(const ScalarField& f, const ScalarField& g) {
  require(f.grid() == g.grid(), "inner: grid mismatch");
  double s = 0.0;
  auto a = f.values();
  auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * f.grid().weight();
}

double spatial_lp_norm(const PeriodicGrid& grid, std::span<const double> slice, double p) {
  check_exponent(p);
  const double acc = power_sum(slice, p);
  if (std::isinf(p)) return acc;
  const double s = acc * grid.cell_volume();
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

double lp_norm(const ScalarField& f, double p) {
  check_exponent(p);
  const double acc = power_sum(f.values(), p);
  if (std::isinf(p)) return acc;
  const double s = acc * f.grid().weight();
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

std::vector<double> slice_lp_norms(const ScalarField& f, double p) {
  std::vector<double> out(f.grid().n_t());
  for (int k = 0; k < f.grid().n_t(); ++k) out[k] = spatial_lp_norm(f.grid(), f.slice(k), p);
  return out;
}

double sup_time_lp_norm(const ScalarField& f, double p) {
  const auto s = slice_lp_norms(f, p);
  return *std::max_element(s.begin(), s.end());
}

// ---------------------------------------------------------------------------

void derivative_slice(const PeriodicGrid& grid, std::span<const double> in, std::span<double> out, int axis,
                      DerivativeScheme scheme) {
  require(axis >= 0 && axis < grid.dim(), "derivative: axis out of range");
  require(in.size() == grid.slice_size() && out.size() == grid.slice_size(), "derivative: slice size mismatch");
  if (scheme == DerivativeScheme::kSpectral) {
    auto spec = spectral::forward(grid, in);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t c = 0; c < spec.size(); ++c) {
      const auto k = spectral::wavevector(grid, c);
      if (std::abs(k[axis]) == grid.n() / 2) {
        spec[c] = 0.0;
      } else {
        spec[c] *= std::complex<double>(0.0, two_pi * k[axis]);
      }
    }
    spectral::inverse(grid, spec, out);
    return;
  }
  const double inv = 0.5 / grid.h();
  for (std::size_t i = 0; i < grid.slice_size(); ++i) {
    auto idx = grid.multi_index(i);
    auto plus = idx;
    auto minus = idx;
    ++plus[axis];
    --minus[axis];
    out[i] = (in[grid.flat_index(plus)] - in[grid.flat_index(minus)]) * inv;
  }
}

ScalarField derivative(const ScalarField& f, int axis, DerivativeScheme scheme) {
  ScalarField out(f.grid());
  for (int k = 0; k < f.grid().n_t(); ++k) derivative_slice(f.grid(), f.slice(k), out.slice(k), axis, scheme);
  return out;
}

ScalarField divergence(const VectorField& v, DerivativeScheme scheme) {
  ScalarField out(v.grid());
  for (int j = 0; j < v.dim(); ++j) out += derivative(v[j], j, scheme);
  return out;
}

VectorField gradient(const ScalarField& f, DerivativeScheme scheme) {
  std::vector<ScalarField> c;
  for (int j = 0; j < f.grid().dim(); ++j) c.push_back(derivative(f, j, scheme));
  return VectorField(std::move(c));
}

ScalarField time_derivative(const ScalarField& f) {
  const PeriodicGrid& g = f.grid();
  const int nt = g.n_t();
  if (nt < 3) fail(ErrorKind::kInvalidArgument, "time_derivative: needs at least 3 time slices");
  ScalarField out(g);
  const double inv = 0.5 / g.dt();
  for (std::size_t i = 0; i < g.slice_size(); ++i) {
    out(0, i) = (-3.0 * f(0, i) + 4.0 * f(1, i) - f(2, i)) * inv;
    for (int k = 1; k < nt - 1; ++k) out(k, i) = (f(k + 1, i) - f(k - 1, i)) * inv;
    out(nt - 1, i) = (3.0 * f(nt - 1, i) - 4.0 * f(nt - 2, i) + f(nt - 3, i)) * inv;
  }
  return out;
}

ScalarField cumulative_time_integral(const ScalarField& f) {
  const PeriodicGrid& g = f.grid();
  ScalarField out(g);
  const double half_dt = 0.5 * g.dt();
  for (int k = 1; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) out(k, i) = out(k - 1, i) + half_dt * (f(k - 1, i) + f(k, i));
  return out;
}

// ---------------------------------------------------------------------------

double wrap_unit(double x) noexcept {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

double periodic_delta(double a, double b) noexcept {
  double d = b - a;
  d -= std::floor(d + 0.5);
  return d;
}

namespace {

void lagrange_weights(double mu, double w[4]) {
  w[0] = -mu * (mu - 1.0) * (mu - 2.0) / 6.0;
  w[1] = (mu + 1.0) * (mu - 1.0) * (mu - 2.0) / 2.0;
  w[2] = -(mu + 1.0) * mu * (mu - 2.0) / 2.0;
  w[3] = (mu + 1.0) * mu * (mu - 1.0) / 6.0;
}

}  // namespace

SliceStencil::SliceStencil(const PeriodicGrid& grid, const Point& x) : dim_(grid.dim()), n_(grid.n()) {
  const int n = grid.n();
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  for (int a = 0; a < dim_; ++a) {
    const double s = wrap_unit(x[a]) * n - 0.5;
    const double fl = std::floor(s);
    const int base = static_cast<int>(fl);
    lagrange_weights(s - fl, weights_[a].data());
    for (int q = 0; q < 4; ++q) nodes_[a][q] = wrap(base - 1 + q);
  }
}

double SliceStencil::apply(std::span<const double> slice) const {
  if (dim_ == 1) {
    double v = 0.0;
    for (int q = 0; q < 4; ++q) v += weights_[0][q] * slice[nodes_[0][q]];
    return v;
  }
  double v = 0.0;
  for (int q = 0; q < 4; ++q) {
    const std::size_t row = static_cast<std::size_t>(nodes_[0][q]) * n_;
    double r = 0.0;
    for (int s = 0; s < 4; ++s) r += weights_[1][s] * slice[row + nodes_[1][s]];
    v += weights_[0][q] * r;
  }
  return v;
}

double interpolate_slice(const PeriodicGrid& grid, std::span<const double> slice, const Point& x) {
  return SliceStencil(grid, x).apply(slice);
}

double interpolate(const ScalarField& f, double t, const Point& x, InterpolationDiagnostics* diag) {
  const PeriodicGrid& g = f.grid();
  const double t_max = g.time(g.n_t() - 1);
  if (diag) ++diag->queries;
  if (t < 0.0 || t > t_max) {
    if (diag) ++diag->clamped;
    t = std::clamp(t, 0.0, t_max);
  }
  const double tau = t / g.dt();
  int k0 = std::min(static_cast<int>(std::floor(tau)), g.n_t() - 2);
  const double lam = tau - k0;
  const double v0 = interpolate_slice(g, f.slice(k0), x);
  if (lam == 0.0) return v0;
  const double v1 = interpolate_slice(g, f.slice(k0 + 1), x);
  return (1.0 - lam) * v0 + lam * v1;
}

}  // namespace tcur
