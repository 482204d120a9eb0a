#include "tcur/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcur/error.hpp"

namespace tcur {

double bump_profile(const Point& y, int dim) {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += y[a] * y[a];
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

Point bump_profile_gradient(const Point& y, int dim) {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += y[a] * y[a];
  Point g{};
  if (r2 >= 1.0) return g;
  const double s = 1.0 - r2;
  const double eta = std::exp(-1.0 / s);
  for (int a = 0; a < dim; ++a) g[a] = -2.0 * y[a] / (s * s) * eta;
  return g;
}

double skewed_profile(const Point& y, int dim, double skew) { return (1.0 + skew * y[0]) * bump_profile(y, dim); }

Point skewed_profile_gradient(const Point& y, int dim, double skew) {
  Point g = bump_profile_gradient(y, dim);
  const double f = 1.0 + skew * y[0];
  for (int a = 0; a < dim; ++a) g[a] *= f;
  g[0] += skew * bump_profile(y, dim);
  return g;
}

MollifierKernel::MollifierKernel(const PeriodicGrid& grid, double delta, KernelProfile profile, std::string name)
    : grid_(grid), dim_(grid.dim()), n_(grid.n()), delta_(delta), name_(std::move(name)), profile_(std::move(profile)) {
  if (!(delta > 0.0) || delta >= 0.5) {
    std::ostringstream msg;
    msg << "MollifierKernel: delta must lie in (0, 1/2), got " << delta;
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  if (delta < 2.0 * grid.h() * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "MollifierKernel: kernel under-resolved (delta = " << delta << " < 2h = " << 2.0 * grid.h() << ")";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  const std::size_t N = grid.slice_size();
  weights_.assign(N, 0.0);
  double scale = 1.0;
  for (int a = 0; a < dim_; ++a) scale /= delta;
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const Point z = offset(i);
    Point y{};
    for (int a = 0; a < dim_; ++a) y[a] = z[a] / delta;
    const double v = scale * profile_(y);
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::kInvalidArgument, "MollifierKernel: profile must be finite and >= 0");
    weights_[i] = v;
    total += v;
  }
  raw_mass_ = total * grid.cell_volume();
  if (!(raw_mass_ > 0.0)) fail(ErrorKind::kInvalidArgument, "MollifierKernel: profile has zero discrete mass");
  for (double& w : weights_) w /= raw_mass_;
  multiplier_ = spectral::forward(grid, weights_);
  for (auto& c : multiplier_) c *= grid.cell_volume();
}

MollifierKernel MollifierKernel::bump(const PeriodicGrid& grid, double delta) {
  const int d = grid.dim();
  MollifierKernel k(grid, delta, [d](const Point& y) { return bump_profile(y, d); }, "bump");
  k.gradient_ = [d](const Point& y) { return bump_profile_gradient(y, d); };
  return k;
}

MollifierKernel MollifierKernel::skewed(const PeriodicGrid& grid, double delta, double skew) {
  require(std::abs(skew) < 1.0, "MollifierKernel: skew must satisfy |skew| < 1");
  const int d = grid.dim();
  MollifierKernel k(grid, delta, [d, skew](const Point& y) { return skewed_profile(y, d, skew); }, "skewed");
  k.gradient_ = [d, skew](const Point& y) { return skewed_profile_gradient(y, d, skew); };
  return k;
}

MollifierKernel MollifierKernel::from_profile(const PeriodicGrid& grid, double delta, KernelProfile profile,
                                              std::string name) {
  const int d = grid.dim();
  KernelProfile clipped = [d, p = std::move(profile)](const Point& y) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += y[a] * y[a];
    return r2 >= 1.0 ? 0.0 : p(y);
  };
  return MollifierKernel(grid, delta, std::move(clipped), std::move(name));
}

MollifierKernel MollifierKernel::from_table(const PeriodicGrid& grid, double delta, const std::vector<double>& radius,
                                            const std::vector<double>& value) {
  require(radius.size() == value.size() && radius.size() >= 2, "MollifierKernel: table needs >= 2 (radius, value) rows");
  for (std::size_t i = 1; i < radius.size(); ++i)
    require(radius[i] > radius[i - 1], "MollifierKernel: table radii must be increasing");
  require(radius.front() >= 0.0 && radius.back() <= 1.0, "MollifierKernel: table radii must lie in [0, 1]");
  const int d = grid.dim();
  KernelProfile p = [d, radius, value](const Point& y) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += y[a] * y[a];
    const double r = std::sqrt(r2);
    if (r >= radius.back() || r >= 1.0) return 0.0;
    if (r <= radius.front()) return value.front();
    const auto it = std::upper_bound(radius.begin(), radius.end(), r);
    const std::size_t hi = static_cast<std::size_t>(it - radius.begin());
    const double lam = (r - radius[hi - 1]) / (radius[hi] - radius[hi - 1]);
    return (1.0 - lam) * value[hi - 1] + lam * value[hi];
  };
  return MollifierKernel(grid, delta, std::move(p), "table");
}

Point MollifierKernel::offset(std::size_t i) const {
  const auto idx = grid_.multi_index(i);
  Point z{};
  for (int a = 0; a < dim_; ++a) {
    const int m = idx[a] < n_ / 2 ? idx[a] : idx[a] - n_;
    z[a] = m * grid_.h();
  }
  return z;
}

bool MollifierKernel::is_even() const {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    auto idx = grid_.multi_index(i);
    for (int a = 0; a < dim_; ++a) idx[a] = -idx[a];
    if (weights_[grid_.flat_index(idx)] != weights_[i]) return false;
  }
  return true;
}

namespace {

void check_kernel_grid(const PeriodicGrid& g, const MollifierKernel& k) {
  require(g.dim() == k.dim() && g.n() == k.n(), "mollify: kernel built for a different spatial grid");
}

}  // namespace

ScalarField mollify(const ScalarField& f, const MollifierKernel& k) {
  const PeriodicGrid& g = f.grid();
  check_kernel_grid(g, k);
  ScalarField out(g);
  const auto& mult = k.multiplier();
  for (int t = 0; t < g.n_t(); ++t) {
    auto spec = spectral::forward(g, f.slice(t));
    for (std::size_t c = 0; c < spec.size(); ++c) spec[c] *= mult[c];
    spectral::inverse(g, spec, out.slice(t));
  }
  return out;
}

VectorField mollify(const VectorField& v, const MollifierKernel& k) {
  std::vector<ScalarField> c;
  for (int j = 0; j < v.dim(); ++j) c.push_back(mollify(v[j], k));
  return VectorField(std::move(c));
}

std::vector<double> kernel_moment(const MollifierKernel& k, int order) {
  require(order == 0 || order == 1, "kernel_moment: order must be 0 or 1");
  const double vol = k.grid().cell_volume();
  const auto& w = k.weights();
  if (order == 0) {
    double s = 0.0;
    for (double v : w) s += v;
    return {s * vol};
  }
  std::vector<double> m(static_cast<std::size_t>(k.dim()), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Point z = k.offset(i);
    for (int a = 0; a < k.dim(); ++a) m[a] += w[i] * z[a];
  }
  for (double& v : m) v *= vol;
  return m;
}

Current1Diffuse regularized_current(const ScalarField& rho, const VectorField& u, const MollifierKernel& k) {
  require(rho.grid() == u.grid(), "regularized_current: grid mismatch");
  ScalarField rho_d = mollify(rho, k);
  VectorField u_d = mollify(u, k);
  VectorField flux = u_d * rho_d;
  return Current1Diffuse(std::move(rho_d), std::move(flux));
}

Current1Diffuse solution_current(const ScalarField& rho, const VectorField& u) {
  require(rho.grid() == u.grid(), "solution_current: grid mismatch");
  return Current1Diffuse(rho, u * rho);
}

}  // namespace tcur
