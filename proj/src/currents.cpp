#include "tcur/currents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcur/error.hpp"

namespace tcur {

Current1Diffuse::Current1Diffuse(ScalarField time_part, VectorField space_part)
    : f_t(std::move(time_part)), f_vec(std::move(space_part)) {
  require(f_t.grid() == f_vec.grid(), "Current1Diffuse: components on different grids");
}

Current1Diffuse Current1Diffuse::zeros(const PeriodicGrid& grid) {
  return Current1Diffuse(ScalarField(grid), VectorField::zeros(grid));
}

Current1Diffuse operator+(const Current1Diffuse& a, const Current1Diffuse& b) {
  return Current1Diffuse(a.f_t + b.f_t, a.f_vec + b.f_vec);
}

Current1Diffuse operator-(const Current1Diffuse& a, const Current1Diffuse& b) {
  return Current1Diffuse(a.f_t - b.f_t, a.f_vec - b.f_vec);
}

Current1Diffuse operator*(double s, const Current1Diffuse& a) {
  std::vector<ScalarField> v;
  for (int j = 0; j < a.dim(); ++j) v.push_back(s * a.f_vec[j]);
  return Current1Diffuse(s * a.f_t, VectorField(std::move(v)));
}

Current2Diffuse Current2Diffuse::zeros(const PeriodicGrid& grid) { return Current2Diffuse(VectorField::zeros(grid)); }

double BoundaryDistribution::mass() const {
  return lp_norm(interior, 1.0) + spatial_lp_norm(interior.grid(), initial_surface, 1.0);
}

OneForm::OneForm(ScalarField time_part, VectorField space_part) : tau(std::move(time_part)), xi(std::move(space_part)) {
  require(tau.grid() == xi.grid(), "OneForm: components on different grids");
}

TwoForm::TwoForm(const PeriodicGrid& grid) : axes_(grid.dim() + 1) {
  components_.assign(static_cast<std::size_t>(axes_ * (axes_ - 1) / 2), ScalarField(grid));
}

std::size_t TwoForm::index(int a, int b) const {
  require(0 <= a && a < b && b < axes_, "TwoForm: need 0 <= a < b <= d");
  // Row-major enumeration of the strict upper triangle.
  return static_cast<std::size_t>(a * (2 * axes_ - a - 1) / 2 + (b - a - 1));
}

// ---------------------------------------------------------------------------

double pair(const Current1Diffuse& T, const OneForm& w) {
  require(T.grid() == w.grid(), "pair: grid mismatch");
  double s = inner(T.f_t, w.tau);
  for (int j = 0; j < T.dim(); ++j) s += inner(T.f_vec[j], w.xi[j]);
  return s;
}

double pair(const Current2Diffuse& S, const TwoForm& beta) {
  require(S.grid() == beta.grid(), "pair: grid mismatch");
  double s = 0.0;
  for (int j = 0; j < S.F.dim(); ++j) s += inner(S.F[j], beta(0, j + 1));
  return s;
}

double pair(const BoundaryDistribution& g, const ScalarField& xi) {
  require(g.interior.grid() == xi.grid(), "pair: grid mismatch");
  double surface = 0.0;
  const auto xi0 = xi.slice(0);
  for (std::size_t i = 0; i < xi0.size(); ++i) surface += g.initial_surface[i] * xi0[i];
  return inner(g.interior, xi) + surface * xi.grid().cell_volume();
}

OneForm exterior_derivative(const ScalarField& xi, DerivativeScheme scheme) {
  return OneForm(time_derivative(xi), gradient(xi, scheme));
}

TwoForm exterior_derivative(const OneForm& w, DerivativeScheme scheme) {
  const PeriodicGrid& g = w.grid();
  TwoForm beta(g);
  for (int j = 0; j < g.dim(); ++j) beta(0, j + 1) = time_derivative(w.xi[j]) - derivative(w.tau, j, scheme);
  for (int i = 0; i < g.dim(); ++i)
    for (int j = i + 1; j < g.dim(); ++j)
      beta(i + 1, j + 1) = derivative(w.xi[j], i, scheme) - derivative(w.xi[i], j, scheme);
  return beta;
}

// ---------------------------------------------------------------------------

BoundaryDistribution boundary1(const Current1Diffuse& T, DerivativeScheme scheme) {
  ScalarField interior = -(time_derivative(T.f_t) + divergence(T.f_vec, scheme));
  std::vector<double> surface(T.f_t.slice(0).begin(), T.f_t.slice(0).end());
  for (double& v : surface) v = -v;
  return BoundaryDistribution{std::move(interior), std::move(surface)};
}

Current1Diffuse boundary2(const Current2Diffuse& S, DerivativeScheme scheme) {
  const PeriodicGrid& g = S.grid();
  double scale = 1.0;
  double initial = 0.0;
  for (int j = 0; j < S.F.dim(); ++j) {
    for (double v : S.F[j].values()) scale = std::max(scale, std::abs(v));
    for (double v : S.F[j].slice(0)) initial = std::max(initial, std::abs(v));
  }
  if (initial > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "boundary2: surface term (max |F_j(0,.)| = " << initial << ")";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  ScalarField ft(g);
  std::vector<ScalarField> fv;
  for (int j = 0; j < S.F.dim(); ++j) {
    ft += derivative(S.F[j], j, scheme);
    fv.push_back(-time_derivative(S.F[j]));
  }
  return Current1Diffuse(std::move(ft), VectorField(std::move(fv)));
}

Current2Diffuse primitive_two_current(const Current1Diffuse& T, const PrimitiveOptions& options) {
  if (options.check_boundary) {
    const double m = mass(T);
    const double bmass = boundary1(T, options.scheme).mass();
    if (bmass > options.boundary_tolerance * m) {
      std::ostringstream msg;
      msg << "primitive_two_current: boundary not null (boundary mass " << bmass << ", mass(T) " << m << ")";
      fail(ErrorKind::kInvalidArgument, msg.str());
    }
  }
  std::vector<ScalarField> F;
  for (int j = 0; j < T.dim(); ++j) F.push_back(-cumulative_time_integral(T.f_vec[j]));
  return Current2Diffuse(VectorField(std::move(F)));
}

double horizontal_mass(const Current1Diffuse& T) { return lp_norm(T.f_t, 1.0); }

double vertical_mass(const Current1Diffuse& T) {
  double m = 0.0;
  for (int j = 0; j < T.dim(); ++j) m += lp_norm(T.f_vec[j], 1.0);
  return m;
}

double mass(const Current1Diffuse& T) { return horizontal_mass(T) + vertical_mass(T); }

double mass2(const Current2Diffuse& S) {
  double m = 0.0;
  for (int j = 0; j < S.F.dim(); ++j) m += lp_norm(S.F[j], 1.0);
  return m;
}

std::pair<Current1Diffuse, Current1Diffuse> split(const Current1Diffuse& T) {
  return {Current1Diffuse(T.f_t, VectorField::zeros(T.grid())), Current1Diffuse(ScalarField(T.grid()), T.f_vec)};
}

double final_slice_mass(const Current1Diffuse& T) {
  const PeriodicGrid& g = T.grid();
  const int last = g.n_t() - 1;
  double m = spatial_lp_norm(g, T.f_t.slice(last), 1.0);
  for (int j = 0; j < T.dim(); ++j) m += spatial_lp_norm(g, T.f_vec[j].slice(last), 1.0);
  return m * g.dt();
}

Current1Diffuse horizontal_from_boundary(const BoundaryDistribution& g) {
  double scale = 1.0;
  for (double v : g.interior.values()) scale = std::max(scale, std::abs(v));
  double surface = 0.0;
  for (double v : g.initial_surface) surface = std::max(surface, std::abs(v));
  if (surface > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "horizontal_from_boundary: nonzero surface part (max " << surface << ")";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  return horizontal_from_boundary(g.interior);
}

Current1Diffuse horizontal_from_boundary(const ScalarField& interior) {
  return Current1Diffuse(-cumulative_time_integral(interior), VectorField::zeros(interior.grid()));
}

double flat_bound_constructive(const Current1Diffuse& T, const FlatDecomposition& decomposition,
                               DerivativeScheme scheme, double tolerance) {
  const Current1Diffuse residual = T - boundary2(decomposition.S, scheme) - decomposition.L;
  const double scale = std::max(mass(T), 1e-300);
  if (mass(residual) > tolerance * scale) {
    std::ostringstream msg;
    msg << "flat_bound_constructive: decomposition does not reproduce T (residual mass " << mass(residual) << ")";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  return mass2(decomposition.S) + mass(decomposition.L);
}

FlatDecomposition primitive_decomposition(const Current1Diffuse& T, DerivativeScheme scheme) {
  PrimitiveOptions opt;
  opt.check_boundary = false;
  opt.scheme = scheme;
  Current2Diffuse S = primitive_two_current(T, opt);
  Current1Diffuse L = T - boundary2(S, scheme);
  return FlatDecomposition{std::move(S), std::move(L)};
}

}  // namespace tcur
