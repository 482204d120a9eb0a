#include "tcur/uniqueness.hpp"

#include <cmath>
#include <limits>

#include "tcur/error.hpp"
#include "tcur/flow.hpp"

namespace tcur {
namespace {

MollifierKernel make_kernel(const PeriodicGrid& g, double delta, const std::string& name) {
  if (name == "bump") return MollifierKernel::bump(g, delta);
  if (name == "skewed") return MollifierKernel::skewed(g, delta);
  fail(ErrorKind::kInvalidArgument, "uniqueness_bounds: unknown kernel '" + name + "'");
}

}  // namespace

UniquenessResult uniqueness_bounds(const ScalarField& rho_a, const ScalarField& rho_b, const VectorField& u,
                                   const std::vector<double>& deltas, const UniquenessOptions& options) {
  require(rho_a.grid() == rho_b.grid() && rho_a.grid() == u.grid(), "uniqueness_bounds: grid mismatch");
  require(!deltas.empty(), "uniqueness_bounds: empty delta list");
  const PeriodicGrid& g = u.grid();
  {
    const auto a0 = rho_a.slice(0), b0 = rho_b.slice(0);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a0.size(); ++i) {
      worst = std::max(worst, std::abs(a0[i] - b0[i]));
      scale = std::max(scale, std::abs(a0[i]));
    }
    if (worst > 1e-12 * std::max(1.0, scale))
      fail(ErrorKind::kInvalidArgument, "uniqueness_bounds: the two solutions disagree on the initial datum");
  }

  const ScalarField rho_d = rho_a - rho_b;
  const Current1Diffuse D = solution_current(rho_d, u);
  UniquenessResult res;
  res.mass_difference = mass(D);
  res.boundary_mass = boundary1(D).mass();
  res.min_total = std::numeric_limits<double>::infinity();

  for (double delta : deltas) {
    const MollifierKernel k = make_kernel(g, delta, options.kernel);
    const Current1Diffuse D_delta = regularized_current(rho_d, u, k);
    const BoundaryDistribution r = boundary1(D_delta);
    const Current1Diffuse R = horizontal_from_boundary(r.interior);

    UniquenessRow row;
    row.delta = delta;
    const Current1Diffuse piece = D - D_delta + R;
    row.vertical_mass = vertical_mass(piece);
    row.bound1 = flat_bound_constructive(piece, primitive_decomposition(piece));

    const FlowMap flow = compute_flow(mollify(u, k), options.flow_substeps);
    const ScalarField r_tilde = pushforward_density(SpaceTimeDiffeo::inverse(flow), r.interior);
    const double r_norm = lp_norm(r.interior, 1.0);
    row.bound3 = r_norm;
    row.transport_mass_error = r_norm > 0.0 ? lp_norm(r_tilde, 1.0) / r_norm - 1.0 : 0.0;
    const Current1Diffuse P = horizontal_from_boundary(r_tilde);
    const Current1Diffuse pushed = pushforward_current(SpaceTimeDiffeo::forward(flow), P);
    row.straightening_residual = mass(D_delta - pushed);
    row.bound2 = mass(pushed) + row.straightening_residual;

    row.total = row.bound1 + row.bound2 + row.bound3;
    if (!std::isfinite(row.total)) fail(ErrorKind::kNumerical, "uniqueness_bounds: non-finite bound");
    if (row.total < res.min_total) {
      res.min_total = row.total;
      res.argmin_delta = delta;
    }
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace tcur
