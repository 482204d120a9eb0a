#include "tcur/commutator.hpp"

#include <cmath>
#include <sstream>

#include "tcur/error.hpp"

namespace tcur {
namespace {

ScalarField dot(const VectorField& a, const VectorField& b) {
  ScalarField s = a[0] * b[0];
  for (int j = 1; j < a.dim(); ++j) s += a[j] * b[j];
  return s;
}

void check_inputs(const VectorField& u, const ScalarField& rho) {
  require(u.grid() == rho.grid(), "commutator: u and rho on different grids");
}

MollifierKernel make_kernel(const PeriodicGrid& g, double delta, const SweepOptions& o) {
  if (o.kernel == "bump") return MollifierKernel::bump(g, delta);
  if (o.kernel == "skewed") return MollifierKernel::skewed(g, delta, o.skew);
  fail(ErrorKind::kInvalidArgument, "commutator_sweep: unknown kernel '" + o.kernel + "'");
}

// Lattice sum out(x_i) = sum_z h^d w(z) f(x_i - z) over the nonzero weights.
template <class Op>
void lattice_sum(const PeriodicGrid& g, const std::vector<double>& w, Op&& op) {
  const std::size_t N = g.slice_size();
  for (std::size_t j = 0; j < N; ++j) {
    if (w[j] == 0.0) continue;
    const auto zj = g.multi_index(j);
    for (std::size_t i = 0; i < N; ++i) {
      auto xi = g.multi_index(i);
      for (int a = 0; a < g.dim(); ++a) xi[a] -= zj[a];
      op(i, j, g.flat_index(xi));
    }
  }
}

}  // namespace

ScalarField commutator(const VectorField& u, const ScalarField& rho, const MollifierKernel& k, DerivativeScheme scheme) {
  check_inputs(u, rho);
  const ScalarField lhs = mollify(divergence(u * rho, scheme), k);
  const VectorField flux = mollify(u, k) * mollify(rho, k);
  return lhs - divergence(flux, scheme);
}

CommutatorTerms decompose_commutator(const VectorField& u, const ScalarField& rho, const MollifierKernel& k,
                                     DerivativeScheme scheme) {
  check_inputs(u, rho);
  const ScalarField rho_d = mollify(rho, k);
  const VectorField u_d = mollify(u, k);
  const VectorField grad_rho_d = gradient(rho_d, scheme);
  const ScalarField transport = mollify(dot(u, gradient(rho, scheme)), k);
  ScalarField t1 = mollify(divergence(u, scheme) * rho, k) - divergence(u_d, scheme) * rho_d;
  ScalarField t2 = transport - dot(u_d, grad_rho_d);
  ScalarField t3 = transport - dot(u, grad_rho_d);
  ScalarField t4 = dot(u - u_d, grad_rho_d);
  return CommutatorTerms{std::move(t1), std::move(t2), std::move(t3), std::move(t4)};
}

ScalarField convolve_direct(const ScalarField& f, const MollifierKernel& k) {
  const PeriodicGrid& g = f.grid();
  require(g.dim() == k.dim() && g.n() == k.n(), "convolve_direct: kernel built for a different spatial grid");
  const double vol = g.cell_volume();
  const auto& w = k.weights();
  ScalarField out(g);
  for (int t = 0; t < g.n_t(); ++t) {
    const auto src = f.slice(t);
    auto dst = out.slice(t);
    lattice_sum(g, w, [&](std::size_t i, std::size_t j, std::size_t src_i) { dst[i] += vol * w[j] * src[src_i]; });
  }
  return out;
}

ProductForm product_form(const VectorField& u, const ScalarField& rho, const MollifierKernel& k) {
  check_inputs(u, rho);
  require(static_cast<bool>(k.profile_gradient()), "product_form: kernel has no analytic profile gradient");
  const PeriodicGrid& g = rho.grid();
  require(g.dim() == k.dim() && g.n() == k.n(), "product_form: kernel built for a different spatial grid");
  const int d = g.dim();
  const double delta = k.delta();
  const double vol = g.cell_volume();
  const auto& w = k.weights();

  // Gradient weights of the normalized kernel: delta^{-d} grad eta(z / delta) / raw_mass.
  double scale = 1.0 / k.raw_mass();
  for (int a = 0; a < d; ++a) scale /= delta;
  std::vector<std::vector<double>> gw(static_cast<std::size_t>(d), std::vector<double>(w.size(), 0.0));
  std::vector<double> support(w.size(), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const Point z = k.offset(j);
    Point y{};
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      y[a] = z[a] / delta;
      r2 += y[a] * y[a];
    }
    if (r2 >= 1.0) continue;
    support[j] = 1.0;
    const Point gr = k.profile_gradient()(y);
    for (int a = 0; a < d; ++a) gw[a][j] = scale * gr[a];
  }

  VectorField A = VectorField::zeros(g);
  VectorField B = VectorField::zeros(g);
  for (int t = 0; t < g.n_t(); ++t) {
    const auto r = rho.slice(t);
    lattice_sum(g, support, [&](std::size_t i, std::size_t j, std::size_t src) {
      for (int a = 0; a < d; ++a) {
        const auto ua = u[a].slice(t);
        A[a].slice(t)[i] += vol * w[j] * (ua[i] - ua[src]) / delta;
        B[a].slice(t)[i] += vol * gw[a][j] * r[src];
      }
    });
  }
  ScalarField prod = dot(A, B);
  ScalarField mag(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double na = 0.0, nb = 0.0;
    for (int a = 0; a < d; ++a) {
      na += A[a].values()[i] * A[a].values()[i];
      nb += B[a].values()[i] * B[a].values()[i];
    }
    mag.values()[i] = std::sqrt(na) * std::sqrt(nb);
  }
  const double bound = lp_norm(mag, 1.0);
  return ProductForm{std::move(A), std::move(B), std::move(prod), bound};
}

RateFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_log_log: need at least two aligned points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "fit_log_log: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::log(y[i]) - (icpt + fit.slope * std::log(x[i]));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

CommutatorReport commutator_sweep(const VectorField& u_in, const ScalarField& rho_in, const std::vector<double>& deltas,
                                  const SweepOptions& options) {
  check_inputs(u_in, rho_in);
  require(!deltas.empty(), "commutator_sweep: empty delta list");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) fail(ErrorKind::kInvalidArgument, "commutator_sweep: delta list must be strictly decreasing");
  const PeriodicGrid& g = rho_in.grid();

  VectorField u = u_in;
  ScalarField rho = rho_in;
  if (options.presmooth_cells > 0) {
    require(options.presmooth_cells >= 2, "commutator_sweep: presmooth_cells must be >= 2");
    const MollifierKernel pre = MollifierKernel::bump(g, options.presmooth_cells * g.h());
    u = mollify(u_in, pre);
    rho = mollify(rho_in, pre);
  }

  CommutatorReport rep;
  for (double delta : deltas) {
    const MollifierKernel k = make_kernel(g, delta, options);
    const ScalarField r = commutator(u, rho, k, options.scheme);
    const CommutatorTerms terms = decompose_commutator(u, rho, k, options.scheme);
    const VectorField uq = u - mollify(u, k);
    double dq = 0.0;
    for (int j = 0; j < g.dim(); ++j) dq += lp_norm(uq[j], 1.0) / delta;
    rep.delta_values.push_back(delta);
    rep.l1_norms.push_back(lp_norm(r, 1.0));
    rep.term_norms.push_back({lp_norm(terms.t1, 1.0), lp_norm(terms.t2, 1.0), lp_norm(terms.t3, 1.0), lp_norm(terms.t4, 1.0)});
    rep.difference_quotient_norms.push_back(dq);
  }
  double u_sup = 0.0;
  for (int j = 0; j < g.dim(); ++j)
    for (double v : u[j].values()) u_sup = std::max(u_sup, std::abs(v));
  rep.roundoff_floor = 1e-12 * std::max(1.0, u_sup * lp_norm(rho, 1.0) / g.h());
  rep.vanishing = true;
  for (double v : rep.l1_norms)
    if (v > rep.roundoff_floor) rep.vanishing = false;
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.l1_norms.size(); ++i)
    if (!(rep.l1_norms[i] < rep.l1_norms[i - 1])) rep.monotone = false;
  rep.rate_defined = rep.l1_norms.size() >= 2;
  for (double v : rep.l1_norms)
    if (!(v > rep.roundoff_floor)) rep.rate_defined = false;
  if (rep.rate_defined) {
    const RateFit fit = fit_log_log(rep.delta_values, rep.l1_norms);
    rep.fitted_rate = fit.slope;
    rep.fit_residual = fit.residual;
  } else {
    rep.monotone = false;
  }
  return rep;
}

}  // namespace tcur
