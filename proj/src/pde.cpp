#include "tcur/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "tcur/error.hpp"
#include "tcur/flow.hpp"

namespace tcur {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double negative_divergence_bound(const VectorField& u) {
  const PeriodicGrid& g = u.grid();
  const ScalarField div = divergence(u);
  double bound = 0.0;
  for (int k = 0; k < g.n_t(); ++k) {
    double worst = 0.0;
    for (double v : div.slice(k)) worst = std::max(worst, -v);
    bound += worst * g.dt();
  }
  return bound;
}

// Face velocity between cell i and its +1 neighbor along `axis`.
double face_velocity(const PeriodicGrid& g, std::span<const double> ua, std::size_t i, int axis) {
  auto idx = g.multi_index(i);
  idx[axis] += 1;
  return 0.5 * (ua[i] + ua[g.flat_index(idx)]);
}

ScalarField solve_finite_volume(const ContinuityProblem& prob, const ContinuityOptions& opt) {
  require(opt.fv_substeps >= 1, "solve_continuity: fv_substeps must be >= 1");
  const PeriodicGrid& g = prob.grid();
  const int d = g.dim();
  const std::size_t N = g.slice_size();
  const double step = g.dt() / opt.fv_substeps;
  const double limit = max_stable_step(prob.u);
  if (step > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "solve_continuity: CFL violation for the upwind scheme (step " << step << " > max admissible dt " << limit
        << ")";
    fail(ErrorKind::kNumerical, msg.str());
  }
  const double lam = step / g.h();

  ScalarField out(g);
  std::vector<double> rho(prob.rho0), next(N), flux(N);
  std::copy(rho.begin(), rho.end(), out.slice(0).begin());
  for (int k = 0; k + 1 < g.n_t(); ++k) {
    for (int s = 0; s < opt.fv_substeps; ++s) {
      next = rho;
      for (int a = 0; a < d; ++a) {
        const auto ua = prob.u[a].slice(k);
        for (std::size_t i = 0; i < N; ++i) {
          const double v = face_velocity(g, ua, i, a);
          auto up = g.multi_index(i);
          up[a] += 1;
          flux[i] = v > 0.0 ? v * rho[i] : v * rho[g.flat_index(up)];
        }
        for (std::size_t i = 0; i < N; ++i) {
          auto dn = g.multi_index(i);
          dn[a] -= 1;
          next[i] -= lam * (flux[i] - flux[g.flat_index(dn)]);
        }
      }
      rho.swap(next);
    }
    std::copy(rho.begin(), rho.end(), out.slice(k + 1).begin());
  }
  return out;
}

ScalarField solve_semi_lagrangian(const ContinuityProblem& prob, const ContinuityOptions& opt) {
  const FlowMap flow = compute_flow(prob.u, opt.substeps);
  const ScalarField rho0 = ScalarField::constant_in_time(prob.grid(), prob.rho0);
  return pushforward_density(SpaceTimeDiffeo::forward(flow), rho0);
}

}  // namespace

ContinuityProblem ContinuityProblem::make(VectorField u, std::vector<double> rho0, NormExponents exponents) {
  exponents.validate();
  const PeriodicGrid& g = u.grid();
  require(rho0.size() == g.slice_size(), "ContinuityProblem: rho0 must have n^d samples");
  for (double v : rho0)
    if (!std::isfinite(v)) fail(ErrorKind::kNumerical, "ContinuityProblem: non-finite rho0");
  for (int a = 0; a < u.dim(); ++a) u[a].check_finite();
  const double bound = negative_divergence_bound(u);
  return ContinuityProblem{std::move(u), std::move(rho0), exponents, bound};
}

double max_stable_step(const VectorField& u) {
  const PeriodicGrid& g = u.grid();
  double rate = 0.0;
  for (int a = 0; a < u.dim(); ++a) {
    double pos = 0.0, neg = 0.0;
    for (int k = 0; k < g.n_t(); ++k) {
      const auto ua = u[a].slice(k);
      for (std::size_t i = 0; i < g.slice_size(); ++i) {
        const double v = face_velocity(g, ua, i, a);
        pos = std::max(pos, v);
        neg = std::max(neg, -v);
      }
    }
    rate += (pos + neg) / g.h();
  }
  return rate > 0.0 ? 1.0 / rate : kInfinity;
}

ScalarField solve_continuity(const ContinuityProblem& problem, ContinuityScheme scheme, const ContinuityOptions& options) {
  return scheme == ContinuityScheme::kSemiLagrangian ? solve_semi_lagrangian(problem, options)
                                                     : solve_finite_volume(problem, options);
}

double weak_residual(const ScalarField& rho, const ContinuityProblem& prob, int n_forms, std::uint64_t seed) {
  require(rho.grid() == prob.grid(), "weak_residual: grid mismatch");
  require(n_forms >= 1, "weak_residual: n_forms must be >= 1");
  const PeriodicGrid& g = rho.grid();
  const int d = g.dim();
  const std::size_t N = g.slice_size();
  const double t_end = 0.9;
  std::vector<double> tw(static_cast<std::size_t>(g.n_t()), g.dt());
  const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int k = 0; k < std::min(3, g.n_t()); ++k) tw[k] *= ends[k];

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int f = 0; f < n_forms; ++f) {
    struct Mode {
      int k1, k2;
      double c, s;
    };
    std::vector<Mode> modes;
    const int kmax = 2;
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      for (int k2 = (d == 2 ? -kmax : 0); k2 <= (d == 2 ? kmax : 0); ++k2) modes.push_back({k1, k2, U(rng), U(rng)});
    const double slope = U(rng);
    auto phi = [&](const Point& x, Point& grad) {
      double v = 0.0;
      grad = {};
      for (const Mode& m : modes) {
        const double ph = kTwoPi * (m.k1 * x[0] + (d == 2 ? m.k2 * x[1] : 0.0));
        const double c = std::cos(ph), s = std::sin(ph);
        v += m.c * c + m.s * s;
        const double dv = kTwoPi * (-m.c * s + m.s * c);
        grad[0] += dv * m.k1;
        if (d == 2) grad[1] += dv * m.k2;
      }
      return v;
    };
    // chi(t) = (1 - t / t_end)^4 (1 + slope t) on [0, t_end), zero after: C^3.
    auto envelope = [&](double t, double& deriv) {
      if (t >= t_end) {
        deriv = 0.0;
        return 0.0;
      }
      const double s = 1.0 - t / t_end;
      deriv = -4.0 * s * s * s / t_end * (1.0 + slope * t) + s * s * s * s * slope;
      return s * s * s * s * (1.0 + slope * t);
    };

    double total = 0.0, c0 = 0.0, c1t = 0.0, c1x = 0.0;
    for (int k = 0; k < g.n_t(); ++k) {
      double chi_t = 0.0;
      const double chi = envelope(g.time(k), chi_t);
      const auto r = rho.slice(k);
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        Point grad{};
        const double p = phi(g.center(i), grad);
        double adv = 0.0;
        double gn = 0.0;
        for (int a = 0; a < d; ++a) {
          adv += prob.u[a].slice(k)[i] * grad[a];
          gn = std::max(gn, std::abs(chi * grad[a]));
        }
        acc += r[i] * (chi_t * p + chi * adv);
        if (k == 0) total += g.cell_volume() * p * chi * prob.rho0[i];
        c0 = std::max(c0, std::abs(chi * p));
        c1t = std::max(c1t, std::abs(chi_t * p));
        c1x = std::max(c1x, gn);
      }
      total += tw[k] * g.cell_volume() * acc;
    }
    const double norm = c0 + c1t + c1x;
    if (norm > 0.0) worst = std::max(worst, std::abs(total) / norm);
  }
  return worst;
}

RoughField rough_field(const RoughFieldSpec& spec, const PeriodicGrid& grid) {
  require(spec.mode_cap >= 1, "rough_field: mode_cap must be >= 1");
  require(spec.mode_cap <= grid.n() / 2 - 1, "rough_field: mode_cap must stay below the Nyquist mode");
  require(spec.p >= 1.0, "rough_field: p must be >= 1");
  require(spec.amplitude >= 0.0, "rough_field: amplitude must be >= 0");
  const int d = grid.dim();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<ScalarField> comps;
  for (int a = 0; a < d; ++a) {
    struct Mode {
      int k1, k2;
      double mag, ph;
    };
    // Sine modes in phase at a seeded point x0: independent random phases would
    // keep the Lipschitz seminorm bounded (up to logarithms) for alpha > 1 + d/2.
    const Point x0{unit(rng), d == 2 ? unit(rng) : 0.0};
    std::vector<Mode> modes;
    double total = 0.0;
    const int cap = spec.mode_cap;
    for (int k1 = (d == 2 ? -cap : 1); k1 <= cap; ++k1)
      for (int k2 = 0; k2 <= (d == 2 ? cap : 0); ++k2) {
        // Half-plane of wavevectors so each real mode appears once.
        if (d == 2 && (k2 == 0 && k1 <= 0)) continue;
        const int linf = std::max(std::abs(k1), std::abs(k2));
        if (linf < 1) continue;
        const double klen = std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
        const double mag = std::pow(klen, -spec.decay_alpha);
        const double ph = -kTwoPi * (k1 * x0[0] + k2 * x0[1]) - 0.5 * std::numbers::pi;
        modes.push_back({k1, k2, mag, ph});
        total += mag;
      }
    const double scale = spec.amplitude / total;
    std::vector<double> slice(grid.slice_size(), 0.0);
    for (std::size_t i = 0; i < slice.size(); ++i) {
      const Point x = grid.center(i);
      double v = a == 0 ? spec.mean : 0.0;
      for (const Mode& m : modes) v += scale * m.mag * std::cos(kTwoPi * (m.k1 * x[0] + (d == 2 ? m.k2 * x[1] : 0.0)) + m.ph);
      slice[i] = v;
    }
    comps.push_back(ScalarField::constant_in_time(grid, slice));
  }

  RoughField out{VectorField(std::move(comps)), 0.0, 0.0, 0.0, 0.0, false, {}};
  const VectorField& u = out.u;
  const std::size_t N = grid.slice_size();
  for (int a = 0; a < d; ++a) {
    const auto ua = u[a].slice(0);
    for (double v : ua) out.sup_norm = std::max(out.sup_norm, std::abs(v));
    const VectorField gu = gradient(u[a]);
    for (int b = 0; b < d; ++b) out.sobolev_seminorm += spatial_lp_norm(grid, gu[b].slice(0), spec.p);
    for (std::size_t i = 0; i < N; ++i)
      for (int b = 0; b < d; ++b) {
        auto nb = grid.multi_index(i);
        nb[b] += 1;
        out.lipschitz_seminorm = std::max(out.lipschitz_seminorm, std::abs(ua[grid.flat_index(nb)] - ua[i]) / grid.h());
      }
  }
  out.divergence_bound = negative_divergence_bound(u);
  // Square-summability of |k|^{1 - alpha} over Z^d; sufficient for p <= 2.
  const double critical = 1.0 + 0.5 * d;
  if (spec.decay_alpha <= critical) {
    out.warning = true;
    std::ostringstream msg;
    msg << "rough_field: decay_alpha " << spec.decay_alpha << " <= " << critical
        << ", W^{1,p} seminorm not uniformly bounded in mode_cap (measured " << out.sobolev_seminorm << ")";
    out.message = msg.str();
  }
  return out;
}

}  // namespace tcur
