#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "tcur/error.hpp"
#include "tcur/flow.hpp"
#include "tcur/mollify.hpp"

using namespace tcur;
using namespace tcur::testing;

namespace {

VectorField sine_velocity(const PeriodicGrid& g, double amp = 1.0) {
  return VectorField({ScalarField::from_function(g, [amp](double, const Point& x) { return amp * std::sin(kTwoPi * x[0]); })});
}

VectorField constant_velocity(const PeriodicGrid& g, double c) {
  std::vector<ScalarField> comps;
  for (int j = 0; j < g.dim(); ++j) comps.push_back(ScalarField::from_function(g, [c](double, const Point&) { return c; }));
  return VectorField(std::move(comps));
}

// Smooth, time-dependent, nowhere-degenerate velocity for the duality checks.
VectorField wavy_velocity(const PeriodicGrid& g) {
  return VectorField({ScalarField::from_function(g, [](double t, const Point& x) {
    return 0.4 + 0.2 * std::sin(kTwoPi * x[0]) * (1.0 + 0.5 * t) + 0.05 * std::cos(2.0 * kTwoPi * x[0]);
  })});
}

}  // namespace

TEST_CASE("zero velocity gives the identity flow") {
  const PeriodicGrid g(1, 16, 8);
  const FlowMap f = compute_flow(VectorField::zeros(g));
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      CHECK(f.position(k, i)[0] == g.center(i)[0]);
      CHECK(f.jacobian(k, i)[0] == 1.0);
      CHECK(f.determinant(k, i) == 1.0);
      CHECK(f.inverse_position(k, i)[0] == g.center(i)[0]);
    }
}

TEST_CASE("constant velocity translates") {
  const PeriodicGrid g(2, 8, 8);
  const FlowMap f = compute_flow(constant_velocity(g, 0.3));
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      const Point p = f.position(k, i);
      for (int a = 0; a < 2; ++a) CHECK(p[a] == doctest::Approx(g.center(i)[a] + 0.3 * g.time(k)).epsilon(1e-14));
      CHECK(f.determinant(k, i) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("time zero is exactly the identity") {
  const PeriodicGrid g(1, 32, 16);
  const FlowMap f = compute_flow(wavy_velocity(g));
  for (std::size_t i = 0; i < g.slice_size(); ++i) {
    CHECK(f.position(0, i)[0] == g.center(i)[0]);
    CHECK(f.jacobian(0, i)[0] == 1.0);
  }
}

TEST_CASE("sine flow matches a ten times finer integration and the Liouville formula") {
  const PeriodicGrid g(1, 256, 256);
  const VectorField u = sine_velocity(g);
  const FlowMap coarse = compute_flow(u, 4);
  const FlowMap fine = compute_flow(u, 40);
  double pos_err = 0.0, det_err = 0.0;
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      pos_err = std::max(pos_err, std::abs(coarse.position(k, i)[0] - fine.position(k, i)[0]));
      det_err = std::max(det_err, std::abs(coarse.determinant(k, i) - fine.determinant(k, i)));
    }
  CHECK(pos_err <= 1e-8);
  CHECK(det_err <= 1e-8);

  // Independent oracle: log det = int_0^t u'(Phi(s)) ds with the analytic u, fine RK4.
  double liouville_err = 0.0;
  for (std::size_t i = 0; i < g.slice_size(); i += 7) {
    double x = g.center(i)[0], L = 0.0;
    const int steps_per = 400;
    const double hs = g.dt() / steps_per;
    auto fx = [](double y) { return std::sin(kTwoPi * y); };
    auto fl = [](double y) { return kTwoPi * std::cos(kTwoPi * y); };
    for (int k = 1; k < g.n_t(); ++k) {
      for (int s = 0; s < steps_per; ++s) {
        const double k1 = fx(x), l1 = fl(x);
        const double k2 = fx(x + 0.5 * hs * k1), l2 = fl(x + 0.5 * hs * k1);
        const double k3 = fx(x + 0.5 * hs * k2), l3 = fl(x + 0.5 * hs * k2);
        const double k4 = fx(x + hs * k3), l4 = fl(x + hs * k3);
        x += hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        L += hs / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
      }
      liouville_err = std::max(liouville_err, std::abs(coarse.determinant(k, i) - std::exp(L)) / std::exp(L));
    }
  }
  CHECK(liouville_err <= 1e-6);
}

TEST_CASE("group property: one pass equals restart composition") {
  const PeriodicGrid g(1, 64, 32);
  const VectorField u = wavy_velocity(g);
  const FlowMap f = compute_flow(u);
  double err = 0.0;
  const int ks = 9, kt = 20;
  for (std::size_t i = 0; i < g.slice_size(); ++i) {
    const TrajectoryState mid = integrate_trajectory(u, 0.0, g.time(ks), g.center(i));
    const TrajectoryState end = integrate_trajectory(u, g.time(ks), g.time(ks + kt), mid.x);
    err = std::max(err, std::abs(end.x[0] - f.position(ks + kt, i)[0]));
  }
  CHECK(err <= 1e-7);
}

TEST_CASE("inverse consistency and Jacobian identity") {
  const PeriodicGrid g(1, 128, 64);
  const VectorField u = wavy_velocity(g);
  const FlowMap f = compute_flow(u);
  double err = 0.0;
  for (int k = 0; k < g.n_t(); k += 9)
    for (std::size_t i = 0; i < g.slice_size(); i += 5) {
      const TrajectoryState back = integrate_trajectory(u, g.time(k), 0.0, f.position(k, i));
      err = std::max(err, std::abs(periodic_delta(back.x[0], g.center(i)[0])));
    }
  CHECK(err <= 1e-6);
  CHECK(jacobian_identity_error(f, InverseSampling::kRetraced) <= 1e-8);
  // Resampling the stored inverse adds cubic interpolation error.
  CHECK(jacobian_identity_error(f) <= 1e-3);
}

TEST_CASE("autonomous shortcut agrees with general backward integration") {
  const PeriodicGrid g(1, 32, 16);
  const VectorField u = sine_velocity(g, 0.5);
  FlowOptions a, b;
  b.autonomous_shortcut = false;
  const FlowMap fa = compute_flow(u, a);
  const FlowMap fb = compute_flow(u, b);
  CHECK(max_abs_diff(fa.inverse_positions[0], fb.inverse_positions[0]) <= 1e-13);
  CHECK(max_abs_diff(fa.inverse_determinants, fb.inverse_determinants) <= 1e-12);
}

TEST_CASE("divergence-free velocity preserves volume") {
  const PeriodicGrid g(2, 32, 16);
  const VectorField u({ScalarField::from_function(g, [](double, const Point& x) { return 0.3 * std::sin(kTwoPi * x[1]); }),
                       ScalarField::from_function(g, [](double, const Point& x) { return 0.2 * std::cos(kTwoPi * x[0]); })});
  const FlowMap f = compute_flow(u);
  CHECK(max_abs_diff(f.determinants, ScalarField::from_function(g, [](double, const Point&) { return 1.0; })) <= 1e-8);
}

TEST_CASE("variational and finite-difference Jacobians agree") {
  std::vector<double> err;
  for (int n : {32, 64}) {
    const PeriodicGrid g(2, n, 16);
    std::mt19937_64 rng(3);
    const VectorField u = random_smooth_vector(g, rng, 1, 0.5, false);
    const FlowMap f = compute_flow(u);
    const auto fd = jacobian_by_differences(f);
    double e = 0.0;
    for (int c = 0; c < 4; ++c) e = std::max(e, max_abs_diff(fd[c], f.jacobians[c]));
    err.push_back(e);
  }
  CHECK(err[1] < 0.1 * err[0]);
  CHECK(err[1] <= 1e-4);
}

TEST_CASE("orientation loss is reported") {
  const PeriodicGrid g(1, 16, 8);
  const VectorField u = sine_velocity(g, 40.0);
  bool raised = false;
  try {
    compute_flow(u, 1);
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::kNumerical && std::string(e.what()).find("flow inversion lost") != std::string::npos;
  }
  CHECK(raised);
}

TEST_CASE("density push-forward: identity, translation and mass") {
  std::mt19937_64 rng(5);
  {
    const PeriodicGrid g(1, 16, 8);
    const ScalarField rho = random_smooth(g, rng);
    const FlowMap f = compute_flow(VectorField::zeros(g));
    CHECK(max_abs_diff(pushforward_density(SpaceTimeDiffeo::forward(f), rho), rho) == 0.0);
  }
  {
    // c * dt = h: each slice shifts by exactly k cells.
    const PeriodicGrid g(1, 16, 16);
    const ScalarField rho = random_smooth(g, rng);
    const FlowMap f = compute_flow(constant_velocity(g, 1.0));
    const ScalarField out = pushforward_density(SpaceTimeDiffeo::forward(f), rho);
    for (int k = 0; k < g.n_t(); ++k) {
      for (std::size_t i = 0; i < g.slice_size(); ++i)
        CHECK(out.slice(k)[i] == doctest::Approx(rho.slice(k)[(i + 16 - k) % 16]).epsilon(1e-12));
      CHECK(spatial_lp_norm(g, out.slice(k), 1.0) == doctest::Approx(spatial_lp_norm(g, rho.slice(k), 1.0)).epsilon(1e-12));
    }
  }
  {
    const PeriodicGrid g(1, 256, 16);
    const ScalarField rho = ScalarField::from_function(g, [](double, const Point& x) { return 1.0 + 0.5 * std::cos(kTwoPi * x[0]); });
    const FlowMap f = compute_flow(sine_velocity(g, 0.5));
    const ScalarField out = pushforward_density(SpaceTimeDiffeo::forward(f), rho);
    const int k = g.n_t() / 2;
    CHECK(std::abs(spatial_lp_norm(g, out.slice(k), 1.0) / spatial_lp_norm(g, rho.slice(k), 1.0) - 1.0) <= 1e-3);
  }
}

TEST_CASE("current push-forward: identity and straightening of T_delta") {
  std::mt19937_64 rng(7);
  const PeriodicGrid g(1, 64, 32);
  const Current1Diffuse T = random_current(g, rng);
  const FlowMap id = compute_flow(VectorField::zeros(g));
  const Current1Diffuse same = pushforward_current(SpaceTimeDiffeo::forward(id), T);
  CHECK(max_abs_diff(same.f_t, T.f_t) == 0.0);
  CHECK(max_abs_diff(same.f_vec[0], T.f_vec[0]) == 0.0);

  const PeriodicGrid g2(1, 256, 64);
  const VectorField u = wavy_velocity(g2);
  const ScalarField rho = ScalarField::from_function(g2, [](double t, const Point& x) { return 1.0 + 0.4 * std::cos(kTwoPi * (x[0] - 0.4 * t)); });
  const auto k = MollifierKernel::bump(g2, 0.1);
  const Current1Diffuse Td = regularized_current(rho, u, k);
  const FlowMap f = compute_flow(mollify(u, k));
  const Straightening s = straighten(Td, f);
  CHECK(s.defect <= 1e-3 * mass(Td));
}

TEST_CASE("u = 0 and constant u straighten exactly") {
  std::mt19937_64 rng(8);
  const PeriodicGrid g(1, 32, 32);
  const ScalarField rho = random_smooth(g, rng);
  const auto k = MollifierKernel::bump(g, 0.2);
  {
    const VectorField u = VectorField::zeros(g);
    const Current1Diffuse Td = regularized_current(rho, u, k);
    const Straightening s = straighten(Td, compute_flow(mollify(u, k)));
    CHECK(s.defect <= 1e-12);
    CHECK(max_abs_diff(s.straightened.f_t, Td.f_t) == 0.0);
  }
  {
    const VectorField u = constant_velocity(g, 0.7);
    const Current1Diffuse Td = regularized_current(rho, u, k);
    const Straightening s = straighten(Td, compute_flow(mollify(u, k)));
    CHECK(s.defect <= 1e-10);
  }
}

TEST_CASE("push-forward duality against random forms") {
  std::mt19937_64 rng(11);
  const PeriodicGrid g(1, 128, 64);
  const FlowMap f = compute_flow(wavy_velocity(g));
  const Current1Diffuse T = random_current(g, rng);
  for (const SpaceTimeDiffeo F : {SpaceTimeDiffeo::forward(f), SpaceTimeDiffeo::inverse(f)}) {
    const Current1Diffuse pushed = pushforward_current(F, T);
    for (int r = 0; r < 20; ++r) {
      const OneForm w = random_form(g, rng);
      const double lhs = pair(pushed, w);
      const double rhs = pair(T, pullback_form(F, w));
      CHECK(std::abs(lhs - rhs) <= 1e-4 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("pull-back commutes with the exterior derivative") {
  std::mt19937_64 rng(13);
  // Spatial block: no time differencing, so the error is cubic resampling
  // amplified by one spectral derivative, O(h^3).
  {
    std::vector<double> err, hs;
    for (int n : {64, 128, 256}) {
      const PeriodicGrid g(2, n, 8);
      std::mt19937_64 r1(13);
      const FlowMap f = compute_flow(random_smooth_vector(g, r1, 1, 0.3, false));
      const OneForm w = random_form(g, r1, 2);
      const SpaceTimeDiffeo F = SpaceTimeDiffeo::forward(f);
      const TwoForm lhs = exterior_derivative(pullback_form(F, w));
      const TwoForm rhs = pullback_form(F, exterior_derivative(w));
      err.push_back(lp_norm(lhs(1, 2) - rhs(1, 2), 1.0));
      hs.push_back(g.h());
    }
    CHECK(log_log_slope(hs, err) >= 2.7);
    CHECK(err.back() <= 1e-6);
  }
  // Mixed components carry the second-order time stencil: check the error shrinks at rate ~2.
  std::vector<double> err, dts;
  for (int nt : {64, 128, 256}) {
    const PeriodicGrid g(1, 128, nt);
    std::mt19937_64 r2(17);
    const FlowMap f = compute_flow(wavy_velocity(g));
    const OneForm w = random_form(g, r2, 2);
    const SpaceTimeDiffeo F = SpaceTimeDiffeo::forward(f);
    const TwoForm lhs = exterior_derivative(pullback_form(F, w));
    const TwoForm rhs = pullback_form(F, exterior_derivative(w));
    err.push_back(lp_norm(lhs(0, 1) - rhs(0, 1), 1.0));
    dts.push_back(g.dt());
  }
  CHECK(log_log_slope(dts, err) >= 1.8);
  CHECK(err.back() <= 1e-3);
}

TEST_CASE("boundary commutes with push-forward at pairing level") {
  std::mt19937_64 rng(19);
  const PeriodicGrid g(1, 128, 128);
  const FlowMap f = compute_flow(wavy_velocity(g));
  const SpaceTimeDiffeo F = SpaceTimeDiffeo::forward(f);
  const Current1Diffuse T = random_current(g, rng);
  const BoundaryDistribution lhs_b = boundary1(pushforward_current(F, T));
  const BoundaryDistribution rhs_b = boundary1(T);
  for (int r = 0; r < 5; ++r) {
    // Test functions vanishing near t = 1.
    const ScalarField base = random_smooth(g, rng, 2);
    ScalarField xi = base * ScalarField::from_function(g, [](double t, const Point&) { return std::pow(std::max(0.0, 0.9 - t), 3); });
    const double lhs = pair(lhs_b, xi);
    const double rhs = pair(rhs_b, pullback_function(F, xi));
    CHECK(std::abs(lhs - rhs) <= 1e-4 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("push-forward of a horizontal current has controlled mass") {
  std::mt19937_64 rng(23);
  const PeriodicGrid g(1, 64, 32);
  const VectorField u = wavy_velocity(g);
  const FlowMap f = compute_flow(u);
  const Current1Diffuse P(random_smooth(g, rng), VectorField::zeros(g));
  double umax = 0.0;
  for (double v : u[0].values()) umax = std::max(umax, std::abs(v));
  const double pushed = mass(pushforward_current(SpaceTimeDiffeo::forward(f), P));
  CHECK(pushed <= (1.0 + umax * g.dim()) * mass(P) + 1e-3 * mass(P));
}
