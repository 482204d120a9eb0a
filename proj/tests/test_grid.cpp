#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <limits>
#include <sstream>

#include "support.hpp"
#include "tcur/error.hpp"
#include "tcur/field_io.hpp"
#include "tcur/grid.hpp"

using namespace tcur;
using namespace tcur::testing;

namespace {

ScalarField sine_x(const PeriodicGrid& g, int k = 1) {
  return ScalarField::from_function(g, [k](double, const Point& x) { return std::sin(kTwoPi * k * x[0]); });
}

double max_abs_minus(const ScalarField& f, const std::function<double(double, const Point&)>& ref) {
  return max_abs_diff(f, ScalarField::from_function(f.grid(), ref));
}

}  // namespace

TEST_CASE("grid invariants and rejected shapes") {
  const PeriodicGrid g(2, 16, 8);
  CHECK(g.h() == 1.0 / 16);
  CHECK(g.dt() == 1.0 / 8);
  CHECK(g.slice_size() == 256);
  CHECK(g.size() == 256 * 8);
  CHECK(g.center(0)[0] == doctest::Approx(0.5 / 16));
  for (std::size_t i : {std::size_t{0}, std::size_t{17}, std::size_t{255}}) CHECK(g.flat_index(g.multi_index(i)) == i);
  CHECK_THROWS_AS(PeriodicGrid(1, 12, 8), Error);
  CHECK_THROWS_AS(PeriodicGrid(1, 4, 8), Error);
  CHECK_THROWS_AS(PeriodicGrid(1, 16, 7), Error);
  CHECK_THROWS_AS(PeriodicGrid(3, 16, 8), Error);
}

TEST_CASE("norms: zero, constants and unit volume") {
  const PeriodicGrid g(2, 8, 8);
  const ScalarField zero(g);
  for (double p : {1.0, 2.0, 3.5, kInfinity}) CHECK(lp_norm(zero, p) == 0.0);
  const ScalarField c = ScalarField::from_function(g, [](double, const Point&) { return -2.5; });
  CHECK(lp_norm(c, 1.0) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(lp_norm(c, 2.0) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(lp_norm(c, kInfinity) == 2.5);
  const ScalarField one = ScalarField::from_function(g, [](double, const Point&) { return 1.0; });
  CHECK(std::abs(lp_norm(one, 1.0) - 1.0) <= 1e-14);
  CHECK(std::abs(integral(one) - 1.0) <= 1e-14);
}

TEST_CASE("L1 norm of sin(2 pi x) against a fine quadrature oracle") {
  const PeriodicGrid g(1, 256, 8);
  const ScalarField f = sine_x(g);
  const std::vector<double> per = slice_lp_norms(f, 1.0);
  REQUIRE(per.size() == 8);
  // Independent fine midpoint sum, and the closed form 2/pi.
  const int m = 1 << 20;
  double fine = 0.0;
  for (int i = 0; i < m; ++i) fine += std::abs(std::sin(kTwoPi * (i + 0.5) / m)) / m;
  CHECK(std::abs(fine - 2.0 / std::numbers::pi) < 1e-9);
  CHECK(std::abs(per[0] - fine) <= 1e-4);
  CHECK(std::abs(sup_time_lp_norm(f, 1.0) - fine) <= 1e-4);
}

TEST_CASE("non-finite samples are rejected") {
  const PeriodicGrid g(1, 8, 8);
  ScalarField f(g);
  f(3, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(f.check_finite(), Error);
  CHECK_THROWS_AS((void)lp_norm(f, 1.0), Error);
}

TEST_CASE("norm exponents are conjugate") {
  CHECK(NormExponents::from_p(2.0).q == 2.0);
  CHECK(NormExponents::from_p(1.0).q == kInfinity);
  CHECK(NormExponents::from_p(kInfinity).q == 1.0);
  CHECK(NormExponents::from_p(4.0).q == doctest::Approx(4.0 / 3.0));
  CHECK_THROWS_AS((void)NormExponents::from_p(0.5), Error);
  CHECK_THROWS_AS(NormExponents({2.0, 3.0}).validate(), Error);
}

TEST_CASE("spatial derivative: constants, resolved modes, antisymmetry") {
  const PeriodicGrid g(1, 256, 8);
  const ScalarField c = ScalarField::from_function(g, [](double, const Point&) { return 3.0; });
  for (auto s : {DerivativeScheme::kSpectral, DerivativeScheme::kCentral}) CHECK(max_abs(derivative(c, 0, s)) <= 1e-12);
  const ScalarField d = derivative(sine_x(g), 0);
  CHECK(max_abs_minus(d, [](double, const Point& x) { return kTwoPi * std::cos(kTwoPi * x[0]); }) <= 1e-12);

  std::mt19937_64 rng(3);
  const ScalarField f = random_smooth(g, rng, 5), h = random_smooth(g, rng, 5);
  CHECK(std::abs(inner(derivative(f, 0), h) + inner(f, derivative(h, 0))) <= 1e-12);
  CHECK(std::abs(inner(derivative(f, 0, DerivativeScheme::kCentral), h) +
                 inner(f, derivative(h, 0, DerivativeScheme::kCentral))) <= 1e-12);
}

TEST_CASE("central differences converge to the spectral derivative at rate 2") {
  std::vector<double> hs, errs;
  for (int n : {32, 64, 128, 256}) {
    const PeriodicGrid g(1, n, 8);
    std::mt19937_64 rng(5);
    const ScalarField f = random_smooth(g, rng, 4);
    hs.push_back(g.h());
    errs.push_back(lp_norm(derivative(f, 0, DerivativeScheme::kCentral) - derivative(f, 0), kInfinity));
  }
  CHECK(log_log_slope(hs, errs) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("mixed spectral partials commute in 2D") {
  const PeriodicGrid g(2, 32, 8);
  std::mt19937_64 rng(7);
  const ScalarField f = random_smooth(g, rng, 4);
  CHECK(max_abs_diff(derivative(derivative(f, 0), 1), derivative(derivative(f, 1), 0)) <= 1e-12);
}

TEST_CASE("divergence is the sum of component derivatives") {
  const PeriodicGrid g(2, 16, 8);
  std::mt19937_64 rng(9);
  const VectorField v = random_smooth_vector(g, rng, 3);
  const ScalarField div = divergence(v);
  const ScalarField sum = derivative(v[0], 0) + derivative(v[1], 1);
  CHECK(max_abs_diff(div, sum) == 0.0);
  const VectorField c({ScalarField::from_function(g, [](double, const Point&) { return 1.0; }),
                       ScalarField::from_function(g, [](double, const Point&) { return -2.0; })});
  CHECK(max_abs(divergence(c)) <= 1e-12);
  const PeriodicGrid g1(1, 64, 8);
  const ScalarField d1 = divergence(VectorField({sine_x(g1)}));
  CHECK(max_abs_minus(d1, [](double, const Point& x) { return kTwoPi * std::cos(kTwoPi * x[0]); }) <= 1e-12);
}

TEST_CASE("time derivative: exact on linears, second order otherwise") {
  const PeriodicGrid g(1, 8, 16);
  const ScalarField c = ScalarField::from_function(g, [](double, const Point&) { return 2.0; });
  CHECK(max_abs(time_derivative(c)) <= 1e-12);
  const ScalarField t = ScalarField::from_function(g, [](double s, const Point&) { return s; });
  CHECK(max_abs_minus(time_derivative(t), [](double, const Point&) { return 1.0; }) <= 1e-12);
  const ScalarField q = ScalarField::from_function(g, [](double s, const Point&) { return s * s; });
  CHECK(max_abs_minus(time_derivative(q), [](double s, const Point&) { return 2.0 * s; }) <= 1e-12);

  std::vector<double> dts, errs;
  for (int nt : {16, 32, 64, 128}) {
    const PeriodicGrid gt(1, 8, nt);
    const ScalarField f = ScalarField::from_function(
        gt, [](double s, const Point& x) { return std::sin(kTwoPi * s) * (1.0 + 0.5 * std::cos(kTwoPi * x[0])); });
    dts.push_back(gt.dt());
    errs.push_back(max_abs_minus(time_derivative(f), [](double s, const Point& x) {
      return kTwoPi * std::cos(kTwoPi * s) * (1.0 + 0.5 * std::cos(kTwoPi * x[0]));
    }));
  }
  CHECK(log_log_slope(dts, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("cumulative time integral") {
  const PeriodicGrid g(1, 8, 32);
  const ScalarField one = ScalarField::from_function(g, [](double, const Point&) { return 1.0; });
  CHECK(max_abs_minus(cumulative_time_integral(one), [](double s, const Point&) { return s; }) <= 1e-14);
  CHECK(max_abs(cumulative_time_integral(ScalarField(g))) == 0.0);
  const ScalarField ci = cumulative_time_integral(one);
  for (double v : ci.slice(0)) CHECK(v == 0.0);

  std::vector<double> dts, errs;
  for (int nt : {16, 32, 64, 128}) {
    const PeriodicGrid gt(1, 8, nt);
    const ScalarField f = ScalarField::from_function(gt, [](double s, const Point&) { return std::cos(kTwoPi * s); });
    dts.push_back(gt.dt());
    errs.push_back(max_abs_minus(cumulative_time_integral(f),
                                 [](double s, const Point&) { return std::sin(kTwoPi * s) / kTwoPi; }));
  }
  CHECK(log_log_slope(dts, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("interpolation: constants, nodes, linear time, cubic accuracy") {
  const PeriodicGrid g(2, 16, 8);
  const ScalarField c = ScalarField::from_function(g, [](double, const Point&) { return 0.75; });
  CHECK(interpolate(c, 0.31, Point{0.123, 0.987}) == doctest::Approx(0.75).epsilon(1e-14));

  std::mt19937_64 rng(13);
  const ScalarField f = random_smooth(g, rng, 3);
  for (int k : {0, 3, 7})
    for (std::size_t i : {std::size_t{0}, std::size_t{37}, std::size_t{255}})
      CHECK(interpolate(f, g.time(k), g.center(i)) == f(k, i));

  // Linear in time between slices.
  const ScalarField lin = ScalarField::from_function(g, [](double s, const Point&) { return 1.0 + 2.0 * s; });
  CHECK(interpolate(lin, 0.3, Point{0.4, 0.6}) == doctest::Approx(1.6).epsilon(1e-13));

  std::vector<double> hs, errs;
  for (int n : {16, 32, 64, 128}) {
    const PeriodicGrid gi(1, n, 8);
    const ScalarField s = ScalarField::from_function(gi, [](double, const Point& x) {
      return std::sin(kTwoPi * x[0]) + 0.3 * std::cos(3.0 * kTwoPi * x[0]);
    });
    std::mt19937_64 pr(21);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int r = 0; r < 200; ++r) {
      const double x = U(pr);
      worst = std::max(worst, std::abs(interpolate(s, 0.0, Point{x}) -
                                       (std::sin(kTwoPi * x) + 0.3 * std::cos(3.0 * kTwoPi * x))));
    }
    hs.push_back(gi.h());
    errs.push_back(worst);
  }
  CHECK(log_log_slope(hs, errs) >= 2.9);
}

TEST_CASE("interpolation clamps beyond the stored time range and flags it") {
  const PeriodicGrid g(1, 8, 8);
  const ScalarField lin = ScalarField::from_function(g, [](double s, const Point&) { return s; });
  InterpolationDiagnostics diag;
  CHECK(interpolate(lin, 1.0, Point{0.5}, &diag) == doctest::Approx(g.time(7)));
  CHECK(interpolate(lin, -0.2, Point{0.5}, &diag) == doctest::Approx(0.0));
  CHECK(interpolate(lin, 0.5, Point{0.5}, &diag) == doctest::Approx(0.5));
  CHECK(diag.queries == 3);
  CHECK(diag.clamped == 2);
}

TEST_CASE("binary field format round trip and header layout") {
  const PeriodicGrid g(2, 8, 8);
  std::mt19937_64 rng(17);
  const ScalarField f = random_smooth(g, rng, 2);
  std::stringstream buf;
  io::write_field(buf, f);
  const std::string bytes = buf.str();
  REQUIRE(bytes.size() == 4 + 4 * 4 + 8 * g.size());
  CHECK(bytes.substr(0, 4) == "TCUR");
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + b])) << (8 * b);
    return v;
  };
  CHECK(u32(4) == io::kFormatVersion);
  CHECK(u32(8) == 2);
  CHECK(u32(12) == 8);
  CHECK(u32(16) == 8);
  double first = 0.0;
  std::uint64_t raw = 0;
  for (int b = 0; b < 8; ++b) raw |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[20 + b])) << (8 * b);
  std::memcpy(&first, &raw, 8);
  CHECK(first == f.values()[0]);

  const ScalarField back = io::read_field(buf);
  CHECK(back.grid() == g);
  CHECK(max_abs_diff(back, f) == 0.0);

  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream in(bad);
  CHECK_THROWS_AS((void)io::read_field(in), Error);
  std::stringstream truncated(bytes.substr(0, 30));
  CHECK_THROWS_AS((void)io::read_field(truncated), Error);
}

TEST_CASE("CSV export has one row per sample") {
  const PeriodicGrid g(2, 8, 8);
  std::ostringstream out;
  io::write_csv(out, ScalarField(g));
  const std::string s = out.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(g.size() + 1));
  CHECK(s.rfind("t,x_1,x_2,value", 0) == 0);
}
