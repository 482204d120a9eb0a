#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "tcur/error.hpp"
#include "tcur/flat_norm.hpp"
#include "tcur/lp.hpp"

using namespace tcur;
using namespace tcur::testing;

namespace {

// Minimum of c^T x over basic feasible solutions of A x = b, x >= 0.
double vertex_enumeration(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  std::vector<int> mask(n, 0);
  std::fill(mask.begin(), mask.begin() + m, 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j)
      if (mask[j]) cols.push_back(j);
    Eigen::MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A.col(cols[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd xb = lu.solve(b);
    if (xb.minCoeff() < -1e-12) continue;
    double obj = 0.0;
    for (int i = 0; i < m; ++i) obj += c[cols[i]] * xb[i];
    best = std::min(best, obj);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

Current1Diffuse null_boundary_current(const PeriodicGrid& g, std::mt19937_64& rng) {
  std::vector<ScalarField> F;
  for (int j = 0; j < g.dim(); ++j)
    F.push_back(ScalarField::from_function(g, [](double t, const Point&) { return t * (1.0 - t); }) *
                random_smooth(g, rng, 3, 1.0, false));
  return boundary2(Current2Diffuse(VectorField(std::move(F))));
}

}  // namespace

TEST_CASE("interior-point solver on a textbook LP") {
  // max x1 + x2 s.t. x1 + 2 x2 <= 4, 3 x1 + x2 <= 6: optimum (1.6, 1.2).
  Eigen::MatrixXd A(2, 4);
  A << 1, 2, 1, 0, 3, 1, 0, 1;
  const Eigen::VectorXd b = (Eigen::VectorXd(2) << 4, 6).finished();
  const Eigen::VectorXd c = (Eigen::VectorXd(4) << -1, -1, 0, 0).finished();
  const lp::Solution s = lp::solve(lp::DenseConstraint(A), b, c);
  CHECK(s.status == lp::Status::kOptimal);
  CHECK(s.x[0] == doctest::Approx(1.6).epsilon(1e-8));
  CHECK(s.x[1] == doctest::Approx(1.2).epsilon(1e-8));
  CHECK(s.primal_objective == doctest::Approx(-2.8).epsilon(1e-9));
  CHECK(s.dual_objective == doctest::Approx(-2.8).epsilon(1e-9));
}

TEST_CASE("interior-point solver matches vertex enumeration on random LPs") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.1, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 3, n = 7;
    Eigen::MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = U(rng);
    Eigen::VectorXd x0(n), c(n);
    for (int j = 0; j < n; ++j) {
      x0[j] = P(rng);
      c[j] = P(rng);
    }
    const Eigen::VectorXd b = A * x0;
    const lp::Solution s = lp::solve(lp::DenseConstraint(A), b, c);
    CHECK(s.status == lp::Status::kOptimal);
    const double oracle = vertex_enumeration(A, b, c);
    CHECK(s.primal_objective == doctest::Approx(oracle).epsilon(1e-7));
    CHECK((A * s.x - b).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(s.x.minCoeff() >= 0.0);
  }
}

TEST_CASE("flat norm of zero and the grid guard") {
  const PeriodicGrid g(1, 8, 8);
  const FlatNormCertificate z = flat_norm_lp(Current1Diffuse::zeros(g));
  CHECK(z.value == 0.0);
  CHECK(z.converged);
  FlatNormOptions tight;
  tight.max_variables = 10;
  std::mt19937_64 rng(2);
  CHECK_THROWS_WITH_AS(flat_norm_lp(random_current(g, rng), tight), doctest::Contains("too large"), Error);
}

TEST_CASE("flat norm certificate on random 8x8 currents") {
  const PeriodicGrid g(1, 8, 8);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Current1Diffuse T = random_current(g, rng);
    const FlatNormCertificate c = flat_norm_lp(T);
    CHECK(c.converged);
    CHECK_FALSE(c.gap_warning);
    CHECK(c.relative_gap <= 1e-6);
    CHECK(c.relative_gap >= -1e-12);
    // L = T is feasible.
    CHECK(c.value <= mass(T) * (1.0 + 1e-9));
    CHECK(c.value > 0.0);
    // The primal decomposition reproduces T and its cost is the reported value.
    CHECK(flat_bound_constructive(T, *c.primal) == doctest::Approx(c.value).epsilon(1e-12));
    // The dual form is admissible and its pairing is the dual value.
    CHECK(max_abs(c.omega->tau) <= 1.0 + 1e-12);
    CHECK(max_abs(c.omega->xi[0]) <= 1.0 + 1e-12);
    CHECK(pair(T, *c.omega) == doctest::Approx(c.dual).epsilon(1e-12));
  }
}

TEST_CASE("null-boundary currents: flat norm below vertical mass") {
  for (int d : {1, 2}) {
    const PeriodicGrid g = d == 1 ? PeriodicGrid(1, 16, 16) : PeriodicGrid(2, 8, 8);
    std::mt19937_64 rng(4 + d);
    for (int trial = 0; trial < 3; ++trial) {
      const Current1Diffuse T = null_boundary_current(g, rng);
      const FlatNormCertificate c = flat_norm_lp(T);
      CHECK(c.converged);
      CHECK(c.value <= vertical_mass(T) * (1.0 + 1e-6));
      // The primitive decomposition is an upper bound for the LP value.
      PrimitiveOptions opt;
      const double primitive = mass2(primitive_two_current(T, opt));
      CHECK(c.value <= primitive * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("property: the discrete flat norm is a norm") {
  const PeriodicGrid g(1, 8, 8);
  std::mt19937_64 rng(7);
  const Current1Diffuse A = random_current(g, rng), B = random_current(g, rng);
  const double fa = flat_norm_lp(A).value, fb = flat_norm_lp(B).value;
  CHECK(flat_norm_lp(2.5 * A).value == doctest::Approx(2.5 * fa).epsilon(1e-7));
  CHECK(flat_norm_lp(-1.0 * A).value == doctest::Approx(fa).epsilon(1e-7));
  CHECK(flat_norm_lp(A + B).value <= (fa + fb) * (1.0 + 1e-7));
  // A single nonzero sample has positive flat norm.
  Current1Diffuse spike = Current1Diffuse::zeros(g);
  spike.f_vec[0](3, 2) = 1.0;
  CHECK(flat_norm_lp(spike).value > 1e-6 * mass(spike));
}
