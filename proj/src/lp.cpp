#include "tcur/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcur/error.hpp"

namespace tcur::lp {
namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

}  // namespace

Solution solve(const ConstraintOperator& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
               const Options& options) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  require(b.size() == m && c.size() == n, "lp::solve: dimension mismatch");

  Solution sol;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  // Mehrotra's starting point from the least-squares solutions.
  {
    Eigen::LDLT<Eigen::MatrixXd> aat(a.normal_matrix(Eigen::VectorXd::Ones(n)) +
                                     1e-12 * Eigen::MatrixXd::Identity(m, m));
    x = a.apply_transpose(aat.solve(b));
    y = aat.solve(a.apply(c));
    s = c - a.apply_transpose(y);
    const double dx = std::max(-1.5 * x.minCoeff(), 0.0);
    const double ds = std::max(-1.5 * s.minCoeff(), 0.0);
    x.array() += dx;
    s.array() += ds;
    const double xs = x.dot(s);
    x.array() += 0.5 * xs / std::max(s.sum(), 1e-300);
    s.array() += 0.5 * xs / std::max(x.sum(), 1e-300);
    if (!x.allFinite() || !s.allFinite() || x.minCoeff() <= 0.0 || s.minCoeff() <= 0.0) {
      x.setOnes();
      s.setOnes();
      y.setZero();
    }
  }

  const double b_norm = 1.0 + b.lpNorm<Eigen::Infinity>();
  const double c_norm = 1.0 + c.lpNorm<Eigen::Infinity>();

  // Best iterate by the worst of the three relative residuals; late iterations
  // can lose feasibility once the normal matrix is numerically singular.
  double best_merit = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = x, best_y = y, best_s = s;
  int since_best = 0;

  for (int it = 0; it < options.max_iterations; ++it) {
    sol.iterations = it;
    const Eigen::VectorXd rp = b - a.apply(x);
    const Eigen::VectorXd rd = c - a.apply_transpose(y) - s;
    const double pobj = c.dot(x);
    const double dobj = b.dot(y);
    const double mu = x.dot(s) / static_cast<double>(n);
    const double merit = std::max({rp.lpNorm<Eigen::Infinity>() / b_norm, rd.lpNorm<Eigen::Infinity>() / c_norm,
                                   std::abs(pobj - dobj) / (1.0 + std::abs(pobj))});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_s = s;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (merit < options.tolerance) {
      sol.status = Status::kOptimal;
      break;
    }
    if (since_best >= options.stall_iterations) {
      sol.status = best_merit < options.stall_tolerance ? Status::kOptimal : Status::kIterationLimit;
      break;
    }

    const Eigen::VectorXd theta = x.cwiseQuotient(s);
    const Eigen::MatrixXd normal = a.normal_matrix(theta);
    const double reg = 1e-14 * std::max(1.0, normal.diagonal().maxCoeff());
    Eigen::MatrixXd shifted = normal;
    shifted.diagonal().array() += reg;
    Eigen::LLT<Eigen::MatrixXd> chol(shifted);
    if (chol.info() != Eigen::Success) {
      sol.status = Status::kNumericalFailure;
      break;
    }

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& ds) {
      const Eigen::VectorXd rc_over_s = rc.cwiseQuotient(s);
      const Eigen::VectorXd rhs = rp - a.apply(rc_over_s) + a.apply(theta.cwiseProduct(rd));
      dy = chol.solve(rhs);
      for (int r = 0; r < 2; ++r) dy += chol.solve(rhs - normal * dy);
      ds = rd - a.apply_transpose(dy);
      dx = rc_over_s - theta.cwiseProduct(ds);
    };

    Eigen::VectorXd dx, dy, ds;
    const Eigen::VectorXd rc_aff = -x.cwiseProduct(s);
    direction(rc_aff, dx, dy, ds);
    const double ap_aff = max_step(x, dx);
    const double ad_aff = max_step(s, ds);
    const double mu_aff = (x + ap_aff * dx).dot(s + ad_aff * ds) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Eigen::VectorXd rc = Eigen::VectorXd::Constant(n, sigma * mu) - x.cwiseProduct(s) - dx.cwiseProduct(ds);
    direction(rc, dx, dy, ds);
    const double ap = std::min(1.0, 0.995 * max_step(x, dx));
    const double ad = std::min(1.0, 0.995 * max_step(s, ds));
    x += ap * dx;
    y += ad * dy;
    s += ad * ds;
    if (!x.allFinite() || !y.allFinite() || !s.allFinite()) {
      sol.status = Status::kNumericalFailure;
      break;
    }
    sol.status = Status::kIterationLimit;
  }

  sol.x = std::move(best_x);
  sol.y = std::move(best_y);
  sol.s = std::move(best_s);
  sol.primal_objective = c.dot(sol.x);
  sol.dual_objective = b.dot(sol.y);
  return sol;
}

}  // namespace tcur::lp
