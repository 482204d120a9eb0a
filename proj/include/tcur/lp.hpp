#pragma once

#include <Eigen/Dense>

namespace tcur::lp {

/// Constraint matrix of a standard-form LP, given through the products the
/// interior-point method needs.
class ConstraintOperator {
 public:
  virtual ~ConstraintOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;            // A x
  virtual Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const = 0;  // A^T y
  /// A diag(theta) A^T.
  virtual Eigen::MatrixXd normal_matrix(const Eigen::VectorXd& theta) const = 0;
};

class DenseConstraint final : public ConstraintOperator {
 public:
  explicit DenseConstraint(Eigen::MatrixXd a) : a_(std::move(a)) {}
  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return a_ * x; }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const override { return a_.transpose() * y; }
  Eigen::MatrixXd normal_matrix(const Eigen::VectorXd& theta) const override {
    return a_ * theta.asDiagonal() * a_.transpose();
  }

 private:
  Eigen::MatrixXd a_;
};

struct Options {
  double tolerance = 1e-10;
  int max_iterations = 200;
  /// Stop after this many iterations without improving the best iterate...
  int stall_iterations = 8;
  /// ...and report it optimal if its relative residuals are below this.
  double stall_tolerance = 1e-8;
};

enum class Status { kOptimal, kIterationLimit, kNumericalFailure };

struct Solution {
  Status status = Status::kNumericalFailure;
  Eigen::VectorXd x;  // primal
  Eigen::VectorXd y;  // equality multipliers
  Eigen::VectorXd s;  // reduced costs
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
};

/// min c^T x  s.t.  A x = b, x >= 0, by Mehrotra predictor-corrector.
Solution solve(const ConstraintOperator& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
               const Options& options = {});

}  // namespace tcur::lp
