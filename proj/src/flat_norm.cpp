#include "tcur/flat_norm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcur/error.hpp"
#include "tcur/lp.hpp"

namespace tcur {
namespace {

// A = [B, -B, I, -I] acting on (F+, F-, L+, L-).
class FlatNormOperator final : public lp::ConstraintOperator {
 public:
  explicit FlatNormOperator(Eigen::MatrixXd b) : b_(std::move(b)) {}

  Eigen::Index rows() const override { return b_.rows(); }
  Eigen::Index cols() const override { return 2 * b_.cols() + 2 * b_.rows(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override {
    const Eigen::Index ns = b_.cols();
    const Eigen::Index m = b_.rows();
    return b_ * (x.segment(0, ns) - x.segment(ns, ns)) + x.segment(2 * ns, m) - x.segment(2 * ns + m, m);
  }

  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const override {
    const Eigen::Index ns = b_.cols();
    const Eigen::Index m = b_.rows();
    Eigen::VectorXd out(cols());
    const Eigen::VectorXd bty = b_.transpose() * y;
    out.segment(0, ns) = bty;
    out.segment(ns, ns) = -bty;
    out.segment(2 * ns, m) = y;
    out.segment(2 * ns + m, m) = -y;
    return out;
  }

  Eigen::MatrixXd normal_matrix(const Eigen::VectorXd& theta) const override {
    const Eigen::Index ns = b_.cols();
    const Eigen::Index m = b_.rows();
    const Eigen::VectorXd tf = theta.segment(0, ns) + theta.segment(ns, ns);
    const Eigen::VectorXd tl = theta.segment(2 * ns, m) + theta.segment(2 * ns + m, m);
    Eigen::MatrixXd scaled = b_ * tf.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    out.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    out = out.selfadjointView<Eigen::Lower>();
    out.diagonal() += tl;
    return out;
  }

  const Eigen::MatrixXd& b() const { return b_; }

 private:
  Eigen::MatrixXd b_;
};

// Matrix of an axis derivative on one slice, column i = derivative of e_i.
Eigen::MatrixXd spatial_derivative_matrix(const PeriodicGrid& g, int axis, DerivativeScheme scheme) {
  const auto N = static_cast<Eigen::Index>(g.slice_size());
  Eigen::MatrixXd d(N, N);
  std::vector<double> e(N, 0.0), out(N, 0.0);
  for (Eigen::Index i = 0; i < N; ++i) {
    e[i] = 1.0;
    derivative_slice(g, e, out, axis, scheme);
    for (Eigen::Index r = 0; r < N; ++r) d(r, i) = out[r];
    e[i] = 0.0;
  }
  return d;
}

Eigen::MatrixXd time_derivative_matrix(int nt, double dt) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nt, nt);
  const double c = 0.5 / dt;
  d(0, 0) = -3.0 * c;
  d(0, 1) = 4.0 * c;
  d(0, 2) = -c;
  for (int k = 1; k < nt - 1; ++k) {
    d(k, k - 1) = -c;
    d(k, k + 1) = c;
  }
  d(nt - 1, nt - 1) = 3.0 * c;
  d(nt - 1, nt - 2) = -4.0 * c;
  d(nt - 1, nt - 3) = c;
  return d;
}

// Rows: (component c, k, i) with c = 0 for f_t. Columns: (j, k >= 1, i).
Eigen::MatrixXd boundary2_matrix(const PeriodicGrid& g, DerivativeScheme scheme) {
  const Eigen::Index N = static_cast<Eigen::Index>(g.slice_size());
  const int nt = g.n_t();
  const int d = g.dim();
  const Eigen::Index m = static_cast<Eigen::Index>(d + 1) * nt * N;
  const Eigen::Index ns = static_cast<Eigen::Index>(d) * (nt - 1) * N;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, ns);
  const Eigen::MatrixXd dt = time_derivative_matrix(nt, g.dt());
  for (int j = 0; j < d; ++j) {
    const Eigen::MatrixXd dx = spatial_derivative_matrix(g, j, scheme);
    for (int k = 1; k < nt; ++k) {
      const Eigen::Index col0 = static_cast<Eigen::Index>(j) * (nt - 1) * N + (k - 1) * N;
      b.block(static_cast<Eigen::Index>(k) * N, col0, N, N) = dx;
      for (int kr = 0; kr < nt; ++kr) {
        const double c = dt(kr, k);
        if (c == 0.0) continue;
        const Eigen::Index row0 = static_cast<Eigen::Index>(j + 1) * nt * N + kr * N;
        for (Eigen::Index i = 0; i < N; ++i) b(row0 + i, col0 + i) = -c;
      }
    }
  }
  return b;
}

Eigen::VectorXd stack(const Current1Diffuse& T) {
  const PeriodicGrid& g = T.grid();
  const auto per = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd v(per * (g.dim() + 1));
  auto put = [&](int c, const ScalarField& f) {
    auto vals = f.values();
    for (Eigen::Index i = 0; i < per; ++i) v[c * per + i] = vals[i];
  };
  put(0, T.f_t);
  for (int j = 0; j < g.dim(); ++j) put(j + 1, T.f_vec[j]);
  return v;
}

}  // namespace

FlatNormCertificate flat_norm_lp(const Current1Diffuse& T, const FlatNormOptions& options) {
  const PeriodicGrid& g = T.grid();
  const std::size_t vars = g.size() * static_cast<std::size_t>(g.dim());
  if (vars > options.max_variables) {
    std::ostringstream msg;
    msg << "flat_norm_lp: grid too large for dense LP (" << vars << " > " << options.max_variables << " variables)";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }

  FlatNormCertificate cert;
  const Eigen::VectorXd rhs = stack(T);
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) {
    cert.converged = true;
    cert.primal = FlatDecomposition{Current2Diffuse::zeros(g), Current1Diffuse::zeros(g)};
    cert.omega = OneForm(ScalarField(g), VectorField::zeros(g));
    return cert;
  }

  FlatNormOperator op(boundary2_matrix(g, options.scheme));
  const Eigen::Index ns = op.b().cols();
  // Uniform quadrature weights factor out of the objective.
  const Eigen::VectorXd cost = Eigen::VectorXd::Ones(op.cols());
  lp::Options lopt;
  lopt.tolerance = options.lp_tolerance;
  lopt.max_iterations = options.max_iterations;
  const lp::Solution sol = lp::solve(op, rhs, cost, lopt);
  if (sol.status == lp::Status::kNumericalFailure)
    fail(ErrorKind::kInternal, "flat_norm_lp: interior-point breakdown");
  cert.iterations = sol.iterations;
  cert.converged = sol.status == lp::Status::kOptimal;

  // Primal: recompute L exactly so the decomposition is feasible by construction.
  const Eigen::VectorXd f = sol.x.segment(0, ns) - sol.x.segment(ns, ns);
  const auto N = static_cast<Eigen::Index>(g.slice_size());
  std::vector<ScalarField> F;
  for (int j = 0; j < g.dim(); ++j) {
    ScalarField Fj(g);
    for (int k = 1; k < g.n_t(); ++k)
      for (Eigen::Index i = 0; i < N; ++i)
        Fj(k, static_cast<std::size_t>(i)) = f[static_cast<Eigen::Index>(j) * (g.n_t() - 1) * N + (k - 1) * N + i];
    F.push_back(std::move(Fj));
  }
  Current2Diffuse S{VectorField(std::move(F))};
  Current1Diffuse L = T - boundary2(S, options.scheme);
  cert.value = mass2(S) + mass(L);
  cert.primal = FlatDecomposition{std::move(S), std::move(L)};

  // Dual: scale the multipliers into the feasible box.
  const Eigen::VectorXd y = sol.y;
  const Eigen::VectorXd bty = op.b().transpose() * y;
  const double worst = std::max({1.0, y.lpNorm<Eigen::Infinity>(), bty.lpNorm<Eigen::Infinity>()});
  const double alpha = 1.0 / worst;
  const auto per = static_cast<Eigen::Index>(g.size());
  auto unstack = [&](int c) {
    std::vector<double> v(static_cast<std::size_t>(per));
    for (Eigen::Index i = 0; i < per; ++i) v[static_cast<std::size_t>(i)] = alpha * y[c * per + i];
    return ScalarField(g, std::move(v));
  };
  std::vector<ScalarField> xi;
  for (int j = 0; j < g.dim(); ++j) xi.push_back(unstack(j + 1));
  OneForm omega(unstack(0), VectorField(std::move(xi)));
  cert.dual = pair(T, omega);
  cert.omega = std::move(omega);

  cert.gap = cert.value - cert.dual;
  cert.relative_gap = cert.gap / std::max(std::abs(cert.value), 1e-300);
  cert.gap_warning = cert.relative_gap > options.gap_warning || !cert.converged;
  return cert;
}

}  // namespace tcur
