#include "tcur/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcur/error.hpp"
#include "tcur/field_io.hpp"

namespace tcur {

double determinant(const SpaceMatrix& m, int dim) {
  if (dim == 1) return m[0];
  return m[0] * m[3] - m[1] * m[2];
}

SpaceMatrix inverse(const SpaceMatrix& m, int dim) {
  const double det = determinant(m, dim);
  require(det != 0.0, "inverse: singular matrix");
  SpaceMatrix r{};
  if (dim == 1) {
    r[0] = 1.0 / det;
    return r;
  }
  r[0] = m[3] / det;
  r[1] = -m[1] / det;
  r[2] = -m[2] / det;
  r[3] = m[0] / det;
  return r;
}

namespace {

SpaceMatrix identity_matrix(int dim) {
  SpaceMatrix m{};
  for (int a = 0; a < dim; ++a) m[a * dim + a] = 1.0;
  return m;
}

// u and its spatial gradient, interpolated cubically in space and linearly in time.
class VelocityModel {
 public:
  VelocityModel(const VectorField& u, bool autonomous, InterpolationDiagnostics* diag)
      : u_(u), grid_(u.grid()), d_(u.dim()), autonomous_(autonomous), diag_(diag) {
    for (int a = 0; a < d_; ++a)
      for (int b = 0; b < d_; ++b) du_.push_back(derivative(u[a], b));
  }

  void eval(double s, const Point& x, Point& v, SpaceMatrix& g) const {
    const double t_max = grid_.time(grid_.n_t() - 1);
    if (autonomous_) {
      s = 0.0;
    } else if (s < 0.0 || s > t_max) {
      if (diag_ && (s < -1e-12 || s > t_max + 1e-12)) ++diag_->clamped;
      s = std::clamp(s, 0.0, t_max);
    }
    if (diag_) ++diag_->queries;
    const double tau = s / grid_.dt();
    const int k0 = std::min(static_cast<int>(std::floor(tau)), grid_.n_t() - 2);
    const double lam = tau - k0;
    const SliceStencil st(grid_, x);
    auto sample = [&](const ScalarField& f) {
      const double v0 = st.apply(f.slice(k0));
      return lam == 0.0 ? v0 : (1.0 - lam) * v0 + lam * st.apply(f.slice(k0 + 1));
    };
    for (int a = 0; a < d_; ++a) v[a] = sample(u_[a]);
    for (int c = 0; c < d_ * d_; ++c) g[c] = sample(du_[c]);
  }

  int dim() const noexcept { return d_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }

 private:
  const VectorField& u_;
  const PeriodicGrid& grid_;
  int d_;
  bool autonomous_;
  InterpolationDiagnostics* diag_;
  std::vector<ScalarField> du_;
};

struct State {
  Point x{};
  SpaceMatrix m{};
};

State rhs(const VelocityModel& model, double s, const State& z) {
  const int d = model.dim();
  State dz;
  SpaceMatrix g{};
  model.eval(s, z.x, dz.x, g);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double acc = 0.0;
      for (int c = 0; c < d; ++c) acc += g[a * d + c] * z.m[c * d + b];
      dz.m[a * d + b] = acc;
    }
  return dz;
}

State axpy(const State& z, double h, const State& dz) {
  State r;
  for (int a = 0; a < kMaxDim; ++a) r.x[a] = z.x[a] + h * dz.x[a];
  for (int c = 0; c < kMaxDim * kMaxDim; ++c) r.m[c] = z.m[c] + h * dz.m[c];
  return r;
}

State rk4_step(const VelocityModel& model, double s, const State& z, double h) {
  const State k1 = rhs(model, s, z);
  const State k2 = rhs(model, s + 0.5 * h, axpy(z, 0.5 * h, k1));
  const State k3 = rhs(model, s + 0.5 * h, axpy(z, 0.5 * h, k2));
  const State k4 = rhs(model, s + h, axpy(z, h, k3));
  State r;
  for (int a = 0; a < kMaxDim; ++a) r.x[a] = z.x[a] + h / 6.0 * (k1.x[a] + 2.0 * k2.x[a] + 2.0 * k3.x[a] + k4.x[a]);
  for (int c = 0; c < kMaxDim * kMaxDim; ++c)
    r.m[c] = z.m[c] + h / 6.0 * (k1.m[c] + 2.0 * k2.m[c] + 2.0 * k3.m[c] + k4.m[c]);
  return r;
}

State integrate(const VelocityModel& model, double t0, double t1, State z, int substeps) {
  const double span = t1 - t0;
  if (span == 0.0) return z;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / model.grid().dt() * substeps - 1e-9)));
  const double h = span / steps;
  for (int s = 0; s < steps; ++s) z = rk4_step(model, t0 + s * h, z, h);
  return z;
}

bool is_autonomous(const VectorField& u) {
  const PeriodicGrid& g = u.grid();
  for (int a = 0; a < u.dim(); ++a) {
    const auto first = u[a].slice(0);
    for (int k = 1; k < g.n_t(); ++k)
      if (!std::equal(first.begin(), first.end(), u[a].slice(k).begin())) return false;
  }
  return true;
}

void check_orientation(double det, const char* which, int k, std::size_t i) {
  if (!(det > 0.0) || !std::isfinite(det)) {
    std::ostringstream msg;
    msg << "compute_flow: flow inversion lost (" << which << " det = " << det << " at time index " << k << ", node "
        << i << "); reduce the step size";
    fail(ErrorKind::kNumerical, msg.str());
  }
}

std::vector<ScalarField> channels(const PeriodicGrid& g, int count) {
  return std::vector<ScalarField>(static_cast<std::size_t>(count), ScalarField(g));
}

}  // namespace

FlowMap::FlowMap(const VectorField& u, int substeps)
    : positions(channels(u.grid(), u.dim())),
      jacobians(channels(u.grid(), u.dim() * u.dim())),
      determinants(u.grid()),
      velocities(channels(u.grid(), u.dim())),
      inverse_positions(channels(u.grid(), u.dim())),
      inverse_jacobians(channels(u.grid(), u.dim() * u.dim())),
      inverse_determinants(u.grid()),
      u_(u),
      substeps_(substeps) {}

Point FlowMap::position(int k, std::size_t i) const {
  Point p{};
  for (int a = 0; a < dim(); ++a) p[a] = positions[a].values()[flat(k, i)];
  return p;
}

SpaceMatrix FlowMap::jacobian(int k, std::size_t i) const {
  SpaceMatrix m{};
  for (int c = 0; c < dim() * dim(); ++c) m[c] = jacobians[c].values()[flat(k, i)];
  return m;
}

Point FlowMap::transported_velocity(int k, std::size_t i) const {
  Point p{};
  for (int a = 0; a < dim(); ++a) p[a] = velocities[a].values()[flat(k, i)];
  return p;
}

Point FlowMap::inverse_position(int k, std::size_t i) const {
  Point p{};
  for (int a = 0; a < dim(); ++a) p[a] = inverse_positions[a].values()[flat(k, i)];
  return p;
}

SpaceMatrix FlowMap::inverse_jacobian(int k, std::size_t i) const {
  SpaceMatrix m{};
  for (int c = 0; c < dim() * dim(); ++c) m[c] = inverse_jacobians[c].values()[flat(k, i)];
  return m;
}

Point FlowMap::node_velocity(int k, std::size_t i) const {
  Point p{};
  for (int a = 0; a < dim(); ++a) p[a] = u_[a].values()[flat(k, i)];
  return p;
}

TrajectoryState integrate_trajectory(const VectorField& u, double t0, double t1, const Point& x, int substeps,
                                     InterpolationDiagnostics* diag) {
  require(substeps >= 1, "integrate_trajectory: substeps must be >= 1");
  const VelocityModel model(u, false, diag);
  State z;
  z.x = x;
  z.m = identity_matrix(u.dim());
  z = integrate(model, t0, t1, z, substeps);
  return TrajectoryState{z.x, z.m};
}

FlowMap compute_flow(const VectorField& u, const FlowOptions& options) {
  require(options.substeps >= 1, "compute_flow: substeps must be >= 1");
  const PeriodicGrid& g = u.grid();
  for (int a = 0; a < u.dim(); ++a) u[a].check_finite();
  FlowMap flow(u, options.substeps);
  const int d = g.dim();
  const std::size_t N = g.slice_size();
  const bool autonomous = options.autonomous_shortcut && is_autonomous(u);
  const VelocityModel model(flow.velocity_field(), false, &flow.diagnostics);
  const VelocityModel frozen(flow.velocity_field(), true, nullptr);

  auto store = [&](std::vector<ScalarField>& pos, std::vector<ScalarField>& jac, ScalarField& det, int k,
                   std::size_t i, const State& z, const char* which) {
    const std::size_t idx = static_cast<std::size_t>(k) * N + i;
    for (int a = 0; a < d; ++a) pos[a].values()[idx] = z.x[a];
    for (int c = 0; c < d * d; ++c) jac[c].values()[idx] = z.m[c];
    const double dt = determinant(z.m, d);
    check_orientation(dt, which, k, i);
    det.values()[idx] = dt;
  };

  for (std::size_t i = 0; i < N; ++i) {
    State z;
    z.x = g.center(i);
    z.m = identity_matrix(d);
    for (int k = 0; k < g.n_t(); ++k) {
      if (k > 0) z = integrate(model, g.time(k - 1), g.time(k), z, options.substeps);
      store(flow.positions, flow.jacobians, flow.determinants, k, i, z, "forward");
      Point v{};
      SpaceMatrix grad{};
      model.eval(g.time(k), z.x, v, grad);
      for (int a = 0; a < d; ++a) flow.velocities[a].values()[static_cast<std::size_t>(k) * N + i] = v[a];
    }
  }

  for (std::size_t i = 0; i < N; ++i) {
    State seed;
    seed.x = g.center(i);
    seed.m = identity_matrix(d);
    if (autonomous) {
      // Backward from t_k to 0 is k backward steps of the frozen field.
      State z = seed;
      for (int k = 0; k < g.n_t(); ++k) {
        if (k > 0) z = integrate(frozen, 0.0, -g.dt(), z, options.substeps);
        store(flow.inverse_positions, flow.inverse_jacobians, flow.inverse_determinants, k, i, z, "inverse");
      }
    } else {
      for (int k = 0; k < g.n_t(); ++k) {
        const State z = integrate(model, g.time(k), 0.0, seed, options.substeps);
        store(flow.inverse_positions, flow.inverse_jacobians, flow.inverse_determinants, k, i, z, "inverse");
      }
    }
  }
  return flow;
}

std::vector<ScalarField> jacobian_by_differences(const FlowMap& flow, DerivativeScheme scheme) {
  const PeriodicGrid& g = flow.grid();
  const int d = g.dim();
  std::vector<ScalarField> out;
  for (int a = 0; a < d; ++a) {
    ScalarField disp = flow.positions[a];
    for (int k = 0; k < g.n_t(); ++k) {
      auto s = disp.slice(k);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] -= g.center(i)[a];
    }
    for (int b = 0; b < d; ++b) {
      ScalarField dab = derivative(disp, b, scheme);
      if (a == b)
        for (double& v : dab.values()) v += 1.0;
      out.push_back(std::move(dab));
    }
  }
  return out;
}

double jacobian_identity_error(const FlowMap& flow, InverseSampling sampling) {
  const PeriodicGrid& g = flow.grid();
  double worst = 0.0;
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      double inv = 0.0;
      if (sampling == InverseSampling::kInterpolated) {
        inv = interpolate_slice(g, flow.inverse_determinants.slice(k), flow.position(k, i));
      } else {
        const TrajectoryState back =
            integrate_trajectory(flow.velocity_field(), g.time(k), 0.0, flow.position(k, i), flow.substeps());
        inv = determinant(back.jacobian, g.dim());
      }
      worst = std::max(worst, std::abs(flow.determinant(k, i) * inv - 1.0));
    }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

// Space-time Jacobian [[1, 0], [c, M]] of psi or psi^{-1} at a node.
struct Block {
  Point c{};
  SpaceMatrix m{};
};

Block forward_block(const FlowMap& f, int k, std::size_t i) {
  return Block{f.transported_velocity(k, i), f.jacobian(k, i)};
}

Block inverse_block(const FlowMap& f, int k, std::size_t i) {
  const int d = f.dim();
  Block b;
  b.m = f.inverse_jacobian(k, i);
  const Point v = f.node_velocity(k, i);
  for (int a = 0; a < d; ++a) {
    double acc = 0.0;
    for (int c = 0; c < d; ++c) acc += b.m[a * d + c] * v[c];
    b.c[a] = -acc;
  }
  return b;
}

Block df_block(const SpaceTimeDiffeo& F, int k, std::size_t i) {
  return F.orientation() == Orientation::kForward ? forward_block(F.flow(), k, i) : inverse_block(F.flow(), k, i);
}

Block dfinv_block(const SpaceTimeDiffeo& F, int k, std::size_t i) {
  return F.orientation() == Orientation::kForward ? inverse_block(F.flow(), k, i) : forward_block(F.flow(), k, i);
}

std::vector<double> full_matrix(const Block& b, int d) {
  const int m = d + 1;
  std::vector<double> out(static_cast<std::size_t>(m * m), 0.0);
  out[0] = 1.0;
  for (int a = 0; a < d; ++a) {
    out[(a + 1) * m] = b.c[a];
    for (int c = 0; c < d; ++c) out[(a + 1) * m + c + 1] = b.m[a * d + c];
  }
  return out;
}

double checked_det(const SpaceMatrix& m, int d, const char* where) {
  const double det = determinant(m, d);
  if (!(det > 1e-12) || !std::isfinite(det)) {
    std::ostringstream msg;
    msg << where << ": Jacobian determinant near zero (" << det << ")";
    fail(ErrorKind::kNumerical, msg.str());
  }
  return det;
}

void check_same_grid(const SpaceTimeDiffeo& F, const PeriodicGrid& g, const char* where) {
  if (!(F.grid() == g)) fail(ErrorKind::kInvalidArgument, std::string(where) + ": grid mismatch");
}

}  // namespace

Point SpaceTimeDiffeo::image(int k, std::size_t i) const {
  return orientation_ == Orientation::kForward ? flow_->position(k, i) : flow_->inverse_position(k, i);
}

Point SpaceTimeDiffeo::preimage(int k, std::size_t i) const {
  return orientation_ == Orientation::kForward ? flow_->inverse_position(k, i) : flow_->position(k, i);
}

std::vector<double> SpaceTimeDiffeo::jacobian(int k, std::size_t i) const {
  return full_matrix(df_block(*this, k, i), flow_->dim());
}

std::vector<double> SpaceTimeDiffeo::inverse_jacobian(int k, std::size_t i) const {
  return full_matrix(dfinv_block(*this, k, i), flow_->dim());
}

ScalarField pushforward_density(const SpaceTimeDiffeo& F, const ScalarField& rho) {
  const PeriodicGrid& g = rho.grid();
  check_same_grid(F, g, "pushforward_density");
  ScalarField out(g);
  const int d = g.dim();
  for (int k = 0; k < g.n_t(); ++k) {
    auto dst = out.slice(k);
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      const Block b = dfinv_block(F, k, i);
      dst[i] = interpolate_slice(g, rho.slice(k), F.preimage(k, i)) * checked_det(b.m, d, "pushforward_density");
    }
  }
  return out;
}

Current1Diffuse pushforward_current(const SpaceTimeDiffeo& F, const Current1Diffuse& T) {
  const PeriodicGrid& g = T.grid();
  check_same_grid(F, g, "pushforward_current");
  const int d = g.dim();
  Current1Diffuse out = Current1Diffuse::zeros(g);
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      // With D(F^{-1}) = [[1, 0], [c, K]]: F_# T = det K (f_t, K^{-1} (f_x - c f_t)) at F^{-1}(y).
      const Block b = dfinv_block(F, k, i);
      const double det = checked_det(b.m, d, "pushforward_current");
      const SpaceMatrix kinv = inverse(b.m, d);
      const SliceStencil st(g, F.preimage(k, i));
      const double ft = st.apply(T.f_t.slice(k));
      Point fx{};
      for (int a = 0; a < d; ++a) fx[a] = st.apply(T.f_vec[a].slice(k)) - b.c[a] * ft;
      const std::size_t idx = static_cast<std::size_t>(k) * g.slice_size() + i;
      out.f_t.values()[idx] = det * ft;
      for (int a = 0; a < d; ++a) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += kinv[a * d + c] * fx[c];
        out.f_vec[a].values()[idx] = det * acc;
      }
    }
  return out;
}

OneForm pullback_form(const SpaceTimeDiffeo& F, const OneForm& w) {
  const PeriodicGrid& g = w.grid();
  check_same_grid(F, g, "pullback_form");
  const int d = g.dim();
  OneForm out(ScalarField(g), VectorField::zeros(g));
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      const Block b = df_block(F, k, i);
      const SliceStencil st(g, F.image(k, i));
      const double tau = st.apply(w.tau.slice(k));
      Point xi{};
      for (int a = 0; a < d; ++a) xi[a] = st.apply(w.xi[a].slice(k));
      const std::size_t idx = static_cast<std::size_t>(k) * g.slice_size() + i;
      double t = tau;
      for (int a = 0; a < d; ++a) t += b.c[a] * xi[a];
      out.tau.values()[idx] = t;
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) acc += b.m[a * d + c] * xi[a];
        out.xi[c].values()[idx] = acc;
      }
    }
  return out;
}

TwoForm pullback_form(const SpaceTimeDiffeo& F, const TwoForm& beta) {
  const PeriodicGrid& g = beta.grid();
  check_same_grid(F, g, "pullback_form");
  const int m = g.dim() + 1;
  TwoForm out(g);
  for (int k = 0; k < g.n_t(); ++k)
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      const std::vector<double> A = F.jacobian(k, i);
      const SliceStencil st(g, F.image(k, i));
      std::vector<double> b(static_cast<std::size_t>(m * m), 0.0);
      for (int c = 0; c < m; ++c)
        for (int e = c + 1; e < m; ++e) b[c * m + e] = st.apply(beta(c, e).slice(k));
      const std::size_t idx = static_cast<std::size_t>(k) * g.slice_size() + i;
      for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q) {
          double acc = 0.0;
          for (int c = 0; c < m; ++c)
            for (int e = c + 1; e < m; ++e)
              acc += b[c * m + e] * (A[c * m + p] * A[e * m + q] - A[e * m + p] * A[c * m + q]);
          out(p, q).values()[idx] = acc;
        }
    }
  return out;
}

ScalarField pullback_function(const SpaceTimeDiffeo& F, const ScalarField& xi) {
  const PeriodicGrid& g = xi.grid();
  check_same_grid(F, g, "pullback_function");
  ScalarField out(g);
  for (int k = 0; k < g.n_t(); ++k) {
    auto dst = out.slice(k);
    for (std::size_t i = 0; i < g.slice_size(); ++i) dst[i] = interpolate_slice(g, xi.slice(k), F.image(k, i));
  }
  return out;
}

Straightening straighten(const Current1Diffuse& T_delta, const FlowMap& flow) {
  Current1Diffuse s = pushforward_current(SpaceTimeDiffeo::inverse(flow), T_delta);
  const double defect = vertical_mass(s);
  return Straightening{std::move(s), defect};
}

void write_flow(const std::filesystem::path& path, const FlowMap& flow) {
  std::vector<ScalarField> ch;
  for (const auto& f : flow.positions) ch.push_back(f);
  for (const auto& f : flow.jacobians) ch.push_back(f);
  ch.push_back(flow.determinants);
  for (const auto& f : flow.velocities) ch.push_back(f);
  for (const auto& f : flow.inverse_positions) ch.push_back(f);
  for (const auto& f : flow.inverse_jacobians) ch.push_back(f);
  ch.push_back(flow.inverse_determinants);
  io::write_fields(path, ch);
}

}  // namespace tcur
