#include "tcur/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "tcur/commutator.hpp"
#include "tcur/error.hpp"
#include "tcur/field_io.hpp"
#include "tcur/flow.hpp"
#include "tcur/mollify.hpp"
#include "tcur/pde.hpp"
#include "tcur/random_fields.hpp"
#include "tcur/uniqueness.hpp"

namespace tcur::experiments {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  fail(ErrorKind::kConfig, "config: " + where + ": " + what);
}

// ---------------------------------------------------------------------------
// Schema-checked view of one JSON object. Unknown keys are rejected.

class Section {
 public:
  Section(const Json* j, std::string path, std::vector<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (j_ == nullptr) return;
    if (!j_->is_object()) config_error(path_, "expected an object");
    for (const auto& [key, _] : j_->items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) config_error(where(key), "unknown key");
  }

  bool has(const std::string& key) const { return j_ != nullptr && j_->contains(key) && !j_->at(key).is_null(); }
  bool is_null(const std::string& key) const { return j_ != nullptr && j_->contains(key) && j_->at(key).is_null(); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_number()) config_error(where(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error(where(key), "must be finite");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_number_integer()) config_error(where(key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      config_error(where(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_boolean()) config_error(where(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& choices) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_string()) config_error(where(key), "expected a string");
    const std::string s = v.get<std::string>();
    if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
      std::string list;
      for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
      config_error(where(key), "'" + s + "' is not one of: " + list);
    }
    return s;
  }

  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_array()) config_error(where(key), "expected an array");
    std::vector<T> out;
    for (const Json& e : v) {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) config_error(where(key), "expected an array of strings");
      } else if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) config_error(where(key), "expected an array of integers");
      } else {
        if (!e.is_number()) config_error(where(key), "expected an array of numbers");
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

  Section sub(const std::string& key, std::vector<std::string> allowed) const {
    return Section(has(key) ? &j_->at(key) : nullptr, where(key), std::move(allowed));
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

 private:
  const Json* j_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Problem specification shared by the commands.

struct GridSpec {
  int dim = 1, n = 0, n_t = 0;
  PeriodicGrid make() const { return PeriodicGrid(dim, n, n_t); }
};

GridSpec parse_grid(const Section& root, int n, int n_t) {
  const Section s = root.sub("grid", {"dim", "n", "n_t"});
  GridSpec g{s.integer("dim", 1), s.integer("n", n), s.integer("n_t", n_t)};
  try {
    (void)g.make();
  } catch (const Error& e) {
    config_error(root.where("grid"), e.what());
  }
  return g;
}

struct VelocitySpec {
  std::string type = "sine";
  std::vector<double> value;
  double mean = 0.5, amplitude = 0.25;
  RoughFieldSpec rough;
};

struct Rho0Spec {
  std::string type = "cosine";
  double mean = 1.0, amplitude = 0.5;
  int kmax = 3;
  std::uint64_t seed = 1;
};

struct ProblemSpec {
  VelocitySpec velocity;
  Rho0Spec rho0;
  double p = 2.0;
};

ProblemSpec parse_problem(const Section& root, const GridSpec& grid, std::uint64_t seed) {
  const Section s = root.sub("problem", {"velocity", "rho0", "p"});
  ProblemSpec p;
  p.p = s.number("p", 2.0);
  if (p.p < 1.0) config_error(s.where("p"), "must be >= 1");

  const Section v = s.sub("velocity", {"type", "value", "mean", "amplitude", "decay_alpha", "mode_cap", "seed"});
  p.velocity.type = v.text("type", "sine", {"zero", "constant", "sine", "rough"});
  p.velocity.mean = v.number("mean", 0.5);
  p.velocity.amplitude = v.number("amplitude", 0.25);
  if (p.velocity.type == "constant") {
    if (!v.has("value")) config_error(v.where("value"), "required for a constant velocity");
    p.velocity.value = v.list<double>("value", {});
    if (p.velocity.value.size() == 1) p.velocity.value.assign(static_cast<std::size_t>(grid.dim), p.velocity.value[0]);
    if (p.velocity.value.size() != static_cast<std::size_t>(grid.dim))
      config_error(v.where("value"), "needs one entry per spatial dimension");
  }
  if (p.velocity.type == "rough") {
    RoughFieldSpec& r = p.velocity.rough;
    r.p = p.p;
    r.decay_alpha = v.number("decay_alpha", 1.75);
    r.mode_cap = v.integer("mode_cap", 32);
    r.mean = p.velocity.mean;
    r.amplitude = p.velocity.amplitude;
    r.seed = v.unsigned_integer("seed", seed);
    if (r.mode_cap < 1 || r.mode_cap > grid.n / 2 - 1)
      config_error(v.where("mode_cap"), "must lie in [1, n/2 - 1]");
    if (r.amplitude < 0.0) config_error(v.where("amplitude"), "must be >= 0");
  }

  const Section r = s.sub("rho0", {"type", "mean", "amplitude", "kmax"});
  p.rho0.type = r.text("type", "cosine", {"constant", "cosine", "random"});
  p.rho0.mean = r.number("mean", 1.0);
  p.rho0.amplitude = r.number("amplitude", 0.5);
  p.rho0.kmax = r.integer("kmax", 3);
  p.rho0.seed = seed;
  if (p.rho0.kmax < 1 || p.rho0.kmax > grid.n / 2 - 1) config_error(r.where("kmax"), "must lie in [1, n/2 - 1]");
  return p;
}

struct BuiltVelocity {
  VectorField u;
  std::optional<RoughField> rough;
};

BuiltVelocity build_velocity(const VelocitySpec& s, const PeriodicGrid& g) {
  if (s.type == "rough") {
    RoughField rf = rough_field(s.rough, g);
    VectorField u = rf.u;
    return {std::move(u), std::move(rf)};
  }
  std::vector<ScalarField> comps;
  for (int j = 0; j < g.dim(); ++j) {
    if (s.type == "zero") {
      comps.emplace_back(g);
    } else if (s.type == "constant") {
      const double c = s.value[static_cast<std::size_t>(j)];
      comps.push_back(ScalarField::from_function(g, [c](double, const Point&) { return c; }));
    } else {
      // u_j = mean + amplitude sin(2 pi x_j).
      comps.push_back(ScalarField::from_function(
          g, [&, j](double, const Point& x) { return s.mean + s.amplitude * std::sin(kTwoPi * x[j]); }));
    }
  }
  return {VectorField(std::move(comps)), std::nullopt};
}

std::vector<double> build_rho0(const Rho0Spec& s, const PeriodicGrid& g) {
  std::vector<double> out(g.slice_size(), s.mean);
  if (s.type == "cosine") {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s.amplitude * std::cos(kTwoPi * g.center(i)[0]);
  } else if (s.type == "random") {
    std::mt19937_64 rng(s.seed);
    const ScalarField f = random::random_smooth(g, rng, s.kmax, 1.0, false);
    double peak = 0.0;
    for (double v : f.slice(0)) peak = std::max(peak, std::abs(v));
    const auto f0 = f.slice(0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += peak > 0.0 ? s.amplitude * f0[i] / peak : 0.0;
  }
  return out;
}

struct KernelSpec {
  std::string profile = "bump";
  double skew = 0.5;
  std::vector<double> radius, value;

  MollifierKernel make(const PeriodicGrid& g, double delta) const {
    if (profile == "skewed") return MollifierKernel::skewed(g, delta, skew);
    if (profile == "table") return MollifierKernel::from_table(g, delta, radius, value);
    return MollifierKernel::bump(g, delta);
  }
};

KernelSpec parse_kernel(const Section& root) {
  const Section s = root.sub("kernel", {"profile", "skew", "radius", "value"});
  KernelSpec k;
  k.profile = s.text("profile", "bump", {"bump", "skewed", "table"});
  k.skew = s.number("skew", 0.5);
  if (!(std::abs(k.skew) < 1.0)) config_error(s.where("skew"), "must satisfy |skew| < 1");
  if (k.profile == "table") {
    k.radius = s.list<double>("radius", {});
    k.value = s.list<double>("value", {});
    if (k.radius.size() < 2 || k.radius.size() != k.value.size())
      config_error(s.where("radius"), "table needs matching radius and value arrays of length >= 2");
  }
  return k;
}

// Checks that every delta builds a resolved kernel on `g` (before any compute).
void check_deltas(const std::string& where, const std::vector<double>& deltas, const PeriodicGrid& g,
                  const KernelSpec& k, bool decreasing) {
  if (deltas.empty()) config_error(where, "must not be empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (decreasing && i > 0 && !(deltas[i] < deltas[i - 1])) config_error(where, "must be strictly decreasing");
    if (!(deltas[i] >= 2.0 * g.h() * (1.0 - 1e-12))) {
      std::ostringstream msg;
      msg << "delta " << deltas[i] << " is below 2h = " << 2.0 * g.h();
      config_error(where, msg.str());
    }
    try {
      (void)k.make(g, deltas[i]);
    } catch (const Error& e) {
      config_error(where, e.what());
    }
  }
}

struct SolverSpec {
  ContinuityScheme scheme = ContinuityScheme::kSemiLagrangian;
  ContinuityOptions options;
};

ContinuityScheme parse_scheme(const std::string& name) {
  return name == "finite-volume" ? ContinuityScheme::kFiniteVolume : ContinuityScheme::kSemiLagrangian;
}

const std::vector<std::string> kSchemeNames = {"semi-lagrangian", "finite-volume"};

SolverSpec parse_solver(const Section& root) {
  const Section s = root.sub("solver", {"scheme", "substeps", "fv_substeps"});
  SolverSpec out;
  out.scheme = parse_scheme(s.text("scheme", "semi-lagrangian", kSchemeNames));
  out.options.substeps = s.integer("substeps", 4);
  out.options.fv_substeps = s.integer("fv_substeps", 1);
  if (out.options.substeps < 1) config_error(s.where("substeps"), "must be >= 1");
  if (out.options.fv_substeps < 1) config_error(s.where("fv_substeps"), "must be >= 1");
  return out;
}

DerivativeScheme parse_derivative(const Section& root) {
  return root.text("derivative", "spectral", {"spectral", "central"}) == "central" ? DerivativeScheme::kCentral
                                                                                : DerivativeScheme::kSpectral;
}

std::uint64_t parse_seed(const Section& root, const RunOptions& opt) {
  const std::uint64_t s = root.unsigned_integer("seed", 1);
  return opt.seed.value_or(s);
}

void check_schema_version(const Json& config) {
  if (!config.is_object()) config_error("<root>", "expected an object");
  if (!config.contains("schema_version")) config_error("<root>.schema_version", "required");
  const Json& v = config.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    config_error("<root>.schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
}

const std::vector<std::string> kCommon = {"schema_version", "seed", "description"};

std::vector<std::string> keys(std::initializer_list<std::string> extra) {
  std::vector<std::string> k = kCommon;
  k.insert(k.end(), extra);
  return k;
}

// ---------------------------------------------------------------------------
// Report helpers.

void add_check(Outcome& out, std::string name, double value, std::string relation, double threshold) {
  CheckResult c{std::move(name), value, threshold, relation, false};
  if (relation == "<=") c.passed = value <= threshold;
  else if (relation == "<") c.passed = value < threshold;
  else if (relation == ">=") c.passed = value >= threshold;
  else if (relation == ">") c.passed = value > threshold;
  else fail(ErrorKind::kInternal, "add_check: unknown relation " + relation);
  out.checks.push_back(std::move(c));
}

void add_range_check(Outcome& out, std::string name, double value, double lo, double hi) {
  CheckResult c{std::move(name), value, lo, "in", value >= lo && value <= hi};
  c.upper = hi;
  out.checks.push_back(std::move(c));
}

void add_trivial_check(Outcome& out, std::string name) {
  out.checks.push_back(CheckResult{std::move(name), 0.0, 0.0, "trivial", true});
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << "\n";
    os_ << std::setprecision(17);
  }
  template <class... Ts>
  void row(const Ts&... v) {
    bool first = true;
    ((os_ << (first ? "" : ",") << v, first = false), ...);
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

Json grid_json(const PeriodicGrid& g) { return Json{{"dim", g.dim()}, {"n", g.n()}, {"n_t", g.n_t()}}; }

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double boundary_pair_error(double lhs, double rhs) { return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)); }

// ---------------------------------------------------------------------------
// null-boundary-check

Outcome run_null_boundary(const Json& config, const RunOptions& opt) {
  const Section root(&config, "<root>", keys({"grid", "instances", "kmax", "forms", "adversarial", "tolerances", "lp"}));
  const std::uint64_t seed = parse_seed(root, opt);
  const GridSpec gs = parse_grid(root, 16, 16);
  const int instances = root.integer("instances", 20);
  const int kmax = root.integer("kmax", 3);
  const int forms = root.integer("forms", 5);
  const bool adversarial = root.boolean("adversarial", true);
  const Section tol = root.sub("tolerances", {"lp_slack", "round_trip", "gap"});
  const double slack = tol.number("lp_slack", 1e-6);
  const double round_trip_tol = tol.number("round_trip", 1e-8);
  const double gap_tol = tol.number("gap", 1e-6);
  const Section lps = root.sub("lp", {"max_iterations", "tolerance"});
  FlatNormOptions lpo;
  lpo.max_iterations = lps.integer("max_iterations", 200);
  lpo.lp_tolerance = lps.number("tolerance", 1e-10);
  if (instances < 0) config_error(root.where("instances"), "must be >= 0");
  if (forms < 1) config_error(root.where("forms"), "must be >= 1");
  if (kmax < 1 || kmax > gs.n / 2 - 1) config_error(root.where("kmax"), "must lie in [1, n/2 - 1]");
  {
    const PeriodicGrid g = gs.make();
    if (g.size() * static_cast<std::size_t>(g.dim()) > lpo.max_variables)
      config_error(root.where("grid"), "too large for the dense flat-norm LP");
  }

  const PeriodicGrid g = gs.make();
  Outcome out;
  std::mt19937_64 rng(seed);
  Csv csv({"instance", "vertical_mass", "lp_value", "lp_dual", "relative_gap", "iterations", "round_trip_error",
           "passed"});
  Json rows = Json::array();
  double worst_ratio = 0.0, worst_round_trip = 0.0, worst_gap = 0.0;
  const ScalarField envelope = ScalarField::from_function(g, [](double t, const Point&) { return t * (1.0 - t); });
  for (int it = 0; it < instances; ++it) {
    // dS0 for S0 = t (1 - t) phi(x): null boundary, primitive round trip exact.
    std::vector<ScalarField> F;
    for (int j = 0; j < g.dim(); ++j) F.push_back(envelope * random::random_smooth(g, rng, kmax, 1.0, false));
    const Current1Diffuse T = boundary2(Current2Diffuse(VectorField(std::move(F))));

    const Current1Diffuse back = boundary2(primitive_two_current(T));
    double rt = 0.0;
    for (int f = 0; f < forms; ++f) {
      const OneForm w = random::random_form(g, rng, kmax);
      rt = std::max(rt, boundary_pair_error(pair(back, w), pair(T, w)));
    }
    const FlatNormCertificate cert = flat_norm_lp(T, lpo);
    const double vm = vertical_mass(T);
    const double ratio = vm > 0.0 ? cert.value / vm : (cert.value == 0.0 ? 0.0 : kNaN);
    const bool ok = ratio <= 1.0 + slack && rt <= round_trip_tol && cert.relative_gap <= gap_tol;
    worst_ratio = std::max(worst_ratio, ratio);
    worst_round_trip = std::max(worst_round_trip, rt);
    worst_gap = std::max(worst_gap, cert.relative_gap);
    csv.row(it, vm, cert.value, cert.dual, cert.relative_gap, cert.iterations, rt, ok ? 1 : 0);
    rows.push_back(Json{{"instance", it},
                        {"vertical_mass", vm},
                        {"lp_value", cert.value},
                        {"lp_dual", cert.dual},
                        {"relative_gap", cert.relative_gap},
                        {"iterations", cert.iterations},
                        {"converged", cert.converged},
                        {"round_trip_error", rt},
                        {"passed", ok}});
  }

  out.report["grid"] = grid_json(g);
  out.report["instances"] = rows;
  if (instances > 0) {
    add_check(out, "lp_over_vertical_mass", worst_ratio, "<=", 1.0 + slack);
    add_check(out, "primitive_round_trip_pairing_error", worst_round_trip, "<=", round_trip_tol);
    add_check(out, "relative_duality_gap", worst_gap, "<=", gap_tol);
  } else {
    add_trivial_check(out, "no_instances");
  }

  if (adversarial) {
    // f_1 = 1 (purely vertical, null boundary): the ratio is reported, not asserted.
    std::vector<ScalarField> comps;
    comps.push_back(ScalarField::from_function(g, [](double, const Point&) { return 1.0; }));
    for (int j = 1; j < g.dim(); ++j) comps.emplace_back(g);
    const Current1Diffuse T(ScalarField(g), VectorField(std::move(comps)));
    const FlatNormCertificate cert = flat_norm_lp(T, lpo);
    const double vm = vertical_mass(T);
    out.report["adversarial"] =
        Json{{"lp_value", cert.value}, {"vertical_mass", vm}, {"ratio", cert.value / vm}, {"relative_gap", cert.relative_gap}};
  }
  out.csv.push_back({"null_boundary.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------------------
// commutator-sweep

struct ProblemData {
  PeriodicGrid grid;
  VectorField u;
  std::optional<RoughField> rough;
  ScalarField rho;
};

ProblemData build_solution(const GridSpec& gs, const ProblemSpec& ps, const SolverSpec& solver) {
  const PeriodicGrid g = gs.make();
  BuiltVelocity v = build_velocity(ps.velocity, g);
  ContinuityProblem prob = ContinuityProblem::make(v.u, build_rho0(ps.rho0, g), NormExponents::from_p(ps.p));
  ScalarField rho = solve_continuity(prob, solver.scheme, solver.options);
  return ProblemData{g, std::move(v.u), std::move(v.rough), std::move(rho)};
}

Json rough_json(const RoughField& r) {
  return Json{{"sup_norm", r.sup_norm},
              {"sobolev_seminorm", r.sobolev_seminorm},
              {"lipschitz_seminorm", r.lipschitz_seminorm},
              {"divergence_bound", r.divergence_bound},
              {"warning", r.warning}};
}

Outcome run_commutator_sweep(const Json& config, const RunOptions& opt) {
  const Section root(&config, "<root>",
                     keys({"grid", "problem", "kernel", "deltas", "solver", "derivative", "presmooth_cells", "checks"}));
  const std::uint64_t seed = parse_seed(root, opt);
  const GridSpec gs = parse_grid(root, 512, 64);
  const ProblemSpec ps = parse_problem(root, gs, seed);
  const KernelSpec ks = parse_kernel(root);
  const SolverSpec solver = parse_solver(root);
  const std::vector<double> deltas = root.list<double>("deltas", {0.2, 0.1, 0.05, 0.025});
  check_deltas(root.where("deltas"), deltas, gs.make(), ks, true);
  SweepOptions so;
  so.scheme = parse_derivative(root);
  so.presmooth_cells = root.integer("presmooth_cells", 0);
  if (so.presmooth_cells != 0 && so.presmooth_cells < 2) config_error(root.where("presmooth_cells"), "must be 0 or >= 2");
  if (ks.profile == "table") config_error(root.where("kernel"), "the sweep supports the bump and skewed profiles");
  so.kernel = ks.profile;
  so.skew = ks.skew;
  const Section cs = root.sub("checks", {"require_monotone", "min_rate", "positive_rate", "max_r_norm", "difference_quotient"});
  const bool require_monotone = cs.boolean("require_monotone", true);
  // An explicit null disables the rate check.
  const bool rate_check = !cs.is_null("min_rate");
  const double min_rate = cs.number("min_rate", 0.8);
  const bool positive_rate = cs.boolean("positive_rate", false);
  const std::optional<double> max_r_norm = cs.optional_number("max_r_norm");
  const std::string dq_mode = cs.text("difference_quotient", "none", {"none", "decay", "plateau"});

  ProblemData pd = build_solution(gs, ps, solver);
  const CommutatorReport rep = commutator_sweep(pd.u, pd.rho, deltas, so);

  Outcome out;
  Csv csv({"delta", "r_norm", "t1", "t2", "t3", "t4", "difference_quotient", "t4_product_bound", "first_moment"});
  Json rows = Json::array();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const MollifierKernel k = ks.make(pd.grid, deltas[i]);
    double moment = 0.0;
    for (double m : kernel_moment(k, 1)) moment = std::max(moment, std::abs(m));
    const VectorField u_used = so.presmooth_cells > 0
                                   ? mollify(pd.u, MollifierKernel::bump(pd.grid, so.presmooth_cells * pd.grid.h()))
                                   : pd.u;
    const ScalarField rho_used = so.presmooth_cells > 0
                                     ? mollify(pd.rho, MollifierKernel::bump(pd.grid, so.presmooth_cells * pd.grid.h()))
                                     : pd.rho;
    const double t4_bound = product_form(u_used, rho_used, k).bound;
    const auto& t = rep.term_norms[i];
    csv.row(deltas[i], rep.l1_norms[i], t[0], t[1], t[2], t[3], rep.difference_quotient_norms[i], t4_bound, moment);
    rows.push_back(Json{{"delta", deltas[i]},
                        {"r_norm", rep.l1_norms[i]},
                        {"terms", Json::array({t[0], t[1], t[2], t[3]})},
                        {"difference_quotient", rep.difference_quotient_norms[i]},
                        {"t4_product_bound", t4_bound},
                        {"first_moment", moment}});
  }
  out.report["grid"] = grid_json(pd.grid);
  out.report["kernel"] = ks.profile;
  out.report["sweep"] = rows;
  out.report["monotone"] = rep.monotone;
  out.report["vanishing"] = rep.vanishing;
  out.report["rate_defined"] = rep.rate_defined;
  out.report["fitted_rate"] = rep.rate_defined ? rep.fitted_rate : kNaN;
  out.report["fit_residual"] = rep.rate_defined ? rep.fit_residual : kNaN;
  if (pd.rough) {
    out.report["rough_field"] = rough_json(*pd.rough);
    if (pd.rough->warning) out.warnings.push_back(pd.rough->message);
  }

  const bool vanishing = rep.vanishing;
  if (require_monotone) {
    if (vanishing) add_trivial_check(out, "strictly_decreasing");
    else add_check(out, "strictly_decreasing", rep.monotone ? 1.0 : 0.0, ">=", 1.0);
  }
  if (rate_check) {
    if (vanishing) add_trivial_check(out, "fitted_rate");
    else add_check(out, "fitted_rate", rep.rate_defined ? rep.fitted_rate : kNaN, ">=", min_rate);
  }
  if (positive_rate) {
    if (vanishing) add_trivial_check(out, "fitted_rate_positive");
    else add_check(out, "fitted_rate_positive", rep.rate_defined ? rep.fitted_rate : kNaN, ">", 0.0);
  }
  if (max_r_norm) add_check(out, "max_r_norm", max_of(rep.l1_norms), "<=", *max_r_norm);
  if (dq_mode != "none" && deltas.size() >= 2) {
    const double first = rep.difference_quotient_norms.front();
    const double ratio = first > 0.0 ? rep.difference_quotient_norms.back() / first : 0.0;
    // Even kernels: ||(u - u_delta)/delta||_1 = O(delta). Otherwise it tends to |first moment| ||grad u||_1.
    if (dq_mode == "decay") add_check(out, "difference_quotient_ratio", ratio, "<=", 2.0 * deltas.back() / deltas.front());
    else add_check(out, "difference_quotient_ratio", ratio, ">=", 0.5);
  }
  out.csv.push_back({"commutator.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------------------
// straighten-check

struct StraightenMeasure {
  int n = 0, n_t = 0;
  double defect = 0.0, mass = 0.0, relative = 0.0, jacobian_identity = 0.0;
};

StraightenMeasure measure_straightening(const GridSpec& gs, const ProblemSpec& ps, const SolverSpec& solver,
                                        const KernelSpec& ks, double delta) {
  const ProblemData pd = build_solution(gs, ps, solver);
  const MollifierKernel k = ks.make(pd.grid, delta);
  const Current1Diffuse T_delta = regularized_current(pd.rho, pd.u, k);
  const FlowMap flow = compute_flow(mollify(pd.u, k), solver.options.substeps);
  const Straightening s = straighten(T_delta, flow);
  StraightenMeasure m;
  m.n = gs.n;
  m.n_t = gs.n_t;
  m.defect = s.defect;
  m.mass = mass(T_delta);
  m.relative = m.mass > 0.0 ? m.defect / m.mass : 0.0;
  m.jacobian_identity = jacobian_identity_error(flow, InverseSampling::kInterpolated);
  return m;
}

Outcome run_straighten(const Json& config, const RunOptions& opt) {
  const Section root(&config, "<root>", keys({"grid", "problem", "kernel", "delta", "solver", "refine", "tolerances"}));
  const std::uint64_t seed = parse_seed(root, opt);
  const GridSpec gs = parse_grid(root, 256, 256);
  const ProblemSpec ps = parse_problem(root, gs, seed);
  const KernelSpec ks = parse_kernel(root);
  const SolverSpec solver = parse_solver(root);
  const double delta = root.number("delta", 0.1);
  check_deltas(root.where("delta"), {delta}, gs.make(), ks, false);
  const bool refine = root.boolean("refine", true);
  const Section tol = root.sub("tolerances", {"relative_defect", "refinement_ratio", "refinement_band", "jacobian_identity"});
  const double rel_tol = tol.number("relative_defect", 1e-3);
  const double ratio_center = tol.number("refinement_ratio", 0.5);
  const double ratio_band = tol.number("refinement_band", 0.3);
  const double jac_tol = tol.number("jacobian_identity", 1e-6);
  GridSpec fine = gs;
  fine.n *= 2;
  fine.n_t *= 2;
  if (refine) {
    try {
      (void)fine.make();
    } catch (const Error& e) {
      config_error(root.where("refine"), e.what());
    }
  }

  Outcome out;
  Csv csv({"n", "n_t", "defect", "mass", "relative_defect", "jacobian_identity"});
  std::vector<StraightenMeasure> ms{measure_straightening(gs, ps, solver, ks, delta)};
  if (refine) ms.push_back(measure_straightening(fine, ps, solver, ks, delta));
  Json rows = Json::array();
  for (const auto& m : ms) {
    csv.row(m.n, m.n_t, m.defect, m.mass, m.relative, m.jacobian_identity);
    rows.push_back(Json{{"n", m.n},
                        {"n_t", m.n_t},
                        {"defect", m.defect},
                        {"mass", m.mass},
                        {"relative_defect", m.relative},
                        {"jacobian_identity", m.jacobian_identity}});
  }
  out.report["delta"] = delta;
  out.report["kernel"] = ks.profile;
  out.report["levels"] = rows;
  add_check(out, "relative_defect", ms[0].relative, "<=", rel_tol);
  if (refine) {
    if (ms[0].defect == 0.0) {
      add_trivial_check(out, "refinement_ratio");
    } else {
      const double ratio = ms[1].defect / ms[0].defect;
      out.report["refinement_ratio"] = ratio;
      out.report["observed_order"] = -std::log2(ratio);
      add_range_check(out, "refinement_ratio", ratio, ratio_center * (1.0 - ratio_band), ratio_center * (1.0 + ratio_band));
    }
  }
  add_check(out, "jacobian_identity", ms[0].jacobian_identity, "<=", jac_tol);
  out.csv.push_back({"straighten.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------------------
// pushforward-check

Outcome run_pushforward(const Json& config, const RunOptions& opt) {
  const Section root(&config, "<root>",
                     keys({"grid", "problem", "kernel", "delta", "substeps", "forms", "test_functions", "kmax", "tolerances"}));
  const std::uint64_t seed = parse_seed(root, opt);
  const GridSpec gs = parse_grid(root, 128, 128);
  const ProblemSpec ps = parse_problem(root, gs, seed);
  const KernelSpec ks = parse_kernel(root);
  const std::optional<double> delta = root.optional_number("delta");
  if (delta) check_deltas(root.where("delta"), {*delta}, gs.make(), ks, false);
  const int substeps = root.integer("substeps", 4);
  const int forms = root.integer("forms", 20);
  const int tests = root.integer("test_functions", 5);
  const int kmax = root.integer("kmax", 3);
  if (substeps < 1) config_error(root.where("substeps"), "must be >= 1");
  if (forms < 1) config_error(root.where("forms"), "must be >= 1");
  if (tests < 1) config_error(root.where("test_functions"), "must be >= 1");
  if (kmax < 1 || kmax > gs.n / 2 - 1) config_error(root.where("kmax"), "must lie in [1, n/2 - 1]");
  const Section tol = root.sub("tolerances", {"duality", "boundary", "mass"});
  const double dual_tol = tol.number("duality", 1e-4);
  const double bdry_tol = tol.number("boundary", 1e-4);
  const double mass_tol = tol.number("mass", 1e-3);

  const PeriodicGrid g = gs.make();
  VectorField u = build_velocity(ps.velocity, g).u;
  if (delta) u = mollify(u, ks.make(g, *delta));
  const FlowMap flow = compute_flow(u, substeps);
  std::mt19937_64 rng(seed);
  const Current1Diffuse T = random::random_current(g, rng, kmax);

  Outcome out;
  Csv csv({"orientation", "form", "lhs", "rhs", "error"});
  double worst_dual = 0.0;
  for (const SpaceTimeDiffeo F : {SpaceTimeDiffeo::forward(flow), SpaceTimeDiffeo::inverse(flow)}) {
    const char* name = F.orientation() == Orientation::kForward ? "forward" : "inverse";
    const Current1Diffuse pushed = pushforward_current(F, T);
    for (int r = 0; r < forms; ++r) {
      const OneForm w = random::random_form(g, rng, kmax);
      const double lhs = pair(pushed, w);
      const double rhs = pair(T, pullback_form(F, w));
      const double e = boundary_pair_error(lhs, rhs);
      worst_dual = std::max(worst_dual, e);
      csv.row(name, r, lhs, rhs, e);
    }
  }

  // <d(F_# T), xi> = <dT, xi o F> for xi vanishing near t = 1.
  const SpaceTimeDiffeo F = SpaceTimeDiffeo::forward(flow);
  const BoundaryDistribution lhs_b = boundary1(pushforward_current(F, T));
  const BoundaryDistribution rhs_b = boundary1(T);
  const ScalarField cutoff =
      ScalarField::from_function(g, [](double t, const Point&) { return std::pow(std::max(0.0, 0.9 - t), 3); });
  double worst_bdry = 0.0;
  for (int r = 0; r < tests; ++r) {
    const ScalarField xi = random::random_smooth(g, rng, kmax) * cutoff;
    worst_bdry = std::max(worst_bdry, boundary_pair_error(pair(lhs_b, xi), pair(rhs_b, pullback_function(F, xi))));
  }

  // ||F_# rho||_1 = ||rho||_1 for a signed density. Per-slice ratios are reported only:
  // midpoint quadrature of |rho| near sign changes is O(h^2) on its own.
  const ScalarField rho = random::random_smooth(g, rng, kmax);
  const std::vector<double> before = slice_lp_norms(rho, 1.0);
  const double total_before = lp_norm(rho, 1.0);
  double worst_mass = 0.0, worst_slice = 0.0;
  for (const SpaceTimeDiffeo G : {SpaceTimeDiffeo::forward(flow), SpaceTimeDiffeo::inverse(flow)}) {
    const ScalarField pushed = pushforward_density(G, rho);
    worst_mass = std::max(worst_mass, std::abs(lp_norm(pushed, 1.0) / total_before - 1.0));
    const std::vector<double> after = slice_lp_norms(pushed, 1.0);
    for (std::size_t k = 0; k < before.size(); ++k)
      if (before[k] > 0.0) worst_slice = std::max(worst_slice, std::abs(after[k] / before[k] - 1.0));
  }
  out.report["slice_mass_error"] = worst_slice;

  out.report["grid"] = grid_json(g);
  out.report["duality_error"] = worst_dual;
  out.report["boundary_commutation_error"] = worst_bdry;
  out.report["mass_preservation_error"] = worst_mass;
  out.report["flow_clamp_events"] = flow.diagnostics.clamped;
  add_check(out, "pushforward_duality", worst_dual, "<=", dual_tol);
  add_check(out, "boundary_commutation", worst_bdry, "<=", bdry_tol);
  add_check(out, "density_mass_preservation", worst_mass, "<=", mass_tol);
  out.csv.push_back({"pushforward.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------------------
// flatnorm-lp

Outcome run_flatnorm(const Json& config, const RunOptions& opt) {
  const Section root(&config, "<root>", keys({"current", "lp", "tolerances"}));
  (void)parse_seed(root, opt);
  if (!root.has("current")) config_error(root.where("current"), "required (path to a current manifest)");
  std::filesystem::path manifest = root.text("current", "", {});
  if (manifest.is_relative()) manifest = opt.base_dir / manifest;
  const Section lps = root.sub("lp", {"max_iterations", "tolerance", "max_variables"});
  FlatNormOptions lpo;
  lpo.max_iterations = lps.integer("max_iterations", 200);
  lpo.lp_tolerance = lps.number("tolerance", 1e-10);
  lpo.max_variables = static_cast<std::size_t>(lps.integer("max_variables", 8192));
  const double gap_tol = root.sub("tolerances", {"gap"}).number("gap", 1e-6);
  const Current1Diffuse T = read_current1_manifest(manifest);
  if (T.grid().size() * static_cast<std::size_t>(T.dim()) > lpo.max_variables)
    config_error(root.where("current"), "current too large for the dense flat-norm LP (raise lp.max_variables)");

  const FlatNormCertificate cert = flat_norm_lp(T, lpo);
  Outcome out;
  Json c = certificate_json(cert);
  c["vertical_mass"] = vertical_mass(T);
  c["horizontal_mass"] = horizontal_mass(T);
  c["mass"] = mass(T);
  c["boundary_mass"] = boundary1(T).mass();
  out.report["grid"] = grid_json(T.grid());
  out.report["certificate"] = c;
  add_check(out, "converged", cert.converged ? 1.0 : 0.0, ">=", 1.0);
  add_check(out, "relative_duality_gap", cert.relative_gap, "<=", gap_tol);
  out.artifacts.emplace_back("certificate.json", c);
  return out;
}

// ---------------------------------------------------------------------------
// uniqueness

Outcome run_uniqueness(const Json& config, const RunOptions& opt) {
  const Section root(&config, "<root>",
                     keys({"dim", "resolutions", "time_ratio", "problem", "kernel", "deltas", "schemes", "solver",
                           "lp_check", "tolerances"}));
  const std::uint64_t seed = parse_seed(root, opt);
  const int dim = root.integer("dim", 1);
  const std::vector<int> resolutions = root.list<int>("resolutions", {128, 256, 512});
  const double time_ratio = root.number("time_ratio", 1.0);
  if (resolutions.empty()) config_error(root.where("resolutions"), "must not be empty");
  if (!(time_ratio > 0.0)) config_error(root.where("time_ratio"), "must be > 0");
  auto grid_for = [&](int n) {
    GridSpec g{dim, n, static_cast<int>(std::lround(time_ratio * n))};
    try {
      (void)g.make();
    } catch (const Error& e) {
      config_error(root.where("resolutions"), e.what());
    }
    return g;
  };
  std::vector<GridSpec> grids;
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (i > 0 && !(resolutions[i] > resolutions[i - 1])) config_error(root.where("resolutions"), "must be increasing");
    grids.push_back(grid_for(resolutions[i]));
  }
  const ProblemSpec ps = parse_problem(root, grids.front(), seed);
  const KernelSpec ks = parse_kernel(root);
  if (ks.profile == "table") config_error(root.where("kernel"), "uniqueness supports the bump and skewed profiles");
  const std::vector<double> deltas = root.list<double>("deltas", {0.2, 0.1, 0.05, 0.025});
  const std::vector<std::string> schemes = root.list<std::string>("schemes", {"semi-lagrangian", "finite-volume"});
  if (schemes.size() != 2) config_error(root.where("schemes"), "needs exactly two schemes");
  for (const auto& s : schemes)
    if (std::find(kSchemeNames.begin(), kSchemeNames.end(), s) == kSchemeNames.end())
      config_error(root.where("schemes"), "unknown scheme '" + s + "'");
  const SolverSpec solver = parse_solver(root);
  const Section lpc = root.sub("lp_check", {"enabled", "n"});
  const bool lp_enabled = lpc.boolean("enabled", true);
  const int lp_n = lpc.integer("n", 16);
  const Section tol = root.sub("tolerances", {"boundary_warning", "transport_mass"});
  const double boundary_warning = tol.number("boundary_warning", 1e-2);
  const double transport_tol = tol.number("transport_mass", 1e-3);

  // Admissible deltas per resolution (delta >= 2h); validated before compute.
  auto admissible = [&](const GridSpec& gs, const std::string& where) {
    const PeriodicGrid g = gs.make();
    std::vector<double> ok;
    for (double d : deltas)
      if (d >= 2.0 * g.h() * (1.0 - 1e-12)) ok.push_back(d);
    if (ok.empty()) config_error(where, "no delta >= 2h at n = " + std::to_string(gs.n));
    check_deltas(root.where("deltas"), ok, g, ks, false);
    return ok;
  };
  std::vector<std::vector<double>> used;
  for (const auto& gs : grids) used.push_back(admissible(gs, root.where("deltas")));
  std::optional<GridSpec> lp_grid;
  std::vector<double> lp_deltas;
  if (lp_enabled) {
    lp_grid = grid_for(lp_n);
    if (lp_grid->make().size() * static_cast<std::size_t>(dim) > FlatNormOptions{}.max_variables)
      config_error(lpc.where("n"), "too large for the dense flat-norm LP");
    lp_deltas = admissible(*lp_grid, lpc.where("n"));
  }

  UniquenessOptions uo;
  uo.kernel = ks.profile;
  uo.flow_substeps = solver.options.substeps;
  auto solve_pair = [&](const GridSpec& gs) {
    const PeriodicGrid g = gs.make();
    BuiltVelocity v = build_velocity(ps.velocity, g);
    const ContinuityProblem prob = ContinuityProblem::make(v.u, build_rho0(ps.rho0, g), NormExponents::from_p(ps.p));
    ScalarField a = solve_continuity(prob, parse_scheme(schemes[0]), solver.options);
    ScalarField b = solve_continuity(prob, parse_scheme(schemes[1]), solver.options);
    return std::make_tuple(std::move(v.u), std::move(a), std::move(b));
  };

  Outcome out;
  Json levels = Json::array();
  Csv summary({"n", "n_t", "best_delta", "min_total", "mass_difference", "boundary_mass"});
  std::vector<double> mins;
  double worst_transport = 0.0;
  for (std::size_t l = 0; l < grids.size(); ++l) {
    auto [u, a, b] = solve_pair(grids[l]);
    const UniquenessResult res = uniqueness_bounds(a, b, u, used[l], uo);
    Csv csv({"delta", "bound1", "bound2", "bound3", "total"});
    Json rows = Json::array();
    for (const UniquenessRow& r : res.rows) {
      csv.row(r.delta, r.bound1, r.bound2, r.bound3, r.total);
      rows.push_back(Json{{"delta", r.delta},
                          {"bound1", r.bound1},
                          {"bound2", r.bound2},
                          {"bound3", r.bound3},
                          {"total", r.total},
                          {"vertical_mass", r.vertical_mass},
                          {"transport_mass_error", r.transport_mass_error},
                          {"straightening_residual", r.straightening_residual}});
      worst_transport = std::max(worst_transport, std::abs(r.transport_mass_error));
    }
    out.csv.push_back({"uniqueness_n" + std::to_string(grids[l].n) + ".csv", csv.str()});
    summary.row(grids[l].n, grids[l].n_t, res.argmin_delta, res.min_total, res.mass_difference, res.boundary_mass);
    if (res.boundary_mass > boundary_warning) {
      std::ostringstream msg;
      msg << "boundary mass of D at n = " << grids[l].n << " is " << res.boundary_mass << " (> " << boundary_warning
          << ")";
      out.warnings.push_back(msg.str());
    }
    levels.push_back(Json{{"n", grids[l].n},
                          {"n_t", grids[l].n_t},
                          {"mass_difference", res.mass_difference},
                          {"boundary_mass", res.boundary_mass},
                          {"best_delta", res.argmin_delta},
                          {"min_total", res.min_total},
                          {"deltas", rows}});
    mins.push_back(res.min_total);
  }
  out.report["schemes"] = schemes;
  out.report["kernel"] = ks.profile;
  out.report["levels"] = levels;

  bool decreasing = true;
  for (std::size_t i = 1; i < mins.size(); ++i)
    if (!(mins[i] < mins[i - 1])) decreasing = false;
  if (max_of(mins) == 0.0) add_trivial_check(out, "min_total_strictly_decreasing");
  else if (mins.size() >= 2) add_check(out, "min_total_strictly_decreasing", decreasing ? 1.0 : 0.0, ">=", 1.0);
  add_check(out, "transport_mass_error", worst_transport, "<=", transport_tol);

  if (lp_grid) {
    auto [u, a, b] = solve_pair(*lp_grid);
    const UniquenessResult res = uniqueness_bounds(a, b, u, lp_deltas, uo);
    const FlatNormCertificate cert = flat_norm_lp(solution_current(a - b, u));
    out.report["lp_check"] = Json{{"n", lp_grid->n},
                                  {"n_t", lp_grid->n_t},
                                  {"min_total", res.min_total},
                                  {"best_delta", res.argmin_delta},
                                  {"certificate", certificate_json(cert)}};
    summary.row(lp_grid->n, lp_grid->n_t, res.argmin_delta, res.min_total, res.mass_difference, res.boundary_mass);
    add_check(out, "lp_flat_norm_minus_total", cert.value - res.min_total, "<=", 0.0);
  }
  out.csv.push_back({"uniqueness_refinement.csv", summary.str()});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"null-boundary-check", "commutator-sweep", "straighten-check",
                                                 "pushforward-check",   "flatnorm-lp",      "uniqueness"};
  return names;
}

bool Outcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "config: cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kConfig, "config: " + path.string() + ": " + e.what());
  }
  check_schema_version(j);
  return j;
}

Outcome run(const std::string& command, const Json& config, const RunOptions& options) {
  check_schema_version(config);
  Outcome out;
  if (command == "null-boundary-check") out = run_null_boundary(config, options);
  else if (command == "commutator-sweep") out = run_commutator_sweep(config, options);
  else if (command == "straighten-check") out = run_straighten(config, options);
  else if (command == "pushforward-check") out = run_pushforward(config, options);
  else if (command == "flatnorm-lp") out = run_flatnorm(config, options);
  else if (command == "uniqueness") out = run_uniqueness(config, options);
  else fail(ErrorKind::kConfig, "unknown command '" + command + "'");
  out.command = command;

  Json report;
  report["command"] = command;
  report["schema_version"] = kSchemaVersion;
  report["seed"] = options.seed.value_or(config.value("seed", std::uint64_t{1}));
  report["config"] = config;
  report["results"] = std::move(out.report);
  Json checks = Json::array();
  for (const CheckResult& c : out.checks) {
    Json jc{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold}};
    if (c.relation == "in") jc["upper"] = c.upper;
    jc["passed"] = c.passed;
    checks.push_back(std::move(jc));
  }
  report["checks"] = std::move(checks);
  report["warnings"] = out.warnings;
  report["passed"] = out.passed();
  out.report = std::move(report);
  return out;
}

std::string report_text(const Outcome& outcome) { return outcome.report.dump(2) + "\n"; }

void write_outputs(const Outcome& outcome, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) fail(ErrorKind::kInvalidArgument, "write_outputs: cannot write " + (dir / name).string());
    f << text;
  };
  write("report.json", report_text(outcome));
  for (const CsvFile& c : outcome.csv) write(c.name, c.contents);
  for (const auto& [name, j] : outcome.artifacts) write(name, j.dump(2) + "\n");
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::kConfig:
      case ErrorKind::kInvalidArgument:
        return kConfigError;
      case ErrorKind::kNumerical:
      case ErrorKind::kInternal:
        return kNumericalBreakdown;
    }
  }
  return kNumericalBreakdown;
}

// ---------------------------------------------------------------------------
// Current manifests.

namespace {

void write_manifest(const std::filesystem::path& manifest, const char* kind, const PeriodicGrid& g,
                    const std::vector<std::pair<std::string, const ScalarField*>>& comps) {
  const std::filesystem::path dir = manifest.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const std::string stem = manifest.stem().string();
  Json files = Json::array();
  for (const auto& [name, field] : comps) {
    const std::string file = stem + "." + name + ".tcur";
    io::write_fields(dir / file, {*field});
    files.push_back(file);
  }
  const Json m{{"kind", kind}, {"grid", grid_json(g)}, {"files", files}};
  std::ofstream out(manifest);
  if (!out) fail(ErrorKind::kInvalidArgument, "write_current_manifest: cannot write " + manifest.string());
  out << m.dump(2) << "\n";
}

}  // namespace

void write_current_manifest(const std::filesystem::path& manifest, const Current1Diffuse& T) {
  std::vector<std::pair<std::string, const ScalarField*>> comps{{"f_t", &T.f_t}};
  for (int j = 0; j < T.dim(); ++j) comps.emplace_back("f_" + std::to_string(j + 1), &T.f_vec[j]);
  write_manifest(manifest, "current1", T.grid(), comps);
}

void write_current_manifest(const std::filesystem::path& manifest, const Current2Diffuse& S) {
  std::vector<std::pair<std::string, const ScalarField*>> comps;
  for (int j = 0; j < S.F.dim(); ++j) comps.emplace_back("F_" + std::to_string(j + 1), &S.F[j]);
  write_manifest(manifest, "current2", S.grid(), comps);
}

Current1Diffuse read_current1_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(ErrorKind::kConfig, "current manifest: cannot open " + manifest.string());
  Json m;
  try {
    m = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kConfig, "current manifest: " + std::string(e.what()));
  }
  const Section s(&m, "manifest", {"kind", "grid", "files"});
  if (s.text("kind", "", {"current1", "current2"}) != "current1")
    fail(ErrorKind::kConfig, "current manifest: expected kind 'current1'");
  const GridSpec gs = parse_grid(s, 0, 0);
  const PeriodicGrid g = gs.make();
  const std::vector<std::string> files = s.list<std::string>("files", {});
  if (files.size() != static_cast<std::size_t>(g.dim() + 1))
    fail(ErrorKind::kConfig, "current manifest: needs one file per component (f_t, f_1, ...)");
  std::vector<ScalarField> comps;
  for (const std::string& f : files) {
    std::vector<ScalarField> channels;
    try {
      channels = io::read_fields(manifest.parent_path() / f);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, "current manifest: " + f + ": " + e.what());
    }
    if (channels.size() != 1 || !(channels[0].grid() == g))
      fail(ErrorKind::kConfig, "current manifest: " + f + " does not match the manifest grid");
    comps.push_back(std::move(channels[0]));
  }
  ScalarField f_t = std::move(comps.front());
  comps.erase(comps.begin());
  return Current1Diffuse(std::move(f_t), VectorField(std::move(comps)));
}

Json certificate_json(const FlatNormCertificate& cert) {
  Json c{{"value", cert.value},       {"dual", cert.dual},
         {"gap", cert.gap},           {"relative_gap", cert.relative_gap},
         {"iterations", cert.iterations}, {"converged", cert.converged},
         {"gap_warning", cert.gap_warning}};
  if (cert.primal) {
    c["mass_S"] = mass2(cert.primal->S);
    c["mass_L"] = mass(cert.primal->L);
  }
  return c;
}

}  // namespace tcur::experiments
