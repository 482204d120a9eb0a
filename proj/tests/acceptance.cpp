// Acceptance gate: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number; the exit status is nonzero when any selected criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tcur/commutator.hpp"
#include "tcur/currents.hpp"
#include "tcur/experiments.hpp"
#include "tcur/mollify.hpp"
#include "tcur/pde.hpp"

#ifndef TCUR_CONFIG_DIR
#error "TCUR_CONFIG_DIR must point at the shipped configs"
#endif

using namespace tcur;
using namespace tcur::testing;
namespace ex = tcur::experiments;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_seconds;
  std::function<Verdict()> body;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

ex::Outcome run_config(const std::string& command, const std::string& file) {
  const std::filesystem::path path = std::filesystem::path(TCUR_CONFIG_DIR) / file;
  ex::RunOptions opt;
  opt.base_dir = path.parent_path();
  return ex::run(command, ex::load_config(path), opt);
}

// Summary of every check of an experiment run.
Verdict from_outcome(const ex::Outcome& o, const std::string& prefix = "") {
  Verdict v{o.passed(), ""};
  for (const ex::CheckResult& c : o.checks) {
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += prefix + c.name + "=" + fmt(c.value) + (c.passed ? "" : " (FAIL)");
  }
  return v;
}

Verdict kernel_evenness() {
  double worst = 0.0;
  for (int d : {1, 2})
    for (double delta : {0.2, 0.1, 0.05}) {
      const PeriodicGrid g(d, d == 1 ? 256 : 64, 8);
      for (double m : kernel_moment(MollifierKernel::bump(g, delta), 1)) worst = std::max(worst, std::abs(m));
    }
  return {worst <= 1e-13, "max |first moment| = " + fmt(worst) + " <= 1e-13"};
}

Verdict commutator_cancellation() { return from_outcome(run_config("commutator-sweep", "commutator_constant.json")); }

Verdict commutator_convergence() {
  const Verdict smooth = from_outcome(run_config("commutator-sweep", "commutator_smooth.json"), "smooth.");
  const Verdict rough = from_outcome(run_config("commutator-sweep", "commutator_rough.json"), "rough.");
  return {smooth.passed && rough.passed, smooth.detail + "; " + rough.detail};
}

Verdict null_boundary_flat_norm() { return from_outcome(run_config("null-boundary-check", "null_boundary.json")); }

Verdict horizontal_construction() {
  bool mass_ok = true, support_ok = true;
  double worst_ratio = 0.0, round_trip = 0.0;
  std::mt19937_64 rng(2024);
  for (int d : {1, 2}) {
    const PeriodicGrid g = d == 1 ? PeriodicGrid(1, 128, 64) : PeriodicGrid(2, 32, 32);
    for (int trial = 0; trial < 10; ++trial) {
      const ScalarField gi = random_smooth(g, rng, 4);
      const double m = mass(horizontal_from_boundary(gi)), l1 = lp_norm(gi, 1.0);
      mass_ok = mass_ok && m <= l1;
      worst_ratio = std::max(worst_ratio, m / l1);
    }
    // Band-limited and linear in time: G is quadratic, recovered exactly by the time stencil.
    const ScalarField phi = random_smooth(g, rng, 4, 1.0, false);
    const ScalarField lin = ScalarField::from_function(g, [](double t, const Point&) { return 1.0 - 3.0 * t; }) * phi;
    const BoundaryDistribution b = boundary1(horizontal_from_boundary(BoundaryDistribution{
        lin, std::vector<double>(g.slice_size(), 0.0)}));
    round_trip = std::max(round_trip, max_abs_diff(b.interior, lin));
    // Compact support {x_1 in [0.25, 0.6]} for all t.
    const ScalarField local = ScalarField::from_function(g, [](double t, const Point& x) {
      return (x[0] >= 0.25 && x[0] <= 0.6) ? std::sin(kTwoPi * (x[0] - 0.25) / 0.7) * (1.0 + t * t) : 0.0;
    });
    const Current1Diffuse M = horizontal_from_boundary(local);
    for (int k = 0; k < g.n_t(); ++k)
      for (std::size_t i = 0; i < g.slice_size(); ++i) {
        const double x = g.center(i)[0];
        if ((x < 0.25 || x > 0.6) && M.f_t(k, i) != 0.0) support_ok = false;
      }
  }
  const bool ok = mass_ok && round_trip <= 1e-8 && support_ok;
  return {ok, "max mass/||g||_1 = " + fmt(worst_ratio) + " <= 1; round trip = " + fmt(round_trip) +
                  " <= 1e-8; support " + (support_ok ? "preserved" : "VIOLATED")};
}

Verdict pushforward_commutation() { return from_outcome(run_config("pushforward-check", "pushforward.json")); }

Verdict straightening() { return from_outcome(run_config("straighten-check", "straighten.json")); }

Verdict uniqueness_bound() {
  const ex::Outcome o = run_config("uniqueness", "uniqueness.json");
  Verdict v = from_outcome(o);
  for (const auto& level : o.report["results"]["levels"])
    v.detail += "; n=" + std::to_string(level["n"].get<int>()) + " total=" + fmt(level["min_total"].get<double>());
  return v;
}

Verdict determinism() {
  bool same = true;
  std::string detail;
  for (const auto& [command, file] : std::vector<std::pair<std::string, std::string>>{
           {"null-boundary-check", "null_boundary.json"}, {"pushforward-check", "pushforward.json"},
           {"commutator-sweep", "commutator_rough.json"}}) {
    const ex::Outcome a = run_config(command, file), b = run_config(command, file);
    bool eq = ex::report_text(a) == ex::report_text(b) && a.csv.size() == b.csv.size();
    for (std::size_t i = 0; eq && i < a.csv.size(); ++i) eq = a.csv[i].contents == b.csv[i].contents;
    same = same && eq;
    detail += (detail.empty() ? "" : "; ") + command + (eq ? " identical" : " DIFFERS");
  }
  return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "kernel_evenness", 1.0, kernel_evenness},
      {2, "commutator_cancellation", 5.0, commutator_cancellation},
      {3, "commutator_convergence", 120.0, commutator_convergence},
      {4, "null_boundary_flat_norm", 120.0, null_boundary_flat_norm},
      {5, "horizontal_construction", 10.0, horizontal_construction},
      {6, "pushforward_commutation", 60.0, pushforward_commutation},
      {7, "straightening", 120.0, straightening},
      {8, "uniqueness_bound", 600.0, uniqueness_bound},
      {9, "determinism", 600.0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_seconds;
    const bool ok = v.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s criterion %d %s: %s [%.2f s, limit %.0f s%s]\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                v.detail.c_str(), secs, c.time_limit_seconds, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
