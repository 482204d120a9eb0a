#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "tcur/experiments.hpp"

namespace ex = tcur::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Diffuse currents on the periodic space-time slab: experiment harness"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "tcur-out";
  std::uint64_t seed = 0;
  bool quiet = false;

  for (const std::string& name : ex::command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config (schema_version 1)")->required();
    sub->add_option("--out", out_dir, "output directory for report.json and CSV files");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--quiet", quiet, "only print the pass/fail summary");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const bool seed_given = app.get_subcommands().front()->count("--seed") > 0;

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const std::filesystem::path path(config_path);
    const ex::Json config = ex::load_config(path);
    ex::RunOptions opt;
    if (seed_given) opt.seed = seed;
    opt.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const ex::Outcome outcome = ex::run(command, config, opt);
    ex::write_outputs(outcome, out_dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const std::string& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    for (const ex::CheckResult& c : outcome.checks) {
      std::printf("%s %-40s %.6g %s %.6g", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                  c.threshold);
      if (c.relation == "in") std::printf(" .. %.6g", c.upper);
      std::printf("\n");
    }
    if (!quiet) std::fprintf(stderr, "%s finished in %.2f s, outputs in %s\n", command.c_str(), secs, out_dir.c_str());
    return outcome.passed() ? ex::kPass : ex::kQuantitativeFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_code_for(e);
  }
}
