#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tcur/currents.hpp"
#include "tcur/flat_norm.hpp"

namespace tcur::experiments {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// CLI exit codes.
enum ExitCode : int { kPass = 0, kQuantitativeFail = 2, kConfigError = 3, kNumericalBreakdown = 4 };

/// Commands accepted by `run`.
const std::vector<std::string>& command_names();

struct RunOptions {
  /// Overrides the config's "seed" when set.
  std::optional<std::uint64_t> seed;
  /// Base directory for relative paths inside the config (the config's directory).
  std::filesystem::path base_dir = ".";
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// "<=", ">=", "<", ">", "in" (threshold <= value <= upper) or "trivial".
  std::string relation;
  bool passed = false;
  double upper = 0.0;
};

struct CsvFile {
  std::string name;
  std::string contents;
};

struct Outcome {
  std::string command;
  Json report;
  std::vector<CheckResult> checks;
  std::vector<CsvFile> csv;
  /// Extra JSON artifacts (certificates), written next to report.json.
  std::vector<std::pair<std::string, Json>> artifacts;
  std::vector<std::string> warnings;
  bool passed() const;
};

/// Parses a config file; syntax errors and a wrong schema_version are config errors.
Json load_config(const std::filesystem::path& path);

/// Validates `config` for `command` and runs it. Deterministic for a fixed
/// config and seed: the report carries no timings.
Outcome run(const std::string& command, const Json& config, const RunOptions& options = {});

/// Writes report.json, the CSV files and artifacts into `dir` (created if needed).
void write_outputs(const Outcome& outcome, const std::filesystem::path& dir);

/// Serialized report.json text, as written by `write_outputs`.
std::string report_text(const Outcome& outcome);

/// Maps an exception raised by `run` onto an exit code.
int exit_code_for(const std::exception& e);

// Current manifests: {"kind": "current1" | "current2", "grid": {...}, "files": [...]}
// with one binary field record per component (f_t, f_1.. or F_1..).
void write_current_manifest(const std::filesystem::path& manifest, const Current1Diffuse& T);
void write_current_manifest(const std::filesystem::path& manifest, const Current2Diffuse& S);
Current1Diffuse read_current1_manifest(const std::filesystem::path& manifest);

Json certificate_json(const FlatNormCertificate& cert);

}  // namespace tcur::experiments
