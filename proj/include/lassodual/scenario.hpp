#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "lassodual/regpath.hpp"

namespace lassodual {

constexpr int kSchemaVersion = 1;

struct GridSpec {
  enum class Type { kUniform, kSpan };
  Type type = Type::kUniform;
  int size = 0;           // uniform
  double lo_deg = 0.0;    // span
  double hi_deg = 0.0;
  double step_deg = 0.0;

  AngleGrid build() const;
};

/// Regularization grid for path sweeps; either explicit values or a generated
/// (optionally mu_max-relative) log/linear spacing.
struct MuGridSpec {
  std::vector<double> values;  // explicit, strictly decreasing; empty = generated
  double hi = 1.05;
  double lo = 0.02;
  int count = 60;
  bool log_spacing = true;
  bool relative_to_mu_max = true;

  std::vector<double> resolve(double mu_max_value) const;
};

struct ScenarioConfig {
  std::string name;
  int sensors = 0;
  GridSpec grid;
  SourceScene scene;

  std::optional<double> snr_db;  // exactly one of snr_db / sigma2
  std::optional<double> sigma2;
  std::uint64_t seed = 1;

  std::vector<double> weights;  // empty = identity

  enum class Task { kPath, kEstimate, kKktAudit };
  Task task = Task::kPath;

  MuGridSpec mu_grid;  // path
  int k0 = 0;          // estimate
  double f = 0.9;
  std::string algorithm = "fast";  // order-recursive | fast | dual
  std::optional<double> audit_mu;  // kkt-audit
  std::string solution_file;       // kkt-audit alternative input

  void validate() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(const std::string& name);

// Exit codes shared by run_task and the CLI.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitK0Unreachable = 3;
constexpr int kExitAuditFailed = 4;

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json record;
};

/// Runs the configured task; writes result.json (and path.csv for path tasks)
/// into out_dir unless out_dir is empty. Files are written atomically.
RunOutcome run_task(const ScenarioConfig& config, const std::string& out_dir);

}  // namespace lassodual
