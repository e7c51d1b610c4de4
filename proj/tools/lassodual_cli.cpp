// Command-line front end for the lassodual shared library. Talks to the core
// exclusively through the C API in lassodual.h.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lassodual.h"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 1;

struct CommonArgs {
  std::string config_file;
  std::string scenario;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  std::string algorithm;
  int k0 = 0;
  double f = 0.0;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "Scenario config file (JSON)");
  cmd->add_option("--scenario", args.scenario, "Built-in scenario name");
  cmd->add_option("--out", args.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "Override the noise seed");
  cmd->add_option("--algorithm", args.algorithm,
                  "Selection algorithm: order-recursive | fast | dual");
  cmd->add_option("--k0", args.k0, "Override the sparsity order");
  cmd->add_option("--f", args.f, "Override the interval factor F in (0,1)");
}

int fail_validation(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return kExitValidation;
}

int exit_code_for(ld_status status) {
  switch (status) {
    case LD_OK:
      return 0;
    case LD_ERR_NOT_CONVERGED:
      return 2;
    case LD_ERR_K0_UNREACHABLE:
      return 3;
    case LD_ERR_AUDIT_FAILED:
      return 4;
    default:
      return kExitValidation;
  }
}

bool load_config(const CommonArgs& args, json& config, std::string& error) {
  if (args.config_file.empty() == args.scenario.empty()) {
    error = "give exactly one of --config or --scenario";
    return false;
  }
  if (!args.config_file.empty()) {
    std::ifstream in(args.config_file);
    if (!in) {
      error = "cannot read " + args.config_file;
      return false;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      error = std::string("invalid JSON in ") + args.config_file + ": " + e.what();
      return false;
    }
    return true;
  }
  char* text = nullptr;
  if (ld_builtin_scenario_json(args.scenario.c_str(), &text) != LD_OK) {
    error = ld_last_error();
    return false;
  }
  config = json::parse(text);
  ld_string_free(text);
  return true;
}

void apply_overrides(const CommonArgs& args, const std::string& task_type,
                     json& config) {
  config["task"]["type"] = task_type;
  if (args.seed >= 0) config["noise"]["seed"] = static_cast<std::uint64_t>(args.seed);
  if (!args.algorithm.empty()) config["task"]["algorithm"] = args.algorithm;
  if (args.k0 > 0) config["task"]["k0"] = args.k0;
  if (args.f > 0.0) config["task"]["f"] = args.f;
}

int run_task(const CommonArgs& args, const std::string& task_type) {
  json config;
  std::string error;
  if (!load_config(args, config, error)) return fail_validation(error);
  apply_overrides(args, task_type, config);

  char* record = nullptr;
  const ld_status status =
      ld_run_task_json(config.dump().c_str(), args.out_dir.c_str(), &record);
  if (record != nullptr) {
    std::cout << record << "\n";
    ld_string_free(record);
  }
  if (status != LD_OK && record == nullptr) std::cerr << "error: " << ld_last_error() << "\n";
  return exit_code_for(status);
}

int show_scenario(const std::string& name) {
  if (name.empty()) {
    char* names = nullptr;
    if (ld_builtin_scenario_names(&names) != LD_OK)
      return fail_validation(ld_last_error());
    std::cout << names << "\n";
    ld_string_free(names);
    return 0;
  }
  char* text = nullptr;
  if (ld_builtin_scenario_json(name.c_str(), &text) != LD_OK)
    return fail_validation(ld_last_error());
  std::cout << text << "\n";
  ld_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Generalized complex-valued LASSO for DOA estimation: solution paths, "
      "dual-based regularization selection, and KKT audits"};
  app.require_subcommand(1);

  CommonArgs path_args, estimate_args, audit_args;
  std::string show_name;

  CLI::App* path_cmd =
      app.add_subcommand("path", "Sweep the solution path over a mu grid");
  add_common_options(path_cmd, path_args);

  CLI::App* estimate_cmd = app.add_subcommand(
      "estimate", "Select mu for a given sparsity order and estimate DOAs");
  add_common_options(estimate_cmd, estimate_args);

  CLI::App* audit_cmd =
      app.add_subcommand("kkt-audit", "Check KKT certificates for a solution");
  add_common_options(audit_cmd, audit_args);

  CLI::App* show_cmd =
      app.add_subcommand("show-scenario", "Print a built-in scenario config");
  show_cmd->add_option("--scenario", show_name,
                       "Scenario name (omit to list all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (path_cmd->parsed()) return run_task(path_args, "path");
  if (estimate_cmd->parsed()) return run_task(estimate_args, "estimate");
  if (audit_cmd->parsed()) return run_task(audit_args, "kkt-audit");
  if (show_cmd->parsed()) return show_scenario(show_name);
  return kExitValidation;
}
