#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pathclosure/config.hpp"
#include "pathclosure/geometry.hpp"
#include "pathclosure/models.hpp"

namespace pathclosure::runner {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNoConvergence = 2;

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> files;
  std::string message;
};

/// Model + geometry provider materialized from a configuration.
struct Workspace {
  std::shared_ptr<const models::HamiltonianModel> model;  // null for surrogates
  std::unique_ptr<geometry::GeometryProvider> provider;
};

Workspace make_workspace(const config::RunConfig& cfg);

const std::vector<std::string>& subcommands();

/// Execute one subcommand, writing CSV artifacts under out_dir. Exit code 0
/// on success, 1 on validation failure, 2 on numerical non-convergence (with
/// the report still written).
RunResult run_subcommand(const std::string& subcommand,
                         const config::RunConfig& cfg,
                         const std::string& raw_config_text,
                         const std::filesystem::path& out_dir);

}  // namespace pathclosure::runner
