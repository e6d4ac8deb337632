#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathclosure/types.hpp"

namespace pathclosure::config {

/// Fully validated run configuration; every field has a usable default so a
/// preset only states what it changes.
struct RunConfig {
  // [model]
  std::string model_type = "harmonic";  // harmonic | free | oscillator | tbh
  int tbh_trunc = 3;
  int tbh_k_res = 1;
  double beta = 1.0;
  double kappa = 1.0;

  // [provider]
  std::string provider_type = "closed_form";  // closed_form | monte_carlo | tabulated
  int mc_count = 100000;
  int mc_batches = 20;
  std::vector<double> table_lo;
  std::vector<double> table_hi;
  std::vector<int> table_points;

  // [lagrangian]
  double delta_t = 1.0;
  double w_rev = 1.0;

  // [grid]
  std::vector<double> grid_lo;
  std::vector<double> grid_hi;
  std::vector<int> grid_points;

  // [run]
  std::uint64_t seed = 1;
  double horizon_t = 1.0;        // T
  double u0 = 1.0;
  double t_restart = 1.5;
  double horizon = 5.0;
  int n_nodes = 2000;
  int n_sub = 20;
  int steps = 1;
  double tol = 1e-8;
  int max_iter = 500;
  double dt_pde = 0.0;           // 0 = half the stability bound
  int trials = 50;
  double confinement_factor = 2.0;
  int identity_count = 100000;
  double ode_dt = 1e-3;
  bool spectrum = false;
  std::vector<double> lambda0;
  std::vector<double> lambda_target;
  std::vector<double> endpoint_lo;
  std::vector<double> endpoint_hi;
  std::vector<int> endpoint_points;
  std::vector<double> weight_times = {0.5, 1.0, 1.5, 2.0, 3.0};
};

struct ConfigError {
  int line = 0;
  std::string message;
};

struct ParseResult {
  RunConfig config;
  std::vector<ConfigError> errors;
  bool ok() const { return errors.empty(); }
};

/// Line-oriented `key = value` grammar with `[section]` headers and `#`
/// comments. Collects every error (unknown section/key, type mismatch, range
/// violation) with its line number instead of stopping at the first.
ParseResult parse_config(const std::string& text);

}  // namespace pathclosure::config
