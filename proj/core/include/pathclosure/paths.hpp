#pragma once

#include <vector>

#include "pathclosure/grid.hpp"
#include "pathclosure/lagrangian.hpp"
#include "pathclosure/types.hpp"

namespace pathclosure::paths {

struct BvpOptions {
  double tol = 1e-8;       // max-norm residual target
  int max_iter = 60;
  double fd_step = 1e-3;   // lambda step for metric/drift derivatives
};

struct BvpSolution {
  Path path;
  double el_residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Extremal (forced-geodesic) two-point boundary value problem
///   lddot_l + Gamma^l_jk ldot_j ldot_k
///     = g^{li} [ ldot_k (dM_i/dl_k - dM_k/dl_i) + (1/2) dphi/dl_i ]
/// discretized by second-order central differences on a uniform grid with
/// fixed endpoints, solved by damped Newton from the straight-line start.
/// Christoffel symbols come from central differences of the provider metric.
/// Non-convergence returns converged = false with the best iterate.
BvpSolution solve_extremal(const lagrangian::LagrangianContext& ctx,
                           const Vector& lambda0, const Vector& lambdaT, double T,
                           int n_nodes, const BvpOptions& options = {});

struct ClosureResult {
  Vector lambda_opt;          // grid argmin refined by quadratic interpolation
  double s_opt = 0.0;         // interpolated minimum value
  GridSpec endpoint_grid;
  Vector s_values;            // extremal action per endpoint node (NaN = failed)
  std::vector<std::uint8_t> valid;
};

/// Classical closure: extremal action S_m(lambda_T, T) over an endpoint grid,
/// minimized with per-axis quadratic refinement. Ties break toward the
/// smallest Euclidean norm of lambda_T; an argmin on the grid boundary raises
/// BoundaryWarningError.
ClosureResult classical_closure(const lagrangian::LagrangianContext& ctx,
                                const Vector& lambda0, double T,
                                const GridSpec& endpoint_grid, int n_nodes,
                                const BvpOptions& options = {});

}  // namespace pathclosure::paths
