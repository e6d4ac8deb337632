#pragma once

#include <string>
#include <vector>

#include "pathclosure/geometry.hpp"
#include "pathclosure/grid.hpp"
#include "pathclosure/transfer.hpp"
#include "pathclosure/types.hpp"

namespace pathclosure::pde {

/// Drift/diffusion/potential fields of the parabolic evolution associated
/// with the path measure:
///   Q       = g^-1
///   Kdrift_i = (g^-1 M)_i + (1/2)|g|^{-1/2} d_k(|g|^{1/2} (g^-1)_{ik})
///   V       = (1/2)|g|^{-1/2} d_k(|g|^{1/2} (g^-1 M)_k) + R/12 - phi/2
///             + (1/2) M^t g^-1 M
/// with derivatives by central differences on the grid. Supported in the
/// curvature-free cases (m = 1, or constant metric), where R == 0 exactly.
struct PdeCoefficients {
  GridSpec grid;
  std::vector<Matrix> q;       // per node
  std::vector<Vector> kdrift;  // per node
  Vector v;                    // per node
  Vector r_scalar;             // identically zero in supported cases
  bool constant_metric = false;
  std::string note;
};

PdeCoefficients graham_coefficients(const geometry::GeometryProvider& provider,
                                    const GridSpec& grid);

/// Explicit-step diffusion stability bound h^2 delta_t / (2 max Q).
double stability_bound(const PdeCoefficients& coeffs, double delta_t);

/// Explicit evolution of
///   psi_t = (1/(2 delta_t)) d_i d_j (Q_ij psi) - d_k(Kdrift_k psi)
///           + delta_t V psi
/// with second-order central space differences and absorbing boundaries.
/// Refuses dt_pde above the stability bound.
transfer::ConsistencyField evolve_pde(const PdeCoefficients& coeffs,
                                      const transfer::ConsistencyField& psi0,
                                      double T, double dt_pde, double delta_t);

struct TransferComparison {
  std::vector<int> n_sub_values;
  std::vector<double> dt_values;
  std::vector<double> l1_gaps;       // transfer vs fine-step PDE at time T
  std::vector<double> orders;        // log2 gap ratios
  double min_order = 0.0;
  double pde_rate = 0.0;             // dominant decay rate per unit time
  double transfer_rate = 0.0;        // -log(eigenvalue)/delta_t
  double rate_gap_rel = 0.0;
};

/// Cross-validation of the transfer operator against the finite-difference
/// evolution: the L1 gap must shrink with order >= 1 in the substep size and
/// the dominant decay rates must agree.
TransferComparison compare_with_transfer(const geometry::GeometryProvider& provider,
                                         const GridSpec& grid, double delta_t,
                                         const std::vector<int>& n_sub_values,
                                         double T, double u0);

}  // namespace pathclosure::pde
