#pragma once

#include "pathclosure/geometry.hpp"
#include "pathclosure/harmonic.hpp"
#include "pathclosure/types.hpp"

namespace pathclosure::weaknoise {

/// Quadratic stationary gauge around an attracting fixed point alpha* with
/// M(alpha*) = 0 and phi(alpha*) = 0:
///   f_s(lambda) = 1/2 (lambda - alpha*)^t G (lambda - alpha*)
/// where G solves (G + A_M)^t g^-1 (G + A_M) = Phi2 with the branch that
/// makes drift_lin = g^-1 (G + A_M) Hurwitz.
struct GaugeSolution {
  Vector alpha_star;
  Matrix G;
  Matrix drift_lin;
  Matrix a_m;     // dM/dlambda at alpha*
  Matrix phi2;    // phi(alpha* + d) ~ d^t phi2 d
  Matrix g_star;  // Fisher metric at alpha*

  double f_s(const Vector& lambda) const {
    const Vector d = lambda - alpha_star;
    return 0.5 * d.dot(G * d);
  }
  Vector grad_f_s(const Vector& lambda) const { return G * (lambda - alpha_star); }
};

struct GaugeOptions {
  double fd_step = 1e-3;
  double newton_tol = 1e-11;
  int newton_max = 60;
};

/// Refine the fixed point by damped Newton on M, expand M and phi locally by
/// finite differences and solve the quadratic Hamilton-Jacobi condition as a
/// stabilizing algebraic Riccati problem. Raises BranchSelectionError when no
/// Hurwitz branch exists (fixed point not attracting in the OM sense).
GaugeSolution stationary_hj_quadratic(const geometry::GeometryProvider& provider,
                                      const Vector& alpha_guess,
                                      const GaugeOptions& options = {});

/// Fixed-step 4th-order integration of ldot = Phi(lambda)
/// = g^-1 (grad f_s + M) with the quadratic gauge. Detects wrong-branch
/// blow-up when the deviation from alpha* grows tenfold.
Path drift_ode_solve(const geometry::GeometryProvider& provider,
                     const GaugeSolution& gauge, const Vector& lambda0, double T,
                     double dt);

/// Steady Ornstein-Uhlenbeck covariance: solves
/// drift_lin sigma + sigma drift_lin^t + (delta_t g*)^-1 = 0.
Matrix stationary_covariance(const GaugeSolution& gauge, double delta_t);

/// Thermodynamical path in the weak-noise limit:
/// lambda_hat(t) = (I + sigma G)^-1 alpha(t).
Path ottinger_path(const geometry::GeometryProvider& provider,
                   const GaugeSolution& gauge, const Matrix& sigma,
                   const Vector& lambda0, double T, double dt);

struct OmReport {
  double argmax = 0.0;
  double expected = 0.0;           // u0 sech(kappa T)
  double argmax_error = 0.0;
  double backward_vs_extremal = 0.0;   // max deviation from the numerical extremal
  double backward_vs_thermo = 0.0;     // max deviation from the thermo path
  double backward_endpoint = 0.0;
  bool pass_argmax = false;
  bool pass_extremal = false;
};

/// Gauge/OM factorization check on the harmonic system: the argmax of
/// exp(-delta_t f_s) K_OU must reproduce u0 sech(kappa T) exactly, and the
/// backward-in-time Hamilton-Jacobi path must coincide with the extremal
/// (not the thermodynamical) path.
OmReport om_decomposition_check(const GaugeSolution& gauge,
                                const harmonic::HarmonicSpec& spec, double T);

/// Stabilizing solution of A^t X + X A - X B X + Q = 0 (A - B X Hurwitz) by
/// the determinant-scaled matrix sign iteration. BranchSelectionError when
/// the Hamiltonian pencil has eigenvalues on the imaginary axis.
Matrix solve_care_stabilizing(const Matrix& a, const Matrix& b, const Matrix& q);

/// Solution of A S + S A^t + Q = 0 by Kronecker vectorization (small m).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

}  // namespace pathclosure::weaknoise
