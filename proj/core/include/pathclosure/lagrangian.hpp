#pragma once

#include "pathclosure/geometry.hpp"
#include "pathclosure/types.hpp"

namespace pathclosure::lagrangian {

/// Geometry source plus the slow averaging timescale and the weight on the
/// reversible part of the information loss.
struct LagrangianContext {
  const geometry::GeometryProvider* provider = nullptr;
  double delta_t = 1.0;
  double w_rev = 1.0;

  void validate() const {
    if (provider == nullptr) throw InvalidParameterError("context: null provider");
    if (!(delta_t > 0.0)) throw InvalidParameterError("context: delta_t must be > 0");
    if (!(w_rev >= 0.0)) throw InvalidParameterError("context: w_rev must be >= 0");
  }
};

/// L = 1/2 (ldot^t g ldot - 2 ldot^t M) + w_rev/2 (phi - M^t g^-1 M)
///     + 1/2 M^t g^-1 M.
/// At w_rev = 1 this reduces to 1/2 (ldot^t g ldot - 2 ldot^t M + phi).
double lagrangian_value(const LagrangianContext& ctx, const Vector& lambda,
                        const Vector& lambda_dot);

struct IlParts {
  double il = 0.0;
  double il_rev = 0.0;
  double il_irr = 0.0;
};

/// Information loss over one step delta_t and its Pythagorean split:
/// il_rev = (dt^2/2)(phi - M^t g^-1 M), il_irr the Fisher distance from the
/// reversible trajectory, il = il_rev + il_irr.
IlParts il_decompose(const LagrangianContext& ctx, const Vector& lambda,
                     const Vector& lambda_dot);

/// delta_t * sum_k dt_k * L(v_k, midpoint_k) with per-segment velocity and
/// geometry evaluated at the segment midpoint.
double discrete_action(const LagrangianContext& ctx, const Path& path);

/// Freidlin-Wentzell Hamiltonian 1/2 (p + M)^t g^-1 (p + M) - phi/2.
double fw_hamiltonian(const LagrangianContext& ctx, const Vector& p,
                      const Vector& lambda);

/// H(f_grad, lambda) + f_t; vanishes iff (f_grad, f_t) solves the
/// Hamilton-Jacobi equation at lambda.
double hj_residual(const LagrangianContext& ctx, const Vector& f_grad, double f_t,
                   const Vector& lambda);

}  // namespace pathclosure::lagrangian
