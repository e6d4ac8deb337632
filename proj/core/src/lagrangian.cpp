#include "pathclosure/lagrangian.hpp"

#include <cmath>

namespace pathclosure::lagrangian {

namespace {

double fisher_drift_quadratic(const geometry::GeometryPoint& p) {
  Eigen::LLT<Matrix> llt(p.g);
  return p.M.dot(llt.solve(p.M));
}

}  // namespace

double lagrangian_value(const LagrangianContext& ctx, const Vector& lambda,
                        const Vector& lambda_dot) {
  ctx.validate();
  const geometry::GeometryPoint p = ctx.provider->at(lambda);
  const double kinetic = lambda_dot.dot(p.g * lambda_dot);
  const double cross = lambda_dot.dot(p.M);
  const double mgm = fisher_drift_quadratic(p);
  return 0.5 * (kinetic - 2.0 * cross) + 0.5 * ctx.w_rev * (p.phi - mgm) +
         0.5 * mgm;
}

IlParts il_decompose(const LagrangianContext& ctx, const Vector& lambda,
                     const Vector& lambda_dot) {
  ctx.validate();
  const geometry::GeometryPoint p = ctx.provider->at(lambda);
  const double dt2 = ctx.delta_t * ctx.delta_t;
  Eigen::LLT<Matrix> llt(p.g);
  const Vector rev_velocity = llt.solve(p.M);
  const Vector dev = lambda_dot - rev_velocity;
  IlParts parts;
  parts.il_rev = std::max(0.0, 0.5 * dt2 * (p.phi - p.M.dot(rev_velocity)));
  parts.il_irr = 0.5 * dt2 * dev.dot(p.g * dev);
  parts.il = 0.5 * dt2 *
             (lambda_dot.dot(p.g * lambda_dot) - 2.0 * lambda_dot.dot(p.M) + p.phi);
  return parts;
}

double discrete_action(const LagrangianContext& ctx, const Path& path) {
  ctx.validate();
  path.validate();
  if (path.nodes() < 2) {
    throw InvalidParameterError("discrete_action: path needs >= 2 nodes");
  }
  double sum = 0.0;
  for (int k = 0; k + 1 < path.nodes(); ++k) {
    const double dt = path.times[k + 1] - path.times[k];
    const Vector v = (path.points.row(k + 1) - path.points.row(k)).transpose() / dt;
    const Vector mid =
        0.5 * (path.points.row(k + 1) + path.points.row(k)).transpose();
    sum += dt * lagrangian_value(ctx, mid, v);
  }
  return ctx.delta_t * sum;
}

double fw_hamiltonian(const LagrangianContext& ctx, const Vector& p,
                      const Vector& lambda) {
  ctx.validate();
  const geometry::GeometryPoint gp = ctx.provider->at(lambda);
  Eigen::LLT<Matrix> llt(gp.g);
  const Vector shifted = p + gp.M;
  return 0.5 * shifted.dot(llt.solve(shifted)) - 0.5 * gp.phi;
}

double hj_residual(const LagrangianContext& ctx, const Vector& f_grad, double f_t,
                   const Vector& lambda) {
  return fw_hamiltonian(ctx, f_grad, lambda) + f_t;
}

}  // namespace pathclosure::lagrangian
