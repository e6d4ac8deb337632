#include "pathclosure/paths.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace pathclosure::paths {

namespace {

using geometry::GeometryPoint;

// Metric, drift and confinement derivatives at one collocation point.
struct LocalGeometry {
  Matrix g;
  Eigen::LLT<Matrix> llt;
  std::vector<Matrix> dg;   // dg[d](i,j) = d g_ij / d lambda_d
  std::vector<Vector> dM;   // dM[d][i]   = d M_i  / d lambda_d
  Vector dphi;
};

LocalGeometry local_geometry(const geometry::GeometryProvider& provider,
                             const Vector& y, double step) {
  const int m = static_cast<int>(y.size());
  LocalGeometry loc;
  const GeometryPoint base = provider.at(y);
  loc.g = base.g;
  loc.llt.compute(base.g);
  loc.dg.resize(m);
  loc.dM.resize(m);
  loc.dphi = Vector(m);
  Vector yp = y;
  for (int d = 0; d < m; ++d) {
    const double save = yp[d];
    yp[d] = save + step;
    const GeometryPoint pp = provider.at(yp);
    yp[d] = save - step;
    const GeometryPoint pm = provider.at(yp);
    yp[d] = save;
    loc.dg[d] = (pp.g - pm.g) / (2.0 * step);
    loc.dM[d] = (pp.M - pm.M) / (2.0 * step);
    loc.dphi[d] = (pp.phi - pm.phi) / (2.0 * step);
  }
  return loc;
}

// Collocation residual of the forced-geodesic equation at an interior node.
Vector node_residual(const LocalGeometry& loc, const Vector& prev, const Vector& cur,
                     const Vector& next, double dt) {
  const int m = static_cast<int>(cur.size());
  const Vector v = (next - prev) / (2.0 * dt);
  const Vector acc = (next - 2.0 * cur + prev) / (dt * dt);
  Vector lower(m);
  for (int l = 0; l < m; ++l) {
    double magnetic = 0.0;
    for (int k = 0; k < m; ++k) {
      magnetic += (loc.dM[k][l] - loc.dM[l][k]) * v[k];
    }
    lower[l] = magnetic + 0.5 * loc.dphi[l];
  }
  Vector christoffel(m);
  for (int l = 0; l < m; ++l) {
    double c = 0.0;
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        c += 0.5 * (loc.dg[k](l, j) + loc.dg[j](l, k) - loc.dg[l](j, k)) * v[j] *
             v[k];
      }
    }
    christoffel[l] = c;
  }
  return acc + loc.llt.solve(christoffel - lower);
}

}  // namespace

BvpSolution solve_extremal(const lagrangian::LagrangianContext& ctx,
                           const Vector& lambda0, const Vector& lambdaT, double T,
                           int n_nodes, const BvpOptions& opt) {
  ctx.validate();
  if (!(T > 0.0)) throw InvalidParameterError("solve_extremal: T must be > 0");
  if (n_nodes < 8) throw InvalidParameterError("solve_extremal: n_nodes >= 8");
  const int m = static_cast<int>(lambda0.size());
  if (lambdaT.size() != m || m != ctx.provider->dim()) {
    throw InvalidParameterError("solve_extremal: endpoint dimension mismatch");
  }

  const int segments = n_nodes - 1;
  const int interior = segments - 1;
  const double dt = T / segments;
  const auto& provider = *ctx.provider;

  Matrix pts(n_nodes, m);
  for (int k = 0; k < n_nodes; ++k) {
    const double s = static_cast<double>(k) / segments;
    pts.row(k) = ((1.0 - s) * lambda0 + s * lambdaT).transpose();
  }

  std::vector<LocalGeometry> locals(interior);
  Vector residual(interior * m);
  auto assemble = [&](const Matrix& p, Vector& out, std::vector<LocalGeometry>* cache) {
    for (int k = 1; k <= interior; ++k) {
      const Vector cur = p.row(k).transpose();
      const LocalGeometry loc = local_geometry(provider, cur, opt.fd_step);
      if (cache) (*cache)[k - 1] = loc;
      out.segment((k - 1) * m, m) =
          node_residual(loc, p.row(k - 1).transpose(), cur, p.row(k + 1).transpose(),
                        dt);
    }
  };

  assemble(pts, residual, &locals);
  double rnorm = residual.lpNorm<Eigen::Infinity>();
  int iter = 0;
  while (rnorm > opt.tol && iter < opt.max_iter) {
    // Finite-difference Jacobian; only the perturbed node needs fresh
    // geometry, its neighbours reuse the cached local data.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(interior) * m * 3 * m);
    for (int j = 1; j <= interior; ++j) {
      for (int d = 0; d < m; ++d) {
        const double eps = 1e-6 * (1.0 + std::abs(pts(j, d)));
        Matrix pert = pts;
        pert(j, d) += eps;
        const LocalGeometry loc_j = local_geometry(provider, pert.row(j).transpose(),
                                                   opt.fd_step);
        const int col = (j - 1) * m + d;
        for (int k = std::max(1, j - 1); k <= std::min(interior, j + 1); ++k) {
          const LocalGeometry& loc = (k == j) ? loc_j : locals[k - 1];
          const Vector rk =
              node_residual(loc, pert.row(k - 1).transpose(), pert.row(k).transpose(),
                            pert.row(k + 1).transpose(), dt);
          const Vector base = residual.segment((k - 1) * m, m);
          for (int i = 0; i < m; ++i) {
            const double dv = (rk[i] - base[i]) / eps;
            if (dv != 0.0) trips.emplace_back((k - 1) * m + i, col, dv);
          }
        }
      }
    }
    Eigen::SparseMatrix<double> jac(interior * m, interior * m);
    jac.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
    if (lu.info() != Eigen::Success) {
      throw SingularSystemError(
          "solve_extremal: singular collocation Jacobian; try finer n_nodes");
    }
    const Vector step = lu.solve(-residual);

    double alpha = 1.0;
    Matrix trial = pts;
    Vector trial_res(interior * m);
    const double r2 = residual.norm();
    while (alpha >= 1.0 / 256.0) {
      trial = pts;
      for (int j = 1; j <= interior; ++j) {
        trial.row(j) += alpha * step.segment((j - 1) * m, m).transpose();
      }
      assemble(trial, trial_res, nullptr);
      if (trial_res.norm() <= (1.0 - 1e-4 * alpha) * r2) break;
      alpha *= 0.5;
    }
    pts = trial;
    assemble(pts, residual, &locals);
    rnorm = residual.lpNorm<Eigen::Infinity>();
    ++iter;
  }

  BvpSolution sol;
  sol.path.times = Vector::LinSpaced(n_nodes, 0.0, T);
  sol.path.points = pts;
  sol.el_residual = rnorm;
  sol.converged = rnorm <= opt.tol;
  sol.iterations = iter;
  return sol;
}

ClosureResult classical_closure(const lagrangian::LagrangianContext& ctx,
                                const Vector& lambda0, double T,
                                const GridSpec& endpoint_grid, int n_nodes,
                                const BvpOptions& opt) {
  ctx.validate();
  endpoint_grid.validate(4);
  if (endpoint_grid.dim() != ctx.provider->dim()) {
    throw InvalidParameterError("classical_closure: grid dim != provider dim");
  }
  const int n = endpoint_grid.node_count();
  ClosureResult result;
  result.endpoint_grid = endpoint_grid;
  result.s_values = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  result.valid.assign(n, 0);

  for (int f = 0; f < n; ++f) {
    const Vector target = endpoint_grid.node(f);
    try {
      const BvpSolution sol = solve_extremal(ctx, lambda0, target, T, n_nodes, opt);
      if (!sol.converged) continue;
      result.s_values[f] = lagrangian::discrete_action(ctx, sol.path);
      result.valid[f] = 1;
    } catch (const Error&) {
      // failed endpoint stays marked invalid
    }
  }

  int best = -1;
  for (int f = 0; f < n; ++f) {
    if (!result.valid[f]) continue;
    if (best < 0 || result.s_values[f] < result.s_values[best]) {
      best = f;
    } else if (result.s_values[f] == result.s_values[best] &&
               endpoint_grid.node(f).norm() < endpoint_grid.node(best).norm()) {
      best = f;
    }
  }
  if (best < 0) {
    throw SingularSystemError("classical_closure: no endpoint converged");
  }
  const auto multi = endpoint_grid.multi_index(best);
  for (int d = 0; d < endpoint_grid.dim(); ++d) {
    if (multi[d] == 0 || multi[d] == endpoint_grid.axes[d].points - 1) {
      throw BoundaryWarningError(
          "classical_closure: argmin touches the endpoint grid boundary; "
          "enlarge the grid");
    }
  }

  result.lambda_opt = endpoint_grid.node(best);
  result.s_opt = result.s_values[best];
  for (int d = 0; d < endpoint_grid.dim(); ++d) {
    auto nb = multi;
    nb[d] = multi[d] - 1;
    const int fm = endpoint_grid.flat_index(nb);
    nb[d] = multi[d] + 1;
    const int fp = endpoint_grid.flat_index(nb);
    if (!result.valid[fm] || !result.valid[fp]) continue;
    const double sm = result.s_values[fm];
    const double s0 = result.s_values[best];
    const double sp = result.s_values[fp];
    const double curv = sm - 2.0 * s0 + sp;
    if (curv <= 0.0) continue;
    const double offset = 0.5 * (sm - sp) / curv;
    result.lambda_opt[d] += offset * endpoint_grid.axes[d].spacing();
    result.s_opt -= 0.125 * (sm - sp) * (sm - sp) / curv;
  }
  return result;
}

}  // namespace pathclosure::paths
