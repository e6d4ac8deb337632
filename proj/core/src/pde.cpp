#include "pathclosure/pde.hpp"

#include <cmath>

namespace pathclosure::pde {

namespace {

// Central difference of a per-node scalar field along one axis, one-sided at
// the boundary.
Vector axis_derivative(const GridSpec& grid, const Vector& field, int axis) {
  const int n = grid.node_count();
  const double h = grid.axes[axis].spacing();
  Vector out(n);
  for (int f = 0; f < n; ++f) {
    auto multi = grid.multi_index(f);
    const int i = multi[axis];
    const int last = grid.axes[axis].points - 1;
    if (i > 0 && i < last) {
      auto up = multi, dn = multi;
      up[axis] = i + 1;
      dn[axis] = i - 1;
      out[f] = (field[grid.flat_index(up)] - field[grid.flat_index(dn)]) / (2.0 * h);
    } else if (i == 0) {
      auto up = multi;
      up[axis] = 1;
      out[f] = (field[grid.flat_index(up)] - field[f]) / h;
    } else {
      auto dn = multi;
      dn[axis] = last - 1;
      out[f] = (field[f] - field[grid.flat_index(dn)]) / h;
    }
  }
  return out;
}

}  // namespace

PdeCoefficients graham_coefficients(const geometry::GeometryProvider& provider,
                                    const GridSpec& grid) {
  grid.validate();
  if (grid.dim() != provider.dim()) {
    throw InvalidParameterError("graham_coefficients: grid dim != provider dim");
  }
  const int n = grid.node_count();
  const int m = grid.dim();

  std::vector<geometry::GeometryPoint> pts;
  pts.reserve(n);
  for (int f = 0; f < n; ++f) pts.push_back(provider.at(grid.node(f)));

  double g_spread = 0.0;
  double g_scale = 0.0;
  for (int f = 0; f < n; ++f) {
    g_spread = std::max(g_spread, (pts[f].g - pts[0].g).cwiseAbs().maxCoeff());
    g_scale = std::max(g_scale, pts[f].g.cwiseAbs().maxCoeff());
  }
  const bool constant_metric = g_spread <= 1e-10 * (1.0 + g_scale);
  if (m >= 2 && !constant_metric) {
    throw UnsupportedCurvatureError(
        "graham_coefficients: m >= 2 with a varying metric needs the curvature "
        "term; only m = 1 or constant-metric grids are supported");
  }

  PdeCoefficients out;
  out.grid = grid;
  out.constant_metric = constant_metric;
  out.note = constant_metric ? "constant metric; curvature term zero exactly"
                             : "one-dimensional manifold; curvature term zero";
  out.q.resize(n);
  out.kdrift.resize(n);
  out.v = Vector(n);
  out.r_scalar = Vector::Zero(n);

  Vector sqrt_det(n);
  std::vector<Vector> ginv_m(n);
  for (int f = 0; f < n; ++f) {
    Eigen::LLT<Matrix> llt(pts[f].g);
    out.q[f] = llt.solve(Matrix::Identity(m, m));
    sqrt_det[f] = std::sqrt(pts[f].g.determinant());
    ginv_m[f] = llt.solve(pts[f].M);
  }

  // d_k(sqrt|g| Q_ik) and d_k(sqrt|g| (g^-1 M)_k) by grid differences.
  std::vector<Vector> div_q(m, Vector::Zero(n));  // per i
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      Vector field(n);
      for (int f = 0; f < n; ++f) field[f] = sqrt_det[f] * out.q[f](i, k);
      div_q[i] += axis_derivative(grid, field, k);
    }
  }
  Vector div_drift = Vector::Zero(n);
  for (int k = 0; k < m; ++k) {
    Vector field(n);
    for (int f = 0; f < n; ++f) field[f] = sqrt_det[f] * ginv_m[f][k];
    div_drift += axis_derivative(grid, field, k);
  }

  for (int f = 0; f < n; ++f) {
    Vector kd(m);
    for (int i = 0; i < m; ++i) {
      kd[i] = ginv_m[f][i] + 0.5 * div_q[i][f] / sqrt_det[f];
    }
    out.kdrift[f] = kd;
    out.v[f] = 0.5 * div_drift[f] / sqrt_det[f] - 0.5 * pts[f].phi +
               0.5 * pts[f].M.dot(ginv_m[f]);
  }
  return out;
}

double stability_bound(const PdeCoefficients& coeffs, double delta_t) {
  double max_q = 0.0;
  for (const auto& q : coeffs.q) max_q = std::max(max_q, q.cwiseAbs().maxCoeff());
  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& ax : coeffs.grid.axes) h_min = std::min(h_min, ax.spacing());
  return h_min * h_min * delta_t / (2.0 * max_q);
}

transfer::ConsistencyField evolve_pde(const PdeCoefficients& coeffs,
                                      const transfer::ConsistencyField& psi0,
                                      double T, double dt_pde, double delta_t) {
  psi0.validate();
  if (!psi0.grid.same_as(coeffs.grid)) {
    throw GridMismatchError("evolve_pde: field grid differs from coefficient grid");
  }
  if (!(T > 0.0) || !(delta_t > 0.0)) {
    throw InvalidParameterError("evolve_pde: T > 0 and delta_t > 0");
  }
  const double bound = stability_bound(coeffs, delta_t);
  if (!(dt_pde > 0.0) || dt_pde > bound) {
    throw TimeStepStabilityError(
        "evolve_pde: dt_pde violates the explicit stability bound; use dt_pde <= " +
        std::to_string(bound));
  }
  const GridSpec& grid = coeffs.grid;
  const int n = grid.node_count();
  const int m = grid.dim();
  const int steps = static_cast<int>(std::ceil(T / dt_pde - 1e-12));
  const double dt = T / steps;

  Vector psi = psi0.values;
  Vector rhs(n);
  Vector fq(n), fk(n);
  for (int s = 0; s < steps; ++s) {
    rhs.setZero();
    // Diffusion: d_i d_j (Q_ij psi).
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int f = 0; f < n; ++f) fq[f] = coeffs.q[f](i, j) * psi[f];
        if (i == j) {
          const double h = grid.axes[i].spacing();
          for (int f = 0; f < n; ++f) {
            auto multi = grid.multi_index(f);
            const int idx = multi[i];
            if (idx == 0 || idx == grid.axes[i].points - 1) continue;
            auto up = multi, dn = multi;
            up[i] = idx + 1;
            dn[i] = idx - 1;
            rhs[f] += (fq[grid.flat_index(up)] - 2.0 * fq[f] +
                       fq[grid.flat_index(dn)]) /
                      (h * h) / (2.0 * delta_t);
          }
        } else {
          const double h0 = grid.axes[i].spacing();
          const double h1 = grid.axes[j].spacing();
          for (int f = 0; f < n; ++f) {
            auto multi = grid.multi_index(f);
            if (multi[i] == 0 || multi[i] == grid.axes[i].points - 1 ||
                multi[j] == 0 || multi[j] == grid.axes[j].points - 1) {
              continue;
            }
            auto pp = multi, pm = multi, mp = multi, mm = multi;
            pp[i] += 1; pp[j] += 1;
            pm[i] += 1; pm[j] -= 1;
            mp[i] -= 1; mp[j] += 1;
            mm[i] -= 1; mm[j] -= 1;
            rhs[f] += (fq[grid.flat_index(pp)] - fq[grid.flat_index(pm)] -
                       fq[grid.flat_index(mp)] + fq[grid.flat_index(mm)]) /
                      (4.0 * h0 * h1) / (2.0 * delta_t);
          }
        }
      }
    }
    // Drift: -d_k (K_k psi).
    for (int k = 0; k < m; ++k) {
      for (int f = 0; f < n; ++f) fk[f] = coeffs.kdrift[f][k] * psi[f];
      const Vector dk = axis_derivative(grid, fk, k);
      rhs -= dk;
    }
    // Potential.
    for (int f = 0; f < n; ++f) rhs[f] += delta_t * coeffs.v[f] * psi[f];

    psi += dt * rhs;
    // Absorbing boundary.
    for (int f = 0; f < n; ++f) {
      auto multi = grid.multi_index(f);
      for (int d = 0; d < m; ++d) {
        if (multi[d] == 0 || multi[d] == grid.axes[d].points - 1) {
          psi[f] = 0.0;
          break;
        }
      }
    }
  }

  transfer::ConsistencyField out;
  out.grid = grid;
  // Explicit stepping can undershoot by rounding; clamp the noise floor.
  const double floor = -1e-12 * std::max(1.0, psi.cwiseAbs().maxCoeff());
  for (int f = 0; f < n; ++f) {
    if (psi[f] < 0.0 && psi[f] > floor) psi[f] = 0.0;
  }
  out.values = psi;
  out.validate();
  return out;
}

TransferComparison compare_with_transfer(const geometry::GeometryProvider& provider,
                                         const GridSpec& grid, double delta_t,
                                         const std::vector<int>& n_sub_values,
                                         double T, double u0) {
  if (grid.dim() != 1) {
    throw InvalidParameterError("compare_with_transfer: 1-d grids only");
  }
  const PdeCoefficients coeffs = graham_coefficients(provider, grid);
  const double dt_pde = 0.5 * stability_bound(coeffs, delta_t);

  // Narrow Gaussian start (width 2h) shared by both evolutions.
  transfer::ConsistencyField psi0 = transfer::ConsistencyField::zero(grid);
  const double h = grid.axes[0].spacing();
  const double width = 2.0 * h;
  for (int f = 0; f < grid.node_count(); ++f) {
    const double x = grid.node(f)[0];
    psi0.values[f] = std::exp(-0.5 * (x - u0) * (x - u0) / (width * width));
  }
  psi0.normalize_l1();

  const transfer::ConsistencyField reference =
      evolve_pde(coeffs, psi0, T, dt_pde, delta_t);

  TransferComparison cmp;
  const int steps = static_cast<int>(std::lround(T / delta_t));
  const Vector w = grid.quadrature_weights();
  for (int n_sub : n_sub_values) {
    const transfer::TransferOperator op =
        transfer::build_transfer(provider, grid, delta_t, n_sub, 1.0);
    const transfer::ConsistencyField prop = transfer::propagate(op, psi0, steps);
    const double gap = w.dot((prop.values - reference.values).cwiseAbs());
    cmp.n_sub_values.push_back(n_sub);
    cmp.dt_values.push_back(delta_t / n_sub);
    cmp.l1_gaps.push_back(gap);
  }
  cmp.min_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < cmp.l1_gaps.size(); ++i) {
    const double ratio_dt = cmp.dt_values[i] / cmp.dt_values[i + 1];
    const double order =
        std::log(cmp.l1_gaps[i] / cmp.l1_gaps[i + 1]) / std::log(ratio_dt);
    cmp.orders.push_back(order);
    cmp.min_order = std::min(cmp.min_order, order);
  }

  // Dominant decay rates: settle the profile, then measure the mass loss of
  // one extra unit of time.
  const double settle = std::max(4.0, 2.0 * T);
  const transfer::ConsistencyField settled =
      evolve_pde(coeffs, psi0, settle, dt_pde, delta_t);
  transfer::ConsistencyField later = settled;
  later = evolve_pde(coeffs, later, 1.0, dt_pde, delta_t);
  cmp.pde_rate = -std::log(later.l1() / settled.l1());

  const transfer::TransferOperator op = transfer::build_transfer(
      provider, grid, delta_t, n_sub_values.back(), 1.0);
  const transfer::SteadyStateResult ss = transfer::steady_state(op, 1e-10, 500, 7);
  cmp.transfer_rate = -std::log(ss.eigenvalue) / delta_t;
  cmp.rate_gap_rel = std::abs(cmp.pde_rate - cmp.transfer_rate) /
                     std::abs(cmp.transfer_rate);
  return cmp;
}

}  // namespace pathclosure::pde
