#include "pathclosure/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "pathclosure/rng.hpp"

namespace pathclosure::transfer {

namespace {

constexpr int kMaxNodes = 2500;  // dense kernel budget

bool node_on_boundary(const GridSpec& grid, int flat) {
  const auto m = grid.multi_index(flat);
  for (int d = 0; d < grid.dim(); ++d) {
    if (m[d] == 0 || m[d] == grid.axes[d].points - 1) return true;
  }
  return false;
}

bool node_in_central_fraction(const GridSpec& grid, int flat, double fraction) {
  const auto m = grid.multi_index(flat);
  for (int d = 0; d < grid.dim(); ++d) {
    const auto& ax = grid.axes[d];
    const double x = ax.lower + m[d] * ax.spacing();
    const double mid = 0.5 * (ax.lower + ax.upper);
    const double half = 0.5 * fraction * (ax.upper - ax.lower);
    if (std::abs(x - mid) > half + 1e-12) return false;
  }
  return true;
}

bool confinement_proxy(const Vector& il_rev, const GridSpec& grid, double factor) {
  std::vector<double> all(il_rev.data(), il_rev.data() + il_rev.size());
  std::nth_element(all.begin(), all.begin() + all.size() / 2, all.end());
  const double median = all[all.size() / 2];
  double boundary_min = std::numeric_limits<double>::infinity();
  for (int f = 0; f < grid.node_count(); ++f) {
    if (node_on_boundary(grid, f)) boundary_min = std::min(boundary_min, il_rev[f]);
  }
  return boundary_min > factor * median;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConsistencyField

ConsistencyField ConsistencyField::zero(const GridSpec& grid) {
  grid.validate();
  ConsistencyField f;
  f.grid = grid;
  f.values = Vector::Zero(grid.node_count());
  return f;
}

ConsistencyField ConsistencyField::delta(const GridSpec& grid, const Vector& point) {
  ConsistencyField f = zero(grid);
  const int node = grid.nearest_node(point);
  f.values[node] = 1.0 / grid.quadrature_weights()[node];
  return f;
}

double ConsistencyField::l1() const {
  return grid.quadrature_weights().dot(values.cwiseAbs());
}

void ConsistencyField::normalize_l1() {
  const double mass = l1();
  if (!(mass > 0.0)) throw InvalidParameterError("ConsistencyField: zero mass");
  values /= mass;
}

void ConsistencyField::validate() const {
  grid.validate();
  if (values.size() != grid.node_count()) {
    throw GridMismatchError("ConsistencyField: value count != grid nodes");
  }
  if (!values.allFinite() || values.minCoeff() < 0.0) {
    throw InvalidParameterError("ConsistencyField: values must be finite and >= 0");
  }
}

Vector ConsistencyField::mean() const {
  const Vector w = grid.quadrature_weights();
  const double mass = w.dot(values);
  Vector m = Vector::Zero(grid.dim());
  for (int f = 0; f < grid.node_count(); ++f) {
    m += w[f] * values[f] * grid.node(f);
  }
  return m / mass;
}

double ConsistencyField::variance() const {
  if (grid.dim() != 1) {
    throw InvalidParameterError("ConsistencyField::variance: 1-d grids only");
  }
  const Vector w = grid.quadrature_weights();
  const double mass = w.dot(values);
  double m1 = 0.0, m2 = 0.0;
  for (int f = 0; f < grid.node_count(); ++f) {
    const double x = grid.node(f)[0];
    m1 += w[f] * values[f] * x;
    m2 += w[f] * values[f] * x * x;
  }
  m1 /= mass;
  m2 /= mass;
  return m2 - m1 * m1;
}

double ConsistencyField::argmax_refined() const {
  if (grid.dim() != 1) {
    throw InvalidParameterError("ConsistencyField::argmax_refined: 1-d grids only");
  }
  Eigen::Index i;
  values.maxCoeff(&i);
  const double h = grid.axes[0].spacing();
  const double x = grid.axes[0].lower + i * h;
  if (i == 0 || i == values.size() - 1) return x;
  const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom >= 0.0) return x;
  return x + 0.5 * (y0 - y2) / denom * h;
}

// ---------------------------------------------------------------------------
// TransferOperator

TransferOperator::TransferOperator(GridSpec grid, Matrix substep_kernel,
                                   Vector il_rev, double delta_t, int n_sub,
                                   double w_rev)
    : grid_(std::move(grid)),
      kernel_(std::move(substep_kernel)),
      il_rev_(std::move(il_rev)),
      delta_t_(delta_t),
      n_sub_(n_sub),
      w_rev_(w_rev) {
  weights_ = grid_.quadrature_weights();
}

Vector TransferOperator::apply(const Vector& values) const {
  Vector psi = values;
  for (int s = 0; s < n_sub_; ++s) {
    psi = kernel_ * weights_.cwiseProduct(psi);
  }
  return psi;
}

TransferOperator build_transfer(const geometry::GeometryProvider& provider,
                                const GridSpec& grid, double delta_t, int n_sub,
                                double w_rev) {
  grid.validate();
  if (grid.dim() != provider.dim()) {
    throw InvalidParameterError("build_transfer: grid dim != provider dim");
  }
  if (!(delta_t > 0.0) || n_sub < 1 || !(w_rev >= 0.0)) {
    throw InvalidParameterError("build_transfer: need delta_t > 0, n_sub >= 1, "
                                "w_rev >= 0");
  }
  const int n = grid.node_count();
  if (n > kMaxNodes) {
    throw InvalidParameterError("build_transfer: grid exceeds the dense-kernel "
                                "budget of " + std::to_string(kMaxNodes) + " nodes");
  }
  const int m = grid.dim();
  const double dt_sub = delta_t / n_sub;

  Matrix kernel(n, n);
  Vector il_rev(n);
  double hmax = 0.0;
  for (int d = 0; d < m; ++d) hmax = std::max(hmax, grid.axes[d].spacing());

  for (int j = 0; j < n; ++j) {
    const Vector node = grid.node(j);
    const geometry::GeometryPoint p = provider.at(node);
    Eigen::LLT<Matrix> llt(p.g);
    double excess = p.phi - p.M.dot(llt.solve(p.M));
    const double scale = 1.0 + std::abs(p.phi);
    const double se_tol =
        p.se ? 5.0 * p.se->excess + 1e-12 * scale : 1e-10 * scale;
    if (excess < -se_tol) {
      throw ProviderInconsistencyError(
          "build_transfer: negative reversible information loss beyond "
          "tolerance at a grid node");
    }
    excess = std::max(0.0, excess);
    il_rev[j] = 0.5 * delta_t * delta_t * excess;

    // Substeps narrower than the grid spacing alias the quadrature.
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.g);
    const double sigma2_min = dt_sub / (delta_t * es.eigenvalues().maxCoeff());
    if (sigma2_min < hmax * hmax) {
      throw InvalidParameterError(
          "build_transfer: substep kernel width below the grid spacing; "
          "reduce n_sub or refine the grid");
    }

    const double det_g = p.g.determinant();
    const double norm = std::pow(2.0 * M_PI * dt_sub / delta_t, -0.5 * m) *
                        std::sqrt(det_g);
    const Vector center = node + dt_sub * llt.solve(p.M);
    const double absorb = w_rev * il_rev[j] * dt_sub / delta_t;
    const double precision_scale = delta_t / dt_sub;
    for (int i = 0; i < n; ++i) {
      const Vector d = grid.node(i) - center;
      const double quad = 0.5 * precision_scale * d.dot(p.g * d);
      kernel(i, j) = norm * std::exp(-quad - absorb);
    }
  }
  return TransferOperator(grid, std::move(kernel), std::move(il_rev), delta_t,
                          n_sub, w_rev);
}

ConsistencyField propagate(const TransferOperator& op, const ConsistencyField& psi0,
                           int steps) {
  psi0.validate();
  if (!psi0.grid.same_as(op.grid())) {
    throw GridMismatchError("propagate: field grid differs from operator grid");
  }
  if (steps < 0) throw InvalidParameterError("propagate: steps >= 0");
  ConsistencyField out = psi0;
  for (int s = 0; s < steps; ++s) {
    out.values = op.apply(out.values);
  }
  return out;
}

double SteadyStateResult::eigenvalue_per_unit_time(double delta_t) const {
  return std::pow(eigenvalue, 1.0 / delta_t);
}

SteadyStateResult steady_state(const TransferOperator& op, double tol, int max_iter,
                               std::uint64_t seed) {
  if (!(tol > 0.0)) throw InvalidParameterError("steady_state: tol > 0");
  const int n = op.grid().node_count();
  GaussianStream rng(seed);
  ConsistencyField psi = ConsistencyField::zero(op.grid());
  for (int f = 0; f < n; ++f) psi.values[f] = rng.uniform(0.5, 1.5);
  psi.normalize_l1();

  SteadyStateResult result;
  result.psi = psi;
  const Vector w = op.quadrature_weights();
  for (int it = 1; it <= max_iter; ++it) {
    const Vector next = op.apply(psi.values);
    const double eig = w.dot(next.cwiseAbs());
    if (!(eig > 0.0)) {
      throw ProviderInconsistencyError("steady_state: iterate lost all mass");
    }
    const Vector normalized = next / eig;
    const double gap = w.dot((normalized - psi.values).cwiseAbs());
    psi.values = normalized;
    result.eigenvalue = eig;
    result.iterations = it;
    result.last_gap = gap;
    if (gap < tol) {
      result.converged = true;
      break;
    }
  }
  result.psi = psi;
  result.confinement_met = confinement_proxy(op.il_rev(), op.grid(), 2.0);
  return result;
}

AppendixBReport appendix_b_diagnostics(const TransferOperator& op, int trials,
                                       std::uint64_t seed,
                                       double confinement_factor) {
  if (trials < 10) {
    throw InvalidParameterError("appendix_b_diagnostics: trials >= 10");
  }
  const GridSpec& grid = op.grid();
  const int n = grid.node_count();
  const Vector w = op.quadrature_weights();

  AppendixBReport report;
  report.confinement_factor = confinement_factor;
  GaussianStream rng(seed);
  for (int t = 0; t < trials; ++t) {
    ConsistencyField psi = ConsistencyField::zero(grid);
    for (int f = 0; f < n; ++f) {
      if (node_in_central_fraction(grid, f, 0.5)) {
        psi.values[f] = rng.uniform(0.0, 1.0);
      }
    }
    psi.normalize_l1();
    const Vector kpsi = op.apply(psi.values);
    const double mass = w.dot(kpsi.cwiseAbs());
    report.max_l1_ratio = std::max(report.max_l1_ratio, mass);

    double tail = 0.0;
    for (int f = 0; f < n; ++f) {
      if (!node_in_central_fraction(grid, f, 0.8)) tail += w[f] * kpsi[f];
    }
    report.tail_fraction = std::max(report.tail_fraction, tail / mass);

    // Shift by one node along each axis with zero fill.
    double modulus = 0.0;
    for (int d = 0; d < grid.dim(); ++d) {
      double acc = 0.0;
      for (int f = 0; f < n; ++f) {
        auto multi = grid.multi_index(f);
        multi[d] += 1;
        const double shifted =
            multi[d] < grid.axes[d].points ? kpsi[grid.flat_index(multi)] : 0.0;
        acc += w[f] * std::abs(shifted - kpsi[f]);
      }
      modulus = std::max(modulus, acc);
    }
    report.translation_modulus = std::max(report.translation_modulus, modulus);
  }
  report.contraction_pass = report.max_l1_ratio <= 1.0 + 1e-6;
  report.tail_warning = report.tail_fraction > 1e-3;

  std::vector<double> all(op.il_rev().data(), op.il_rev().data() + n);
  std::nth_element(all.begin(), all.begin() + all.size() / 2, all.end());
  report.median_il_rev = all[all.size() / 2];
  report.boundary_il_rev = std::numeric_limits<double>::infinity();
  for (int f = 0; f < n; ++f) {
    if (node_on_boundary(grid, f)) {
      report.boundary_il_rev = std::min(report.boundary_il_rev, op.il_rev()[f]);
    }
  }
  report.confinement_met =
      report.boundary_il_rev > confinement_factor * report.median_il_rev;
  return report;
}

std::vector<double> top_magnitudes(const TransferOperator& op, int how_many,
                                   std::uint64_t seed, int krylov_dim) {
  const int n = op.grid().node_count();
  krylov_dim = std::min(krylov_dim, n);
  GaussianStream rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(0.1, 1.0);
  v.normalize();

  std::vector<Vector> basis;
  basis.push_back(v);
  Matrix hess = Matrix::Zero(krylov_dim + 1, krylov_dim);
  int built = 0;
  for (int j = 0; j < krylov_dim; ++j) {
    Vector next = op.apply(basis[j]);
    for (int i = 0; i <= j; ++i) {
      hess(i, j) = basis[i].dot(next);
      next -= hess(i, j) * basis[i];
    }
    hess(j + 1, j) = next.norm();
    built = j + 1;
    if (hess(j + 1, j) < 1e-14) break;
    basis.push_back(next / hess(j + 1, j));
  }
  const Matrix h = hess.topLeftCorner(built, built);
  Eigen::EigenSolver<Matrix> es(h);
  std::vector<double> mags(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    mags[i] = std::abs(es.eigenvalues()[i]);
  }
  std::sort(mags.rbegin(), mags.rend());
  mags.resize(std::min<std::size_t>(how_many, mags.size()));
  return mags;
}

}  // namespace pathclosure::transfer
