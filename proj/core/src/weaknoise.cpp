#include "pathclosure/weaknoise.hpp"

#include <cmath>
#include <limits>

#include "pathclosure/lagrangian.hpp"
#include "pathclosure/paths.hpp"

namespace pathclosure::weaknoise {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix jacobian_of_m(const geometry::GeometryProvider& provider, const Vector& at,
                     double step) {
  const int m = static_cast<int>(at.size());
  Matrix jac(m, m);
  Vector y = at;
  for (int d = 0; d < m; ++d) {
    const double save = y[d];
    y[d] = save + step;
    const Vector mp = provider.at(y).M;
    y[d] = save - step;
    const Vector mm = provider.at(y).M;
    y[d] = save;
    jac.col(d) = (mp - mm) / (2.0 * step);
  }
  return jac;
}

Matrix half_hessian_of_phi(const geometry::GeometryProvider& provider,
                           const Vector& at, double step) {
  const int m = static_cast<int>(at.size());
  const double phi0 = provider.at(at).phi;
  Matrix hess(m, m);
  Vector y = at;
  for (int d = 0; d < m; ++d) {
    const double save = y[d];
    y[d] = save + step;
    const double pp = provider.at(y).phi;
    y[d] = save - step;
    const double pm = provider.at(y).phi;
    y[d] = save;
    hess(d, d) = (pp - 2.0 * phi0 + pm) / (step * step);
  }
  for (int d = 0; d < m; ++d) {
    for (int e = d + 1; e < m; ++e) {
      Vector z = at;
      z[d] += step;
      z[e] += step;
      const double ppp = provider.at(z).phi;
      z[e] -= 2.0 * step;
      const double ppm = provider.at(z).phi;
      z[d] -= 2.0 * step;
      const double pmm = provider.at(z).phi;
      z[e] += 2.0 * step;
      const double pmp = provider.at(z).phi;
      const double v = (ppp - ppm - pmp + pmm) / (4.0 * step * step);
      hess(d, e) = v;
      hess(e, d) = v;
    }
  }
  return 0.5 * symmetrized(hess);
}

bool is_hurwitz(const Matrix& a, double margin = 0.0) {
  Eigen::EigenSolver<Matrix> es(a);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i].real() >= -margin) return false;
  }
  return true;
}

Vector gauge_drift(const geometry::GeometryProvider& provider,
                   const GaugeSolution& gauge, const Vector& lambda) {
  const geometry::GeometryPoint p = provider.at(lambda);
  Eigen::LLT<Matrix> llt(p.g);
  return llt.solve(gauge.grad_f_s(lambda) + p.M);
}

}  // namespace

Matrix solve_care_stabilizing(const Matrix& a, const Matrix& b, const Matrix& q) {
  const int n = static_cast<int>(a.rows());
  Matrix ham(2 * n, 2 * n);
  ham << a, b, q, -a.transpose();

  Eigen::EigenSolver<Matrix> es(ham);
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    max_abs = std::max(max_abs, std::abs(es.eigenvalues()[i]));
  }
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (std::abs(es.eigenvalues()[i].real()) < 1e-8 * (1.0 + max_abs)) {
      throw BranchSelectionError(
          "riccati: Hamiltonian eigenvalues on the imaginary axis; no "
          "stabilizing (Hurwitz) branch exists");
    }
  }

  // Determinant-scaled sign iteration.
  Matrix z = ham;
  const double p = 2.0 * n;
  for (int it = 0; it < 200; ++it) {
    const double ck = std::pow(std::abs(z.determinant()), -1.0 / p);
    const Matrix scaled = z * ck;
    const Matrix next = scaled - 0.5 * (scaled - scaled.inverse());
    const double delta = (next - z).norm();
    z = next;
    if (delta <= 1e-13 * std::max(1.0, z.norm())) break;
  }

  Matrix lhs(2 * n, n);
  Matrix rhs(2 * n, n);
  const Matrix eye = Matrix::Identity(n, n);
  lhs << z.block(0, n, n, n), z.block(n, n, n, n) + eye;
  rhs << z.block(0, 0, n, n) + eye, z.block(n, 0, n, n);
  Eigen::JacobiSVD<Matrix> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix x = svd.solve(rhs);
  x = symmetrized(x);

  const Matrix residual = a.transpose() * x + x * a - x * b * x + q;
  if (residual.norm() > 1e-7 * (1.0 + q.norm() + x.norm())) {
    throw BranchSelectionError("riccati: sign iteration failed to produce a "
                               "solution with small residual");
  }
  return x;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const int n = static_cast<int>(a.rows());
  Matrix big = Matrix::Zero(n * n, n * n);
  // vec(A S + S A^t) = (I (x) A + A (x) I) vec(S), column-major vec.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        big(j * n + i, j * n + k) += a(i, k);
        big(j * n + i, k * n + i) += a(j, k);
      }
    }
  }
  Vector rhs(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) rhs[j * n + i] = -q(i, j);
  }
  const Vector sol = big.partialPivLu().solve(rhs);
  Matrix s(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) s(i, j) = sol[j * n + i];
  }
  return symmetrized(s);
}

GaugeSolution stationary_hj_quadratic(const geometry::GeometryProvider& provider,
                                      const Vector& alpha_guess,
                                      const GaugeOptions& opt) {
  const int m = provider.dim();
  if (alpha_guess.size() != m) {
    throw InvalidParameterError("stationary_hj_quadratic: guess dimension");
  }

  // Newton refinement of M(alpha*) = 0.
  Vector alpha = alpha_guess;
  bool found = false;
  for (int it = 0; it < opt.newton_max; ++it) {
    const Vector mval = provider.at(alpha).M;
    if (mval.norm() <= opt.newton_tol * (1.0 + alpha.norm())) {
      found = true;
      break;
    }
    const Matrix jac = jacobian_of_m(provider, alpha, opt.fd_step);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) {
      throw FixedPointNotFoundError(
          "stationary_hj_quadratic: singular dM/dlambda during Newton");
    }
    Vector step = lu.solve(-mval);
    double scale = 1.0;
    while (scale >= 1.0 / 64.0 &&
           provider.at(alpha + scale * step).M.norm() >= mval.norm()) {
      scale *= 0.5;
    }
    alpha += scale * step;
  }
  if (!found && provider.at(alpha).M.norm() >
                    opt.newton_tol * (1.0 + alpha.norm())) {
    throw FixedPointNotFoundError(
        "stationary_hj_quadratic: Newton failed to locate M(alpha*) = 0");
  }

  const geometry::GeometryPoint p_star = provider.at(alpha);
  if (p_star.phi > 1e-8 * (1.0 + p_star.kmat.cwiseAbs().maxCoeff())) {
    throw FixedPointNotFoundError(
        "stationary_hj_quadratic: phi(alpha*) != 0; not a Gibbs-type fixed "
        "point");
  }

  GaugeSolution gauge;
  gauge.alpha_star = alpha;
  gauge.g_star = p_star.g;
  gauge.a_m = jacobian_of_m(provider, alpha, opt.fd_step);
  gauge.phi2 = half_hessian_of_phi(provider, alpha, opt.fd_step);

  Eigen::LLT<Matrix> llt(gauge.g_star);
  const Matrix ginv = llt.solve(Matrix::Identity(m, m));
  const Matrix a_tilde = ginv * gauge.a_m;
  const Matrix q = symmetrized(gauge.phi2 -
                               gauge.a_m.transpose() * ginv * gauge.a_m);
  const Matrix x = solve_care_stabilizing(a_tilde, ginv, q);
  gauge.G = -x;
  gauge.drift_lin = ginv * (gauge.G + gauge.a_m);
  if (!is_hurwitz(gauge.drift_lin)) {
    throw BranchSelectionError(
        "stationary_hj_quadratic: computed branch is not Hurwitz");
  }
  return gauge;
}

Path drift_ode_solve(const geometry::GeometryProvider& provider,
                     const GaugeSolution& gauge, const Vector& lambda0, double T,
                     double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) {
    throw InvalidParameterError("drift_ode_solve: T > 0 and dt > 0");
  }
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
  const double h = T / steps;
  const double initial_dev =
      std::max(1e-12, (lambda0 - gauge.alpha_star).norm());

  Path path;
  path.times = Vector(steps + 1);
  path.points = Matrix(steps + 1, lambda0.size());
  Vector y = lambda0;
  path.times[0] = 0.0;
  path.points.row(0) = y.transpose();
  for (int s = 0; s < steps; ++s) {
    const Vector k1 = gauge_drift(provider, gauge, y);
    const Vector k2 = gauge_drift(provider, gauge, y + 0.5 * h * k1);
    const Vector k3 = gauge_drift(provider, gauge, y + 0.5 * h * k2);
    const Vector k4 = gauge_drift(provider, gauge, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((y - gauge.alpha_star).norm() > 10.0 * initial_dev) {
      throw TrajectoryBlowupError(
          "drift_ode_solve: deviation from alpha* grew tenfold; wrong gauge "
          "branch");
    }
    path.times[s + 1] = (s + 1) * h;
    path.points.row(s + 1) = y.transpose();
  }
  return path;
}

Matrix stationary_covariance(const GaugeSolution& gauge, double delta_t) {
  if (!(delta_t > 0.0)) {
    throw InvalidParameterError("stationary_covariance: delta_t > 0");
  }
  if (!is_hurwitz(gauge.drift_lin)) {
    throw BranchSelectionError("stationary_covariance: drift is not Hurwitz");
  }
  const int m = static_cast<int>(gauge.g_star.rows());
  Eigen::LLT<Matrix> llt(gauge.g_star);
  const Matrix noise = llt.solve(Matrix::Identity(m, m)) / delta_t;
  const Matrix sigma = solve_lyapunov(gauge.drift_lin, noise);
  Eigen::LLT<Matrix> check(sigma);
  if (check.info() != Eigen::Success) {
    throw BranchSelectionError("stationary_covariance: sigma not SPD");
  }
  return sigma;
}

Path ottinger_path(const geometry::GeometryProvider& provider,
                   const GaugeSolution& gauge, const Matrix& sigma,
                   const Vector& lambda0, double T, double dt) {
  const int m = static_cast<int>(lambda0.size());
  const Matrix correction = Matrix::Identity(m, m) + sigma * gauge.G;
  Eigen::JacobiSVD<Matrix> svd(correction,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = 1.0 + (sigma * gauge.G).norm();
  if (svd.singularValues().minCoeff() < 1e-10 * scale) {
    throw DegenerateCorrectionError("ottinger_path: I + sigma G is singular");
  }
  Eigen::FullPivLU<Matrix> lu(correction);
  Path alpha = drift_ode_solve(provider, gauge, lambda0, T, dt);
  Path out = alpha;
  for (int k = 0; k < alpha.nodes(); ++k) {
    out.points.row(k) = lu.solve(alpha.points.row(k).transpose()).transpose();
  }
  return out;
}

OmReport om_decomposition_check(const GaugeSolution& gauge,
                                const harmonic::HarmonicSpec& spec, double T) {
  spec.validate();
  if (gauge.G.rows() != 1) {
    throw InvalidParameterError(
        "om_decomposition_check: harmonic (1-d) gauge required");
  }
  const double kappa = spec.kappa;
  const double dt_slow = spec.delta_t;
  const double G = gauge.G(0, 0);

  // Exact OU transition moments for ldot = drift_lin * l with noise
  // (delta_t g)^-1.
  const double mu = spec.u0 * std::exp(-kappa * T);
  const double v = (1.0 - std::exp(-2.0 * kappa * T)) / (2.0 * kappa * dt_slow);

  OmReport report;
  report.expected = spec.u0 / std::cosh(kappa * T);
  report.argmax = mu / (1.0 + dt_slow * G * v);
  report.argmax_error = std::abs(report.argmax - report.expected);
  report.pass_argmax = report.argmax_error <= 1e-8 * (1.0 + std::abs(report.expected));

  // Backward Hamilton-Jacobi gauge a(t): adot = Phi2 - (a + A_M)^t g^-1
  // (a + A_M), a(T) = 0, integrated backward on a half-step grid.
  const double ode_dt = std::min(1e-3, T / 64.0);
  const int steps = static_cast<int>(std::ceil(T / ode_dt - 1e-12));
  const double h = T / steps;
  const double phi2 = gauge.phi2(0, 0);
  const double am = gauge.a_m(0, 0);
  const double ginv = 1.0 / gauge.g_star(0, 0);
  auto ric = [&](double a) {
    const double w = a + am;
    return phi2 - w * ginv * w;
  };
  std::vector<double> a_half(2 * steps + 1);
  a_half[2 * steps] = 0.0;
  for (int s = 2 * steps; s > 0; --s) {
    const double hh = -0.5 * h;  // backward half step
    const double a = a_half[s];
    const double k1 = ric(a);
    const double k2 = ric(a + 0.5 * hh * k1);
    const double k3 = ric(a + 0.5 * hh * k2);
    const double k4 = ric(a + hh * k3);
    a_half[s - 1] = a + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Forward path udot = g^-1 (a(t) u + M(u)); M = 0 on the surrogate.
  std::vector<double> u(steps + 1);
  u[0] = spec.u0;
  auto f = [&](double a, double uu) { return ginv * (a * uu); };
  for (int s = 0; s < steps; ++s) {
    const double a0 = a_half[2 * s];
    const double am_ = a_half[2 * s + 1];
    const double a1 = a_half[2 * s + 2];
    const double k1 = f(a0, u[s]);
    const double k2 = f(am_, u[s] + 0.5 * h * k1);
    const double k3 = f(am_, u[s] + 0.5 * h * k2);
    const double k4 = f(a1, u[s] + h * k3);
    u[s + 1] = u[s] + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  report.backward_endpoint = u[steps];

  // Numerical extremal between (0, u0) and (T, u0 sech(kappa T)).
  geometry::HarmonicSurrogateProvider surrogate(kappa);
  lagrangian::LagrangianContext ctx{&surrogate, dt_slow, 1.0};
  Vector l0(1), lT(1);
  l0 << spec.u0;
  lT << report.expected;
  const paths::BvpSolution extremal =
      paths::solve_extremal(ctx, l0, lT, T, steps + 1);

  double dev_ext = 0.0;
  double dev_thermo = 0.0;
  for (int s = 0; s <= steps; ++s) {
    dev_ext = std::max(dev_ext, std::abs(u[s] - extremal.path.points(s, 0)));
    const double th = spec.u0 / std::cosh(kappa * s * h);
    dev_thermo = std::max(dev_thermo, std::abs(u[s] - th));
  }
  report.backward_vs_extremal = dev_ext;
  report.backward_vs_thermo = dev_thermo;
  report.pass_extremal = extremal.converged && dev_ext <= 1e-4;
  return report;
}

}  // namespace pathclosure::weaknoise
