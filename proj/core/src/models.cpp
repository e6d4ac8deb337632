#include "pathclosure/models.hpp"

#include <cmath>
#include <complex>
#include <functional>

#include "pathclosure/rng.hpp"

namespace pathclosure::models {

namespace {

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double step) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double save = xp[i];
    xp[i] = save + step;
    const double fp = f(xp);
    xp[i] = save - step;
    const double fm = f(xp);
    xp[i] = save;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace

Matrix HamiltonianModel::sample_trial(const Vector& lambda, double beta, int count,
                                      std::uint64_t seed) const {
  if (!(beta > 0.0)) {
    throw InvalidParameterError(
        "sample_trial: beta must be > 0 (trial density not normalizable), got " +
        std::to_string(beta));
  }
  if (count < 1) {
    throw InvalidParameterError("sample_trial: count must be >= 1");
  }
  if (lambda.size() != resolved_dim()) {
    throw InvalidParameterError("sample_trial: lambda has wrong dimension");
  }
  const Vector mean = trial_state_mean(lambda, beta);
  const Vector sd = trial_state_sd(beta);
  Matrix out(count, fine_dim());
  GaussianStream gauss(seed);
  for (int r = 0; r < count; ++r) {
    for (int c = 0; c < fine_dim(); ++c) {
      out(r, c) = mean[c] + sd[c] * gauss();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// OscillatorModel

Vector OscillatorModel::liouville_resolved(const Vector& x) const {
  Vector la(2);
  la << x[1], -x[0];
  return la;
}

Vector OscillatorModel::liouville2_resolved(const Vector& x) const {
  // L^2 A = {LA, H} = -(q, p)
  return -x;
}

Matrix OscillatorModel::poisson_matrix() const {
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

Vector OscillatorModel::flow(const Vector& x) const { return liouville_resolved(x); }

Vector OscillatorModel::trial_state_mean(const Vector& lambda, double beta) const {
  return lambda / beta;
}

Vector OscillatorModel::trial_state_sd(double beta) const {
  return Vector::Constant(2, 1.0 / std::sqrt(beta));
}

Vector OscillatorModel::trial_resolved_mean(const Vector& lambda, double beta) const {
  return lambda / beta;
}

Matrix OscillatorModel::trial_resolved_cov(double beta) const {
  return Matrix::Identity(2, 2) / beta;
}

// ---------------------------------------------------------------------------
// TbhModel

TbhModel::TbhModel(int trunc, int k_res) : trunc_(trunc), k_res_(k_res) {
  if (trunc < 1 || k_res < 1 || k_res > trunc) {
    throw InvalidParameterError("TbhModel: require 1 <= k_res <= trunc");
  }
  // Extract the quadratic forms of the resolved tendency components exactly:
  // for a homogeneous quadratic f, Q_ab = (f(e_a+e_b) - f(e_a) - f(e_b))/2.
  const int n = fine_dim();
  const int m = resolved_dim();
  qforms_.resize(m);
  auto tendency_comp = [this](const Vector& s, int i) { return flow(s)[i]; };
  for (int i = 0; i < m; ++i) {
    Matrix q = Matrix::Zero(n, n);
    Vector e = Vector::Zero(n);
    std::vector<double> diag(n);
    for (int a = 0; a < n; ++a) {
      e.setZero();
      e[a] = 1.0;
      diag[a] = tendency_comp(e, i);
      q(a, a) = diag[a];
    }
    Vector e2 = Vector::Zero(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        e2.setZero();
        e2[a] = 1.0;
        e2[b] = 1.0;
        const double v = 0.5 * (tendency_comp(e2, i) - diag[a] - diag[b]);
        q(a, b) = v;
        q(b, a) = v;
      }
    }
    qforms_[i] = q;
  }
}

std::vector<std::complex<double>> TbhModel::modes(const Vector& x) const {
  std::vector<std::complex<double>> z(trunc_ + 1);
  z[0] = 0.0;
  for (int k = 1; k <= trunc_; ++k) {
    z[k] = std::complex<double>(x[2 * (k - 1)], x[2 * (k - 1) + 1]);
  }
  return z;
}

Vector TbhModel::resolved(const Vector& x) const { return x.head(resolved_dim()); }

Vector TbhModel::flow(const Vector& x) const {
  const auto z = modes(x);
  auto mode = [&](int k) -> std::complex<double> {
    if (k > 0) return z[k];
    return std::conj(z[-k]);
  };
  Vector out(fine_dim());
  for (int k = 1; k <= trunc_; ++k) {
    std::complex<double> conv(0.0, 0.0);
    for (int p = -trunc_; p <= trunc_; ++p) {
      if (p == 0) continue;
      const int q = k - p;
      if (q == 0 || std::abs(q) > trunc_) continue;
      conv += mode(p) * mode(q);
    }
    const std::complex<double> zdot =
        std::complex<double>(0.0, -0.5 * static_cast<double>(k)) * conv;
    out[2 * (k - 1)] = zdot.real();
    out[2 * (k - 1) + 1] = zdot.imag();
  }
  return out;
}

Vector TbhModel::liouville_resolved(const Vector& x) const {
  return flow(x).head(resolved_dim());
}

Vector TbhModel::liouville2_resolved(const Vector& x) const {
  // L^2 A_i = grad(LA_i) . xdot = 2 (Q_i x) . xdot
  const Vector xdot = flow(x);
  Vector out(resolved_dim());
  for (int i = 0; i < resolved_dim(); ++i) {
    out[i] = 2.0 * (qforms_[i] * x).dot(xdot);
  }
  return out;
}

double TbhModel::hamiltonian(const Vector& x) const {
  const auto z = modes(x);
  auto mode = [&](int k) -> std::complex<double> {
    if (k > 0) return z[k];
    return std::conj(z[-k]);
  };
  std::complex<double> sum(0.0, 0.0);
  for (int p = -trunc_; p <= trunc_; ++p) {
    if (p == 0) continue;
    for (int q = -trunc_; q <= trunc_; ++q) {
      if (q == 0) continue;
      const int r = -p - q;
      if (r == 0 || std::abs(r) > trunc_) continue;
      sum += mode(p) * mode(q) * mode(r);
    }
  }
  return -sum.real() / 6.0;
}

Matrix TbhModel::poisson_matrix() const {
  Matrix j = Matrix::Zero(fine_dim(), fine_dim());
  for (int k = 1; k <= trunc_; ++k) {
    const int a = 2 * (k - 1);
    const double s = -0.5 * static_cast<double>(k);
    j(a, a + 1) = s;
    j(a + 1, a) = -s;
  }
  return j;
}

Vector TbhModel::trial_state_mean(const Vector& lambda, double beta) const {
  Vector mean = Vector::Zero(fine_dim());
  mean.head(resolved_dim()) = lambda / (2.0 * beta);
  return mean;
}

Vector TbhModel::trial_state_sd(double beta) const {
  return Vector::Constant(fine_dim(), 1.0 / std::sqrt(2.0 * beta));
}

Vector TbhModel::trial_resolved_mean(const Vector& lambda, double beta) const {
  return lambda / (2.0 * beta);
}

Matrix TbhModel::trial_resolved_cov(double beta) const {
  return Matrix::Identity(resolved_dim(), resolved_dim()) / (2.0 * beta);
}

// ---------------------------------------------------------------------------
// Checks

bool poisson_bracket_check(const HamiltonianModel& model, const Vector& x,
                           double tol) {
  if (!(tol > 0.0)) {
    throw InvalidParameterError("poisson_bracket_check: tol must be > 0");
  }
  if (!x.allFinite()) {
    throw NonFiniteEvaluationError("poisson_bracket_check: state is non-finite");
  }
  const double step = 1e-5;
  const Matrix j = model.poisson_matrix();
  const Vector grad_h =
      fd_gradient([&](const Vector& y) { return model.hamiltonian(y); }, x, step);
  const Vector jgh = j * grad_h;
  const Vector la = model.liouville_resolved(x);
  if (!la.allFinite() || !grad_h.allFinite()) {
    throw NonFiniteEvaluationError(
        "poisson_bracket_check: model evaluation is non-finite");
  }
  for (int i = 0; i < model.resolved_dim(); ++i) {
    const int ii = i;
    const Vector grad_a = fd_gradient(
        [&](const Vector& y) { return model.resolved(y)[ii]; }, x, step);
    if (!grad_a.allFinite()) {
      throw NonFiniteEvaluationError(
          "poisson_bracket_check: resolved-variable gradient is non-finite");
    }
    if (std::abs(grad_a.dot(jgh) - la[i]) > tol) return false;
  }
  return true;
}

double liouville_energy_residual(const HamiltonianModel& model, const Vector& x) {
  const double step = 1e-5;
  const Vector grad_e =
      fd_gradient([&](const Vector& y) { return model.energy(y); }, x, step);
  const Vector grad_h =
      fd_gradient([&](const Vector& y) { return model.hamiltonian(y); }, x, step);
  return std::abs(grad_e.dot(model.poisson_matrix() * grad_h));
}

Vector integrate_flow(const HamiltonianModel& model, Vector x, double duration,
                      double step) {
  const int nsteps = static_cast<int>(std::ceil(duration / step));
  const double h = duration / nsteps;
  for (int s = 0; s < nsteps; ++s) {
    const Vector k1 = model.flow(x);
    const Vector k2 = model.flow(x + 0.5 * h * k1);
    const Vector k3 = model.flow(x + 0.5 * h * k2);
    const Vector k4 = model.flow(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

double energy_drift(const HamiltonianModel& model, const Vector& x, double tau,
                    double step) {
  const double e0 = model.energy(x);
  const double e1 = model.energy(integrate_flow(model, x, tau, step));
  const double scale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
  return std::abs(e1 - e0) / scale;
}

}  // namespace pathclosure::models
