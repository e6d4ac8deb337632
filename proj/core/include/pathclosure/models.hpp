#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "pathclosure/types.hpp"

namespace pathclosure::models {

/// Contract for a fine-grained symplectic system. The resolved variables A
/// are the slow functions whose expectations coordinatize the trial-density
/// manifold; liouville_resolved returns LA = {A, H}. Implementations are
/// immutable after construction and all evaluators are pure.
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual int fine_dim() const = 0;
  /// Number of resolved variables (energy excluded).
  virtual int resolved_dim() const = 0;

  virtual Vector resolved(const Vector& x) const = 0;            // A(x)
  virtual Vector liouville_resolved(const Vector& x) const = 0;  // {A,H}(x)
  virtual Vector liouville2_resolved(const Vector& x) const = 0; // {{A,H},H}(x)
  virtual double energy(const Vector& x) const = 0;
  virtual double hamiltonian(const Vector& x) const = 0;
  /// Constant antisymmetric structure matrix J of the bracket
  /// {F,G} = (grad F)^t J (grad G).
  virtual Matrix poisson_matrix() const = 0;
  /// Fine-state tendency xdot = J grad H evaluated analytically.
  virtual Vector flow(const Vector& x) const = 0;

  /// Mean of the fine state under the trial density exp(l^t A - G - beta E).
  virtual Vector trial_state_mean(const Vector& lambda, double beta) const = 0;
  /// Per-component standard deviation of the fine state (diagonal Gaussians
  /// for the shipped models).
  virtual Vector trial_state_sd(double beta) const = 0;
  /// Closed-form mean of A under the trial density.
  virtual Vector trial_resolved_mean(const Vector& lambda, double beta) const = 0;
  /// Closed-form covariance of A under the trial density.
  virtual Matrix trial_resolved_cov(double beta) const = 0;

  /// Exact independent draws from the trial density; rows are samples.
  /// Deterministic for a fixed seed.
  Matrix sample_trial(const Vector& lambda, double beta, int count,
                      std::uint64_t seed) const;
};

/// Canonical oscillator: x = (q, p), H = (q^2 + p^2)/2, A = (q, p),
/// LA = (p, -q), E = H. The trial density is a spherical Gaussian with mean
/// lambda/beta and covariance I/beta.
class OscillatorModel final : public HamiltonianModel {
 public:
  int fine_dim() const override { return 2; }
  int resolved_dim() const override { return 2; }
  Vector resolved(const Vector& x) const override { return x; }
  Vector liouville_resolved(const Vector& x) const override;
  Vector liouville2_resolved(const Vector& x) const override;
  double energy(const Vector& x) const override { return 0.5 * x.squaredNorm(); }
  double hamiltonian(const Vector& x) const override { return energy(x); }
  Matrix poisson_matrix() const override;
  Vector flow(const Vector& x) const override;
  Vector trial_state_mean(const Vector& lambda, double beta) const override;
  Vector trial_state_sd(double beta) const override;
  Vector trial_resolved_mean(const Vector& lambda, double beta) const override;
  Matrix trial_resolved_cov(double beta) const override;
};

/// Spectrally truncated Burgers-Hopf dynamics for modes |k| <= trunc with the
/// reality constraint u_{-k} = conj(u_k). The stored state packs
/// (Re u_1, Im u_1, ..., Re u_trunc, Im u_trunc). Resolved variables are the
/// real components of modes 1..k_res, so m = 2 k_res. The Galerkin tendency
///   du_k/dt = -(i k / 2) sum_{p+q=k} u_p u_q
/// conserves E = sum_k |u_k|^2 and derives from the cubic Hamiltonian
///   H = -(1/6) sum_{p+q+r=0} u_p u_q u_r
/// under the bracket with per-mode block J_k = (-k/2) [[0,1],[-1,0]].
class TbhModel final : public HamiltonianModel {
 public:
  TbhModel(int trunc, int k_res);

  int trunc() const { return trunc_; }
  int fine_dim() const override { return 2 * trunc_; }
  int resolved_dim() const override { return 2 * k_res_; }

  Vector resolved(const Vector& x) const override;
  Vector liouville_resolved(const Vector& x) const override;
  Vector liouville2_resolved(const Vector& x) const override;
  double energy(const Vector& x) const override { return x.squaredNorm(); }
  double hamiltonian(const Vector& x) const override;
  Matrix poisson_matrix() const override;
  Vector flow(const Vector& x) const override;
  Vector trial_state_mean(const Vector& lambda, double beta) const override;
  Vector trial_state_sd(double beta) const override;
  Vector trial_resolved_mean(const Vector& lambda, double beta) const override;
  Matrix trial_resolved_cov(double beta) const override;

  /// Symmetric matrix Q_i with LA_i(x) = x^t Q_i x (the tendency components
  /// are homogeneous quadratics). Used by the Gaussian moment oracle.
  const Matrix& tendency_quadratic_form(int i) const { return qforms_[i]; }

  /// Complex mode amplitudes for k = 1..trunc from a packed state.
  std::vector<std::complex<double>> modes(const Vector& x) const;

 private:
  int trunc_;
  int k_res_;
  std::vector<Matrix> qforms_;
};

/// True iff the analytic LA agrees with (grad A)^t J (grad H), both gradients
/// by central finite differences, within tol in max norm. Non-finite
/// evaluations raise NonFiniteEvaluationError instead of returning false.
bool poisson_bracket_check(const HamiltonianModel& model, const Vector& x,
                           double tol);

/// As above for the energy: |{E, H}| computed by finite differences.
double liouville_energy_residual(const HamiltonianModel& model, const Vector& x);

/// Fixed-step 4th-order integration of the model flow; used only for
/// conservation checks.
Vector integrate_flow(const HamiltonianModel& model, Vector x, double duration,
                      double step = 1e-3);

/// Relative energy drift over a short symplectic integration of duration tau.
double energy_drift(const HamiltonianModel& model, const Vector& x,
                    double tau = 0.1, double step = 1e-3);

}  // namespace pathclosure::models
