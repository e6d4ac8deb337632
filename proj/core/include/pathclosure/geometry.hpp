#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathclosure/grid.hpp"
#include "pathclosure/models.hpp"
#include "pathclosure/types.hpp"

namespace pathclosure::geometry {

/// Per-entry standard errors attached to Monte Carlo geometry (batch means,
/// 20 batches by default).
struct GeometrySe {
  Vector a;
  Matrix g;
  Vector M;
  Matrix kmat;
  Matrix h;
  double phi = 0.0;
  /// SE of the excess phi - M^t g^-1 M.
  double excess = 0.0;
  /// SE of lambda^t M.
  double lambda_m = 0.0;
};

/// Local geometric data at one manifold point:
///   a    = <A>                       (Legendre-dual coordinates)
///   g    = Cov(A)                    (Fisher metric)
///   M    = <LA>                      (reversible drift numerator)
///   kmat = <LA LA^t>                 (symmetrized)
///   h    = <(A - a) LA^t>,  h_ij = <(A_i - a_i) LA_j>
///   phi  = lambda^t kmat lambda >= 0
struct GeometryPoint {
  Vector a;
  Matrix g;
  Vector M;
  Matrix kmat;
  Matrix h;
  double phi = 0.0;
  std::optional<GeometrySe> se;

  /// phi - M^t g^-1 M; twice the irreversible-confinement density per
  /// (delta t)^2. Non-negative up to provider tolerance.
  double excess() const;
};

enum class Provenance { kClosedForm, kMonteCarlo, kTabulated };

class GeometryProvider {
 public:
  virtual ~GeometryProvider() = default;

  virtual int dim() const = 0;
  virtual Provenance provenance() const = 0;
  /// Whether the exponential-family identities (lambda^t M = 0) are part of
  /// this provider's contract. Surrogates with prescribed drift are exempt.
  virtual bool exponential_family() const { return true; }
  virtual double default_beta() const { return 1.0; }

  /// Evaluate and validate the geometry at the given coordinates. Throws
  /// DegenerateGeometryError when the Fisher metric is numerically singular
  /// and ProviderInconsistencyError when structural bounds fail beyond the
  /// provenance tolerance.
  GeometryPoint at(const TrialCoordinates& coords) const;
  GeometryPoint at(const Vector& lambda) const {
    return at(TrialCoordinates(lambda, default_beta()));
  }

 protected:
  virtual GeometryPoint eval(const TrialCoordinates& coords) const = 0;
};

inline GeometryPoint geometry_at(const GeometryProvider& provider,
                                 const TrialCoordinates& coords) {
  return provider.at(coords);
}

/// Closed-form geometry of OscillatorModel: a = lambda/beta, g = I/beta,
/// M = (lambda_2, -lambda_1)/beta, phi = |lambda|^2/beta. The trial manifold
/// is closed under the rotation flow, so the excess vanishes identically.
class OscillatorClosedFormProvider final : public GeometryProvider {
 public:
  explicit OscillatorClosedFormProvider(double beta = 1.0) : beta_(beta) {}
  int dim() const override { return 2; }
  Provenance provenance() const override { return Provenance::kClosedForm; }
  double default_beta() const override { return beta_; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;

 private:
  double beta_;
};

/// Gaussian-moment oracle for TbhModel. The trial density is Gaussian with
/// diagonal covariance, the tendency components are quadratic forms, and all
/// moments follow from Isserlis' theorem in closed form.
class TbhGaussianProvider final : public GeometryProvider {
 public:
  TbhGaussianProvider(std::shared_ptr<const models::TbhModel> model,
                      double beta = 1.0);
  int dim() const override { return model_->resolved_dim(); }
  Provenance provenance() const override { return Provenance::kClosedForm; }
  double default_beta() const override { return beta_; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;

 private:
  std::shared_ptr<const models::TbhModel> model_;
  double beta_;
};

struct McOptions {
  int count = 100000;
  std::uint64_t seed = 0;
  int batches = 20;
};

/// Monte Carlo geometry for any model with an exact trial sampler. Sampling
/// runs as independent seeded batch chains merged deterministically; standard
/// errors come from the batch means.
class MonteCarloProvider final : public GeometryProvider {
 public:
  MonteCarloProvider(std::shared_ptr<const models::HamiltonianModel> model,
                     McOptions options, double beta = 1.0);
  int dim() const override { return model_->resolved_dim(); }
  Provenance provenance() const override { return Provenance::kMonteCarlo; }
  double default_beta() const override { return beta_; }
  const McOptions& options() const { return options_; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;

 private:
  std::shared_ptr<const models::HamiltonianModel> model_;
  McOptions options_;
  double beta_;
};

/// Precomputed geometry on a rectangular lambda grid with multilinear
/// interpolation; g is interpolated entrywise and projected back to the
/// symmetric cone. Intended for fast repeated lookups by the transfer and
/// pde modules.
class TabulatedProvider final : public GeometryProvider {
 public:
  TabulatedProvider(const GeometryProvider& base, GridSpec grid);
  int dim() const override { return grid_.dim(); }
  Provenance provenance() const override { return Provenance::kTabulated; }
  bool exponential_family() const override { return false; }
  double default_beta() const override { return beta_; }
  const GridSpec& grid() const { return grid_; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;

 private:
  GridSpec grid_;
  double beta_;
  std::vector<GeometryPoint> table_;
};

/// One-dimensional exactly solvable geometry: g = 1, M = 0, phi = kappa^2 u^2.
class HarmonicSurrogateProvider final : public GeometryProvider {
 public:
  explicit HarmonicSurrogateProvider(double kappa) : kappa_(kappa) {
    if (!(kappa > 0.0)) throw InvalidParameterError("harmonic surrogate: kappa > 0");
  }
  double kappa() const { return kappa_; }
  int dim() const override { return 1; }
  Provenance provenance() const override { return Provenance::kClosedForm; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;

 private:
  double kappa_;
};

/// Pure Wiener surrogate: g = 1, M = 0, phi = 0 (no confinement).
class FreeSurrogateProvider final : public GeometryProvider {
 public:
  int dim() const override { return 1; }
  Provenance provenance() const override { return Provenance::kClosedForm; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;
};

/// Constant-coefficient surrogate with prescribed g, M and phi. Not an
/// exponential-family geometry; requires phi >= M^t g^-1 M.
class UniformSurrogateProvider final : public GeometryProvider {
 public:
  UniformSurrogateProvider(Matrix g, Vector M, double phi);
  int dim() const override { return static_cast<int>(M_.size()); }
  Provenance provenance() const override { return Provenance::kClosedForm; }
  bool exponential_family() const override { return false; }

 protected:
  GeometryPoint eval(const TrialCoordinates& coords) const override;

 private:
  Matrix g_;
  Vector M_;
  double phi_;
};

/// Samples of the Liouville residual R = ldot^t (A - a) + lambda^t LA on
/// exact trial draws; <R> = 0 and Var R = ldot^t g ldot - 2 ldot^t M + phi.
Vector liouville_residual_samples(const models::HamiltonianModel& model,
                                  const Vector& lambda, double beta,
                                  const Vector& lambda_dot, int count,
                                  std::uint64_t seed);

struct IdentityCheck {
  std::string name;
  double value = 0.0;   // measured deviation (max norm over components)
  double bound = 0.0;   // 3 x combined standard error (plus atol floor)
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct IdentityOptions {
  int count = 100000;
  std::uint64_t seed = 12345;
  int batches = 20;
  double fd_step = 1e-3;  // lambda step for dM/dlambda
  /// Use nested finite-difference brackets for L^2 A instead of the model's
  /// analytic evaluator.
  bool l2_by_finite_difference = false;
};

/// Statistical verification of the expectation-bracket identities:
/// <R> = 0, lambda^t <LA> = 0, M = -h lambda, <L^2 A> = -kmat lambda,
/// dM_i/dlambda_j = h_ji, and <(T+L)R> = -<R^2> along a prescribed path.
/// Every check passes iff the deviation is within 3 combined standard errors.
IdentityReport identity_suite(const models::HamiltonianModel& model,
                              const Vector& lambda, double beta,
                              const IdentityOptions& options);

}  // namespace pathclosure::geometry
