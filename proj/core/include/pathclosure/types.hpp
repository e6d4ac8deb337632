#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pathclosure {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// A model evaluator produced NaN/Inf; distinct from a failed comparison.
class NonFiniteEvaluationError : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Provider returned geometry violating a structural bound (e.g. the
/// irreversible-loss part came out negative beyond tolerance).
class ProviderInconsistencyError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class BoundaryWarningError : public Error {
 public:
  using Error::Error;
};

/// Argument range would overflow double precision (hyperbolic guards).
class RangeOverflowError : public Error {
 public:
  using Error::Error;
};

class BranchSelectionError : public Error {
 public:
  using Error::Error;
};

class FixedPointNotFoundError : public Error {
 public:
  using Error::Error;
};

class TrajectoryBlowupError : public Error {
 public:
  using Error::Error;
};

class DegenerateCorrectionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCurvatureError : public Error {
 public:
  using Error::Error;
};

class TimeStepStabilityError : public Error {
 public:
  using Error::Error;
};

/// A point on the trial-density manifold: conjugate parameters plus the
/// fixed inverse temperature of the underlying Gibbs factor.
struct TrialCoordinates {
  Vector lambda;
  double beta = 1.0;

  TrialCoordinates() = default;
  TrialCoordinates(Vector l, double b = 1.0) : lambda(std::move(l)), beta(b) {}

  void validate() const {
    if (!(beta > 0.0)) {
      throw InvalidParameterError("TrialCoordinates: beta must be > 0, got " +
                                  std::to_string(beta));
    }
    if (!lambda.allFinite()) {
      throw InvalidParameterError("TrialCoordinates: lambda has non-finite entries");
    }
  }
};

/// A time grid with manifold coordinates per node. points.row(k) is the
/// coordinate vector at times[k].
struct Path {
  Vector times;
  Matrix points;

  int nodes() const { return static_cast<int>(times.size()); }
  int dim() const { return static_cast<int>(points.cols()); }

  void validate() const {
    if (times.size() != points.rows()) {
      throw InvalidParameterError("Path: times/points size mismatch");
    }
    if (!times.allFinite() || !points.allFinite()) {
      throw InvalidParameterError("Path: non-finite entries");
    }
    for (Eigen::Index k = 0; k + 1 < times.size(); ++k) {
      if (!(times[k] < times[k + 1])) {
        throw InvalidParameterError("Path: times must be strictly increasing");
      }
    }
  }
};

}  // namespace pathclosure
