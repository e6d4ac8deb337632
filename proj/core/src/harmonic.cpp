#include "pathclosure/harmonic.hpp"

#include <cmath>

namespace pathclosure::harmonic {

namespace {

constexpr double kOverflowArg = 700.0;

void overflow_guard(double kt) {
  if (kt >= kOverflowArg) {
    throw RangeOverflowError(
        "harmonic: kappa*T >= 700 overflows double hyperbolics; use the "
        "asymptotic large-time forms instead");
  }
  if (!(kt > 0.0)) {
    throw InvalidParameterError("harmonic: require kappa*T > 0");
  }
}

}  // namespace

double extremal_closed(const HarmonicSpec& spec, double uT, double T, double t) {
  spec.validate();
  overflow_guard(spec.kappa * T);
  if (t < 0.0 || t > T) {
    throw InvalidParameterError("extremal_closed: require 0 <= t <= T");
  }
  const double k = spec.kappa;
  const double B = 0.5 * (spec.u0 * std::exp(k * T) - uT) / std::sinh(k * T);
  const double A = spec.u0 - B;
  return A * std::exp(k * t) + B * std::exp(-k * t);
}

double extremal_action_closed(const HarmonicSpec& spec, double uT, double T) {
  spec.validate();
  const double kt = spec.kappa * T;
  overflow_guard(kt);
  const double coth = 1.0 / std::tanh(kt);
  const double csch = 1.0 / std::sinh(kt);
  return 0.5 * spec.kappa *
         (coth * (spec.u0 * spec.u0 + uT * uT) - 2.0 * spec.u0 * uT * csch);
}

double thermo_path(const HarmonicSpec& spec, double t) {
  spec.validate();
  if (t < 0.0) throw InvalidParameterError("thermo_path: t >= 0");
  return spec.u0 / std::cosh(spec.kappa * t);
}

KernelMoments kernel_moments(const HarmonicSpec& spec, double T) {
  spec.validate();
  const double kt = spec.kappa * T;
  overflow_guard(kt);
  KernelMoments m;
  m.mean = spec.u0 / std::cosh(kt);
  m.variance = std::tanh(kt) / (spec.delta_t * spec.kappa);
  return m;
}

double kernel_closed(const HarmonicSpec& spec, double uT, double T) {
  const KernelMoments m = kernel_moments(spec, T);
  const double z = uT - m.mean;
  return std::exp(-0.5 * z * z / m.variance) /
         std::sqrt(2.0 * M_PI * m.variance);
}

RestartResult restart_experiment(const HarmonicSpec& spec, double t_restart,
                                 double horizon) {
  spec.validate();
  if (!(t_restart > 0.0) || !(t_restart < horizon)) {
    throw InvalidParameterError("restart_experiment: need 0 < t_restart < horizon");
  }
  const double step = 0.01;
  RestartResult out;
  out.t_restart = t_restart;
  out.restart_value = thermo_path(spec, t_restart);

  const int n_orig = static_cast<int>(std::floor(horizon / step + 1e-9)) + 1;
  out.original.times = Vector(n_orig);
  out.original.points = Matrix(n_orig, 1);
  for (int i = 0; i < n_orig; ++i) {
    const double t = i * step;
    out.original.times[i] = t;
    out.original.points(i, 0) = thermo_path(spec, t);
  }

  const int n_res =
      static_cast<int>(std::floor((horizon - t_restart) / step + 1e-9)) + 1;
  HarmonicSpec relaunched = spec;
  relaunched.u0 = out.restart_value;
  out.restarted.times = Vector(n_res);
  out.restarted.points = Matrix(n_res, 1);
  for (int i = 0; i < n_res; ++i) {
    const double t = t_restart + i * step;
    out.restarted.times[i] = t;
    out.restarted.points(i, 0) = thermo_path(relaunched, t - t_restart);
  }
  return out;
}

}  // namespace pathclosure::harmonic
