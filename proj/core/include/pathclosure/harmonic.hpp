#pragma once

#include "pathclosure/types.hpp"

namespace pathclosure::harmonic {

/// Exactly solvable one-dimensional relaxation system with Lagrangian
/// 2L = udot^2 + kappa^2 u^2. Serves as the closed-form oracle for the
/// extremal, action, kernel and thermodynamical-path machinery.
struct HarmonicSpec {
  double kappa = 1.0;
  double u0 = 1.0;
  double delta_t = 1.0;

  void validate() const {
    if (!(kappa > 0.0)) throw InvalidParameterError("HarmonicSpec: kappa > 0");
    if (!(delta_t > 0.0)) throw InvalidParameterError("HarmonicSpec: delta_t > 0");
    if (!std::isfinite(u0)) throw InvalidParameterError("HarmonicSpec: u0 finite");
  }
};

/// Fixed-endpoint extremal A e^{kappa t} + B e^{-kappa t} with
/// B = (u0 e^{kappa T} - uT) / (2 sinh(kappa T)), A = u0 - B.
double extremal_closed(const HarmonicSpec& spec, double uT, double T, double t);

/// S_e = (kappa/2)[coth(kappa T)(u0^2 + uT^2) - 2 u0 uT csch(kappa T)] >= 0.
double extremal_action_closed(const HarmonicSpec& spec, double uT, double T);

/// Thermodynamical path u0 sech(kappa t); satisfies
/// udot = -kappa tanh(kappa t) u with a zero-slope plateau at t = 0.
double thermo_path(const HarmonicSpec& spec, double t);

struct KernelMoments {
  double mean = 0.0;      // u0 sech(kappa T)
  double variance = 0.0;  // 1 / (delta_t kappa coth(kappa T))
};

KernelMoments kernel_moments(const HarmonicSpec& spec, double T);

/// exp(-delta_t S_e(u0, uT; T)) normalized to unit integral over uT; a
/// Gaussian in uT whose argmax is the thermodynamical path.
double kernel_closed(const HarmonicSpec& spec, double uT, double T);

struct RestartResult {
  Path original;     // thermo path from (0, u0), grid step 0.01
  Path restarted;    // thermo path relaunched from (t_restart, original(t_restart))
  double t_restart = 0.0;
  double restart_value = 0.0;
};

/// Relaunch the thermodynamical path from a point on itself. The restarted
/// path shows a fresh plateau and stays strictly above the original for
/// t > t_restart whenever u0 != 0 (the macrostate does not compose).
RestartResult restart_experiment(const HarmonicSpec& spec, double t_restart,
                                 double horizon);

}  // namespace pathclosure::harmonic
