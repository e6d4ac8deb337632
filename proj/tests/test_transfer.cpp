#include <doctest.h>

#include <cmath>
#include <memory>

#include "pathclosure/harmonic.hpp"
#include "pathclosure/rng.hpp"
#include "pathclosure/transfer.hpp"

using namespace pathclosure;
using namespace pathclosure::transfer;

TEST_CASE("free surrogate: delta spreads into a unit-mass Gaussian") {
  geometry::FreeSurrogateProvider free_surrogate;
  const GridSpec grid = make_grid_1d(-8.0, 8.0, 801);
  const TransferOperator op = build_transfer(free_surrogate, grid, 1.0, 10, 1.0);
  Vector start(1);
  start << 0.0;
  ConsistencyField psi = ConsistencyField::delta(grid, start);
  CHECK(psi.l1() == doctest::Approx(1.0));
  const ConsistencyField out = propagate(op, psi, 1);
  CHECK(std::abs(out.l1() - 1.0) < 1e-6);
  // Total variance after one step is 1/g = 1.
  CHECK(out.variance() == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(std::abs(out.mean()[0]) < 1e-9);
}

TEST_CASE("zero field stays zero") {
  geometry::FreeSurrogateProvider free_surrogate;
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 101);
  const TransferOperator op = build_transfer(free_surrogate, grid, 1.0, 4, 1.0);
  const ConsistencyField zero = ConsistencyField::zero(grid);
  CHECK(propagate(op, zero, 3).l1() == 0.0);
}

TEST_CASE("harmonic argmax tracks the thermodynamical path") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 801);
  SUBCASE("single step at n_sub = 20 is within two percent") {
    const TransferOperator op = build_transfer(h, grid, 1.0, 20, 1.0);
    Vector start(1);
    start << 1.0;
    const ConsistencyField out =
        propagate(op, ConsistencyField::delta(grid, start), 1);
    const double target = 1.0 / std::cosh(1.0);
    CHECK(std::abs(out.argmax_refined() - target) / target < 0.02);
  }
  SUBCASE("three steps at n_sub = 40 stay within two percent") {
    const TransferOperator op = build_transfer(h, grid, 1.0, 40, 1.0);
    Vector start(1);
    start << 1.0;
    ConsistencyField psi = ConsistencyField::delta(grid, start);
    for (int t = 1; t <= 3; ++t) {
      psi = propagate(op, psi, 1);
      const double target = 1.0 / std::cosh(static_cast<double>(t));
      CHECK(std::abs(psi.argmax_refined() - target) / target < 0.02);
    }
  }
}

TEST_CASE("n_sub = 1 reproduces the one-step backward-discretized kernel") {
  // entry(l, k) = (2 pi)^{-m/2} sqrt|g(k)|
  //              exp[-(dt^2/2)((l-k)/dt - g^-1 M)^t g ((l-k)/dt - g^-1 M)
  //                   - w_rev IL_rev(k)]
  const double beta = 0.5;
  geometry::OscillatorClosedFormProvider osc(beta);
  const GridSpec grid = make_grid_2d(-1.0, 1.0, 17, -1.0, 1.0, 17);
  const double delta_t = 0.7;
  const double w_rev = 1.3;
  const TransferOperator op = build_transfer(osc, grid, delta_t, 1, w_rev);
  for (int j = 0; j < grid.node_count(); j += 37) {
    const Vector k = grid.node(j);
    const geometry::GeometryPoint p = osc.at(k);
    Eigen::LLT<Matrix> llt(p.g);
    const double il_rev = 0.5 * delta_t * delta_t * std::max(0.0, p.excess());
    for (int i = 0; i < grid.node_count(); i += 53) {
      const Vector l = grid.node(i);
      const Vector arg = (l - k) / delta_t - llt.solve(p.M);
      const double expected = std::pow(2.0 * M_PI, -1.0) *
                              std::sqrt(p.g.determinant()) *
                              std::exp(-0.5 * delta_t * delta_t *
                                           arg.dot(p.g * arg) -
                                       w_rev * il_rev);
      CHECK(op.substep_kernel()(i, j) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform field loses mass under confinement each step") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-3.0, 3.0, 301);
  const TransferOperator op = build_transfer(h, grid, 1.0, 10, 1.0);
  ConsistencyField psi = ConsistencyField::zero(grid);
  psi.values.setOnes();
  psi.normalize_l1();
  double prev = psi.l1();
  for (int s = 0; s < 4; ++s) {
    psi.values = op.apply(psi.values);
    const double mass = psi.l1();
    CHECK(mass < prev);
    prev = mass;
  }
}

TEST_CASE("L1 contraction over random non-negative fields") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const TransferOperator op = build_transfer(h, grid, 1.0, 8, 1.0);
  GaussianStream rng(73);
  const Vector w = op.quadrature_weights();
  for (int t = 0; t < 50; ++t) {
    ConsistencyField psi = ConsistencyField::zero(grid);
    for (int f = 0; f < grid.node_count(); ++f) {
      psi.values[f] = rng.uniform(0.0, 1.0);
    }
    psi.normalize_l1();
    const Vector out = op.apply(psi.values);
    CHECK(w.dot(out.cwiseAbs()) <= 1.0 + 1e-6);
  }
}

TEST_CASE("strict positivity improvement") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 201);
  const TransferOperator op = build_transfer(h, grid, 1.0, 20, 1.0);
  // Corner delta: even the farthest node must become strictly positive.
  Vector corner(1);
  corner << 4.0;
  const ConsistencyField out =
      propagate(op, ConsistencyField::delta(grid, corner), 1);
  CHECK(out.values.minCoeff() > 0.0);
  // n_sub = 1 reproduces the one-step kernel entrywise positive.
  const TransferOperator single = build_transfer(h, grid, 1.0, 1, 1.0);
  CHECK(single.substep_kernel().minCoeff() > 0.0);
}

TEST_CASE("steady state matches the ground-state oracle") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 801);
  const TransferOperator op = build_transfer(h, grid, 1.0, 40, 1.0);
  const SteadyStateResult res = steady_state(op, 1e-10, 400, 11);
  REQUIRE(res.converged);
  const double target_rate = std::exp(-0.5);
  CHECK(std::abs(res.eigenvalue_per_unit_time(1.0) - target_rate) / target_rate <
        0.02);
  CHECK(std::abs(res.psi.variance() - 1.0) < 0.02);
  CHECK(res.psi.values.minCoeff() > 0.0);
  CHECK(res.confinement_met);
}

TEST_CASE("steady state at n_sub = 20: eigenvalue sharp, variance biased O(dt)") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 801);
  const TransferOperator op = build_transfer(h, grid, 1.0, 20, 1.0);
  const SteadyStateResult res = steady_state(op, 1e-10, 400, 11);
  REQUIRE(res.converged);
  // The eigenvalue bias of the backward-point rule is second order (the
  // asymmetric step is similar to its symmetrized form), the eigenvector
  // variance bias is first order: ~ dt_sub kappa / 2 = 2.5% here.
  const double target_rate = std::exp(-0.5);
  CHECK(std::abs(res.eigenvalue_per_unit_time(1.0) - target_rate) / target_rate <
        0.02);
  CHECK(std::abs(res.psi.variance() - 1.0) < 0.03);
}

TEST_CASE("steady state is seed independent") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const TransferOperator op = build_transfer(h, grid, 1.0, 20, 1.0);
  const SteadyStateResult a = steady_state(op, 1e-10, 400, 1);
  const SteadyStateResult b = steady_state(op, 1e-10, 400, 2);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  const Vector w = op.quadrature_weights();
  CHECK(w.dot((a.psi.values - b.psi.values).cwiseAbs()) < 1e-8);
}

TEST_CASE("free surrogate confinement condition is flagged") {
  geometry::FreeSurrogateProvider free_surrogate;
  const GridSpec grid = make_grid_1d(-6.0, 6.0, 301);
  const TransferOperator op = build_transfer(free_surrogate, grid, 1.0, 5, 1.0);
  const SteadyStateResult res = steady_state(op, 1e-8, 200, 4);
  CHECK_FALSE(res.confinement_met);
}

TEST_CASE("substep refinement moves the eigenvalue by less than one percent") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const TransferOperator op20 = build_transfer(h, grid, 1.0, 20, 1.0);
  const TransferOperator op40 = build_transfer(h, grid, 1.0, 40, 1.0);
  const double e20 = steady_state(op20, 1e-10, 400, 3).eigenvalue;
  const double e40 = steady_state(op40, 1e-10, 400, 3).eigenvalue;
  CHECK(std::abs(e20 - e40) / e40 < 0.01);
}

TEST_CASE("propagated field matches the closed kernel") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 801);
  harmonic::HarmonicSpec spec{1.0, 1.0, 1.0};
  Vector start(1);
  start << 1.0;

  auto normalized_gap = [&](int n_sub) {
    const TransferOperator op = build_transfer(h, grid, 1.0, n_sub, 1.0);
    ConsistencyField out = propagate(op, ConsistencyField::delta(grid, start), 1);
    out.normalize_l1();
    double peak_gap = 0.0;
    double ratio_gap = 0.0;
    const double peak = out.max_value();
    for (int f = 0; f < grid.node_count(); ++f) {
      if (out.values[f] <= 0.01 * peak) continue;
      const double exact = harmonic::kernel_closed(spec, grid.node(f)[0], 1.0);
      peak_gap = std::max(peak_gap, std::abs(out.values[f] - exact) / peak);
      ratio_gap = std::max(ratio_gap, std::abs(out.values[f] - exact) / exact);
    }
    return std::pair<double, double>(peak_gap, ratio_gap);
  };

  const auto [peak20, ratio20] = normalized_gap(20);
  CHECK(peak20 < 0.03);  // within three percent of the peak everywhere
  const auto [peak40, ratio40] = normalized_gap(40);
  // The backward-point bias is first order in the substep.
  CHECK(ratio40 < 0.6 * ratio20);
  CHECK(peak40 < 0.6 * peak20);
}

TEST_CASE("appendix diagnostics on the harmonic surrogate") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const TransferOperator op = build_transfer(h, grid, 1.0, 20, 1.0);
  const AppendixBReport rep = appendix_b_diagnostics(op, 20, 5);
  CHECK(rep.contraction_pass);
  CHECK(rep.max_l1_ratio <= 1.0 + 1e-6);
  CHECK(rep.confinement_met);        // kappa^2 u^2 grows at the boundary
  CHECK(rep.translation_modulus > 0.0);
  // A wide-enough grid keeps the propagated tail below the warning level.
  const GridSpec wide = make_grid_1d(-6.0, 6.0, 601);
  const TransferOperator op_wide = build_transfer(h, wide, 1.0, 20, 1.0);
  const AppendixBReport rep_wide = appendix_b_diagnostics(op_wide, 20, 5);
  CHECK_FALSE(rep_wide.tail_warning);
  CHECK(rep_wide.confinement_met);
}

TEST_CASE("appendix diagnostics flag the free surrogate") {
  geometry::FreeSurrogateProvider free_surrogate;
  const GridSpec grid = make_grid_1d(-8.0, 8.0, 401);
  const TransferOperator op = build_transfer(free_surrogate, grid, 1.0, 5, 1.0);
  const AppendixBReport rep = appendix_b_diagnostics(op, 12, 9);
  CHECK_FALSE(rep.confinement_met);
  CHECK(rep.contraction_pass);
}

TEST_CASE("oscillator transport conserves mass away from the boundary") {
  // IL_rev = 0: one step is pure drift + diffusion. The kernel covariance in
  // lambda coordinates is (dt_sub/delta_t) g^-1 = beta I per substep, so a
  // small beta keeps the spread at 0.14 and fields supported on the central
  // half of a [-2, 2]^2 grid keep unit mass to 1e-6 over one short step.
  const double beta = 0.02;
  geometry::OscillatorClosedFormProvider osc(beta);
  const GridSpec grid = make_grid_2d(-2.0, 2.0, 41, -2.0, 2.0, 41);
  const TransferOperator op = build_transfer(osc, grid, 0.1, 1, 1.0);
  const AppendixBReport rep = appendix_b_diagnostics(op, 10, 21);
  CHECK(rep.max_l1_ratio <= 1.0 + 1e-6);
  CHECK(rep.max_l1_ratio >= 1.0 - 1e-6);
  CHECK_FALSE(rep.confinement_met);  // IL_rev == 0 everywhere
}

TEST_CASE("grid and parameter validation") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 101);
  CHECK_THROWS_AS(build_transfer(h, grid, -1.0, 4, 1.0), InvalidParameterError);
  CHECK_THROWS_AS(build_transfer(h, grid, 1.0, 0, 1.0), InvalidParameterError);
  // Substep width below the spacing is rejected (quadrature aliasing).
  CHECK_THROWS_AS(build_transfer(h, make_grid_1d(-4.0, 4.0, 101), 1.0, 400, 1.0),
                  InvalidParameterError);
  const TransferOperator op = build_transfer(h, grid, 1.0, 4, 1.0);
  const ConsistencyField other =
      ConsistencyField::zero(make_grid_1d(-4.0, 4.0, 201));
  CHECK_THROWS_AS(propagate(op, other, 1), GridMismatchError);
}

TEST_CASE("leading spectrum magnitudes decay") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 201);
  const TransferOperator op = build_transfer(h, grid, 1.0, 10, 1.0);
  const auto mags = top_magnitudes(op, 5, 3);
  REQUIRE(mags.size() == 5);
  for (std::size_t i = 1; i < mags.size(); ++i) CHECK(mags[i] <= mags[i - 1]);
  // Spectral gap of the ground-state problem: ratio ~ e^{-kappa} per step.
  CHECK(mags[1] / mags[0] == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}
