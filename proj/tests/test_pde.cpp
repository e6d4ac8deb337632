#include <doctest.h>

#include <cmath>
#include <memory>

#include "pathclosure/pde.hpp"

using namespace pathclosure;
using namespace pathclosure::pde;
using transfer::ConsistencyField;

TEST_CASE("harmonic coefficients: Q = 1, K = 0, V = -kappa^2 u^2 / 2") {
  geometry::HarmonicSurrogateProvider h(1.3);
  const GridSpec grid = make_grid_1d(-2.0, 2.0, 101);
  const PdeCoefficients c = graham_coefficients(h, grid);
  CHECK(c.constant_metric);
  for (int f = 0; f < grid.node_count(); f += 10) {
    const double u = grid.node(f)[0];
    CHECK(c.q[f](0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(c.kdrift[f][0]) < 1e-10);
    CHECK(c.v[f] == doctest::Approx(-0.5 * 1.69 * u * u).epsilon(1e-9));
    CHECK(c.r_scalar[f] == 0.0);
  }
}

TEST_CASE("constant g and M: K = g^-1 M and V = -phi/2 + M^t g^-1 M / 2") {
  Matrix g = Matrix::Identity(1, 1) * 2.0;
  Vector M(1);
  M << 0.6;
  const double phi = 1.0;  // >= M^t g^-1 M = 0.18
  geometry::UniformSurrogateProvider uniform(g, M, phi);
  const GridSpec grid = make_grid_1d(-1.0, 1.0, 33);
  const PdeCoefficients c = graham_coefficients(uniform, grid);
  for (int f = 0; f < grid.node_count(); f += 8) {
    CHECK(c.kdrift[f][0] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(c.v[f] == doctest::Approx(-0.5 + 0.5 * 0.18).epsilon(1e-9));
  }
}

TEST_CASE("oscillator drift field is divergence free") {
  const double beta = 1.0;
  geometry::OscillatorClosedFormProvider osc(beta);
  const GridSpec grid = make_grid_2d(-1.0, 1.0, 33, -1.0, 1.0, 33);
  const PdeCoefficients c = graham_coefficients(osc, grid);
  // Kdrift = beta M = (l2, -l1); numerical divergence vanishes and V == 0.
  const double h = grid.axes[0].spacing();
  for (int f = 0; f < grid.node_count(); ++f) {
    const Vector node = grid.node(f);
    CHECK(std::abs(c.kdrift[f][0] - beta * node[1] / beta) < 1e-9);
    CHECK(std::abs(c.kdrift[f][1] + beta * node[0] / beta) < 1e-9);
    CHECK(std::abs(c.v[f]) < 1e-6);
  }
  // Divergence by central differences at an interior node.
  const int i0 = grid.flat_index({16, 16});
  const double div =
      (c.kdrift[grid.flat_index({17, 16})][0] -
       c.kdrift[grid.flat_index({15, 16})][0]) /
          (2.0 * h) +
      (c.kdrift[grid.flat_index({16, 17})][1] -
       c.kdrift[grid.flat_index({16, 15})][1]) /
          (2.0 * h);
  (void)i0;
  CHECK(std::abs(div) < 1e-6);
}

TEST_CASE("varying metric in two dimensions is rejected") {
  class VaryingG final : public geometry::GeometryProvider {
   public:
    int dim() const override { return 2; }
    geometry::Provenance provenance() const override {
      return geometry::Provenance::kClosedForm;
    }
    bool exponential_family() const override { return false; }

   protected:
    geometry::GeometryPoint eval(const TrialCoordinates& c) const override {
      geometry::GeometryPoint p;
      p.a = c.lambda;
      p.g = Matrix::Identity(2, 2) * (1.0 + 0.1 * c.lambda.squaredNorm());
      p.M = Vector::Zero(2);
      p.h = Matrix::Zero(2, 2);
      p.kmat = Matrix::Identity(2, 2);
      p.phi = c.lambda.squaredNorm();
      return p;
    }
  } varying;
  const GridSpec grid = make_grid_2d(-1.0, 1.0, 17, -1.0, 1.0, 17);
  CHECK_THROWS_AS(graham_coefficients(varying, grid), UnsupportedCurvatureError);
}

TEST_CASE("one-dimensional varying metric is supported") {
  class Varying1d final : public geometry::GeometryProvider {
   public:
    int dim() const override { return 1; }
    geometry::Provenance provenance() const override {
      return geometry::Provenance::kClosedForm;
    }
    bool exponential_family() const override { return false; }

   protected:
    geometry::GeometryPoint eval(const TrialCoordinates& c) const override {
      geometry::GeometryPoint p;
      const double u = c.lambda[0];
      p.a = c.lambda;
      p.g = Matrix::Constant(1, 1, 1.0 + 0.2 * u * u);
      p.M = Vector::Zero(1);
      p.h = Matrix::Zero(1, 1);
      p.kmat = Matrix::Constant(1, 1, 1.0);
      p.phi = u * u;
      return p;
    }
  } varying;
  const GridSpec grid = make_grid_1d(-1.0, 1.0, 65);
  const PdeCoefficients c = graham_coefficients(varying, grid);
  CHECK_FALSE(c.constant_metric);
  // With M = 0: K = (1/2) g^{-1/2} d/du g^{-1/2} = -g'/(4 g^2); check against
  // the analytic derivative at an interior node.
  const int mid = 32;
  const double u = grid.node(mid)[0];
  const double g = 1.0 + 0.2 * u * u;
  const double gp = 0.4 * u;
  CHECK(c.kdrift[mid][0] == doctest::Approx(-gp / (4.0 * g * g)).epsilon(1e-3));
}

TEST_CASE("stability bound is enforced") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 201);
  const PdeCoefficients c = graham_coefficients(h, grid);
  const double bound = stability_bound(c, 1.0);
  ConsistencyField psi0 = ConsistencyField::delta(grid, Vector::Constant(1, 0.0));
  CHECK_THROWS_AS(evolve_pde(c, psi0, 0.1, 2.0 * bound, 1.0),
                  TimeStepStabilityError);
}

TEST_CASE("pure diffusion conserves mass away from the boundary") {
  geometry::FreeSurrogateProvider free_surrogate;
  const GridSpec grid = make_grid_1d(-8.0, 8.0, 401);
  const PdeCoefficients c = graham_coefficients(free_surrogate, grid);
  // Narrow Gaussian start.
  ConsistencyField psi0 = ConsistencyField::zero(grid);
  const double w = 2.0 * grid.axes[0].spacing();
  for (int f = 0; f < grid.node_count(); ++f) {
    const double x = grid.node(f)[0];
    psi0.values[f] = std::exp(-0.5 * x * x / (w * w));
  }
  psi0.normalize_l1();
  const double dt = 0.5 * stability_bound(c, 1.0);
  const ConsistencyField out = evolve_pde(c, psi0, 1.0, dt, 1.0);
  CHECK(std::abs(out.l1() - 1.0) < 1e-4);
  CHECK(out.variance() == doctest::Approx(1.0 + w * w).epsilon(0.02));
}

TEST_CASE("harmonic delta start recovers the thermodynamical argmax") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const PdeCoefficients c = graham_coefficients(h, grid);
  ConsistencyField psi0 = ConsistencyField::zero(grid);
  const double w = 2.0 * grid.axes[0].spacing();
  for (int f = 0; f < grid.node_count(); ++f) {
    const double x = grid.node(f)[0];
    psi0.values[f] = std::exp(-0.5 * (x - 1.0) * (x - 1.0) / (w * w));
  }
  psi0.normalize_l1();
  const double dt = 0.5 * stability_bound(c, 1.0);
  const ConsistencyField out = evolve_pde(c, psi0, 1.0, dt, 1.0);
  const double target = 1.0 / std::cosh(1.0);
  CHECK(std::abs(out.argmax_refined() - target) / target < 0.02);
}

TEST_CASE("long-time profile is the ground state") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const PdeCoefficients c = graham_coefficients(h, grid);
  ConsistencyField psi0 = ConsistencyField::delta(grid, Vector::Constant(1, 1.0));
  const double dt = 0.5 * stability_bound(c, 1.0);
  ConsistencyField out = evolve_pde(c, psi0, 8.0, dt, 1.0);
  out.normalize_l1();
  CHECK(out.variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("transfer comparison: first-order convergence and matching rates") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const TransferComparison cmp =
      compare_with_transfer(h, grid, 1.0, {5, 10, 20, 40}, 1.0, 1.0);
  REQUIRE(cmp.l1_gaps.size() == 4);
  for (std::size_t i = 1; i < cmp.l1_gaps.size(); ++i) {
    CHECK(cmp.l1_gaps[i] < cmp.l1_gaps[i - 1]);
  }
  CHECK(cmp.min_order >= 1.0);
  CHECK(cmp.rate_gap_rel < 0.02);
  CHECK(cmp.transfer_rate == doctest::Approx(0.5).epsilon(0.02));
}
