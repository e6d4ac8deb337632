#include <doctest.h>

#include <cmath>
#include <memory>

#include "pathclosure/lagrangian.hpp"
#include "pathclosure/rng.hpp"
#include "pathclosure/weaknoise.hpp"

using namespace pathclosure;
using namespace pathclosure::weaknoise;

TEST_CASE("riccati solver on a generic system") {
  Matrix a(2, 2), b(2, 2), q(2, 2);
  a << -3.0, 2.0, 1.0, 1.0;
  b << 1.0, 0.0, 0.0, 0.5;
  q << 3.0, 0.0, 0.0, 3.0;
  const Matrix x = solve_care_stabilizing(a, b, q);
  const Matrix res = a.transpose() * x + x * a - x * b * x + q;
  CHECK(res.norm() < 1e-9);
  Eigen::EigenSolver<Matrix> es(a - b * x);
  for (int i = 0; i < 2; ++i) CHECK(es.eigenvalues()[i].real() < 0.0);
}

TEST_CASE("lyapunov solver") {
  Matrix a(2, 2), q(2, 2);
  a << -1.0, 0.5, -0.5, -2.0;
  q << 1.0, 0.2, 0.2, 2.0;
  const Matrix s = solve_lyapunov(a, q);
  CHECK((a * s + s * a.transpose() + q).norm() < 1e-12);
  CHECK((s - s.transpose()).norm() < 1e-13);
}

TEST_CASE("harmonic gauge: G = -kappa and Hurwitz drift") {
  for (double kappa : {0.5, 1.0, 2.3}) {
    geometry::HarmonicSurrogateProvider h(kappa);
    const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
    CHECK(gauge.alpha_star.norm() < 1e-10);
    CHECK(gauge.G(0, 0) == doctest::Approx(-kappa).epsilon(1e-8));
    CHECK(gauge.drift_lin(0, 0) == doctest::Approx(-kappa).epsilon(1e-8));
    // f_s = -kappa u^2 / 2.
    Vector u(1);
    u << 0.7;
    CHECK(gauge.f_s(u) == doctest::Approx(-0.5 * kappa * 0.49).epsilon(1e-7));
  }
}

TEST_CASE("harmonic gauge satisfies the HJ equation at probe points") {
  geometry::HarmonicSurrogateProvider h(1.0);
  lagrangian::LagrangianContext ctx{&h, 1.0, 1.0};
  const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
  GaussianStream rng(2);
  for (int t = 0; t < 100; ++t) {
    Vector u(1);
    u << 0.1 * rng.uniform(-1.0, 1.0);
    const double res =
        lagrangian::hj_residual(ctx, gauge.grad_f_s(u), 0.0, u);
    CHECK(std::abs(res) < 1e-12);
  }
}

TEST_CASE("oscillator fixed point is a center: no Hurwitz branch") {
  // phi = M^t g^-1 M identically, so the quadratic stationary gauge has only
  // the rotation solution G = 0 and no attracting branch exists.
  geometry::OscillatorClosedFormProvider osc(1.0);
  CHECK_THROWS_AS(stationary_hj_quadratic(osc, Vector::Zero(2)),
                  BranchSelectionError);
}

TEST_CASE("tbh gauge is Hurwitz with a small HJ residual") {
  auto tbh = std::make_shared<models::TbhModel>(3, 1);
  geometry::TbhGaussianProvider provider(tbh, 1.0);
  lagrangian::LagrangianContext ctx{&provider, 1.0, 1.0};
  const GaugeSolution gauge = stationary_hj_quadratic(provider, Vector::Zero(2));
  CHECK(gauge.alpha_star.norm() < 1e-9);
  Eigen::EigenSolver<Matrix> es(gauge.drift_lin);
  for (int i = 0; i < 2; ++i) CHECK(es.eigenvalues()[i].real() < 0.0);
  // phi is not exactly quadratic here; the residual is reported, not asserted
  // to machine precision. It must still be small near alpha*.
  GaussianStream rng(9);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vector d(2);
    d << rng(), rng();
    d *= 0.05 / d.norm();
    const Vector probe = gauge.alpha_star + d;
    worst = std::max(worst, std::abs(lagrangian::hj_residual(
                                ctx, gauge.grad_f_s(probe), 0.0, probe)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("fixed point search fails away from any zero of M") {
  // A uniform surrogate with constant nonzero M has no fixed point.
  Matrix g = Matrix::Identity(1, 1);
  Vector M(1);
  M << 1.0;
  geometry::UniformSurrogateProvider uniform(g, M, 2.0);
  CHECK_THROWS_AS(stationary_hj_quadratic(uniform, Vector::Zero(1)),
                  FixedPointNotFoundError);
}

TEST_CASE("drift ode relaxes to alpha*") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
  Vector u0(1);
  u0 << 1.0;
  SUBCASE("exponential decay e^{-t}") {
    const Path p = drift_ode_solve(h, gauge, u0, 5.0, 1e-3);
    for (int k = 0; k < p.nodes(); k += 500) {
      CHECK(std::abs(p.points(k, 0) - std::exp(-p.times[k])) < 1e-6);
    }
    CHECK(std::abs(p.points(p.nodes() - 1, 0) - std::exp(-5.0)) < 1e-6);
  }
  SUBCASE("constant at the fixed point") {
    const Path p = drift_ode_solve(h, gauge, Vector::Zero(1), 2.0, 1e-2);
    CHECK(p.points.cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("long horizon lands on alpha*") {
    const Path p = drift_ode_solve(h, gauge, u0, 25.0, 1e-2);
    CHECK(std::abs(p.points(p.nodes() - 1, 0)) < 1e-8);
  }
}

TEST_CASE("wrong-branch blow-up detection") {
  geometry::HarmonicSurrogateProvider h(1.0);
  GaugeSolution wrong = stationary_hj_quadratic(h, Vector::Zero(1));
  wrong.G = -wrong.G;  // flip to the growing branch f_s = +kappa u^2/2
  Vector u0(1);
  u0 << 0.5;
  CHECK_THROWS_AS(drift_ode_solve(h, wrong, u0, 10.0, 1e-2),
                  TrajectoryBlowupError);
}

TEST_CASE("stationary covariance closed forms") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
  const Matrix s1 = stationary_covariance(gauge, 1.0);
  CHECK(s1(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  const Matrix s2 = stationary_covariance(gauge, 2.0);
  CHECK(s2(0, 0) == doctest::Approx(0.25).epsilon(1e-9));  // halves with delta_t
}

TEST_CASE("stationary covariance matches an Euler-Maruyama simulation") {
  // Synthetic two-dimensional damped-rotation gauge.
  GaugeSolution gauge;
  gauge.alpha_star = Vector::Zero(2);
  gauge.g_star = Matrix(2, 2);
  gauge.g_star << 1.0, 0.2, 0.2, 2.0;
  gauge.drift_lin = Matrix(2, 2);
  gauge.drift_lin << -1.0, 0.6, -0.6, -1.4;
  gauge.G = gauge.g_star * gauge.drift_lin;  // unused here
  gauge.a_m = Matrix::Zero(2, 2);
  gauge.phi2 = Matrix::Zero(2, 2);
  const double delta_t = 2.0;
  const Matrix sigma = stationary_covariance(gauge, delta_t);

  // Independent oracle: simulate dy = D y dt + L dW, L L^t = (delta_t g)^-1.
  const Matrix noise =
      gauge.g_star.llt().solve(Matrix::Identity(2, 2)) / delta_t;
  const Matrix chol = Eigen::LLT<Matrix>(noise).matrixL();
  const double dt = 1e-3;
  const int steps = 1000000;
  GaussianStream rng(123);
  Vector y = Vector::Zero(2);
  const int batches = 20;
  std::vector<Matrix> batch_cov(batches, Matrix::Zero(2, 2));
  const int per_batch = steps / batches;
  const double sq = std::sqrt(dt);
  for (int b = 0; b < batches; ++b) {
    Matrix acc = Matrix::Zero(2, 2);
    for (int s = 0; s < per_batch; ++s) {
      Vector dw(2);
      dw << rng(), rng();
      y += dt * (gauge.drift_lin * y) + sq * (chol * dw);
      acc += y * y.transpose();
    }
    batch_cov[b] = acc / per_batch;
  }
  Matrix mean_cov = Matrix::Zero(2, 2);
  for (const auto& c : batch_cov) mean_cov += c;
  mean_cov /= batches;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double ss = 0.0;
      for (const auto& c : batch_cov) {
        ss += (c(i, j) - mean_cov(i, j)) * (c(i, j) - mean_cov(i, j));
      }
      const double se = std::sqrt(ss / (batches - 1.0) / batches);
      CHECK(std::abs(mean_cov(i, j) - sigma(i, j)) < 3.0 * se + 2e-3);
    }
  }
}

TEST_CASE("covariance refuses a non-Hurwitz drift") {
  GaugeSolution gauge;
  gauge.alpha_star = Vector::Zero(1);
  gauge.g_star = Matrix::Identity(1, 1);
  gauge.drift_lin = Matrix::Identity(1, 1);  // unstable
  CHECK_THROWS_AS(stationary_covariance(gauge, 1.0), BranchSelectionError);
}

TEST_CASE("ottinger path closed form and fixed-point identity") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
  SUBCASE("kappa = 1, delta_t = 1: lambda_hat = 2 e^{-t}") {
    const Matrix sigma = stationary_covariance(gauge, 1.0);
    Vector u0(1);
    u0 << 1.0;
    const Path hat = ottinger_path(h, gauge, sigma, u0, 4.0, 1e-3);
    for (int k = 0; k < hat.nodes(); k += 400) {
      CHECK(std::abs(hat.points(k, 0) - 2.0 * std::exp(-hat.times[k])) < 1e-6);
    }
    // At t = 3: 2 e^{-3} = 0.099574 against sech(3) = 0.099328 (0.25%).
    const int k3 = 3000;
    CHECK(hat.times[k3] == doctest::Approx(3.0));
    CHECK(hat.points(k3, 0) == doctest::Approx(0.099574).epsilon(1e-4));
    const double sech3 = 1.0 / std::cosh(3.0);
    CHECK(std::abs(hat.points(k3, 0) - sech3) / sech3 < 0.003);
    // Fixed-point form lambda_hat = alpha - sigma grad f_s(lambda_hat).
    const Path alpha = drift_ode_solve(h, gauge, u0, 4.0, 1e-3);
    for (int k = 0; k < hat.nodes(); k += 500) {
      const Vector lhs = hat.points.row(k).transpose();
      const Vector rhs = alpha.points.row(k).transpose() -
                         sigma * gauge.grad_f_s(hat.points.row(k).transpose());
      CHECK((lhs - rhs).norm() < 1e-8);
    }
  }
  SUBCASE("general delta_t scalar algebra") {
    for (double dts : {2.0, 5.0, 20.0}) {
      const Matrix sigma = stationary_covariance(gauge, dts);
      // sigma G = -1/(2 delta_t): correction (1 - 1/(2 delta_t))^-1.
      CHECK(sigma(0, 0) * gauge.G(0, 0) ==
            doctest::Approx(-0.5 / dts).epsilon(1e-9));
      Vector u0(1);
      u0 << 1.0;
      const Path hat = ottinger_path(h, gauge, sigma, u0, 1.0, 1e-2);
      const double expected = 1.0 / (1.0 - 0.5 / dts) * std::exp(-1.0);
      CHECK(hat.points(hat.nodes() - 1, 0) ==
            doctest::Approx(expected).epsilon(1e-7));
    }
  }
  SUBCASE("starting at alpha* stays at alpha*") {
    const Matrix sigma = stationary_covariance(gauge, 1.0);
    const Path hat = ottinger_path(h, gauge, sigma, Vector::Zero(1), 1.0, 1e-2);
    CHECK(hat.points.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("degenerate correction is refused") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
  Matrix sigma = Matrix::Identity(1, 1);  // sigma G = -1 makes I + sigma G = 0
  Vector u0(1);
  u0 << 0.2;
  CHECK_THROWS_AS(ottinger_path(h, gauge, sigma, u0, 1.0, 1e-2),
                  DegenerateCorrectionError);
}

TEST_CASE("om decomposition reproduces the thermodynamical argmax") {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
  harmonic::HarmonicSpec spec{1.0, 1.0, 1.0};
  const OmReport rep = om_decomposition_check(gauge, spec, 1.0);
  CHECK(rep.pass_argmax);
  CHECK(rep.argmax == doctest::Approx(0.648054).epsilon(1e-5));
  CHECK(rep.pass_extremal);
  CHECK(rep.backward_vs_extremal < 1e-4);
  // The backward-HJ path is the extremal, not the thermodynamical path.
  CHECK(rep.backward_vs_thermo > 10.0 * rep.backward_vs_extremal);
}

TEST_CASE("om argmax identity holds for random parameter tuples") {
  GaussianStream rng(51);
  for (int t = 0; t < 20; ++t) {
    const double kappa = 0.3 + rng.uniform(0.0, 1.7);
    const double dts = 0.5 + rng.uniform(0.0, 3.5);
    const double T = 0.3 + rng.uniform(0.0, 3.7);
    const double u0 = rng.uniform(-2.0, 2.0);
    geometry::HarmonicSurrogateProvider h(kappa);
    const GaugeSolution gauge = stationary_hj_quadratic(h, Vector::Zero(1));
    harmonic::HarmonicSpec spec{kappa, u0, dts};
    const OmReport rep = om_decomposition_check(gauge, spec, T);
    INFO("kappa=", kappa, " dt=", dts, " T=", T, " u0=", u0);
    CHECK(rep.argmax_error <= 1e-8 * (1.0 + std::abs(rep.expected)));
  }
}
