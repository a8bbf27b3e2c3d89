#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fertbandit/estimation.hpp"
#include "test_support.hpp"

using namespace fertbandit;
using namespace fertbandit::testing;

namespace {

const EconomicParams kEcon{5.0, 0.5};

ParamVector initial_params(ModelKind kind) {
  return default_initial_params(kind);
}

}  // namespace

TEST_CASE("noiseless six-arm data recovers the truth for every family") {
  const ArmGrid grid = standard_grid();
  for (ModelKind kind : canonical_kinds()) {
    const ParamVector truth = truth_params(kind);
    const History history = noiseless_history(kind, truth, grid, kEcon);
    const FitResult fit = fit_nls(kind, history, initial_params(kind));
    REQUIRE(fit.converged);
    for (std::size_t j = 0; j < truth.size(); ++j) {
      CHECK(std::abs(fit.theta_hat[j] - truth[j]) <= 1e-6);
    }
  }
}

TEST_CASE("data generated at the starting point stays there") {
  const ArmGrid grid = standard_grid();
  const ParamVector init = initial_params(ModelKind::QuadraticPlateau);
  const History history =
      noiseless_history(ModelKind::QuadraticPlateau, init, grid, kEcon);
  const FitResult fit = fit_nls(ModelKind::QuadraticPlateau, history, init);
  CHECK(fit.converged);
  CHECK(fit.theta_hat == init);
  double rss = 0.0;
  for (const auto& obs : history) {
    const double r =
        evaluate(ModelKind::QuadraticPlateau, fit.theta_hat, obs.rate) -
        obs.yield;
    rss += r * r;
  }
  CHECK(rss == 0.0);
}

TEST_CASE("single observation hits the underdetermined fallback") {
  const ParamVector init = initial_params(ModelKind::QuadraticPlateau);
  const History history{{100.0, 170.0, 780.0}};
  const FitResult fit = fit_nls(ModelKind::QuadraticPlateau, history, init);
  CHECK(fit.residual_variance == 1.0);
  CHECK(fit.theta_hat == init);
  // Covariance equals (J'J + 1e-8 I)^-1 evaluated at the starting point.
  const ParamVector g = grad_params(ModelKind::QuadraticPlateau, init, 100.0);
  Eigen::MatrixXd jac(1, 4);
  for (int j = 0; j < 4; ++j) jac(0, j) = g[static_cast<std::size_t>(j)];
  Eigen::MatrixXd expected =
      (jac.transpose() * jac + 1e-8 * Eigen::MatrixXd::Identity(4, 4))
          .ldlt()
          .solve(Eigen::MatrixXd::Identity(4, 4));
  CHECK((fit.covariance - expected).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("covariance is symmetric PSD and residual variance nonnegative") {
  RngStream rng(23, 0);
  const ArmGrid grid = standard_grid();
  for (ModelKind kind : canonical_kinds()) {
    History history;
    const ParamVector truth = truth_params(kind);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int rep = 0; rep < 2; ++rep) {
        const double y = evaluate(kind, truth, grid[i]) + rng.normal(0.0, 0.5);
        history.push_back({grid[i], y, 0.0});
      }
    }
    const FitResult fit = fit_nls(kind, history, initial_params(kind));
    CHECK(fit.residual_variance >= 0.0);
    CHECK((fit.covariance - fit.covariance.transpose()).cwiseAbs().maxCoeff() <=
          1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(fit.covariance);
    CHECK(eigs.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("objective is non-increasing across accepted steps") {
  RngStream rng(29, 0);
  const ArmGrid grid = standard_grid();
  const ParamVector truth = truth_params(ModelKind::Logistic);
  History history;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    history.push_back({grid[i],
                       evaluate(ModelKind::Logistic, truth, grid[i]) +
                           rng.normal(0.0, 0.5),
                       0.0});
  }
  ResidualFn residuals = [&](const ParamVector& theta, Eigen::VectorXd& r,
                             Eigen::MatrixXd& jac) {
    r.resize(static_cast<Eigen::Index>(history.size()));
    jac.resize(static_cast<Eigen::Index>(history.size()), 4);
    for (std::size_t i = 0; i < history.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          evaluate(ModelKind::Logistic, theta, history[i].rate) -
          history[i].yield;
      const ParamVector g =
          grad_params(ModelKind::Logistic, theta, history[i].rate);
      for (int j = 0; j < 4; ++j) {
        jac(static_cast<Eigen::Index>(i), j) = g[static_cast<std::size_t>(j)];
      }
    }
  };
  std::vector<double> trace;
  lm_minimize(residuals,
              [](ParamVector& theta) {
                clamp_to_valid(ModelKind::Logistic, theta);
              },
              initial_params(ModelKind::Logistic), {}, &trace);
  REQUIRE(trace.size() >= 2);
  CHECK(std::is_sorted(trace.rbegin(), trace.rend()));
}

TEST_CASE("prediction standard error") {
  FitResult fit;
  fit.theta_hat = truth_params(ModelKind::Mitscherlich);
  fit.covariance = Eigen::MatrixXd::Zero(3, 3);
  CHECK(prediction_stderr(fit, ModelKind::Mitscherlich, 120.0) == 0.0);

  fit.covariance = Eigen::MatrixXd::Identity(3, 3);
  const ParamVector g =
      grad_params(ModelKind::Mitscherlich, fit.theta_hat, 120.0);
  double norm2 = 0.0;
  for (double v : g) norm2 += v * v;
  CHECK(prediction_stderr(fit, ModelKind::Mitscherlich, 120.0) ==
        doctest::Approx(std::sqrt(norm2)));

  // Any PSD covariance keeps the output nonnegative.
  RngStream rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd m(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) = rng.normal(0.0, 1.0);
    }
    fit.covariance = m.transpose() * m;
    CHECK(prediction_stderr(fit, ModelKind::Mitscherlich,
                            rng.uniform(0.0, 250.0)) >= 0.0);
  }
}

TEST_CASE("prediction stderr is insensitive to history order") {
  RngStream rng(37, 0);
  const ArmGrid grid = standard_grid();
  const ParamVector truth = truth_params(ModelKind::MichaelisMenten);
  History history;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    history.push_back({grid[i],
                       evaluate(ModelKind::MichaelisMenten, truth, grid[i]) +
                           rng.normal(0.0, 0.5),
                       0.0});
  }
  History shuffled = history;
  std::reverse(shuffled.begin(), shuffled.end());
  const ParamVector init = initial_params(ModelKind::MichaelisMenten);
  const FitResult a = fit_nls(ModelKind::MichaelisMenten, history, init);
  const FitResult b = fit_nls(ModelKind::MichaelisMenten, shuffled, init);
  for (double x : {0.0, 80.0, 250.0}) {
    CHECK(prediction_stderr(a, ModelKind::MichaelisMenten, x) ==
          doctest::Approx(prediction_stderr(b, ModelKind::MichaelisMenten, x))
              .epsilon(1e-8));
  }
}

TEST_CASE("curvature estimation from noiseless probes") {
  const ParamVector quad = truth_params(ModelKind::QuadraticPlateau);
  auto probe = [&](double x, int) {
    return evaluate(ModelKind::QuadraticPlateau, quad, x);
  };
  const CurvatureTargets at100 = estimate_curvature(probe, 100.0, 5.0, 1);
  CHECK(at100.grad_target == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(at100.hess_target == doctest::Approx(-0.006).epsilon(1e-7));
  CHECK(at100.at_arm == 100.0);

  const CurvatureTargets flat = estimate_curvature(probe, 230.0, 5.0, 1);
  CHECK(flat.grad_target == doctest::Approx(0.0));
  CHECK(flat.hess_target == doctest::Approx(0.0));

  const ParamVector mit = truth_params(ModelKind::Mitscherlich);
  auto probe_mit = [&](double x, int) {
    return evaluate(ModelKind::Mitscherlich, mit, x);
  };
  const CurvatureTargets m100 = estimate_curvature(probe_mit, 100.0, 5.0, 1);
  CHECK(std::abs(m100.grad_target -
                 grad_x(ModelKind::Mitscherlich, mit, 100.0)) <= 1e-3);
  CHECK(std::abs(m100.hess_target -
                 hessian_x(ModelKind::Mitscherlich, mit, 100.0)) <= 1e-5);

  CHECK_THROWS_AS(estimate_curvature(probe, 2.0, 5.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_curvature(probe, 100.0, 0.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_curvature(probe, 100.0, 5.0, 0),
                  std::invalid_argument);
}

TEST_CASE("zero penalty weights reproduce the plain fit exactly") {
  RngStream rng(41, 0);
  const ArmGrid grid = standard_grid();
  const ParamVector truth = truth_params(ModelKind::QuadraticPlateau);
  History history;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    history.push_back({grid[i],
                       evaluate(ModelKind::QuadraticPlateau, truth, grid[i]) +
                           rng.normal(0.0, 0.5),
                       0.0});
  }
  std::vector<CurvatureTargets> targets{{0.123, -0.004, 100.0}};
  const ParamVector init = initial_params(ModelKind::QuadraticPlateau);
  const FitResult plain = fit_nls(ModelKind::QuadraticPlateau, history, init);
  const FitResult matched = fit_curvature_matched(
      ModelKind::QuadraticPlateau, history, targets, 0.0, 0.0, init);
  REQUIRE(plain.theta_hat.size() == matched.theta_hat.size());
  for (std::size_t j = 0; j < plain.theta_hat.size(); ++j) {
    CHECK(plain.theta_hat[j] == matched.theta_hat[j]);
  }
  CHECK(plain.iterations == matched.iterations);
  CHECK(plain.residual_variance == matched.residual_variance);
}

TEST_CASE("curvature-matched fit recovers the truth with exact targets") {
  const ArmGrid grid = standard_grid();
  for (ModelKind kind : canonical_kinds()) {
    const ParamVector truth = truth_params(kind);
    const History history = noiseless_history(kind, truth, grid, kEcon);
    std::vector<CurvatureTargets> targets;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      targets.push_back({grad_x(kind, truth, grid[i]),
                         hessian_x(kind, truth, grid[i]), grid[i]});
    }
    const FitResult fit = fit_curvature_matched(kind, history, targets, 2.0,
                                                640.0, initial_params(kind));
    REQUIRE(fit.converged);
    for (std::size_t j = 0; j < truth.size(); ++j) {
      CHECK(std::abs(fit.theta_hat[j] - truth[j]) <= 1e-6);
    }
  }
}

TEST_CASE("a dominant curvature penalty bends the fit toward the target") {
  const ArmGrid grid = standard_grid();
  const ParamVector truth = truth_params(ModelKind::QuadraticPlateau);
  const History history =
      noiseless_history(ModelKind::QuadraticPlateau, truth, grid, kEcon);
  // Conflicting curvature target well away from the generating value.
  std::vector<CurvatureTargets> targets{{0.6, -0.01, 100.0}};
  const FitResult fit = fit_curvature_matched(
      ModelKind::QuadraticPlateau, history, targets, 0.0, 1e12,
      initial_params(ModelKind::QuadraticPlateau));
  CHECK(hessian_x(ModelKind::QuadraticPlateau, fit.theta_hat, 100.0) ==
        doctest::Approx(-0.01).epsilon(1e-3));
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit_nls(ModelKind::Mitscherlich, {},
                          initial_params(ModelKind::Mitscherlich)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_nls(ModelKind::Mitscherlich, {{0.0, 80.0, 400.0}},
                          {-1.0, 0.01, 50.0}),
                  std::domain_error);
  CHECK_THROWS_AS(
      fit_curvature_matched(ModelKind::Mitscherlich, {{0.0, 80.0, 400.0}}, {},
                            -1.0, 0.0, initial_params(ModelKind::Mitscherlich)),
      std::invalid_argument);
}
