#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fertbandit/models.hpp"

namespace fertbandit {

struct FitResult {
  ParamVector theta_hat;
  Eigen::MatrixXd covariance;     // p x p, symmetric PSD after regularization
  double residual_variance = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Finite-difference targets for the derivative of the true reward at one
// probed rate.
struct CurvatureTargets {
  double grad_target = 0.0;
  double hess_target = 0.0;
  double at_arm = 0.0;
};

// Fills the residual vector and its Jacobian at theta.
using ResidualFn =
    std::function<void(const ParamVector&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

struct LmOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  double lambda_init = 1e-3;
  double lambda_min = 1e-12;
  double lambda_max = 1e12;
};

struct LmOutcome {
  ParamVector theta;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Levenberg-Marquardt with multiplicative damping (x10 on reject, /10 on
// accept). Candidates are projected through `project` before evaluation.
// `rss_trace`, when given, records the objective after each accepted step.
LmOutcome lm_minimize(const ResidualFn& residuals,
                      const std::function<void(ParamVector&)>& project,
                      ParamVector theta_init, const LmOptions& options = {},
                      std::vector<double>* rss_trace = nullptr);

// Nonlinear least squares Sum (y_i - f(x_i; theta))^2 over the history.
// When the history covers fewer distinct rates than the family has
// parameters, fitting is skipped and theta_init is returned (converged =
// false) with the covariance evaluated there.
FitResult fit_nls(ModelKind kind, const History& history,
                  const ParamVector& theta_init);

// Delta-method prediction standard error sqrt(g' Cov g) at rate x.
double prediction_stderr(const FitResult& fit, ModelKind kind, double x);

// Central finite differences of the mean probed yield around x:
//   grad = (ybar(x+h) - ybar(x-h)) / 2h
//   hess = (ybar(x+h) - 2 ybar(x) + ybar(x-h)) / h^2
// `probe(x, m)` returns the mean of m noisy draws at x. Requires x - h >= 0.
CurvatureTargets estimate_curvature(
    const std::function<double(double, int)>& probe, double x, double h,
    int m);

// Same least-squares machinery over the stacked residuals
//   (f(x_i) - y_i),
//   sqrt(alpha1) * (f'(at) - grad_target),
//   sqrt(alpha2) * (f''(at) - hess_target).
// Penalty rows with zero weight are omitted, so alpha1 = alpha2 = 0
// reproduces fit_nls exactly.
FitResult fit_curvature_matched(ModelKind kind, const History& history,
                                const std::vector<CurvatureTargets>& targets,
                                double alpha1, double alpha2,
                                const ParamVector& theta_init);

}  // namespace fertbandit
