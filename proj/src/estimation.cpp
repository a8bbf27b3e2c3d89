#include "fertbandit/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace fertbandit {

namespace {

constexpr double kCovarianceRidge = 1e-8;

std::size_t distinct_rates(const History& history) {
  std::set<double> rates;
  for (const auto& obs : history) rates.insert(obs.rate);
  return rates.size();
}

// Covariance at theta: residual_variance * (J'J + ridge I)^-1, symmetrized.
void finish_fit(ModelKind kind, const ResidualFn& residuals, FitResult& fit,
                std::size_t n_rows) {
  const std::size_t p = param_count(kind);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(fit.theta_hat, r, jac);
  const double rss = r.squaredNorm();
  fit.residual_variance =
      n_rows > p ? rss / static_cast<double>(n_rows - p) : 1.0;
  Eigen::MatrixXd normal = jac.transpose() * jac;
  normal += kCovarianceRidge *
            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                      static_cast<Eigen::Index>(p));
  Eigen::MatrixXd inverse = normal.ldlt().solve(Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  fit.covariance = fit.residual_variance * 0.5 * (inverse + inverse.transpose());
}

FitResult run_fit(ModelKind kind, const ResidualFn& residuals,
                  const ParamVector& theta_init, std::size_t n_rows,
                  bool skip_optimization) {
  FitResult fit;
  fit.theta_hat = theta_init;
  if (!skip_optimization) {
    auto project = [kind](ParamVector& theta) { clamp_to_valid(kind, theta); };
    LmOutcome out = lm_minimize(residuals, project, theta_init);
    fit.theta_hat = out.theta;
    fit.converged = out.converged;
    fit.iterations = out.iterations;
    if (!std::isfinite(out.rss)) {
      // Objective blew up: report the starting point and let callers fall
      // back per their policy rules.
      fit.theta_hat = theta_init;
      fit.converged = false;
      fit.covariance = Eigen::MatrixXd::Zero(
          static_cast<Eigen::Index>(param_count(kind)),
          static_cast<Eigen::Index>(param_count(kind)));
      fit.residual_variance = 0.0;
      return fit;
    }
  }
  finish_fit(kind, residuals, fit, n_rows);
  return fit;
}

}  // namespace

LmOutcome lm_minimize(const ResidualFn& residuals,
                      const std::function<void(ParamVector&)>& project,
                      ParamVector theta_init, const LmOptions& options,
                      std::vector<double>* rss_trace) {
  project(theta_init);
  const auto p = static_cast<Eigen::Index>(theta_init.size());
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(theta_init, r, jac);

  LmOutcome out;
  out.theta = theta_init;
  out.rss = r.squaredNorm();
  if (rss_trace) rss_trace->push_back(out.rss);
  if (!std::isfinite(out.rss)) return out;
  if (out.rss == 0.0) {
    out.converged = true;
    return out;
  }

  double lambda = options.lambda_init;
  Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::VectorXd gradient = jac.transpose() * r;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    out.iterations = iter;
    Eigen::MatrixXd damped =
        normal + lambda * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd step = damped.ldlt().solve(-gradient);

    ParamVector candidate = out.theta;
    bool finite_step = true;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(step[j])) finite_step = false;
      candidate[static_cast<std::size_t>(j)] += step[j];
    }
    double cand_rss = std::numeric_limits<double>::infinity();
    Eigen::VectorXd cand_r;
    Eigen::MatrixXd cand_jac;
    if (finite_step) {
      project(candidate);
      residuals(candidate, cand_r, cand_jac);
      cand_rss = cand_r.squaredNorm();
    }

    if (std::isfinite(cand_rss) && cand_rss < out.rss) {
      const double relative_drop = (out.rss - cand_rss) / out.rss;
      out.theta = candidate;
      out.rss = cand_rss;
      if (rss_trace) rss_trace->push_back(out.rss);
      normal = cand_jac.transpose() * cand_jac;
      gradient = cand_jac.transpose() * cand_r;
      lambda = std::max(lambda / 10.0, options.lambda_min);
      if (relative_drop < options.relative_tolerance || out.rss == 0.0) {
        out.converged = true;
        return out;
      }
    } else {
      lambda *= 10.0;
      if (lambda > options.lambda_max) {
        // No direction improves the objective beyond numerical precision.
        out.converged = true;
        return out;
      }
    }
  }
  return out;  // iteration budget exhausted, converged stays false
}

FitResult fit_nls(ModelKind kind, const History& history,
                  const ParamVector& theta_init) {
  validate_params(kind, theta_init);
  if (history.empty()) {
    throw std::invalid_argument("fit_nls: history must be nonempty");
  }
  const std::size_t p = param_count(kind);
  ResidualFn residuals = [kind, &history](const ParamVector& theta,
                                          Eigen::VectorXd& r,
                                          Eigen::MatrixXd& jac) {
    const auto n = static_cast<Eigen::Index>(history.size());
    const auto pp = static_cast<Eigen::Index>(param_count(kind));
    r.resize(n);
    jac.resize(n, pp);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& obs = history[static_cast<std::size_t>(i)];
      r[i] = evaluate(kind, theta, obs.rate) - obs.yield;
      const ParamVector g = grad_params(kind, theta, obs.rate);
      for (Eigen::Index j = 0; j < pp; ++j) {
        jac(i, j) = g[static_cast<std::size_t>(j)];
      }
    }
  };
  // With fewer distinct rates than parameters the normal equations are
  // singular; keep the starting point and let burn-in supply coverage.
  const bool skip = distinct_rates(history) < p;
  return run_fit(kind, residuals, theta_init, history.size(), skip);
}

double prediction_stderr(const FitResult& fit, ModelKind kind, double x) {
  const ParamVector g = grad_params(kind, fit.theta_hat, x);
  const auto p = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd gv(p);
  for (Eigen::Index j = 0; j < p; ++j) gv[j] = g[static_cast<std::size_t>(j)];
  const double quad = gv.dot(fit.covariance * gv);
  return std::sqrt(std::max(0.0, quad));
}

CurvatureTargets estimate_curvature(
    const std::function<double(double, int)>& probe, double x, double h,
    int m) {
  if (!(h > 0.0)) throw std::invalid_argument("estimate_curvature: h must be > 0");
  if (x - h < 0.0) {
    throw std::invalid_argument("estimate_curvature: x - h must be >= 0");
  }
  if (m < 1) throw std::invalid_argument("estimate_curvature: m must be >= 1");
  const double upper = probe(x + h, m);
  const double lower = probe(x - h, m);
  const double center = probe(x, m);
  CurvatureTargets targets;
  targets.grad_target = (upper - lower) / (2.0 * h);
  targets.hess_target = (upper - 2.0 * center + lower) / (h * h);
  targets.at_arm = x;
  return targets;
}

FitResult fit_curvature_matched(ModelKind kind, const History& history,
                                const std::vector<CurvatureTargets>& targets,
                                double alpha1, double alpha2,
                                const ParamVector& theta_init) {
  validate_params(kind, theta_init);
  if (history.empty()) {
    throw std::invalid_argument("fit_curvature_matched: history must be nonempty");
  }
  if (alpha1 < 0.0 || alpha2 < 0.0) {
    throw std::invalid_argument("fit_curvature_matched: penalty weights must be >= 0");
  }
  const std::size_t p = param_count(kind);
  const bool use_grad = alpha1 > 0.0 && !targets.empty();
  const bool use_hess = alpha2 > 0.0 && !targets.empty();
  const std::size_t rows_per_target =
      (use_grad ? 1u : 0u) + (use_hess ? 1u : 0u);
  const std::size_t n_rows = history.size() + rows_per_target * targets.size();
  const double w_grad = std::sqrt(alpha1);
  const double w_hess = std::sqrt(alpha2);

  ResidualFn residuals = [&, kind, w_grad, w_hess, use_grad, use_hess](
                             const ParamVector& theta, Eigen::VectorXd& r,
                             Eigen::MatrixXd& jac) {
    const auto pp = static_cast<Eigen::Index>(param_count(kind));
    r.resize(static_cast<Eigen::Index>(n_rows));
    jac.resize(static_cast<Eigen::Index>(n_rows), pp);
    Eigen::Index row = 0;
    for (const auto& obs : history) {
      r[row] = evaluate(kind, theta, obs.rate) - obs.yield;
      const ParamVector g = grad_params(kind, theta, obs.rate);
      for (Eigen::Index j = 0; j < pp; ++j) {
        jac(row, j) = g[static_cast<std::size_t>(j)];
      }
      ++row;
    }
    for (const auto& target : targets) {
      if (use_grad) {
        r[row] = w_grad *
                 (grad_x(kind, theta, target.at_arm) - target.grad_target);
        const ParamVector g = grad_x_params(kind, theta, target.at_arm);
        for (Eigen::Index j = 0; j < pp; ++j) {
          jac(row, j) = w_grad * g[static_cast<std::size_t>(j)];
        }
        ++row;
      }
      if (use_hess) {
        r[row] = w_hess *
                 (hessian_x(kind, theta, target.at_arm) - target.hess_target);
        const ParamVector g = hessian_x_params(kind, theta, target.at_arm);
        for (Eigen::Index j = 0; j < pp; ++j) {
          jac(row, j) = w_hess * g[static_cast<std::size_t>(j)];
        }
        ++row;
      }
    }
  };

  // The derivative rows carry identifying information of their own, so the
  // distinct-rate guard only applies when no penalty row is active.
  const bool skip =
      rows_per_target == 0 && distinct_rates(history) < p;
  return run_fit(kind, residuals, theta_init, n_rows, skip);
}

}  // namespace fertbandit
