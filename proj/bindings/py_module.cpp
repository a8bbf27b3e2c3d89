#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fertbandit/config.hpp"
#include "fertbandit/environment.hpp"
#include "fertbandit/estimation.hpp"
#include "fertbandit/harness.hpp"
#include "fertbandit/models.hpp"
#include "fertbandit/policies.hpp"

namespace py = pybind11;
using namespace fertbandit;

namespace {

History history_from_pairs(const std::vector<double>& rates,
                           const std::vector<double>& yields) {
  if (rates.size() != yields.size()) {
    throw std::invalid_argument("rates and yields must have equal length");
  }
  History history;
  history.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    history.push_back({rates[i], yields[i], 0.0});
  }
  return history;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonlinear model-based bandits for fertilizer-rate selection";

  py::enum_<ModelKind>(m, "ModelKind")
      .value("mitscherlich", ModelKind::Mitscherlich)
      .value("michaelis_menten", ModelKind::MichaelisMenten)
      .value("quadratic_plateau", ModelKind::QuadraticPlateau)
      .value("logistic", ModelKind::Logistic)
      .value("mitscherlich_shifted", ModelKind::MitscherlichShifted);

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("eps_greedy", PolicyKind::EpsGreedy)
      .value("model_ucb", PolicyKind::ModelUcb)
      .value("violin", PolicyKind::Violin)
      .value("linucb", PolicyKind::LinUcb)
      .value("knn_ucb", PolicyKind::KnnUcb);

  py::class_<EconomicParams>(m, "EconomicParams")
      .def(py::init<double, double>(), py::arg("yield_price"),
           py::arg("input_price"))
      .def_readwrite("yield_price", &EconomicParams::yield_price)
      .def_readwrite("input_price", &EconomicParams::input_price);

  py::class_<ArmGrid>(m, "ArmGrid")
      .def(py::init<std::vector<double>>(), py::arg("rates"))
      .def("__len__", &ArmGrid::size)
      .def("__getitem__",
           [](const ArmGrid& grid, std::size_t i) {
             if (i >= grid.size()) throw py::index_error();
             return grid[i];
           })
      .def_property_readonly("rates", &ArmGrid::rates)
      .def("closest_index", &ArmGrid::closest_index);

  m.def("model_from_name", [](const std::string& name) {
    const auto kind = model_from_name(name);
    if (!kind) throw std::invalid_argument("unknown model '" + name + "'");
    return *kind;
  });
  m.def("default_initial_params", &default_initial_params);
  m.def("param_names", &param_names);

  m.def("evaluate", &evaluate, py::arg("kind"), py::arg("theta"), py::arg("x"));
  m.def("grad_params", &grad_params);
  m.def("grad_x", &grad_x);
  m.def("hessian_x", &hessian_x);
  m.def("profit", &profit, py::arg("kind"), py::arg("theta"), py::arg("econ"),
        py::arg("x"));
  m.def("closed_form_optimum", &closed_form_optimum, py::arg("kind"),
        py::arg("theta"), py::arg("econ"), py::arg("x_min") = 0.0,
        py::arg("x_max") = 250.0);
  m.def("best_grid_arm", &best_grid_arm);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("theta_hat", &FitResult::theta_hat)
      .def_readonly("covariance", &FitResult::covariance)
      .def_readonly("residual_variance", &FitResult::residual_variance)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations);

  py::class_<CurvatureTargets>(m, "CurvatureTargets")
      .def(py::init([](double grad, double hess, double at) {
             return CurvatureTargets{grad, hess, at};
           }),
           py::arg("grad_target"), py::arg("hess_target"), py::arg("at_arm"))
      .def_readwrite("grad_target", &CurvatureTargets::grad_target)
      .def_readwrite("hess_target", &CurvatureTargets::hess_target)
      .def_readwrite("at_arm", &CurvatureTargets::at_arm);

  m.def(
      "fit_nls",
      [](ModelKind kind, const std::vector<double>& rates,
         const std::vector<double>& yields, const ParamVector& theta_init) {
        return fit_nls(kind, history_from_pairs(rates, yields), theta_init);
      },
      py::arg("kind"), py::arg("rates"), py::arg("yields"),
      py::arg("theta_init"));
  m.def("prediction_stderr", &prediction_stderr);
  m.def("estimate_curvature", &estimate_curvature, py::arg("probe"),
        py::arg("x"), py::arg("h"), py::arg("m"));
  m.def(
      "fit_curvature_matched",
      [](ModelKind kind, const std::vector<double>& rates,
         const std::vector<double>& yields,
         const std::vector<CurvatureTargets>& targets, double alpha1,
         double alpha2, const ParamVector& theta_init) {
        return fit_curvature_matched(kind, history_from_pairs(rates, yields),
                                     targets, alpha1, alpha2, theta_init);
      },
      py::arg("kind"), py::arg("rates"), py::arg("yields"), py::arg("targets"),
      py::arg("alpha1"), py::arg("alpha2"), py::arg("theta_init"));

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("arm", &StepOutcome::arm)
      .def_readonly("yield_value", &StepOutcome::yield)
      .def_readonly("profit", &StepOutcome::profit)
      .def_readonly("instantaneous_regret", &StepOutcome::instantaneous_regret);

  py::enum_<NoiseKind>(m, "NoiseKind")
      .value("gaussian", NoiseKind::Gaussian)
      .value("bounded_uniform", NoiseKind::BoundedUniform);

  py::class_<Environment>(m, "Environment")
      .def(py::init<ModelKind, ParamVector, double, EconomicParams, ArmGrid,
                    std::uint64_t, NoiseKind>(),
           py::arg("truth_kind"), py::arg("truth_theta"),
           py::arg("noise_sigma"), py::arg("econ"), py::arg("grid"),
           py::arg("seed"), py::arg("noise") = NoiseKind::Gaussian)
      .def("pull", &Environment::pull, py::arg("rate"))
      .def(
          "probe",
          [](Environment& env, double x, int m) { return env.probe(x, m); },
          py::arg("x"), py::arg("m"))
      .def("oracle", &Environment::oracle)
      .def("expected_yield", &Environment::expected_yield)
      .def("expected_profit", &Environment::expected_profit);

  py::class_<PolicyConfig>(m, "PolicyConfig")
      .def(py::init<>())
      .def_readwrite("kind", &PolicyConfig::kind)
      .def_readwrite("fitted_model", &PolicyConfig::fitted_model)
      .def_readwrite("epsilon_exponent", &PolicyConfig::epsilon_exponent)
      .def_readwrite("alpha", &PolicyConfig::alpha)
      .def_readwrite("alpha1", &PolicyConfig::alpha1)
      .def_readwrite("alpha2", &PolicyConfig::alpha2)
      .def_readwrite("k", &PolicyConfig::k)
      .def_readwrite("theta_init", &PolicyConfig::theta_init)
      .def_readwrite("burn_in", &PolicyConfig::burn_in);

  py::class_<Bandit>(m, "Bandit")
      .def(py::init([](const PolicyConfig& config, const ArmGrid& grid,
                       const EconomicParams& econ, std::uint64_t seed) {
             return Bandit(config, grid, econ, RngStream(seed, 2));
           }),
           py::arg("config"), py::arg("grid"), py::arg("econ"),
           py::arg("seed"))
      .def("select", &Bandit::select)
      .def("push_observation", &Bandit::push_observation, py::arg("rate"),
           py::arg("yield_value"), py::arg("profit"))
      .def("push_curvature_target", &Bandit::push_curvature_target)
      .def("refit_curvature", &Bandit::refit_curvature)
      .def("current_theta", &Bandit::current_theta)
      .def_property_readonly("last_explored", &Bandit::last_explored)
      .def_property_readonly("last_fit_failed", &Bandit::last_fit_failed);

  m.def(
      "run_config",
      [](const std::string& config_path,
         const std::map<std::string, std::string>& overrides,
         const std::string& out_dir, std::optional<std::uint64_t> seed) {
        ExperimentConfig config = load_config(config_path);
        for (const auto& [key, value] : overrides) {
          apply_override(config, key, value);
        }
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (seed) config.base_seed = *seed;
        finalize_config(config);
        const ExperimentResult result = run_experiment(config);
        emit_outputs(result.summary, result.records, config.out_dir);
        return config.out_dir;
      },
      py::arg("config_path"),
      py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("out_dir") = std::string(), py::arg("seed") = std::nullopt,
      "Run an experiment config and write runs.csv, summary.json and charts; "
      "returns the output directory.");
}
