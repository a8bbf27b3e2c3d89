"""Nonlinear model-based bandits for economically optimal fertilizer rates."""

from ._core import (
    ArmGrid,
    Bandit,
    CurvatureTargets,
    EconomicParams,
    Environment,
    FitResult,
    ModelKind,
    NoiseKind,
    PolicyConfig,
    PolicyKind,
    StepOutcome,
    best_grid_arm,
    closed_form_optimum,
    default_initial_params,
    estimate_curvature,
    evaluate,
    fit_curvature_matched,
    fit_nls,
    grad_params,
    grad_x,
    hessian_x,
    model_from_name,
    param_names,
    prediction_stderr,
    profit,
    run_config,
)

__all__ = [
    "ArmGrid",
    "Bandit",
    "CurvatureTargets",
    "EconomicParams",
    "Environment",
    "FitResult",
    "ModelKind",
    "NoiseKind",
    "PolicyConfig",
    "PolicyKind",
    "StepOutcome",
    "best_grid_arm",
    "closed_form_optimum",
    "default_initial_params",
    "estimate_curvature",
    "evaluate",
    "fit_curvature_matched",
    "fit_nls",
    "grad_params",
    "grad_x",
    "hessian_x",
    "model_from_name",
    "param_names",
    "prediction_stderr",
    "profit",
    "run_config",
]
