"""Risk-ratio sensitivity analysis for IPW causal effect estimates."""

from rrsens._core import (
    CsvParseError,
    Dataset,
    DatasetValidationError,
    FitError,
    GpsModel,
    InstabilityError,
    PositivityError,
    ScenarioConfig,
    SchemaError,
    __version__,
    compute_z_bounds,
    estimate_interval,
    extremize_weighted_mean,
    fit_binary_logistic,
    fit_continuation_ratio,
    fit_multinomial_logit,
    generate_scenario,
    load_csv,
    pairwise_contrast,
    percentile_bootstrap_ci,
    predict_gps,
    run_study,
    save_csv,
    scenario_preset,
    shifted_propensity,
    sipw_point_estimate,
    true_partially_identified_interval,
)

__all__ = [
    "CsvParseError",
    "Dataset",
    "DatasetValidationError",
    "FitError",
    "GpsModel",
    "InstabilityError",
    "PositivityError",
    "ScenarioConfig",
    "SchemaError",
    "__version__",
    "compute_z_bounds",
    "estimate_interval",
    "extremize_weighted_mean",
    "fit_binary_logistic",
    "fit_continuation_ratio",
    "fit_multinomial_logit",
    "generate_scenario",
    "load_csv",
    "pairwise_contrast",
    "percentile_bootstrap_ci",
    "predict_gps",
    "run_study",
    "save_csv",
    "scenario_preset",
    "shifted_propensity",
    "sipw_point_estimate",
    "true_partially_identified_interval",
]
