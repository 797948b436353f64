"""Station passenger-flow forecasting with returning-flow covariates."""

from ._core import (
    ConfigError,
    DataError,
    Dendrogram,
    NumericalError,
    SarimaFit,
    SarimaOrder,
    ServiceCalendar,
    Session,
    TTestResult,
    difference,
    fit_sarima,
    forecast,
    one_step_predictions,
    paired_t_test,
    rmse,
    scenario_truth,
    simulate,
    smape,
    student_t_cdf,
    ward_cluster,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dendrogram",
    "NumericalError",
    "SarimaFit",
    "SarimaOrder",
    "ServiceCalendar",
    "Session",
    "TTestResult",
    "difference",
    "fit_sarima",
    "forecast",
    "one_step_predictions",
    "paired_t_test",
    "rmse",
    "scenario_truth",
    "simulate",
    "smape",
    "student_t_cdf",
    "ward_cluster",
]
