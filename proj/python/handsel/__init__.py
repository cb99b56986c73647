"""Handball match prediction: CMP team strengths, tree ensembles, TreeSHAP."""

from handsel._core import (
    HandselError,
    Model,
    __version__,
    accuracy,
    attack_strength,
    brier,
    defense_strength,
    dispersion_index,
    evaluate,
    explain,
    feature_names,
    featurize,
    fit_mle,
    haversine_km,
    log_normalizer,
    log_pmf,
    mape,
    mean_variance,
    pmf,
    predict,
    rmse,
    sample_cmp,
    strengths,
    synth,
    train,
    weighted_f1,
)

__all__ = [
    "HandselError",
    "Model",
    "__version__",
    "accuracy",
    "attack_strength",
    "brier",
    "defense_strength",
    "dispersion_index",
    "evaluate",
    "explain",
    "feature_names",
    "featurize",
    "fit_mle",
    "haversine_km",
    "log_normalizer",
    "log_pmf",
    "mape",
    "mean_variance",
    "pmf",
    "predict",
    "rmse",
    "sample_cmp",
    "strengths",
    "synth",
    "train",
    "weighted_f1",
]
