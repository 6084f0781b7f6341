"""Extended-object contour tracking and shape classification."""

from ._core import (
    ClassStats,
    Contour,
    GpHyper,
    NNModel,
    Scenario,
    ShapetrackError,
    __version__,
    extract_features,
    fit_bayes,
    generate_dataset,
    kernel,
    load_dataset,
    load_model,
    load_stats,
    save_model,
    save_stats,
    simulate_scenario,
    track,
    train_nn,
    ut_features,
)

__all__ = [
    "ClassStats",
    "Contour",
    "GpHyper",
    "NNModel",
    "Scenario",
    "ShapetrackError",
    "__version__",
    "extract_features",
    "fit_bayes",
    "generate_dataset",
    "kernel",
    "load_dataset",
    "load_model",
    "load_stats",
    "save_model",
    "save_stats",
    "simulate_scenario",
    "track",
    "train_nn",
    "ut_features",
]
