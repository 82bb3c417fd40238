"""The differential mechanism: distances, auditing functions, threshold, surrogate."""

from .differential import DifferentialMetric, phi
from .multiplicative import (
    MultiplicativeFit,
    fit_multiplicative,
    gradient_W,
    initial_W,
    optimize_W,
    projection_objective,
)
from .surrogate import SurrogateModel, fit_surrogate, gradient_source
from .threshold import ThresholdResult, determine_threshold
from .transforms import (
    AdditiveConfig,
    MultiplicativeConfig,
    ProjectionTransform,
    UnfittedTransformError,
    additive_transform,
    audit_function_apply,
    random_transform,
)

__all__ = [
    "DifferentialMetric", "phi",
    "MultiplicativeFit", "fit_multiplicative", "gradient_W", "initial_W", "optimize_W",
    "projection_objective",
    "SurrogateModel", "fit_surrogate", "gradient_source",
    "ThresholdResult", "determine_threshold",
    "AdditiveConfig", "MultiplicativeConfig", "ProjectionTransform", "UnfittedTransformError",
    "additive_transform", "audit_function_apply", "random_transform",
]
