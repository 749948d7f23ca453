"""Nodal-set volumes on model manifolds."""

from ._nodalvol import (
    DegenerateFieldError,
    NumericalError,
    ResolutionError,
    estimate,
    estimator_names,
    expand_random,
    jet,
    metric,
    normalize_field,
    oracle,
    scan,
)

__all__ = [
    "DegenerateFieldError",
    "NumericalError",
    "ResolutionError",
    "estimate",
    "estimator_names",
    "expand_random",
    "jet",
    "metric",
    "normalize_field",
    "oracle",
    "scan",
]
