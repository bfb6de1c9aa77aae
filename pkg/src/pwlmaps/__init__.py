"""Piecewise-linear maps near subsumed homoclinic connections.

The planar border-collision normal form, its reduction to a three-parameter
discontinuous map of the half-line, and tools to classify and scan attractors of
both.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    NoConvergence,
    NoFixedPoint,
    NotReturned,
    PreconditionError,
    PwlError,
    ValidityError,
)
from .normal_form import NormalFormParams, PlanarPoint, apply, saddle_data
from .onedim import ReducedParams, eval_h
from .reduction import locate_codim2, reduce_params

__all__ = [
    "__version__",
    "ConfigError",
    "DomainError",
    "NoConvergence",
    "NoFixedPoint",
    "NotReturned",
    "PreconditionError",
    "PwlError",
    "ValidityError",
    "NormalFormParams",
    "PlanarPoint",
    "apply",
    "saddle_data",
    "ReducedParams",
    "eval_h",
    "locate_codim2",
    "reduce_params",
]
