"""Robust state-feedback pole assignment with repeated poles.

The main entry point is :func:`assign`, which returns a feedback matrix
``F`` together with a real Schur-type factorization ``A + BF = X T X^T``.
"""

from .driver import (
    AssignConfig,
    AssignmentResult,
    SystemPair,
    assign,
    check_controllability,
    recover_feedback,
)
from .errors import NumericalFailure, PolePlacementError, ValidationError
from .metrics import (
    departure_from_normality,
    eigvec_condition,
    evaluate_result,
    geometric_multiplicity,
    precs,
)
from .poles import Order, PoleSpec, build_pole_spec, spec_from_values

__all__ = [
    "AssignConfig", "AssignmentResult", "SystemPair", "assign", "check_controllability",
    "recover_feedback", "NumericalFailure", "PolePlacementError", "ValidationError",
    "departure_from_normality", "eigvec_condition", "evaluate_result",
    "geometric_multiplicity", "precs", "Order", "PoleSpec", "build_pole_spec",
    "spec_from_values",
]
