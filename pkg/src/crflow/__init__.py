"""Combinatorial Ricci flow on ideally triangulated 3-manifolds.

Validates the combinatorial hypotheses of a gluing-table triangulation and
integrates the reduced flow on hyper-ideal edge lengths to a zero-curvature
decorated hyperbolic polyhedral metric, certifying the limit as a genuine
hyperbolic structure with geometric triangulation.
"""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    CrflowError,
    GluingLogicError,
    NumericError,
    ParseError,
)
from .triangulation import Triangulation, ValidationReport, parse_triangulation, validate

__all__ = [
    "__version__",
    "CrflowError",
    "ParseError",
    "ConsistencyError",
    "NumericError",
    "GluingLogicError",
    "Triangulation",
    "ValidationReport",
    "parse_triangulation",
    "validate",
]
