"""Exception types shared across the solver."""


class CrflowError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CrflowError, ValueError):
    """Malformed triangulation or metric document (syntax / schema level)."""


class ConsistencyError(CrflowError, ValueError):
    """Structurally well-formed input that violates gluing consistency:
    non-involutive face pairings, ideal/hyper-ideal type mismatches across a
    gluing, unglued faces touching an ideal vertex, or mislabeled vertex types
    contradicted by the computed link topology."""


class MetricMismatchError(CrflowError, ValueError):
    """A metric file does not index the triangulation's edge classes exactly."""


class NumericError(CrflowError, ArithmeticError):
    """Non-finite arithmetic, quadrature non-convergence, or a root solve
    that failed to reach its tolerance."""


class GluingLogicError(CrflowError, RuntimeError):
    """Metric reconstruction produced inconsistent ideal edge lengths.

    This indicates the triangulation was not properly glued (or the
    properly-glued validation step was skipped before reconstruction)."""
