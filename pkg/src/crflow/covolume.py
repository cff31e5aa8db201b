"""Co-volume potentials and the Lyapunov functionals built from them.

The co-volume of a single generalized tetrahedron is the line integral of
the closed 1-form ``sum alpha_ij dl_ij`` (extended dihedral angles of the
clamped length vector) from the all-zero reference vector, normalized so the
reference value is 0.  Only differences of co-volumes are observable; the
normalization removes the unknowable additive constant.

The 1-form is continuous everywhere and smooth away from the clamping walls
``l_ij = 0`` of hyper-ideal components, so segments are pre-split at wall
crossings and then integrated by adaptive Gauss-Legendre panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import MetricMismatchError, NumericError
from .tetgeom import (
    TetLengths31,
    TetLengths40,
    _angles_from_phis,
    _clamp31,
    _clamp40,
    _phis31,
    _phis40,
    equilateral_inverse_lengths,
)
from .triangulation import PAIRS, Triangulation

__all__ = [
    "GeneralMetric",
    "tet_lengths",
    "cov_tet",
    "cov_tet_between",
    "cov_along_path",
    "cov_total",
    "H_total",
    "H_reduced",
    "induced_cov_tet",
]

DEFAULT_TOL = 1e-9


@dataclass
class GeneralMetric:
    """A decorated edge length per edge class of a triangulation."""

    tri: Triangulation
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.tri.edge_classes),):
            raise ValueError(
                f"metric needs one value per edge class "
                f"({len(self.tri.edge_classes)}), got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("metric entries must be finite")

    @classmethod
    def constant(cls, tri: Triangulation, value: float) -> "GeneralMetric":
        return cls(tri, np.full(len(tri.edge_classes), float(value)))

    @classmethod
    def from_mapping(cls, tri: Triangulation, mapping: Mapping[str, float]) -> "GeneralMetric":
        """Build from an edge-class-id -> length map; ids must match exactly."""
        ids = {c.id for c in tri.edge_classes}
        missing = sorted(ids - set(mapping))
        extra = sorted(set(mapping) - ids)
        if missing or extra:
            raise MetricMismatchError(
                f"metric does not index the edge classes exactly "
                f"(missing: {missing}, unknown: {extra})"
            )
        values = np.empty(len(tri.edge_classes))
        for c in tri.edge_classes:
            values[c.index] = float(mapping[c.id])
        return cls(tri, values)

    def to_mapping(self) -> Dict[str, float]:
        return {c.id: float(self.values[c.index]) for c in self.tri.edge_classes}

    @property
    def hyper(self) -> np.ndarray:
        return self.values[self.tri.hyper_edge_indices]

    @property
    def ideal(self) -> np.ndarray:
        return self.values[self.tri.ideal_edge_indices]


def _tet_frame(tri: Triangulation, t: int) -> Tuple[Tuple[int, int], ...]:
    """Vertex pairs of tet ``t`` ordered into the canonical length frame.

    For a one-ideal-vertex tetrahedron the ideal vertex plays label 1 and the
    hyper-ideal vertices, ascending, play labels 2, 3, 4; fully hyper-ideal
    tetrahedra keep their label order.
    """
    tet = tri.tets[t]
    if tet.ideal_vertices:
        vi = next(iter(tet.ideal_vertices))
        hypers = sorted(set(range(4)) - {vi})
        order = [vi] + hypers
    else:
        order = [0, 1, 2, 3]
    frame_pairs = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    return tuple(tuple(sorted((order[a], order[b]))) for a, b in frame_pairs)


def tet_lengths(tri: Triangulation, metric: GeneralMetric, t: int):
    """Restrict a metric to tet ``t`` in the canonical component order."""
    frame = _tet_frame(tri, t)
    vals = tuple(metric.values[tri.edge_class_of[(t, p)]] for p in frame)
    if tri.tets[t].ideal_vertices:
        return TetLengths31(*vals)
    return TetLengths40(*vals)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl_panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * sum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _adaptive(f, a: float, b: float, tol: float, depth: int = 0) -> float:
    whole = _gl_panel(f, a, b)
    mid = 0.5 * (a + b)
    left = _gl_panel(f, a, mid)
    right = _gl_panel(f, mid, b)
    if abs(left + right - whole) <= tol or b - a < 1e-14:
        return left + right
    if depth >= 48:
        raise NumericError("co-volume quadrature did not converge")
    return (_adaptive(f, a, mid, 0.5 * tol, depth + 1)
            + _adaptive(f, mid, b, 0.5 * tol, depth + 1))


def _angle_sum_form(l_from, l_to, hyper_slots, phis_fn, clamp_fn):
    dl = [b - a for a, b in zip(l_from, l_to)]

    def integrand(s: float) -> float:
        point = clamp_fn(tuple(a + s * d for a, d in zip(l_from, dl)))
        alphas = _angles_from_phis(phis_fn(point))
        return sum(al * d for al, d in zip(alphas, dl))

    # split where a hyper-ideal component crosses its clamping wall
    cuts = {0.0, 1.0}
    for i in hyper_slots:
        a, b = l_from[i], l_to[i]
        if (a < 0.0 < b) or (b < 0.0 < a):
            cuts.add(a / (a - b))
    return integrand, sorted(cuts)


def _mu_segment(l_from, l_to, is31: bool, tol: float) -> float:
    if is31:
        integrand, cuts = _angle_sum_form(l_from, l_to, (3, 4, 5), _phis31, _clamp31)
    else:
        integrand, cuts = _angle_sum_form(
            l_from, l_to, (0, 1, 2, 3, 4, 5), _phis40, _clamp40
        )
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            total += _adaptive(integrand, a, b, tol * (b - a))
    return total


def _as_tuple6(l) -> Tuple[Tuple[float, ...], bool]:
    if isinstance(l, TetLengths31):
        return l.as_tuple(), True
    if isinstance(l, TetLengths40):
        return l.as_tuple(), False
    raise TypeError(f"expected TetLengths31 or TetLengths40, got {type(l)!r}")


def cov_tet(l, *, tol: float = DEFAULT_TOL) -> float:
    """Co-volume of one generalized tetrahedron, normalized to 0 at the origin."""
    l6, is31 = _as_tuple6(l)
    return _mu_segment((0.0,) * 6, l6, is31, tol)


def cov_tet_between(l_from, l_to, *, tol: float = DEFAULT_TOL) -> float:
    """Co-volume difference ``cov(l_to) - cov(l_from)`` along the straight chord."""
    a6, is31a = _as_tuple6(l_from)
    b6, is31b = _as_tuple6(l_to)
    if is31a != is31b:
        raise TypeError("endpoints must be of the same tetrahedron type")
    return _mu_segment(a6, b6, is31a, tol)


def cov_along_path(waypoints: Sequence, *, tol: float = DEFAULT_TOL) -> float:
    """Integral of the angle 1-form along a polygonal path of length vectors."""
    total = 0.0
    for a, b in zip(waypoints, waypoints[1:]):
        total += cov_tet_between(a, b, tol=tol)
    return total


def cov_total(metric: GeneralMetric, tri: Triangulation, *, tol: float = DEFAULT_TOL) -> float:
    """Sum of per-tetrahedron co-volumes of the restricted length vectors."""
    return sum(cov_tet(tet_lengths(tri, metric, t), tol=tol)
               for t in range(tri.tet_count))


def H_total(metric: GeneralMetric, tri: Triangulation, *, tol: float = DEFAULT_TOL) -> float:
    """The Lyapunov functional: total co-volume minus ``2 pi`` times the
    sum of edge lengths over edge classes."""
    return cov_total(metric, tri, tol=tol) - 2.0 * math.pi * float(np.sum(metric.values))


def H_reduced(l_hyper, tri: Triangulation, *, tol: float = DEFAULT_TOL) -> float:
    """The Lyapunov functional as a function of hyper-ideal lengths only.

    Ideal lengths are reconstructed through the unit equilateral constraint;
    the triangulation must be properly glued for that to be well defined.
    """
    from .flow import reconstruct_full_metric

    metric = reconstruct_full_metric(l_hyper, tri)
    return H_total(metric, tri, tol=tol)


def induced_cov_tet(hyper_lengths: Sequence[float], *, tol: float = DEFAULT_TOL) -> float:
    """Co-volume of one tetrahedron as a function of its three hyper-ideal
    lengths ``(l23, l24, l34)``, with the ideal lengths supplied by the unit
    equilateral constraint (negative inputs clamp first)."""
    l23, l24, l34 = hyper_lengths
    l12, l13, l14 = equilateral_inverse_lengths(l23, l24, l34)
    return cov_tet(TetLengths31(l12, l13, l14, l23, l24, l34), tol=tol)
