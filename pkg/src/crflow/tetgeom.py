"""Dihedral-angle kernels for single generalized hyperbolic tetrahedra.

Two tetrahedron types are supported, both given by a decorated edge length
vector ``l = (l12, l13, l14, l23, l24, l34)``:

* one ideal vertex (labeled 1) and three truncated hyper-ideal vertices
  (labeled 2, 3, 4): ``l12, l13, l14`` are signed decorated lengths, while
  ``l23, l24, l34`` are hyper-ideal lengths, nonnegative after clamping;
* four truncated hyper-ideal vertices: all six lengths clamp at zero.

Every angle-cosine function ``phi`` extends continuously to degenerate
length vectors; the extended dihedral angle is ``arccos`` of ``phi`` clamped
into ``[-1, 1]``.  On the subspace cut out by the unit equilateral
constraint at the ideal vertex, the three hyper-ideal lengths determine the
ideal ones uniquely; ``equilateral_inverse`` computes that reconstruction.

The x-coordinates used throughout are

    ``x1 = cosh l23,  x3 = cosh l34,  x5 = cosh l24``   (each >= 1)
    ``x2 = e^l12,     x4 = e^l13,     x6 = e^l14``      (each > 0)

and ``phi31_hyper_x`` is the angle cosine at the edge carried by the x1
slot, the form in which all corner bounds below are stated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Tuple

from .errors import NumericError

__all__ = [
    "PAIRS31",
    "TetLengths31",
    "TetLengths40",
    "TetXCoords",
    "TetAngles",
    "clamp_plus",
    "phi31_ideal",
    "phi31_hyper",
    "phi31_hyper_x",
    "phi40",
    "extended_angles",
    "is_real",
    "equilateral_forward",
    "equilateral_inverse",
    "equilateral_inverse_lengths",
    "phi_partials",
    "PhiPartials",
    "corner_bound",
    "tau_profile",
    "small_edge_angle_bound",
    "longest_edge_angle_exceeds",
    "HALF_UPPER_LENGTH",
    "UPPER_LENGTH",
]

#: vertex pairs in canonical component order (l12, l13, l14, l23, l24, l34)
PAIRS31: Tuple[Tuple[int, int], ...] = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))

_PAIR_INDEX = {p: i for i, p in enumerate(PAIRS31)}

#: arccosh 2, the upper barrier length for hyper-ideal edges
UPPER_LENGTH = math.acosh(2.0)
#: the canonical flow starting length, half of arccosh 2
HALF_UPPER_LENGTH = 0.5 * math.acosh(2.0)


def _pair_index(pair: Iterable[int]) -> int:
    key = tuple(sorted(pair))
    try:
        return _PAIR_INDEX[key]
    except KeyError:
        raise ValueError(f"not a vertex pair of a tetrahedron: {pair!r}") from None


@dataclass(frozen=True)
class TetLengths31:
    """Decorated edge lengths of a one-ideal-vertex tetrahedron."""

    l12: float
    l13: float
    l14: float
    l23: float
    l24: float
    l34: float

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (self.l12, self.l13, self.l14, self.l23, self.l24, self.l34)

    def clamped(self) -> "TetLengths31":
        """Clamp the hyper-ideal components at zero; ideal ones untouched."""
        return TetLengths31(
            self.l12, self.l13, self.l14,
            max(0.0, self.l23), max(0.0, self.l24), max(0.0, self.l34),
        )

    def __getitem__(self, pair) -> float:
        return self.as_tuple()[_pair_index(pair)]


@dataclass(frozen=True)
class TetLengths40:
    """Edge lengths of a fully hyper-ideal tetrahedron."""

    l12: float
    l13: float
    l14: float
    l23: float
    l24: float
    l34: float

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (self.l12, self.l13, self.l14, self.l23, self.l24, self.l34)

    def clamped(self) -> "TetLengths40":
        return TetLengths40(*(max(0.0, v) for v in self.as_tuple()))

    def __getitem__(self, pair) -> float:
        return self.as_tuple()[_pair_index(pair)]


@dataclass(frozen=True)
class TetXCoords:
    """Exponential/cosh coordinates of a one-ideal-vertex tetrahedron."""

    x1: float
    x2: float
    x3: float
    x4: float
    x5: float
    x6: float

    @classmethod
    def from_lengths(cls, l: TetLengths31) -> "TetXCoords":
        lc = l.clamped()
        try:
            return cls(
                x1=math.cosh(lc.l23), x2=math.exp(lc.l12),
                x3=math.cosh(lc.l34), x4=math.exp(lc.l13),
                x5=math.cosh(lc.l24), x6=math.exp(lc.l14),
            )
        except OverflowError as exc:
            raise NumericError(f"length vector overflows x-coordinates: {lc}") from exc

    def lengths(self) -> TetLengths31:
        return TetLengths31(
            l12=math.log(self.x2), l13=math.log(self.x4), l14=math.log(self.x6),
            l23=math.acosh(self.x1), l24=math.acosh(self.x5), l34=math.acosh(self.x3),
        )

    def as_tuple(self):
        return (self.x1, self.x2, self.x3, self.x4, self.x5, self.x6)


@dataclass(frozen=True)
class TetAngles:
    """Extended dihedral angles with the raw (unclamped) cosines."""

    alphas: Tuple[float, float, float, float, float, float]
    phis: Tuple[float, float, float, float, float, float]

    def alpha(self, pair) -> float:
        return self.alphas[_pair_index(pair)]

    def phi(self, pair) -> float:
        return self.phis[_pair_index(pair)]


def clamp_plus(l):
    """Componentwise ``max(0, .)`` on the hyper-ideal entries of ``l``."""
    return l.clamped()


# ---------------------------------------------------------------------------
# phi kernels on plain 6-tuples (hot path; dataclass API wraps these)
# ---------------------------------------------------------------------------

def _check_finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise NumericError(f"non-finite arithmetic in {what}")
    return value


def _phi31_ideal_raw(l6, i: int) -> float:
    # angle cosine on the ideal edge (1,i); {i,j,k} = {2,3,4}
    j, k = (m for m in (2, 3, 4) if m != i)
    e1i = math.exp(l6[_PAIR_INDEX[(1, i)]])
    e1j = math.exp(l6[_PAIR_INDEX[(1, j)]])
    e1k = math.exp(l6[_PAIR_INDEX[(1, k)]])
    cij = math.cosh(l6[_PAIR_INDEX[tuple(sorted((i, j)))]])
    cik = math.cosh(l6[_PAIR_INDEX[tuple(sorted((i, k)))]])
    cjk = math.cosh(l6[_PAIR_INDEX[tuple(sorted((j, k)))]])
    num = e1j * e1k + e1i * (e1k * cij + e1j * cik - e1i * cjk)
    den = math.sqrt(
        (e1j * e1j + 2.0 * e1j * e1i * cij + e1i * e1i)
        * (e1k * e1k + 2.0 * e1k * e1i * cik + e1i * e1i)
    )
    return _check_finite(num / den, "phi31_ideal")


def _phi31_hyper_raw(l6, i: int, j: int) -> float:
    # angle cosine on the hyper-ideal edge (i,j) in {2,3,4}; k is the third
    k = ({2, 3, 4} - {i, j}).pop()
    e1i = math.exp(l6[_PAIR_INDEX[(1, i)]])
    e1j = math.exp(l6[_PAIR_INDEX[(1, j)]])
    e1k = math.exp(l6[_PAIR_INDEX[(1, k)]])
    lij = l6[_PAIR_INDEX[tuple(sorted((i, j)))]]
    cij = math.cosh(lij)
    sij = math.sinh(lij)
    cik = math.cosh(l6[_PAIR_INDEX[tuple(sorted((i, k)))]])
    cjk = math.cosh(l6[_PAIR_INDEX[tuple(sorted((j, k)))]])
    num = (e1j + e1i * cij) * (cjk + cij * cik) - (e1k + e1i * cik) * sij * sij
    den = math.sqrt(
        (cjk * cjk + cij * cij + cik * cik + 2.0 * cjk * cij * cik - 1.0)
        * (e1j * e1j + 2.0 * e1j * e1i * cij + e1i * e1i)
    )
    return _check_finite(num / den, "phi31_hyper")


def _phi40_raw(l6, i: int, j: int) -> float:
    # angle cosine at edge (i,j) of a fully hyper-ideal tetrahedron;
    # {k,m} is the opposite edge
    k, m = sorted({1, 2, 3, 4} - {i, j})
    c = lambda a, b: math.cosh(l6[_PAIR_INDEX[tuple(sorted((a, b)))]])
    cij = c(i, j)
    cik, cim, cjk, cjm, ckm = c(i, k), c(i, m), c(j, k), c(j, m), c(k, m)
    num = cik * cim + cjk * cjm + cij * (cik * cjm + cim * cjk) - ckm * (cij * cij - 1.0)
    den = math.sqrt(
        (cij * cij + cik * cik + cjk * cjk + 2.0 * cij * cik * cjk - 1.0)
        * (cij * cij + cim * cim + cjm * cjm + 2.0 * cij * cim * cjm - 1.0)
    )
    return _check_finite(num / den, "phi40")


def _phis31(l6) -> Tuple[float, ...]:
    """All six raw angle cosines of a clamped 3-1 length tuple."""
    return (
        _phi31_ideal_raw(l6, 2), _phi31_ideal_raw(l6, 3), _phi31_ideal_raw(l6, 4),
        _phi31_hyper_raw(l6, 2, 3), _phi31_hyper_raw(l6, 2, 4), _phi31_hyper_raw(l6, 3, 4),
    )


def _phis40(l6) -> Tuple[float, ...]:
    return (
        _phi40_raw(l6, 1, 2), _phi40_raw(l6, 1, 3), _phi40_raw(l6, 1, 4),
        _phi40_raw(l6, 2, 3), _phi40_raw(l6, 2, 4), _phi40_raw(l6, 3, 4),
    )


def _clamp31(l6):
    return l6[:3] + tuple(max(0.0, v) for v in l6[3:])


def _clamp40(l6):
    return tuple(max(0.0, v) for v in l6)


def _angles_from_phis(phis) -> Tuple[float, ...]:
    return tuple(math.acos(min(1.0, max(-1.0, p))) for p in phis)


# ---------------------------------------------------------------------------
# public phi / angle API
# ---------------------------------------------------------------------------

def phi31_ideal(l: TetLengths31, pair) -> float:
    """Angle cosine on an ideal edge ``(1, i)``, ``i`` in {2, 3, 4}.

    ``l`` must already be clamped.  On any decorated length vector obeying the
    unit equilateral constraint the value is exactly 1/2 (angle pi/3).
    """
    a, b = sorted(pair)
    if a != 1:
        raise ValueError(f"not an ideal edge pair: {pair!r}")
    return _phi31_ideal_raw(l.as_tuple(), b)


def phi31_hyper(l: TetLengths31, pair) -> float:
    """Angle cosine on a hyper-ideal edge ``{i, j}`` in {2, 3, 4}.

    Symmetric in the pair; equals 1 exactly when the edge length is 0, and
    equals ``cos(alpha_ij)`` whenever ``l`` describes a real tetrahedron.
    """
    i, j = sorted(pair)
    if i == 1:
        raise ValueError(f"not a hyper-ideal edge pair: {pair!r}")
    return _phi31_hyper_raw(l.as_tuple(), i, j)


def phi31_hyper_x(x1: float, x2: float, x3: float, x4: float, x5: float, x6: float) -> float:
    """Angle cosine at the edge in the x1 slot, in x-coordinates.

    This is the workhorse of all corner bounds: the faces adjacent to the
    edge contribute the two Gram factors in the denominator, the opposite
    ideal slot x6 enters the numerator with weight ``1 - x1^2``.
    """
    num = x3 * x4 + x2 * x5 + x1 * x2 * x3 + x1 * x4 * x5 + x6 - x1 * x1 * x6
    den = math.sqrt(
        (x1 * x1 + x3 * x3 + x5 * x5 + 2.0 * x1 * x3 * x5 - 1.0)
        * (x2 * x2 + x4 * x4 + 2.0 * x1 * x2 * x4)
    )
    return _check_finite(num / den, "phi31_hyper_x")


def phi40(l: TetLengths40, pair) -> float:
    """Angle cosine at edge ``{i, j}`` of a fully hyper-ideal tetrahedron.

    Cofactor quotient over the two adjacent triangle Gram factors; symmetric
    in the pair and equal to 1 exactly at zero edge length.
    """
    i, j = sorted(pair)
    return _phi40_raw(l.as_tuple(), i, j)


def extended_angles(l) -> TetAngles:
    """All six extended dihedral angles of a generalized tetrahedron.

    Clamping is applied internally, so any finite length vector is accepted.
    Angles are ``arccos`` of the cosine clamped into [-1, 1]; degenerate
    configurations land exactly on 0 or pi.
    """
    if isinstance(l, TetLengths31):
        phis = _phis31(_clamp31(l.as_tuple()))
    elif isinstance(l, TetLengths40):
        phis = _phis40(_clamp40(l.as_tuple()))
    else:
        raise TypeError(f"expected TetLengths31 or TetLengths40, got {type(l)!r}")
    return TetAngles(alphas=_angles_from_phis(phis), phis=phis)


def is_real(l, margin: float = 0.0) -> bool:
    """True iff every angle cosine lies strictly inside ``(-1+margin, 1-margin)``."""
    phis = extended_angles(l).phis
    return all(abs(p) < 1.0 - margin for p in phis)


# ---------------------------------------------------------------------------
# the unit equilateral constraint and its inverse
# ---------------------------------------------------------------------------

def _g(m: float, n: float) -> float:
    return 2.0 * m * n - 0.5 * (m / n + n / m)


def equilateral_forward(x2: float, x4: float, x6: float) -> Tuple[float, float, float]:
    """Map ideal x-coordinates to the hyper-ideal coshes they force.

    Pairing: x1 from (x2, x4), x3 from (x4, x6), x5 from (x2, x6).
    """
    if not (x2 > 0 and x4 > 0 and x6 > 0):
        raise ValueError("ideal x-coordinates must be positive")
    return (_g(x2, x4), _g(x4, x6), _g(x2, x6))


def _solve_other(k: float, n: float) -> float:
    # positive root m of g(m, n) = k, valid for n > 1/2
    return n * (k + math.sqrt(k * k + 4.0 * n * n - 1.0)) / (4.0 * n * n - 1.0)


def equilateral_inverse(
    x1: float, x3: float, x5: float, *, residual_tol: float = 1e-12
) -> Tuple[float, float, float]:
    """Unique ``(x2, x4, x6)`` in ``(1/2, A]^3`` solving the constraint system.

    ``A = max(x1, x3, x5)``.  A bracketed bisection runs on the scalar
    reduction ``a -> g(x4(a), x6(a)) - x3`` over ``(1/2, A]`` (the reduction
    fixes x2 = a and eliminates x4, x6 through the other two equations), then
    a Newton polish on the full 3x3 system drives the residual below
    ``residual_tol`` in the infinity norm.
    """
    if not (x1 >= 1.0 and x3 >= 1.0 and x5 >= 1.0):
        raise ValueError(f"hyper-ideal coshes must be >= 1, got {(x1, x3, x5)}")
    A = max(x1, x3, x5)

    def resid(a: float) -> float:
        return _g(_solve_other(x1, a), _solve_other(x5, a)) - x3

    lo, hi = 0.5 + 1e-12, A
    f_hi = resid(hi)
    if f_hi > 0.0:
        # A is the analytic right bracket; widen a hair for roundoff
        hi = A * (1.0 + 1e-12) + 1e-12
        f_hi = resid(hi)
    for _ in range(90):
        if hi - lo <= 1e-14 * hi:
            break
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    x2 = 0.5 * (lo + hi)
    x4 = _solve_other(x1, x2)
    x6 = _solve_other(x5, x2)

    # Newton polish on G(x2,x4,x6) = (x1,x3,x5); the Jacobian has positive
    # entries in a 3-cycle pattern, so the determinant is positive.
    for _ in range(30):
        r1 = _g(x2, x4) - x1
        r2 = _g(x4, x6) - x3
        r3 = _g(x2, x6) - x5
        if max(abs(r1), abs(r2), abs(r3)) <= residual_tol:
            return (x2, x4, x6)
        dgm = lambda m, n: 2.0 * n - 0.5 / n + 0.5 * n / (m * m)
        a11, a12 = dgm(x2, x4), dgm(x4, x2)
        a22, a23 = dgm(x4, x6), dgm(x6, x4)
        a31, a33 = dgm(x2, x6), dgm(x6, x2)
        # rows: (a11, a12, 0), (0, a22, a23), (a31, 0, a33)
        det = a11 * a22 * a33 + a12 * a23 * a31
        d2 = (r1 * a22 * a33 + a12 * (a23 * r3 - r2 * a33)) / det
        d4 = (a11 * (r2 * a33 - a23 * r3) + r1 * a23 * a31) / det
        d6 = (a11 * a22 * r3 + a31 * (a12 * r2 - r1 * a22)) / det
        step = 1.0
        while min(x2 - step * d2, x4 - step * d4, x6 - step * d6) <= 0.5:
            step *= 0.5
            if step < 1e-8:
                break
        x2, x4, x6 = x2 - step * d2, x4 - step * d4, x6 - step * d6
    raise NumericError(
        f"equilateral inverse did not reach residual {residual_tol} for {(x1, x3, x5)}"
    )


def equilateral_inverse_lengths(
    l23: float, l24: float, l34: float
) -> Tuple[float, float, float]:
    """Ideal decorated lengths ``(l12, l13, l14)`` forced by the hyper-ideal ones.

    Negative inputs clamp to zero first, matching the extension semantics of
    the reconstruction on generalized metrics.
    """
    c23 = math.cosh(max(0.0, l23))
    c24 = math.cosh(max(0.0, l24))
    c34 = math.cosh(max(0.0, l34))
    x2, x4, x6 = equilateral_inverse(c23, c34, c24)
    return (math.log(x2), math.log(x4), math.log(x6))


# ---------------------------------------------------------------------------
# closed-form partials and bound functions
# ---------------------------------------------------------------------------

class PhiPartials(NamedTuple):
    d2: float
    d3: float
    d4: float
    d5: float
    degenerate: bool


def phi_partials(x1, x2, x3, x4, x5, x6) -> PhiPartials:
    """Closed-form partials of ``phi31_hyper_x`` in x2, x3, x4, x5.

    At ``x1 = 1`` every form carries the vanishing factor ``x1^2 - 1``; the
    result is then exactly zero and flagged degenerate.
    """
    if x1 < 1.0:
        raise ValueError("x1 must be >= 1")
    if x1 == 1.0:
        return PhiPartials(0.0, 0.0, 0.0, 0.0, True)
    d1 = x1 * x1 + x3 * x3 + x5 * x5 + 2.0 * x1 * x3 * x5 - 1.0
    d2_ = x2 * x2 + x4 * x4 + 2.0 * x1 * x2 * x4
    a0 = 1.0 / (math.sqrt(d1) * d2_ * math.sqrt(d2_))
    a1 = 1.0 / (d1 * math.sqrt(d1) * math.sqrt(d2_))
    w = x1 * x1 - 1.0
    s = x1 * x6 + x2 * x3 - x4 * x5
    t = x1 * x6 - x2 * x3 + x4 * x5
    return PhiPartials(
        d2=a0 * w * (x4 * s + x2 * x6),
        d3=a1 * w * (x5 * s + x4 + x1 * x2 + x3 * x6),
        d4=a0 * w * (x2 * t + x4 * x6),
        d5=a1 * w * (x3 * t + x2 + x1 * x4 + x5 * x6),
        degenerate=False,
    )


def corner_bound(x1: float, a: float, b: float, *, floor: float = 0.5) -> float:
    """Upper bound for ``phi31_hyper_x`` over the box
    ``floor <= x2, x4, x6 <= a``, ``1 <= x3, x5 <= b`` at fixed ``x1``.

    The monotonicity comparison collapses the box to four corners: x2 pins
    to a, x3 to b, x6 to its floor, and x4, x5 each take both extremes.
    The default floor 1/2 is the global lower bound for ideal slots; the
    refined estimate at ``x1 = 2`` uses floor 4/5.
    """
    if x1 < 1.0:
        raise ValueError("x1 must be >= 1")
    if a < floor or b < 1.0:
        raise ValueError("need a >= floor and b >= 1")
    return max(
        phi31_hyper_x(x1, a, b, a, b, floor),
        phi31_hyper_x(x1, a, b, a, 1.0, floor),
        phi31_hyper_x(x1, a, b, floor, b, floor),
        phi31_hyper_x(x1, a, b, floor, 1.0, floor),
    )


def tau_profile(x: float) -> Tuple[float, float, float, float]:
    """The four corner profiles bounding phi over the realness box.

    Each is ``phi31_hyper_x`` at a corner with a = b = 2 held fixed and the
    first slot free; all four decrease for x >= 1 and equal 1 at x = 1.
    """
    return (
        phi31_hyper_x(x, 2.0, 2.0, 2.0, 2.0, 0.5),
        phi31_hyper_x(x, 2.0, 2.0, 2.0, 1.0, 0.5),
        phi31_hyper_x(x, 2.0, 2.0, 0.5, 2.0, 0.5),
        phi31_hyper_x(x, 2.0, 2.0, 0.5, 1.0, 0.5),
    )


def small_edge_angle_bound(C: float, eps: float) -> float:
    """A ``delta`` such that ``x1 <= 1 + delta`` (others bounded by ``C``)
    forces the dihedral angle at the x1 edge below ``eps``.

    For ``C = 2`` this returns the conservative constant ``eps^2 / (6 pi^2)``.
    For general ``C`` the value comes from bisecting the same lower-bound
    chain on the angle cosine; that chain is rigorous but not sharp, so the
    returned delta is conservative as well.
    """
    if not C > 1.0:
        raise ValueError("C must exceed 1")
    if not 0.0 < eps < math.pi:
        raise ValueError("eps must lie in (0, pi)")
    if abs(C - 2.0) <= 1e-12:
        return eps * eps / (6.0 * math.pi * math.pi)
    target = math.cos(eps)

    def chain(delta: float) -> float:
        # lower bound for phi over the box, decreasing in delta
        num = 1.0 - 0.5 * (2.0 * delta + delta * delta) * C
        den = 1.0 + 2.0 * delta * C * C + 2.0 * delta + delta * delta
        return num / den

    hi = min(0.5 / C, 0.5) * (1.0 - 1e-12)
    if chain(hi) >= target:
        return hi
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chain(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def longest_edge_angle_exceeds(
    hyper_lengths: Sequence[float], threshold: float = 2.0 * math.pi / 11.0
) -> bool:
    """Angle at the longest hyper-ideal edge of a unit-equilateral tetrahedron.

    ``hyper_lengths = (l23, l24, l34)``; the ideal lengths are reconstructed
    from the constraint, the extended angle at the maximal edge is computed,
    and compared against ``threshold`` (default 2 pi / 11).
    """
    l23, l24, l34 = hyper_lengths
    l12, l13, l14 = equilateral_inverse_lengths(l23, l24, l34)
    tet = TetLengths31(l12, l13, l14, l23, l24, l34)
    angles = extended_angles(tet)
    longest = max(((2, 3), (2, 4), (3, 4)), key=lambda p: tet[p])
    return angles.alpha(longest) > threshold
