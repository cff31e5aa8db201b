"""Curvature assembly and the gradient flow on decorated metrics.

Combinatorial Ricci curvature at an edge class is ``2 pi`` minus the cone
angle, i.e. minus the sum of extended dihedral angles contributed by every
incident tetrahedron corner.  The flow integrates ``dl/dt = K(l)``:

* ``reduced`` mode evolves hyper-ideal classes only, with ideal lengths
  reconstructed through the unit equilateral constraint at every evaluation
  (requires a properly glued triangulation; ideal classes then carry zero
  curvature identically);
* ``full`` mode evolves every class.  No barrier or convergence theory backs
  this mode on triangulations with ideal vertices; runs carry a banner.

Integration is classical Runge-Kutta 4 with step-doubling adaptivity.  Two
independent trackers follow the Lyapunov value along the trajectory: chord
line integrals of the angle 1-form (path independence makes consecutive
differences quadrature-exact) and time integration of minus the squared
curvature norm carried inside the ODE state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .covolume import GeneralMetric, H_total, _tet_frame, cov_tet_between, tet_lengths
from .errors import GluingLogicError, NumericError, ParseError
from .tetgeom import (
    HALF_UPPER_LENGTH,
    UPPER_LENGTH,
    TetLengths31,
    _angles_from_phis,
    _clamp31,
    _clamp40,
    _phis31,
    _phis40,
    equilateral_inverse_lengths,
    extended_angles,
)
from .triangulation import Triangulation, check_properly_glued

__all__ = [
    "CurvatureVector",
    "FlowConfig",
    "FlowSample",
    "FlowTrace",
    "CertificationReport",
    "curvature",
    "reconstruct_full_metric",
    "run_flow",
    "certify_limit",
    "trace_csv_lines",
    "FULL_MODE_BANNER",
]

FULL_MODE_BANNER = (
    "full-mode flow on a triangulation with ideal vertices: "
    "unsupported by theory, no barrier or convergence guarantees"
)

CERTIFICATION_TOL = 1e-8


@dataclass
class CurvatureVector:
    """Curvature per edge class with convenience norms."""

    values: np.ndarray

    @property
    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])


def _tet_angle_rows(tri: Triangulation):
    """Per-tet metadata (tet type, edge class index per frame slot), cached."""
    rows = getattr(tri, "_angle_rows", None)
    if rows is None:
        rows = []
        for t in range(tri.tet_count):
            frame = _tet_frame(tri, t)
            classes = tuple(tri.edge_class_of[(t, p)] for p in frame)
            rows.append((bool(tri.tets[t].ideal_vertices), classes))
        tri._angle_rows = rows
    return rows


def curvature(metric: GeneralMetric, tri: Triangulation) -> CurvatureVector:
    """Assemble ``2 pi`` minus the cone angle for every edge class."""
    values = np.full(len(tri.edge_classes), 2.0 * math.pi)
    for is31, classes in _tet_angle_rows(tri):
        l6 = tuple(metric.values[c] for c in classes)
        if is31:
            alphas = _angles_from_phis(_phis31(_clamp31(l6)))
        else:
            alphas = _angles_from_phis(_phis40(_clamp40(l6)))
        for c, a in zip(classes, alphas):
            values[c] -= a
    return CurvatureVector(values=values)


def reconstruct_full_metric(
    l_hyper,
    tri: Triangulation,
    *,
    consistency_tol: float = 1e-9,
) -> GeneralMetric:
    """Extend hyper-ideal lengths to a full metric via the unit equilateral
    constraint in every one-ideal-vertex tetrahedron.

    Negative hyper-ideal entries clamp to zero.  On a properly glued
    triangulation all tetrahedra incident to an ideal edge class agree on its
    reconstructed length; disagreement beyond ``consistency_tol`` raises
    :class:`GluingLogicError`, which means proper-gluing validation was
    skipped or failed.
    """
    hyper_idx = tri.hyper_edge_indices
    l_hyper = np.asarray(l_hyper, dtype=float)
    if l_hyper.shape != (len(hyper_idx),):
        raise ValueError(
            f"expected {len(hyper_idx)} hyper-ideal lengths, got {l_hyper.shape}"
        )
    values = np.zeros(len(tri.edge_classes))
    values[hyper_idx] = np.maximum(0.0, l_hyper)

    candidates: Dict[int, List[float]] = {i: [] for i in tri.ideal_edge_indices}
    cache: Dict[Tuple[float, float, float], Tuple[float, float, float]] = {}
    for t in range(tri.tet_count):
        tet = tri.tets[t]
        if not tet.ideal_vertices:
            continue
        frame = _tet_frame(tri, t)  # (12, 13, 14, 23, 24, 34) as vertex pairs
        classes = [tri.edge_class_of[(t, p)] for p in frame]
        triple = (values[classes[3]], values[classes[4]], values[classes[5]])
        if triple not in cache:
            cache[triple] = equilateral_inverse_lengths(*triple)
        ideal = cache[triple]
        for slot in range(3):
            candidates[classes[slot]].append(ideal[slot])

    for idx, vals in candidates.items():
        if not vals:
            raise GluingLogicError(
                f"ideal edge class {tri.edge_classes[idx].id} is not incident "
                f"to any one-ideal-vertex tetrahedron"
            )
        spread = max(vals) - min(vals)
        if spread > consistency_tol:
            raise GluingLogicError(
                f"reconstructed length of ideal edge class "
                f"{tri.edge_classes[idx].id} disagrees across tetrahedra "
                f"(spread {spread:.3e}); triangulation is not properly glued"
            )
        values[idx] = vals[0]
    return GeneralMetric(tri, values)


# ---------------------------------------------------------------------------
# flow configuration and trace
# ---------------------------------------------------------------------------

@dataclass
class FlowConfig:
    mode: str = "reduced"
    l0: Union[None, float, Mapping[str, float], Sequence[float]] = None
    tol: float = 1e-10
    max_time: float = 1e4
    dt0: float = 1e-2
    local_error: float = 1e-10
    trace_interval: float = 0.0

    def __post_init__(self):
        if self.mode not in ("reduced", "full"):
            raise ValueError(f"mode must be 'reduced' or 'full', got {self.mode!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if not self.dt0 > 0:
            raise ValueError("dt0 must be positive")

    def to_dict(self) -> dict:
        l0 = self.l0
        if isinstance(l0, np.ndarray):
            l0 = [float(v) for v in l0]
        elif isinstance(l0, Mapping):
            l0 = dict(l0)
        return {
            "mode": self.mode, "l0": l0, "tol": self.tol,
            "max_time": self.max_time, "dt0": self.dt0,
            "local_error": self.local_error, "trace_interval": self.trace_interval,
        }


@dataclass
class FlowSample:
    t: float
    lengths: np.ndarray  # evolving components
    k_inf: float
    k_l2: float
    h_line: float
    h_acc: float


@dataclass
class FlowTrace:
    samples: List[FlowSample]
    termination: str  # converged | max-time | numeric-error
    evolving_ids: List[str]
    final_metric: GeneralMetric
    final_curvature: CurvatureVector
    config: FlowConfig
    steps_accepted: int
    steps_rejected: int
    banner: Optional[str] = None
    error_detail: Optional[str] = None

    @property
    def final_time(self) -> float:
        return self.samples[-1].t


def _initial_state(tri: Triangulation, config: FlowConfig, evolving: List[int]) -> np.ndarray:
    ids = [tri.edge_classes[i].id for i in evolving]
    l0 = config.l0
    if l0 is None:
        if config.mode == "reduced":
            return np.full(len(evolving), HALF_UPPER_LENGTH)
        if not check_properly_glued(tri):
            base = reconstruct_full_metric(
                np.full(len(tri.hyper_edge_indices), HALF_UPPER_LENGTH), tri
            )
            return base.values.copy()
        return np.full(len(evolving), HALF_UPPER_LENGTH)
    if isinstance(l0, (int, float)):
        return np.full(len(evolving), float(l0))
    if isinstance(l0, Mapping):
        missing = [i for i in ids if i not in l0]
        if missing:
            raise ParseError(f"initial metric map is missing edge classes {missing}")
        return np.array([float(l0[i]) for i in ids])
    arr = np.asarray(l0, dtype=float)
    if arr.shape != (len(evolving),):
        raise ValueError(
            f"initial metric needs {len(evolving)} entries "
            f"({config.mode} mode), got shape {arr.shape}"
        )
    return arr.copy()


def run_flow(tri: Triangulation, config: FlowConfig) -> FlowTrace:
    """Integrate the flow until the curvature residual drops below the
    stop tolerance or the time budget runs out.

    Non-convergence is reported as ``max-time`` termination, never raised;
    a state or curvature turning non-finite terminates as ``numeric-error``.
    """
    reduced = config.mode == "reduced"
    if reduced:
        violations = check_properly_glued(tri)
        if violations:
            raise ValueError(
                "reduced flow requires a properly glued triangulation; "
                f"first violation: {violations[0]}"
            )
        evolving = list(tri.hyper_edge_indices)
    else:
        evolving = [c.index for c in tri.edge_classes]
    ids = [tri.edge_classes[i].id for i in evolving]
    banner = FULL_MODE_BANNER if (not reduced and tri.has_ideal_vertices()) else None

    def metric_of(y: np.ndarray) -> GeneralMetric:
        if reduced:
            return reconstruct_full_metric(y, tri)
        return GeneralMetric(tri, y)

    def rhs(y: np.ndarray) -> np.ndarray:
        k = curvature(metric_of(y), tri).values[evolving]
        return np.append(k, -float(np.dot(k, k)))

    def rk4(z: np.ndarray, h: float) -> np.ndarray:
        y = z[:-1]
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1[:-1])
        k3 = rhs(y + 0.5 * h * k2[:-1])
        k4 = rhs(y + h * k3[:-1])
        dz = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out = z + h * dz
        return out

    y = _initial_state(tri, config, evolving)
    metric = metric_of(y)
    k_full = curvature(metric, tri)
    h_anchor = H_total(metric, tri)
    z = np.append(y, h_anchor)
    t = 0.0
    h = config.dt0
    samples: List[FlowSample] = []
    accepted = rejected = 0
    last_sample_t = -math.inf
    termination = "max-time"
    error_detail = None

    def record(force: bool = False):
        nonlocal last_sample_t
        if force or t - last_sample_t >= config.trace_interval:
            k_ev = k_full.values[evolving]
            samples.append(FlowSample(
                t=t, lengths=z[:-1].copy(),
                k_inf=k_full.inf_norm,
                k_l2=float(np.linalg.norm(k_ev)),
                h_line=h_line, h_acc=float(z[-1]),
            ))
            last_sample_t = t

    h_line = h_anchor
    record(force=True)
    if k_full.inf_norm < config.tol:
        return FlowTrace(
            samples=samples, termination="converged", evolving_ids=ids,
            final_metric=metric, final_curvature=k_full, config=config,
            steps_accepted=0, steps_rejected=0, banner=banner,
        )

    try:
        while t < config.max_time:
            h = min(h, config.max_time - t)
            z1 = rk4(z, h)
            z2 = rk4(rk4(z, 0.5 * h), 0.5 * h)
            if reduced and (np.any(z1[:-1] <= 0.0) or np.any(z2[:-1] <= 0.0)):
                # the continuous flow never crosses the zero wall; only the
                # discrete step can, so shrink it
                h *= 0.5
                rejected += 1
                if h < 1e-13:
                    termination = "numeric-error"
                    error_detail = "step size collapsed at the zero-length wall"
                    break
                continue
            if not np.all(np.isfinite(z2)):
                termination = "numeric-error"
                error_detail = "non-finite state"
                break
            scale = np.maximum(1.0, np.abs(z2))
            err = float(np.max(np.abs(z2 - z1) / (15.0 * scale)))
            if err > config.local_error:
                rejected += 1
                h *= max(0.2, 0.9 * (config.local_error / err) ** 0.2)
                if h < 1e-13:
                    termination = "numeric-error"
                    error_detail = "step size collapsed under error control"
                    break
                continue

            new_metric = metric_of(z2[:-1])
            delta = 0.0
            for tt in range(tri.tet_count):
                delta += cov_tet_between(
                    tet_lengths(tri, metric, tt),
                    tet_lengths(tri, new_metric, tt),
                    tol=1e-14,
                )
            delta -= 2.0 * math.pi * float(
                np.sum(new_metric.values - metric.values)
            )
            h_line += delta

            z = z2
            t += h
            metric = new_metric
            k_full = curvature(metric, tri)
            accepted += 1
            record()
            if k_full.inf_norm < config.tol:
                termination = "converged"
                break
            if err > 0.0:
                h *= min(4.0, max(0.2, 0.9 * (config.local_error / err) ** 0.2))
            else:
                h *= 4.0
    except (NumericError, OverflowError) as exc:
        termination = "numeric-error"
        error_detail = str(exc)

    if not samples or samples[-1].t != t:
        record(force=True)
    return FlowTrace(
        samples=samples, termination=termination, evolving_ids=ids,
        final_metric=metric, final_curvature=k_full, config=config,
        steps_accepted=accepted, steps_rejected=rejected, banner=banner,
        error_detail=error_detail,
    )


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

@dataclass
class CertificationReport:
    residual: float
    residual_tol: float
    residual_ok: bool
    real_ok: bool
    per_tet_real: List[bool]
    phi_min: float
    phi_max: float
    bounds_ok: bool
    length_lower: float
    length_upper: float
    hyper_length_min: float
    hyper_length_max: float
    verdict: bool
    verdict_text: str
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "residual_tol": self.residual_tol,
            "residual_ok": self.residual_ok,
            "real_ok": self.real_ok,
            "per_tet_real": self.per_tet_real,
            "phi_min": self.phi_min,
            "phi_max": self.phi_max,
            "bounds_ok": self.bounds_ok,
            "length_lower": self.length_lower,
            "length_upper": self.length_upper,
            "hyper_length_min": self.hyper_length_min,
            "hyper_length_max": self.hyper_length_max,
            "verdict": self.verdict,
            "verdict_text": self.verdict_text,
            "notes": self.notes,
        }


def certify_limit(
    metric: GeneralMetric,
    tri: Triangulation,
    *,
    residual_tol: float = CERTIFICATION_TOL,
) -> CertificationReport:
    """Certify a terminal metric: curvature residual below tolerance, every
    tetrahedron realized by a genuine hyperbolic one (all angle cosines
    strictly inside (-1, 1)), and hyper-ideal lengths inside the barrier
    interval ``[1/(3 d_max), arccosh 2]``.  The verdict passes only when all
    three hold."""
    k = curvature(metric, tri)
    residual = k.inf_norm
    residual_ok = residual <= residual_tol

    per_tet_real: List[bool] = []
    phi_min, phi_max = math.inf, -math.inf
    for t in range(tri.tet_count):
        phis = extended_angles(tet_lengths(tri, metric, t)).phis
        phi_min = min(phi_min, min(phis))
        phi_max = max(phi_max, max(phis))
        per_tet_real.append(all(abs(p) < 1.0 for p in phis))
    real_ok = all(per_tet_real)

    lower = 1.0 / (3.0 * tri.d_max)
    hyper = metric.values[tri.hyper_edge_indices]
    hyper_min = float(np.min(hyper)) if hyper.size else lower
    hyper_max = float(np.max(hyper)) if hyper.size else lower
    bounds_ok = bool(hyper.size == 0 or
                     (hyper_min >= lower and hyper_max <= UPPER_LENGTH))

    verdict = residual_ok and real_ok and bounds_ok
    if verdict:
        text = "hyperbolic structure found, triangulation geometric"
    else:
        reasons = []
        if not residual_ok:
            reasons.append(f"curvature residual {residual:.3e} > {residual_tol:.1e}")
        if not real_ok:
            reasons.append("degenerate tetrahedron (angle cosine on the boundary)")
        if not bounds_ok:
            reasons.append(
                f"hyper-ideal lengths outside [{lower:.6f}, {UPPER_LENGTH:.6f}]"
            )
        text = "certification failed: " + "; ".join(reasons)
    notes = []
    if residual_tol > CERTIFICATION_TOL:
        notes.append(
            f"certified at loose residual tolerance {residual_tol:.1e} "
            f"(default {CERTIFICATION_TOL:.1e})"
        )
    return CertificationReport(
        residual=residual, residual_tol=residual_tol, residual_ok=residual_ok,
        real_ok=real_ok, per_tet_real=per_tet_real,
        phi_min=phi_min, phi_max=phi_max,
        bounds_ok=bounds_ok, length_lower=lower, length_upper=UPPER_LENGTH,
        hyper_length_min=hyper_min, hyper_length_max=hyper_max,
        verdict=verdict, verdict_text=text, notes=notes,
    )


def trace_csv_lines(evolving_ids, samples, manifest_sha: Optional[str] = None) -> List[str]:
    """Render trace samples as CSV lines (deterministic float formatting).

    ``samples`` may be :class:`FlowSample` objects or anything exposing the
    same attribute names (the service response models do).
    """
    lines = []
    if manifest_sha:
        lines.append(f"# manifest {manifest_sha}")
    lines.append(",".join(
        ["t"] + list(evolving_ids)
        + ["K_inf", "K_l2", "H_lineintegral", "H_accumulated"]
    ))
    for s in samples:
        row = [repr(float(s.t))] + [repr(float(v)) for v in s.lengths]
        row += [repr(float(s.k_inf)), repr(float(s.k_l2)),
                repr(float(s.h_line)), repr(float(s.h_acc))]
        lines.append(",".join(row))
    return lines
