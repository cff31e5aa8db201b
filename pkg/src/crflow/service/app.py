"""FastAPI service exposing validation, flow runs, and metric inspection.

All operations are pure functions of the request body, so the endpoints are
safe for concurrent use.  The handler functions (``handle_*``) take and
return the pydantic models directly; the CLI calls them in process, and the
HTTP routes are thin wrappers around them.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from typing import Union

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..covolume import GeneralMetric, H_total, tet_lengths
from ..errors import (
    ConsistencyError,
    GluingLogicError,
    MetricMismatchError,
    NumericError,
    ParseError,
)
from ..flow import FlowConfig, certify_limit, curvature, run_flow
from ..tetgeom import PAIRS31, extended_angles
from ..triangulation import Triangulation, parse_triangulation, validate
from .models import (
    CertificationModel,
    FlowRequest,
    FlowResponse,
    FlowSampleModel,
    InspectRequest,
    InspectResponse,
    RunManifestModel,
    TetAngleRow,
    TriangulationDoc,
    ValidateRequest,
    ValidateResponse,
    ValidationReportModel,
)

app = FastAPI(
    title="crflow",
    version=__version__,
    description="Combinatorial Ricci flow solver for ideally triangulated 3-manifolds",
)


class ValidationFailedError(Exception):
    """Flow was requested on a triangulation that fails validation."""

    def __init__(self, message: str, report: ValidationReportModel):
        super().__init__(message)
        self.report = report


def _canonical_doc(doc: TriangulationDoc) -> str:
    return json.dumps(doc.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _parse(doc: TriangulationDoc) -> Triangulation:
    return parse_triangulation(doc.model_dump(mode="json"))


def handle_validate(req: ValidateRequest) -> ValidateResponse:
    tri = _parse(req.triangulation)
    report = validate(tri)
    return ValidateResponse(report=ValidationReportModel(**report.to_dict()))


def handle_flow(req: FlowRequest) -> FlowResponse:
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    tri = _parse(req.triangulation)
    opts = req.options
    report = validate(tri)
    if not report.ok and not opts.force:
        raise ValidationFailedError(
            "validation failed (run with force to integrate anyway); "
            f"first issue: {_first_violation(report)}",
            ValidationReportModel(**report.to_dict()),
        )
    config = FlowConfig(
        mode=opts.mode, l0=opts.l0, tol=opts.tol, max_time=opts.max_time,
        dt0=opts.dt0, local_error=opts.local_error,
        trace_interval=opts.trace_interval,
    )
    trace = run_flow(tri, config)
    certification = None
    if trace.termination == "converged":
        certification = certify_limit(
            trace.final_metric, tri, residual_tol=max(opts.tol, 1e-8)
        )
    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    input_sha = _sha256(_canonical_doc(req.triangulation))
    config_echo = config.to_dict()
    manifest_sha = _sha256(json.dumps(
        {"input": input_sha, "config": config_echo, "version": __version__},
        sort_keys=True, separators=(",", ":"),
    ))
    manifest = RunManifestModel(
        manifest_sha=manifest_sha,
        input_sha256=input_sha,
        config=config_echo,
        started_at=started,
        finished_at=finished,
        termination=trace.termination,
        verdict=certification.verdict if certification else None,
    )
    return FlowResponse(
        manifest=manifest,
        validation=ValidationReportModel(**report.to_dict()),
        termination=trace.termination,
        error_detail=trace.error_detail,
        banner=trace.banner,
        evolving_ids=trace.evolving_ids,
        samples=[FlowSampleModel(
            t=s.t, lengths=[float(v) for v in s.lengths],
            k_inf=s.k_inf, k_l2=s.k_l2, h_line=s.h_line, h_acc=s.h_acc,
        ) for s in trace.samples],
        final_lengths=trace.final_metric.to_mapping(),
        certification=(CertificationModel(**certification.to_dict())
                       if certification else None),
    )


def handle_inspect(req: InspectRequest) -> InspectResponse:
    tri = _parse(req.triangulation)
    metric = GeneralMetric.from_mapping(tri, req.lengths)
    k = curvature(metric, tri)
    rows = []
    for t in range(tri.tet_count):
        lengths = tet_lengths(tri, metric, t)
        angles = extended_angles(lengths)
        rows.append(TetAngleRow(
            tet=t,
            kind=tri.tets[t].kind,
            pairs=[f"{a}{b}" for a, b in PAIRS31],
            alphas=list(angles.alphas),
            phis=list(angles.phis),
        ))
    return InspectResponse(
        curvature={c.id: float(k.values[c.index]) for c in tri.edge_classes},
        k_inf=k.inf_norm,
        k_l2=k.l2_norm,
        h_value=H_total(metric, tri),
        tet_angles=rows,
    )


def _first_violation(report) -> str:
    for group in (report.properly_glued_violations, report.boundary_violations):
        if group:
            return group[0]
    if not report.valence_hypothesis:
        bad = [r for r in report.valence_rows if not r["ok"]]
        return f"valence hypothesis fails at edge class {bad[0]['id']}"
    if not report.orientable_manifold:
        return "gluing is not orientable"
    return "unknown"


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, ParseError):
        return HTTPException(status_code=422, detail={
            "error_kind": "parse", "detail": str(exc)})
    if isinstance(exc, (ConsistencyError, GluingLogicError)):
        return HTTPException(status_code=422, detail={
            "error_kind": "consistency", "detail": str(exc)})
    if isinstance(exc, ValidationFailedError):
        return HTTPException(status_code=409, detail={
            "error_kind": "validation", "detail": str(exc),
            "report": exc.report.model_dump(mode="json")})
    if isinstance(exc, MetricMismatchError):
        return HTTPException(status_code=409, detail={
            "error_kind": "metric", "detail": str(exc)})
    if isinstance(exc, NumericError):
        return HTTPException(status_code=500, detail={
            "error_kind": "numeric", "detail": str(exc)})
    raise exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/validate", response_model=ValidateResponse)
def validate_endpoint(req: ValidateRequest) -> ValidateResponse:
    try:
        return handle_validate(req)
    except Exception as exc:  # noqa: BLE001 - mapped to structured errors
        raise _http_error(exc) from exc


@app.post("/flow", response_model=FlowResponse)
def flow_endpoint(req: FlowRequest) -> FlowResponse:
    try:
        return handle_flow(req)
    except Exception as exc:  # noqa: BLE001
        raise _http_error(exc) from exc


@app.post("/inspect", response_model=InspectResponse)
def inspect_endpoint(req: InspectRequest) -> InspectResponse:
    try:
        return handle_inspect(req)
    except Exception as exc:  # noqa: BLE001
        raise _http_error(exc) from exc
