"""Pydantic request/response models for the solver service."""

from __future__ import annotations

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field

from .. import __version__


class TetrahedronModel(BaseModel):
    ideal_vertices: List[int] = Field(default_factory=list)
    gluings: List[Optional[tuple]] = Field(min_length=4, max_length=4)


class TriangulationDoc(BaseModel):
    tetrahedra: List[TetrahedronModel]


class EdgeClassSummary(BaseModel):
    id: str
    index: int
    kind: str
    valence: int
    endpoints: List[int]


class VertexClassSummary(BaseModel):
    index: int
    kind: str
    chi: int
    closed: bool
    orientable: bool
    genus: Optional[int]


class ValidationReportModel(BaseModel):
    tet_count: int
    edge_classes: List[EdgeClassSummary]
    vertex_classes: List[VertexClassSummary]
    properly_glued: bool
    properly_glued_violations: List[str]
    valence_hypothesis: bool
    valence_rows: List[dict]
    orientable_manifold: bool
    boundary_ok: bool
    boundary_violations: List[str]
    ok: bool


class ValidateRequest(BaseModel):
    triangulation: TriangulationDoc


class ValidateResponse(BaseModel):
    report: ValidationReportModel


class FlowOptions(BaseModel):
    mode: str = "reduced"
    l0: Union[None, float, Dict[str, float]] = None
    tol: float = 1e-10
    max_time: float = 1e4
    dt0: float = 1e-2
    local_error: float = 1e-10
    trace_interval: float = 0.0
    force: bool = False


class FlowRequest(BaseModel):
    triangulation: TriangulationDoc
    options: FlowOptions = Field(default_factory=FlowOptions)


class RunManifestModel(BaseModel):
    manifest_sha: str
    input_sha256: str
    config: dict
    tool_version: str = __version__
    started_at: str
    finished_at: str
    termination: str
    verdict: Optional[bool]


class FlowSampleModel(BaseModel):
    t: float
    lengths: List[float]
    k_inf: float
    k_l2: float
    h_line: float
    h_acc: float


class CertificationModel(BaseModel):
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
    notes: List[str]


class FlowResponse(BaseModel):
    manifest: RunManifestModel
    validation: Optional[ValidationReportModel]
    termination: str
    error_detail: Optional[str]
    banner: Optional[str]
    evolving_ids: List[str]
    samples: List[FlowSampleModel]
    final_lengths: Dict[str, float]
    certification: Optional[CertificationModel]


class InspectRequest(BaseModel):
    triangulation: TriangulationDoc
    lengths: Dict[str, float]


class TetAngleRow(BaseModel):
    tet: int
    kind: str
    pairs: List[str]
    alphas: List[float]
    phis: List[float]


class InspectResponse(BaseModel):
    curvature: Dict[str, float]
    k_inf: float
    k_l2: float
    h_value: float
    tet_angles: List[TetAngleRow]


class ErrorResponse(BaseModel):
    error_kind: str  # parse | consistency | numeric | internal
    detail: str
