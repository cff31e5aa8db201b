"""Command-line client for the solver service.

The CLI is a thin client of the service layer: each subcommand builds the
pydantic request, executes it either in process (default) or against a
running server (``--server URL``), and renders the response as JSON on
stdout.  Exit codes: 0 ok, 1 validation/verdict failure, 2 numeric failure
or non-convergence, 3 parse error.

Set ``CRFLOW_LOG`` (DEBUG/INFO/WARNING/ERROR) to control stderr logging.
"""

from __future__ import annotations

import json
import logging
import os
import random
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

from . import __version__
from .errors import (
    ConsistencyError,
    GluingLogicError,
    MetricMismatchError,
    NumericError,
    ParseError,
)
from .flow import trace_csv_lines
from .service.app import (
    ValidationFailedError,
    handle_flow,
    handle_inspect,
    handle_validate,
)
from .service.models import (
    FlowOptions,
    FlowRequest,
    InspectRequest,
    TriangulationDoc,
    ValidateRequest,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_NUMERIC = 2
EXIT_PARSE = 3

log = logging.getLogger("crflow")

_HANDLERS = {
    "/validate": handle_validate,
    "/flow": handle_flow,
    "/inspect": handle_inspect,
}


class RemoteError(Exception):
    def __init__(self, kind: str, detail):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


def _setup_logging() -> None:
    level = os.environ.get("CRFLOW_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _read_doc(path: str) -> TriangulationDoc:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "tetrahedra" not in raw:
        raise ParseError(f"{path}: document must carry a 'tetrahedra' array")
    try:
        return TriangulationDoc.model_validate(raw)
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _execute(server: Optional[str], endpoint: str, request, response_cls):
    if server is None:
        return _HANDLERS[endpoint](request)
    resp = httpx.post(
        server.rstrip("/") + endpoint,
        json=request.model_dump(mode="json"),
        timeout=None,
    )
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", {})
        except ValueError:
            detail = {}
        raise RemoteError(detail.get("error_kind", "internal"),
                          detail.get("detail", resp.text))
    return response_cls.model_validate(resp.json())


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


def _fail(exc: Exception) -> int:
    """Map an exception to the exit-code contract, logging the reason."""
    log.error("%s", exc)
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, MetricMismatchError):
        return EXIT_FAIL
    if isinstance(exc, (ParseError, ConsistencyError)):
        return EXIT_PARSE
    if isinstance(exc, (NumericError, GluingLogicError)):
        return EXIT_NUMERIC
    if isinstance(exc, RemoteError):
        return {"parse": EXIT_PARSE, "consistency": EXIT_PARSE,
                "validation": EXIT_FAIL, "metric": EXIT_FAIL,
                "numeric": EXIT_NUMERIC}.get(exc.kind, EXIT_NUMERIC)
    return EXIT_NUMERIC


@click.group()
@click.version_option(version=__version__, prog_name="crflow")
def main() -> None:
    """Validate ideal triangulations and flow them to hyperbolic metrics."""
    _setup_logging()


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", default=None, help="Run against a remote service URL.")
def validate(file: str, server: Optional[str]) -> None:
    """Validate the combinatorial hypotheses of a triangulation FILE."""
    from .service.models import ValidateResponse

    try:
        req = ValidateRequest(triangulation=_read_doc(file))
        resp = _execute(server, "/validate", req, ValidateResponse)
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    _emit(resp.report.model_dump(mode="json"))
    sys.exit(EXIT_OK if resp.report.ok else EXIT_FAIL)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["reduced", "full"]), default="reduced")
@click.option("--tol", type=float, default=1e-10, show_default=True,
              help="Stop tolerance on the curvature sup norm.")
@click.option("--max-time", type=float, default=1e4, show_default=True)
@click.option("--dt0", type=float, default=1e-2, show_default=True,
              help="Initial integrator step.")
@click.option("--l0", type=float, default=None,
              help="Scalar initial length, broadcast over evolving edges.")
@click.option("--l0-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON map edge-class-id -> initial length.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None,
              help="Write the flow trace CSV here.")
@click.option("--trace-interval", type=float, default=0.0, show_default=True,
              help="Minimum flow time between trace samples (0 = every step).")
@click.option("--force", is_flag=True, help="Integrate even if validation fails.")
@click.option("--server", default=None, help="Run against a remote service URL.")
def flow(file, mode, tol, max_time, dt0, l0, l0_file, trace_path,
         trace_interval, force, server) -> None:
    """Integrate the flow on FILE and certify the limit metric."""
    from .service.models import FlowResponse

    try:
        if l0 is not None and l0_file is not None:
            raise click.UsageError("--l0 and --l0-file are mutually exclusive")
        initial = l0
        if l0_file is not None:
            initial = json.loads(Path(l0_file).read_text())
        req = FlowRequest(
            triangulation=_read_doc(file),
            options=FlowOptions(
                mode=mode, l0=initial, tol=tol, max_time=max_time, dt0=dt0,
                trace_interval=trace_interval, force=force,
            ),
        )
        resp = _execute(server, "/flow", req, FlowResponse)
    except ValidationFailedError as exc:
        click.echo(f"error: {exc}", err=True)
        _emit({"validation": exc.report.model_dump(mode="json")})
        sys.exit(EXIT_FAIL)
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))

    if resp.banner:
        click.echo(f"warning: {resp.banner}", err=True)
    if trace_path:
        lines = trace_csv_lines(resp.evolving_ids, resp.samples,
                                manifest_sha=resp.manifest.manifest_sha)
        Path(trace_path).write_text("\n".join(lines) + "\n")
    payload = resp.model_dump(mode="json")
    payload.pop("samples")  # the CSV owns the trajectory
    _emit(payload)

    if resp.termination != "converged":
        sys.exit(EXIT_NUMERIC)
    if resp.certification is None or not resp.certification.verdict:
        sys.exit(EXIT_FAIL)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--lengths", "lengths_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON map edge-class-id -> length.")
@click.option("--server", default=None, help="Run against a remote service URL.")
def inspect(file: str, lengths_path: str, server: Optional[str]) -> None:
    """Evaluate curvature, angles and the Lyapunov value at a given metric."""
    from .service.models import InspectResponse

    try:
        try:
            lengths = json.loads(Path(lengths_path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{lengths_path}: invalid JSON: {exc}") from exc
        if not isinstance(lengths, dict):
            raise ParseError(f"{lengths_path}: expected a JSON object")
        req = InspectRequest(triangulation=_read_doc(file), lengths=lengths)
        resp = _execute(server, "/inspect", req, InspectResponse)
    except Exception as exc:  # noqa: BLE001
        sys.exit(_fail(exc))
    _emit(resp.model_dump(mode="json"))
    sys.exit(EXIT_OK)


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=2000, show_default=True)
def selfcheck(seed: int, samples: int) -> None:
    """Run quick randomized property checks of the numeric kernels."""
    from . import tetgeom

    rng = random.Random(seed)
    failures = []

    worst_round = 0.0
    for _ in range(samples):
        target = tuple(rng.uniform(1.0, 10.0) for _ in range(3))
        x2, x4, x6 = tetgeom.equilateral_inverse(*target)
        got = tetgeom.equilateral_forward(x2, x4, x6)
        worst_round = max(worst_round, max(abs(a - b) for a, b in zip(got, target)))
    if worst_round > 1e-9:
        failures.append(f"equilateral roundtrip error {worst_round:.2e}")

    disjunction_ok = True
    for _ in range(samples):
        x = [rng.uniform(1.0 + 1e-9, 4.0)] + [rng.uniform(0.05, 4.0) for _ in range(5)]
        p = tetgeom.phi_partials(*x)
        if not ((p.d2 > 0 and p.d3 > 0) or (p.d4 > 0 and p.d5 > 0)):
            disjunction_ok = False
            break
    if not disjunction_ok:
        failures.append("partial-derivative sign disjunction violated")

    domination_ok = True
    a, b = 1.7, 2.3
    for _ in range(samples):
        x1 = rng.uniform(1.0, b)
        x = (x1, rng.uniform(0.5, a), rng.uniform(1.0, b),
             rng.uniform(0.5, a), rng.uniform(1.0, b), rng.uniform(0.5, a))
        if tetgeom.phi31_hyper_x(*x) > tetgeom.corner_bound(x1, a, b) + 1e-12:
            domination_ok = False
            break
    if not domination_ok:
        failures.append("corner bound domination violated")

    _emit({"seed": seed, "samples": samples,
           "roundtrip_error": worst_round,
           "failures": failures, "ok": not failures})
    sys.exit(EXIT_OK if not failures else EXIT_FAIL)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8077, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("crflow.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
