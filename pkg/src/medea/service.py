"""FastAPI service wrapping the scenario runners.

Endpoints:
  GET  /scenarios   list the available scenario names
  POST /validate    schema + semantic checks, no computation
  POST /run         execute a sweep and return the columns + provenance

The CLI uses the same request/response models and calls the handlers
in-process by default; pointing it at a running instance gives identical
results over HTTP.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .errors import MedeaError
from .scenarios import run_request, validate_config
from .schemas import (
    RunRequest,
    SCENARIO_NAMES,
    SweepResult,
    ValidateRequest,
    ValidationReport,
)

app = FastAPI(
    title="medea",
    version=__version__,
    description="Spontaneous-decay observables near absorbing bodies",
)


@app.get("/scenarios")
def list_scenarios() -> dict:
    return {"scenarios": list(SCENARIO_NAMES), "version": __version__}


@app.post("/validate", response_model=ValidationReport)
def validate(req: ValidateRequest) -> ValidationReport:
    return validate_config(req.config)


@app.post("/run", response_model=SweepResult)
def run(req: RunRequest) -> SweepResult:
    try:
        return run_request(req)
    except MedeaError as exc:
        raise HTTPException(status_code=422,
                            detail=f"numerical failure: {exc}") from exc
