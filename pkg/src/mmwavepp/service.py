"""FastAPI service wrapping the estimation library and experiment runner.

Endpoints:
  GET  /health                liveness probe
  POST /scenarios/validate    schema + cross-field validation (422 on error)
  POST /runs                  run a scenario synchronously, return rows/summary/CSV
  GET  /presets               list bundled figure presets
  GET  /presets/{figure}      scenarios for one preset figure

Runs execute in-process; sweeps at full trial counts can take minutes, so
clients should use generous timeouts.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .runner import emit_csv, run_scenario
from .scenario import PRESET_FIGURES, Scenario, figure_preset

app = FastAPI(title="mmwavepp", version=__version__)


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateResponse(BaseModel):
    valid: bool
    scenario: Scenario


class RunRequest(BaseModel):
    scenario: Scenario
    trials: int | None = Field(None, ge=1, description="Override the scenario's trial count")
    threads: int = Field(1, ge=1, le=64)
    base_seed: int | None = Field(None, description="Override the scenario's base seed")
    timing: bool = Field(True, description="Record wall times (disable for byte-stable CSV)")
    include_rows: bool = True
    include_csv: bool = True


class RowModel(BaseModel):
    scenario_id: str
    algorithm: str
    T: int
    snr_db: float
    mrf_nrf: int
    trial: int
    nmse_h: float
    nmse_c: float
    eta: float
    wall_ms: float
    support_size: int

    model_config = {"from_attributes": True}


class RunResponse(BaseModel):
    scenario: Scenario
    rows: list[RowModel] | None
    summary: list[dict]
    csv: str | None


class PresetListResponse(BaseModel):
    figures: list[int]


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/scenarios/validate", response_model=ValidateResponse)
def validate_scenario(scenario: Scenario) -> ValidateResponse:
    return ValidateResponse(valid=True, scenario=scenario)


@app.post("/runs", response_model=RunResponse, response_model_exclude_none=True)
def run(request: RunRequest) -> RunResponse:
    result = run_scenario(
        request.scenario,
        trials=request.trials,
        threads=request.threads,
        base_seed=request.base_seed,
        timing=request.timing,
    )
    return RunResponse(
        scenario=request.scenario,
        rows=[RowModel.model_validate(r) for r in result.rows] if request.include_rows else None,
        summary=result.summary,
        csv=emit_csv(result.rows) if request.include_csv else None,
    )


@app.get("/presets", response_model=PresetListResponse)
def presets() -> PresetListResponse:
    return PresetListResponse(figures=list(PRESET_FIGURES))


@app.get("/presets/{figure}", response_model=list[Scenario])
def preset(figure: int) -> list[Scenario]:
    try:
        return figure_preset(figure)
    except ValueError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
