from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, ValidationError
import uvicorn
import logging

from src import __version__
from src.experiments.report import solve_report
from src.config.settings import Settings
from src.exceptions import ConfigError, NomaVlcError
from src.experiments.sweep import SweepSpec, run_sweep
from src.noma.scenario_io import first_error, json_safe, scenario_from_document, validate_model
from src.optim.solver import SolverConfig, solve

app = FastAPI(title="noma-vlc", version=__version__)
settings = Settings()

# Set up logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


class SolveRequest(BaseModel):
    scenario: Dict[str, Any]
    config: Optional[Dict[str, Any]] = None


class SweepRequest(SolveRequest):
    p_max_values: List[float] = Field(default_factory=lambda: list(SweepSpec().p_max_values))


def _parse(request: SolveRequest):
    """Scenario and solver config from a request body; 422 names the bad field"""
    try:
        scenario = scenario_from_document(request.scenario)
        cfg = validate_model(SolverConfig, request.config, ConfigError) if request.config else SolverConfig()
    except NomaVlcError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return scenario, cfg


@app.get("/")
async def root():
    """Health check endpoint"""
    return {"status": "noma-vlc is running", "version": __version__}


@app.post("/api/solve")
def solve_endpoint(request: SolveRequest):
    scenario, cfg = _parse(request)
    result = solve(scenario, cfg)
    logger.info(f"API solve: {scenario.num_users} users, status {result.status.value}")
    return json_safe(solve_report(scenario, result))


@app.post("/api/sweep")
def sweep_endpoint(request: SweepRequest):
    scenario, cfg = _parse(request)
    try:
        sweep = SweepSpec(p_max_values=tuple(request.p_max_values))
    except ValidationError as e:
        field, message = first_error(e)
        raise HTTPException(status_code=422, detail=f"{field}: {message}")
    rows = run_sweep(scenario, sweep, cfg, threads=settings.NOMA_VLC_THREADS)
    return json_safe([row.model_dump(mode="python") | {"status": row.status.value} for row in rows])


if __name__ == "__main__":
    uvicorn.run(app, host="0.0.0.0", port=settings.PORT)
