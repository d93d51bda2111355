"""P_max sweeps over a fixed user drop and oracle cross-checks."""
import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config.defaults import SWEEP
from src.noma.noma_model import Scenario, rate_report
from src.optim.oracle import GridSpec, grid_search
from src.optim.solver import SolveResult, SolverConfig, SolverStatus, solve

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "p_max_mw",
    "sum_rate_nats",
    "harmonic_objective",
    "status",
    "outer_iters",
    "newton_iters",
    "kkt_residual",
)

ORACLE_REL_TOL = 1e-3


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_max_values: Tuple[float, ...] = SWEEP["p_max_values"]

    @field_validator("p_max_values")
    @classmethod
    def _strictly_increasing(cls, values):
        if not values:
            raise ValueError("at least one P_max value is required")
        if any(v <= 0 for v in values):
            raise ValueError("P_max values must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("P_max values must be strictly increasing")
        return values


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_max_mw: float
    sum_rate_nats: float
    harmonic_objective: float
    status: SolverStatus
    outer_iters: int
    newton_iters: int
    kkt_residual: float

    def as_csv(self) -> List[str]:
        return [
            repr(self.p_max_mw),
            repr(self.sum_rate_nats),
            repr(self.harmonic_objective),
            self.status.value,
            str(self.outer_iters),
            str(self.newton_iters),
            repr(self.kkt_residual),
        ]


def sweep_row(s: Scenario, result: SolveResult) -> SweepRow:
    if result.sorted_allocation is not None:
        report = rate_report(s, result.sorted_allocation)
        sum_rate, objective = report.sum_rate, report.harmonic_objective
    else:
        sum_rate, objective = float("nan"), float("inf")
    return SweepRow(
        p_max_mw=s.p_max_mw,
        sum_rate_nats=sum_rate,
        harmonic_objective=objective,
        status=result.status,
        outer_iters=result.outer_iterations,
        newton_iters=result.newton_iterations,
        kkt_residual=result.kkt_residual,
    )


def run_sweep(template: Scenario, sweep: Optional[SweepSpec] = None,
              cfg: Optional[SolverConfig] = None, threads: int = 0) -> List[SweepRow]:
    """One cold solve per P_max on the same drop; rows come back in sweep order"""
    sweep = sweep or SweepSpec()
    cfg = cfg or SolverConfig()
    scenarios = [template.with_p_max(p) for p in sweep.p_max_values]

    def _run(s: Scenario) -> SweepRow:
        return sweep_row(s, solve(s, cfg))

    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run, scenarios))
    else:
        rows = [_run(s) for s in scenarios]

    failed = [r.p_max_mw for r in rows if r.status is not SolverStatus.OPTIMAL]
    if failed:
        logger.warning(f"Non-optimal solves at P_max = {failed}")
    logger.info(f"Sweep finished: {len(rows)} points, {len(failed)} non-optimal")
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    solver_status: SolverStatus
    solver_objective: float
    oracle_objective: float
    oracle_bound: float
    relative_gap: float
    tolerance: float = Field(description="absolute tolerance the gap was checked against")
    passed: bool

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} solver={self.solver_objective!r} oracle={self.oracle_objective!r} "
            f"relative_gap={self.relative_gap:.3e} bound={self.oracle_bound:.3e} "
            f"status={self.solver_status.value}"
        )


def validate_against_oracle(s: Scenario, spec: Optional[GridSpec] = None,
                            cfg: Optional[SolverConfig] = None, threads: int = 0) -> ValidationReport:
    result = solve(s, cfg)
    oracle = grid_search(s, spec, threads=threads)
    gap = abs(oracle.objective - result.objective)
    tolerance = max(ORACLE_REL_TOL * result.objective, oracle.error_bound)
    passed = result.status is SolverStatus.OPTIMAL and gap <= tolerance
    report = ValidationReport(
        solver_status=result.status,
        solver_objective=result.objective,
        oracle_objective=oracle.objective,
        oracle_bound=oracle.error_bound,
        relative_gap=gap / result.objective,
        tolerance=tolerance,
        passed=passed,
    )
    logger.info(report.summary())
    return report
