"""Log-barrier interior-point solver for the transformed power control problem.

Each outer stage minimizes

    phi_t(x) = t * sum(y) - sum_i log(-f_i(x))

over the M rate rows plus the power and amplitude rows with damped Newton
steps, then multiplies t by `barrier_mu` until (M + 2) / t <= gap_tol. The
start point is strictly feasible by construction (equal split inside both
budgets with y above 1/R), so no phase-1 is needed. Positivity of the powers
is implicit in rho = log p.

The first stage uses t = t_init * (M + 2) / sum(y0), which puts the objective
and the barrier on the same scale at the start point. Newton directions are
restricted to sum(dy) <= 0, so sum(y) never rises within a stage.
"""
import logging
import math
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.exceptions import DomainError, SolverDivergenceError
from src.noma.noma_model import PowerAllocation, Scenario, equal_power_allocation, rate_report
from src.optim.transform import (
    Y_FLOOR,
    TransformedPoint,
    all_constraints,
    constraint_values,
    from_transformed,
    to_transformed,
)

logger = logging.getLogger(__name__)

KKT_TOL = 1e-6
BINDING_TOL = 1e-6
REGULARIZATION = 1e-12
MAX_CONSECUTIVE_STALLS = 3
MAX_NON_DESCENT = 3
MIN_STEP = 1e-14
# The last stage tightens the Newton stop so the KKT certificate holds.
FINAL_POLISH = 1e-6
# Below this squared decrement centering takes full Newton steps.
PURE_NEWTON_DECREMENT = 0.0625
ROUNDING_FLOOR_STEPS = 3


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"
    INFEASIBLE_INPUT = "infeasible_input"


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    barrier_mu: float = Field(default=10.0, gt=1.0)
    # multiplier on the start-point scale (M + 2) / sum(y0)
    t_init: float = Field(default=1.0, gt=0.0)
    gap_tol: float = Field(default=1e-8, gt=0.0)
    newton_tol: float = Field(default=1e-10, gt=0.0)
    max_outer: int = Field(default=60, ge=1)
    max_newton: int = Field(default=100, ge=1)
    line_search_alpha: float = Field(default=0.25, gt=0.0, lt=0.5)
    line_search_beta: float = Field(default=0.5, gt=0.0, lt=1.0)
    feasibility_slack: float = Field(default=0.05, gt=0.0, lt=1.0)


class StageRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    transformed_objective: float
    max_constraint: float
    newton_decrement: float
    newton_steps: int
    # sum(y) at the stage start and after every accepted Newton step
    step_objectives: Tuple[float, ...] = ()


class IterationTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    stages: Tuple[StageRecord, ...] = ()


class SolveResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: SolverStatus
    allocation: Optional[PowerAllocation] = None
    sorted_allocation: Optional[PowerAllocation] = None
    objective: float = math.inf
    transformed_objective: float = math.inf
    kkt_residual: float = math.inf
    rate_binding_gaps: Tuple[float, ...] = ()
    duals: Tuple[float, ...] = ()
    outer_iterations: int = 0
    newton_iterations: int = 0
    trace: IterationTrace = IterationTrace()
    message: str = ""

    @model_validator(mode="after")
    def _optimal_is_certified(self):
        if self.status is SolverStatus.OPTIMAL and not self.kkt_residual <= KKT_TOL:
            raise ValueError("an optimal result must carry a KKT residual within tolerance")
        return self


def initial_point(s: Scenario, cfg: SolverConfig) -> TransformedPoint:
    p = equal_power_allocation(s, margin=cfg.feasibility_slack)
    return to_transformed(s, p, slack=cfg.feasibility_slack)


def initial_barrier_parameter(s: Scenario, start: TransformedPoint, cfg: SolverConfig) -> float:
    return cfg.t_init * (s.num_users + 2) / float(np.sum(start.y))


def barrier_duals(s: Scenario, point: TransformedPoint, t: float) -> np.ndarray:
    """lambda_i = 1 / (-t f_i) for every constraint row"""
    return 1.0 / (-t * constraint_values(s, point))


def fitted_duals(s: Scenario, point: TransformedPoint) -> np.ndarray:
    """Non-negative duals minimizing the stationarity and complementarity residuals.

    At large t the binding rows sit within rounding distance of zero and
    1 / (-t f_i) carries the relative error of f_i.
    """
    rows = all_constraints(s, point, with_hessian=False)
    M = point.size
    gradients = np.column_stack([row.gradient for row in rows])
    values = np.array([row.value for row in rows])
    system = np.vstack([gradients, np.diag(values)])
    target = np.zeros(2 * M + len(rows))
    target[:M] = -1.0
    duals, _ = scipy.optimize.nnls(system, target)
    return duals


def kkt_residual(s: Scenario, point: TransformedPoint, duals: np.ndarray) -> float:
    """max of stationarity (inf-norm), complementary slackness and primal infeasibility"""
    rows = all_constraints(s, point, with_hessian=False)
    duals = np.asarray(duals, dtype=float)
    M = point.size
    stationarity = np.zeros(2 * M)
    stationarity[:M] = 1.0
    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        stationarity += duals[i] * row.gradient
        values[i] = row.value
    return max(
        float(np.max(np.abs(stationarity))),
        float(np.max(np.abs(duals * values))),
        float(max(np.max(values), 0.0)),
    )


class _Barrier:
    """phi_t and its derivatives on packed points"""

    def __init__(self, s: Scenario):
        self.s = s
        self.M = s.num_users

    def point(self, x: np.ndarray) -> TransformedPoint:
        return TransformedPoint.from_vector(x)

    def objective(self, x: np.ndarray) -> float:
        return float(np.sum(x[:self.M]))

    def values(self, x: np.ndarray) -> Optional[np.ndarray]:
        """Constraint values, or None outside the barrier domain"""
        if np.any(x[:self.M] < Y_FLOOR) or not np.all(np.isfinite(x)):
            return None
        try:
            values = constraint_values(self.s, self.point(x))
        except (DomainError, FloatingPointError, OverflowError):
            return None
        if not np.all(values < 0.0):
            return None
        return values

    def newton_system(self, x: np.ndarray, t: float):
        rows = all_constraints(self.s, self.point(x))
        grad = np.zeros(2 * self.M)
        grad[:self.M] = t
        hess = np.zeros((2 * self.M, 2 * self.M))
        for row in rows:
            inv = 1.0 / -row.value
            grad += inv * row.gradient
            hess += inv * inv * np.outer(row.gradient, row.gradient) + inv * row.hessian
        return grad, 0.5 * (hess + hess.T)

    def decrease(self, x: np.ndarray, f_x: np.ndarray, dx: np.ndarray, step: float, t: float):
        """phi_t(x + step dx) - phi_t(x), or None if the trial leaves the domain.

        Formed from ratios of constraint values so the difference keeps its
        precision when t * sum(y) is large.
        """
        trial = x + step * dx
        f_new = self.values(trial)
        if f_new is None:
            return None
        moved = trial[:self.M] - x[:self.M]
        return t * float(np.sum(moved)) - float(np.sum(np.log(f_new / f_x)))


def _lstsq(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.lstsq(matrix, rhs, check_finite=False)[0]
    except (np.linalg.LinAlgError, ValueError):
        # counted as a non-descent direction by the caller
        return np.full(rhs.size, np.nan)


def _factorize(hess: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Solver for the regularized Newton system, Cholesky first"""
    n = hess.shape[0]
    shift = REGULARIZATION * (1.0 + np.trace(hess) / n)
    regularized = hess + shift * np.eye(n)
    try:
        factor = scipy.linalg.cho_factor(regularized, check_finite=False)
        return lambda rhs: scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        return lambda rhs: _lstsq(regularized, rhs)


def _newton_direction(grad: np.ndarray, hess: np.ndarray, num_users: int) -> np.ndarray:
    """Newton step for phi_t with sum(dy) <= 0.

    If the plain step raises sum(y), sum(dy) = 0 is imposed as an equality
    in the Newton system instead.
    """
    solve_with = _factorize(hess)
    dx = solve_with(-grad)
    rise = float(np.sum(dx[:num_users]))
    if rise > 0.0:
        ones = np.zeros(grad.size)
        ones[:num_users] = 1.0
        w = solve_with(ones)
        curvature = float(np.sum(w[:num_users]))
        if not curvature > 0.0:
            return np.full(grad.size, np.nan)
        dx = dx - (rise / curvature) * w
    return dx


def _steepest_descent(grad: np.ndarray, num_users: int) -> np.ndarray:
    direction = -grad
    rise = float(np.sum(direction[:num_users]))
    if rise > 0.0:
        direction[:num_users] -= rise / num_users
    return direction


def _line_search(barrier: _Barrier, x, f_x, dx, slope, t, cfg: SolverConfig) -> Optional[float]:
    step = 1.0
    while step >= MIN_STEP:
        delta = barrier.decrease(x, f_x, dx, step, t)
        if delta is not None and delta <= cfg.line_search_alpha * step * slope:
            return step
        step *= cfg.line_search_beta
    return None


def _center(barrier: _Barrier, x: np.ndarray, t: float, cfg: SolverConfig, newton_tol: float):
    """Damped Newton on phi_t.

    Returns (x, decrement^2, steps, failure, objectives) where failure is
    None, "stalled" (no acceptable step), "non_descent" or "exhausted" and
    objectives lists sum(y) at the start and after every accepted step.

    Once the squared decrement is below PURE_NEWTON_DECREMENT the full step
    is taken without a line search; near the center at large t the Armijo
    test would only compare rounding noise in the barrier terms. Centering
    stops at the rounding floor after ROUNDING_FLOOR_STEPS steps in a row
    fail to halve the smallest squared decrement seen.
    """
    M = barrier.M
    decrement_sq = math.inf
    best_decrement_sq = math.inf
    floor_steps = 0
    non_descent = 0
    objectives = [barrier.objective(x)]
    for step_count in range(cfg.max_newton):
        f_x = barrier.values(x)
        grad, hess = barrier.newton_system(x, t)
        dx = _newton_direction(grad, hess, M)
        slope = float(grad @ dx)
        if not np.all(np.isfinite(dx)) or slope > newton_tol:
            non_descent += 1
            if non_descent >= MAX_NON_DESCENT:
                return x, decrement_sq, step_count, "non_descent", objectives
            dx = _steepest_descent(grad, M)
            slope = float(grad @ dx)
            if not slope < 0.0:
                return x, decrement_sq, step_count, "stalled", objectives
        else:
            non_descent = 0
            decrement_sq = max(-slope, 0.0)
            if decrement_sq / 2.0 <= newton_tol:
                return x, decrement_sq, step_count, None, objectives

        pure_phase = not non_descent and decrement_sq <= PURE_NEWTON_DECREMENT
        if pure_phase:
            if decrement_sq <= 0.5 * best_decrement_sq:
                best_decrement_sq = decrement_sq
                floor_steps = 0
            else:
                floor_steps += 1
                if floor_steps >= ROUNDING_FLOOR_STEPS:
                    return x, decrement_sq, step_count, None, objectives

        if pure_phase and barrier.values(x + dx) is not None:
            step = 1.0
        else:
            step = _line_search(barrier, x, f_x, dx, slope, t, cfg)
            if step is None:
                if pure_phase:
                    return x, decrement_sq, step_count, None, objectives
                return x, decrement_sq, step_count, "stalled", objectives
        x = x + step * dx
        objectives.append(barrier.objective(x))
    return x, decrement_sq, cfg.max_newton, "exhausted", objectives


def _result_from_point(s: Scenario, point: TransformedPoint, t: float, status: SolverStatus,
                       outer: int, newton: int, stages: List[StageRecord], message: str = "") -> SolveResult:
    try:
        sorted_alloc = from_transformed(point, p_max=s.p_max_mw)
    except SolverDivergenceError as e:
        return SolveResult(status=SolverStatus.NUMERICAL_FAILURE, outer_iterations=outer,
                           newton_iterations=newton, trace=IterationTrace(stages=tuple(stages)),
                           message=str(e))
    report = rate_report(s, sorted_alloc)
    rates = np.asarray(report.rates)
    with np.errstate(divide="ignore"):
        gaps = np.abs(point.y - 1.0 / rates)
    duals = barrier_duals(s, point, t)
    residual = kkt_residual(s, point, duals)
    if residual > KKT_TOL:
        fitted = fitted_duals(s, point)
        fitted_residual = kkt_residual(s, point, fitted)
        logger.debug(f"barrier duals kkt={residual:.3e}, fitted duals kkt={fitted_residual:.3e}")
        if fitted_residual < residual:
            duals, residual = fitted, fitted_residual

    if status is SolverStatus.OPTIMAL:
        binding_ok = bool(np.all(gaps <= BINDING_TOL * (1.0 + np.abs(point.y))))
        if not (residual <= KKT_TOL and binding_ok):
            status = SolverStatus.NUMERICAL_FAILURE
            message = f"certificates failed: kkt_residual={residual:.3e}, max binding gap={float(np.max(gaps)):.3e}"

    return SolveResult(
        status=status,
        allocation=PowerAllocation(powers=tuple(s.to_original(sorted_alloc.powers).tolist())),
        sorted_allocation=sorted_alloc,
        objective=report.harmonic_objective,
        transformed_objective=float(np.sum(point.y)),
        kkt_residual=residual,
        rate_binding_gaps=tuple(s.to_original(gaps).tolist()),
        duals=tuple(duals.tolist()),
        outer_iterations=outer,
        newton_iterations=newton,
        trace=IterationTrace(stages=tuple(stages)),
        message=message,
    )


def solve(s: Scenario, cfg: Optional[SolverConfig] = None) -> SolveResult:
    cfg = cfg or SolverConfig()
    try:
        start = initial_point(s, cfg)
    except DomainError as e:
        logger.info(f"Rejecting scenario: {e}")
        return SolveResult(status=SolverStatus.INFEASIBLE_INPUT, message=str(e))

    barrier = _Barrier(s)
    n_rows = s.num_users + 2
    x = start.as_vector()
    t = initial_barrier_parameter(s, start, cfg)
    stages: List[StageRecord] = []
    newton_total = 0
    stalls = 0
    exhausted = False
    status = SolverStatus.MAX_ITERATIONS
    message = f"duality gap target not reached after {cfg.max_outer} stages"

    for outer in range(1, cfg.max_outer + 1):
        final_stage = n_rows / t <= cfg.gap_tol
        newton_tol = cfg.newton_tol * (FINAL_POLISH if final_stage else 1.0)
        x, decrement_sq, steps, failure, objectives = _center(barrier, x, t, cfg, newton_tol)
        newton_total += steps
        # the polish stage may run out of budget at rounding level; certificates decide
        exhausted = exhausted or (failure == "exhausted" and not final_stage)
        stalls = stalls + 1 if failure == "stalled" else 0

        values = constraint_values(s, barrier.point(x))
        record = StageRecord(
            t=t,
            transformed_objective=barrier.objective(x),
            max_constraint=float(np.max(values)),
            newton_decrement=math.sqrt(decrement_sq) if math.isfinite(decrement_sq) else math.inf,
            newton_steps=steps,
            step_objectives=tuple(objectives),
        )
        stages.append(record)
        logger.debug(
            f"stage {outer}: t={t:.3e} sum(y)={record.transformed_objective:.12g} "
            f"decrement={record.newton_decrement:.3e} steps={steps}"
        )

        if failure == "non_descent":
            status = SolverStatus.NUMERICAL_FAILURE
            message = f"{MAX_NON_DESCENT} consecutive non-descent Newton directions"
            break
        if stalls >= MAX_CONSECUTIVE_STALLS:
            status = SolverStatus.NUMERICAL_FAILURE
            message = f"line search stalled in {stalls} consecutive stages"
            break
        if final_stage:
            if exhausted:
                message = "Newton budget exhausted in at least one stage"
            else:
                status = SolverStatus.OPTIMAL
                message = ""
            break
        if outer < cfg.max_outer:
            t *= cfg.barrier_mu

    result = _result_from_point(s, barrier.point(x), t, status, outer, newton_total, stages, message)
    logger.info(
        f"Solved {s.num_users}-user scenario: status={result.status.value} "
        f"objective={result.objective:.10g} outer={result.outer_iterations} "
        f"newton={result.newton_iterations} kkt={result.kkt_residual:.2e}"
    )
    return result
