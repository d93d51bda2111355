"""Brute-force grid oracle for small user counts.

Each power axis is log-spaced over the half-open range
(p_floor, min(P_max, U_max^2)]: p_floor itself is never a grid point. Points
violating the power or amplitude budget are discarded, and the feasible
minimizer of the harmonic objective is returned with an empirical error
bound: the objective spread over the minimizer's feasible 3^M neighborhood.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.exceptions import GridError
from src.noma.noma_model import PowerAllocation, Scenario, check_feasibility

logger = logging.getLogger(__name__)

MAX_USERS = 4

DEFAULT_RESOLUTION = {1: 2000, 2: 2000, 3: 400, 4: 60}


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    resolution: Optional[int] = Field(default=None, ge=10)
    p_floor: float = Field(default=1e-6, gt=0.0)

    def resolution_for(self, num_users: int) -> int:
        return self.resolution or DEFAULT_RESOLUTION[num_users]


class OracleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    allocation: PowerAllocation
    objective: float
    error_bound: float
    grid_index: Tuple[int, ...]
    resolution: int
    feasible_points: int


def grid_axis(s: Scenario, resolution: int, p_floor: float) -> np.ndarray:
    """Log-spaced points p_floor * (cap/p_floor)^(k/resolution), k = 1..resolution.

    The axis is half-open and never contains p_floor. The grid for 2N points
    contains the grid for N points, and its last point is exactly the power cap.
    """
    upper = min(s.p_max_mw, s.u_max ** 2)
    if p_floor >= upper:
        raise GridError(f"p_floor {p_floor!r} is not below the power cap {upper!r}")
    fractions = np.arange(1, resolution + 1) / resolution
    axis = np.exp(math.log(p_floor) + (math.log(upper) - math.log(p_floor)) * fractions)
    axis = np.minimum(axis, upper)
    axis[-1] = upper
    return axis


def _objective_block(s: Scenario, powers: np.ndarray) -> np.ndarray:
    """Harmonic objective for rows of SIC-ordered powers; +inf where infeasible.

    Uses the same arithmetic as noma_model.check_feasibility so that every
    accepted point passes it exactly.
    """
    g = s.gain_array
    tails = np.cumsum(powers[:, ::-1], axis=1)[:, ::-1]
    tails = np.concatenate([tails[:, 1:], np.zeros((powers.shape[0], 1))], axis=1)
    rates = np.log1p(g * powers / (s.noise_power_mw + g * tails))
    with np.errstate(divide="ignore"):
        objective = np.sum(1.0 / rates, axis=1)
    feasible = (s.p_max_mw - np.sum(powers, axis=1) >= 0.0) & \
               (s.u_max - np.sum(np.sqrt(powers), axis=1) >= 0.0)
    objective[~feasible] = math.inf
    objective[rates.min(axis=1) <= 0.0] = math.inf
    return objective


def _chunk_minimum(s: Scenario, axis: np.ndarray, first: int):
    """Best point among grid points whose first coordinate index is `first`"""
    M = s.num_users
    n = axis.size
    rest = np.stack(np.meshgrid(*([axis] * (M - 1)), indexing="ij"), axis=-1).reshape(-1, M - 1) \
        if M > 1 else np.empty((1, 0))
    powers = np.concatenate([np.full((rest.shape[0], 1), axis[first]), rest], axis=1)
    objective = _objective_block(s, powers)
    best = int(np.argmin(objective))
    feasible = int(np.count_nonzero(np.isfinite(objective)))
    index = (first,)
    if M > 1:
        index += tuple(int(i) for i in np.unravel_index(best, (n,) * (M - 1)))
    return float(objective[best]), index, feasible


def _evaluate_indices(s: Scenario, axis: np.ndarray, index: Tuple[int, ...]) -> float:
    powers = axis[list(index)][None, :]
    return float(_objective_block(s, powers)[0])


def grid_search(s: Scenario, spec: Optional[GridSpec] = None, threads: int = 0) -> OracleResult:
    spec = spec or GridSpec()
    M = s.num_users
    if M > MAX_USERS:
        raise GridError(f"grid oracle supports at most {MAX_USERS} users, got {M}")
    resolution = spec.resolution_for(M)
    axis = grid_axis(s, resolution, spec.p_floor)

    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda i: _chunk_minimum(s, axis, i), range(resolution)))
    else:
        chunks = [_chunk_minimum(s, axis, i) for i in range(resolution)]

    # chunks are in first-index order, so min() keeps the lexicographically first tie
    objective, index, _ = min(chunks, key=lambda c: c[0])
    feasible_points = sum(c[2] for c in chunks)
    if not math.isfinite(objective):
        raise GridError("no feasible grid point; lower p_floor or raise the budgets")

    worst = objective
    for offset in itertools.product((-1, 0, 1), repeat=M):
        neighbor = tuple(i + o for i, o in zip(index, offset))
        if all(0 <= i < resolution for i in neighbor):
            value = _evaluate_indices(s, axis, neighbor)
            if math.isfinite(value):
                worst = max(worst, value)

    allocation = PowerAllocation(powers=tuple(axis[list(index)].tolist()))
    if not check_feasibility(s, allocation, tol=0.0).feasible:
        raise GridError("grid minimizer failed the feasibility check")
    logger.info(
        f"Grid oracle: M={M} resolution={resolution} feasible={feasible_points} "
        f"objective={objective:.10g} bound={worst - objective:.3e}"
    )
    return OracleResult(
        allocation=allocation,
        objective=objective,
        error_bound=worst - objective,
        grid_index=index,
        resolution=resolution,
        feasible_points=feasible_points,
    )
