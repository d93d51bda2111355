"""Convex reformulation of the harmonic-rate power control problem.

With rho_m = log p_m and auxiliary y_m >= 1/R_m, the problem becomes

    min  sum_m y_m
    s.t. f_m(y, rho) = log(n0/g_m e^{-rho_m} + sum_{i>m} e^{rho_i - rho_m})
                       + log(e^{1/y_m} - 1) <= 0            m = 0..M-1
         sum_m e^{rho_m} - P_max <= 0
         sum_m e^{rho_m / 2} - U_max <= 0

Points are packed as x = [y_0..y_{M-1}, rho_0..rho_{M-1}]. Users are in SIC
(ascending gain) order.
"""
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.exceptions import DomainError, SolverDivergenceError
from src.noma.noma_model import PowerAllocation, Scenario, rate_report

Y_FLOOR = 1e-12

# Back-transform cap is log(RHO_CAP_FACTOR * P_max).
RHO_CAP_FACTOR = 10.0


@dataclass(frozen=True)
class TransformedPoint:
    y: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if y.shape != rho.shape or y.ndim != 1:
            raise DomainError("y and rho must be vectors of equal length")
        if np.any(~(y > 0.0)):
            raise DomainError("auxiliary variables y must be strictly positive")
        if not np.all(np.isfinite(rho)):
            raise DomainError("rho must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "rho", rho)

    @property
    def size(self) -> int:
        return self.y.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.y, self.rho])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "TransformedPoint":
        M = x.size // 2
        return cls(y=x[:M].copy(), rho=x[M:].copy())


@dataclass(frozen=True)
class ConstraintEval:
    value: float
    gradient: np.ndarray
    hessian: Optional[np.ndarray] = None


def to_transformed(s: Scenario, p: PowerAllocation, slack: float = 0.0) -> TransformedPoint:
    """Map positive powers (SIC order) to (y, rho); y = (1 + slack) / R"""
    if slack < 0:
        raise DomainError(f"slack must be non-negative, got {slack!r}")
    powers = p.array
    if np.any(powers <= 0.0):
        raise DomainError("every power must be strictly positive to take its logarithm")
    rates = np.asarray(rate_report(s, p).rates)
    if np.any(rates <= 0.0):
        raise DomainError("every user needs a positive rate to bound 1/R")
    return TransformedPoint(y=(1.0 + slack) / rates, rho=np.log(powers))


def from_transformed(t: TransformedPoint, p_max: Optional[float] = None) -> PowerAllocation:
    """p = exp(rho); rho above log(10 P_max) means the iterate diverged"""
    if p_max is not None:
        cap = math.log(RHO_CAP_FACTOR * p_max)
        if np.any(t.rho > cap):
            raise SolverDivergenceError(
                f"rho exceeds cap {cap:.6g} (max rho {float(np.max(t.rho)):.6g})"
            )
    return PowerAllocation(powers=tuple(np.exp(t.rho).tolist()))


def _log_expm1_inv(y: float):
    """log(e^{1/y} - 1) with its first two derivatives in y"""
    u = 1.0 / y
    # q = 1 - e^{-u}
    q = -math.expm1(-u)
    if u < 1.0:
        value = math.log(math.expm1(u))
    else:
        value = u + math.log1p(-math.exp(-u))
    d1 = -1.0 / (y * y * q)
    d2 = 2.0 / (y ** 3 * q) - math.exp(-u) / (y ** 4 * q * q)
    return value, d1, d2


def _noise_log_ratio(s: Scenario, m: int) -> float:
    return math.log(s.noise_power_mw) - math.log(s.gains[m])


def rate_constraint(s: Scenario, t: TransformedPoint, m: int, with_hessian: bool = True) -> ConstraintEval:
    M = t.size
    if not 0 <= m < M:
        raise IndexError(f"user index {m} out of range for {M} users")
    y_m = float(t.y[m])
    if y_m < Y_FLOOR:
        raise DomainError(f"y[{m}] = {y_m!r} is below the floor {Y_FLOOR}")

    # f_m = -rho_m + logsumexp(c_m, rho_{m+1..})
    exponents = np.concatenate([[_noise_log_ratio(s, m)], t.rho[m + 1:]])
    shift = float(np.max(exponents))
    weights = np.exp(exponents - shift)
    total = float(np.sum(weights))
    lse = shift + math.log(total)
    weights /= total

    phi, dphi, d2phi = _log_expm1_inv(y_m)
    value = lse - float(t.rho[m]) + phi

    grad = np.zeros(2 * M)
    grad[m] = dphi
    grad[M + m] = -1.0
    tail = weights[1:]
    grad[M + m + 1:] = tail

    hess = None
    if with_hessian:
        hess = np.zeros((2 * M, 2 * M))
        hess[m, m] = d2phi
        block = np.diag(tail) - np.outer(tail, tail)
        hess[M + m + 1:, M + m + 1:] = block
    return ConstraintEval(value=value, gradient=grad, hessian=hess)


def power_constraint(s: Scenario, t: TransformedPoint, with_hessian: bool = True) -> ConstraintEval:
    M = t.size
    p = np.exp(t.rho)
    grad = np.zeros(2 * M)
    grad[M:] = p
    hess = None
    if with_hessian:
        hess = np.zeros((2 * M, 2 * M))
        hess[M:, M:] = np.diag(p)
    return ConstraintEval(value=float(np.sum(p)) - s.p_max_mw, gradient=grad, hessian=hess)


def amplitude_constraint(s: Scenario, t: TransformedPoint, with_hessian: bool = True) -> ConstraintEval:
    M = t.size
    root = np.exp(0.5 * t.rho)
    grad = np.zeros(2 * M)
    grad[M:] = 0.5 * root
    hess = None
    if with_hessian:
        hess = np.zeros((2 * M, 2 * M))
        hess[M:, M:] = np.diag(0.25 * root)
    return ConstraintEval(value=float(np.sum(root)) - s.u_max, gradient=grad, hessian=hess)


def all_constraints(s: Scenario, t: TransformedPoint, with_hessian: bool = True) -> List[ConstraintEval]:
    """Rate rows 0..M-1, then the power row, then the amplitude row"""
    rows = [rate_constraint(s, t, m, with_hessian) for m in range(t.size)]
    rows.append(power_constraint(s, t, with_hessian))
    rows.append(amplitude_constraint(s, t, with_hessian))
    return rows


def constraint_values(s: Scenario, t: TransformedPoint) -> np.ndarray:
    return np.array([row.value for row in all_constraints(s, t, with_hessian=False)])
