"""Downlink NOMA model for a single LED cell.

Users are kept in SIC order: gains sorted ascending, so user m decodes and
cancels the weaker users 0..m-1 and treats users m+1..M-1 as interference.
All per-user vectors handled here are in that sorted order unless a function
says otherwise; `Scenario.to_original` maps them back to input order.

Powers are in mW. A, B, delta and U_max share one amplitude unit consistent
with sqrt(mW).
"""
import logging
import math
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.exceptions import ScenarioError

logger = logging.getLogger(__name__)

# Fairness index of the alpha-fair utility; 2 is the harmonic-rate utility.
ALPHA = 2

FEASIBILITY_TOL = 1e-9


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    gains: Tuple[float, ...]
    order: Tuple[int, ...]
    noise_power_mw: float = Field(gt=0.0)
    p_max_mw: float = Field(gt=0.0)
    dc_bias: float = Field(gt=0.0)
    peak_intensity: float
    pam_coefficient: float = Field(gt=0.0)
    provenance: Optional[Dict[str, Any]] = None

    @model_validator(mode="after")
    def _check_invariants(self):
        if len(self.gains) < 1:
            raise ValueError("a scenario needs at least one user")
        if len(self.order) != len(self.gains) or sorted(self.order) != list(range(len(self.gains))):
            raise ValueError("order must be a permutation of the user indices")
        if any(g <= 0.0 or not math.isfinite(g) for g in self.gains):
            raise ValueError("gains must be finite and strictly positive")
        if any(a > b for a, b in zip(self.gains, self.gains[1:])):
            raise ValueError("gains must be sorted ascending")
        if self.peak_intensity <= self.dc_bias:
            raise ValueError("peak_intensity must exceed dc_bias")
        return self

    @property
    def num_users(self) -> int:
        return len(self.gains)

    @property
    def u_max(self) -> float:
        return min(self.dc_bias / self.pam_coefficient,
                   (self.peak_intensity - self.dc_bias) / self.pam_coefficient)

    @property
    def gain_array(self) -> np.ndarray:
        return np.asarray(self.gains, dtype=float)

    def with_p_max(self, p_max_mw: float) -> "Scenario":
        if p_max_mw <= 0:
            raise ScenarioError(f"must be positive, got {p_max_mw!r}", field="p_max_mw")
        return self.model_copy(update={"p_max_mw": float(p_max_mw)})

    def to_original(self, values: Sequence[float]) -> np.ndarray:
        """Reorder a SIC-ordered vector into input user order"""
        values = np.asarray(values, dtype=float)
        out = np.empty_like(values)
        out[list(self.order)] = values
        return out

    def to_sorted(self, values: Sequence[float]) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return values[list(self.order)]


class PowerAllocation(BaseModel):
    model_config = ConfigDict(frozen=True)

    powers: Tuple[float, ...]

    @model_validator(mode="after")
    def _non_negative(self):
        if any(not p >= 0.0 for p in self.powers):
            raise ValueError("powers must be non-negative")
        return self

    @classmethod
    def unchecked(cls, powers: Sequence[float]) -> "PowerAllocation":
        """Build without validation, for feasibility checks of arbitrary vectors"""
        return cls.model_construct(powers=tuple(float(p) for p in powers))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.powers, dtype=float)

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.array < np.finfo(float).tiny))


class RateReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    sinrs: Tuple[float, ...]
    rates: Tuple[float, ...]
    sum_rate: float
    harmonic_objective: float
    jain_fairness: float


class FeasibilityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    nonnegativity_slack: float
    power_slack: float
    amplitude_slack: float
    tol: float

    @property
    def feasible(self) -> bool:
        return min(self.nonnegativity_slack, self.power_slack, self.amplitude_slack) >= -self.tol

    @property
    def violated(self) -> Tuple[str, ...]:
        slacks = {
            "nonnegativity": self.nonnegativity_slack,
            "power": self.power_slack,
            "amplitude": self.amplitude_slack,
        }
        return tuple(name for name, slack in slacks.items() if slack < -self.tol)


def build_scenario(gains_unsorted: Sequence[float], noise_power: float, p_max: float,
                   dc_bias: float, peak_intensity: float, pam_coefficient: float,
                   provenance: Optional[Dict[str, Any]] = None) -> Scenario:
    """Sort users into SIC order and validate a problem instance.

    `noise_power` and `p_max` are in mW. Ties in gain keep input order.
    """
    gains = [float(g) for g in gains_unsorted]
    if not gains:
        raise ScenarioError("at least one user gain is required", field="gains")
    for i, g in enumerate(gains):
        if not math.isfinite(g) or g <= 0.0:
            raise ScenarioError(
                f"channel gain must be strictly positive (user outside LED coverage?), got {g!r}",
                field=f"gains[{i}]",
            )
    for name, value in (("noise_power_mw", noise_power), ("p_max_mw", p_max),
                        ("dc_bias", dc_bias), ("pam_coefficient", pam_coefficient)):
        if not math.isfinite(value) or value <= 0.0:
            raise ScenarioError(f"must be positive, got {value!r}", field=name)
    if not peak_intensity > dc_bias:
        raise ScenarioError(
            f"must exceed dc_bias ({dc_bias!r}), got {peak_intensity!r}", field="peak_intensity"
        )

    order = sorted(range(len(gains)), key=lambda i: (gains[i], i))
    return Scenario(
        gains=tuple(gains[i] for i in order),
        order=tuple(order),
        noise_power_mw=float(noise_power),
        p_max_mw=float(p_max),
        dc_bias=float(dc_bias),
        peak_intensity=float(peak_intensity),
        pam_coefficient=float(pam_coefficient),
        provenance=provenance,
    )


def _interference_tails(powers: np.ndarray) -> np.ndarray:
    """tail[m] = sum of powers of users m+1..M-1"""
    suffix = np.cumsum(powers[::-1])[::-1]
    return np.append(suffix[1:], 0.0)


def sinrs(s: Scenario, p: PowerAllocation) -> np.ndarray:
    g = s.gain_array
    powers = p.array
    return g * powers / (s.noise_power_mw + g * _interference_tails(powers))


def sinr(s: Scenario, p: PowerAllocation, m: int) -> float:
    if not 0 <= m < s.num_users:
        raise IndexError(f"user index {m} out of range for {s.num_users} users")
    g = s.gains[m]
    interference = float(sum(p.powers[m + 1:]))
    return g * p.powers[m] / (s.noise_power_mw + g * interference)


def harmonic_objective(rates: Sequence[float]) -> float:
    """Sum of inverse rates; +inf when any rate is zero"""
    rates = np.asarray(rates, dtype=float)
    if np.any(rates <= 0.0):
        return math.inf
    return float(np.sum(1.0 / rates))


def jain_fairness(rates: Sequence[float]) -> float:
    rates = np.asarray(rates, dtype=float)
    denom = rates.size * float(np.sum(rates ** 2))
    if denom == 0.0:
        return 0.0
    return float(np.sum(rates)) ** 2 / denom


def rate_report(s: Scenario, p: PowerAllocation) -> RateReport:
    gamma = sinrs(s, p)
    rates = np.log1p(gamma)
    return RateReport(
        sinrs=tuple(gamma.tolist()),
        rates=tuple(rates.tolist()),
        sum_rate=float(np.sum(rates)),
        harmonic_objective=harmonic_objective(rates),
        jain_fairness=jain_fairness(rates),
    )


def check_feasibility(s: Scenario, p: PowerAllocation, tol: float = FEASIBILITY_TOL) -> FeasibilityReport:
    powers = p.array
    return FeasibilityReport(
        nonnegativity_slack=float(np.min(powers)),
        power_slack=s.p_max_mw - float(np.sum(powers)),
        amplitude_slack=s.u_max - float(np.sum(np.sqrt(np.clip(powers, 0.0, None)))),
        tol=tol,
    )


def equal_power_allocation(s: Scenario, margin: float = 0.0) -> PowerAllocation:
    """Equal split that keeps both the power and the amplitude budget"""
    if not 0.0 <= margin < 1.0:
        raise ScenarioError(f"margin must lie in [0, 1), got {margin!r}", field="margin")
    M = s.num_users
    per_user = (1.0 - margin) * min(s.p_max_mw / M, (s.u_max / M) ** 2)
    return PowerAllocation(powers=(per_user,) * M)
