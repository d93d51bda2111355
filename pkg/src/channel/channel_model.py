"""Line-of-sight Lambertian DC gain between a ceiling LED and a photodiode.

The gain follows the generalized Lambertian emission model:

    h = (A / d^2) * R0(phi) * Ts * g(psi) * cos(psi)   for psi <= FOV
    h = 0                                              otherwise

with R0(phi) = (m + 1) / (2 pi) * cos^m(phi) and g(psi) = n^2 / sin^2(FOV).
"""
import math
from functools import cached_property
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config.defaults import LED, OPTICS
from src.exceptions import DomainError, GeometryError

Vector3 = Tuple[float, float, float]

UNIT_NORM_TOL = 1e-12


def _check_unit(normal: Vector3) -> Vector3:
    norm = math.sqrt(sum(c * c for c in normal))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"normal must have unit norm, got {norm!r}")
    return normal


def lambertian_order(semiangle_half_power: float) -> float:
    """Lambertian order m = -ln 2 / ln(cos phi_1/2)"""
    if not 0.0 < semiangle_half_power < math.pi / 2:
        raise DomainError(
            f"semiangle_half_power must lie in (0, pi/2), got {semiangle_half_power!r}"
        )
    return -math.log(2.0) / math.log(math.cos(semiangle_half_power))


def concentrator_gain(fov: float, refractive_index: float) -> float:
    if not 0.0 < fov <= math.pi / 2:
        raise DomainError(f"fov must lie in (0, pi/2], got {fov!r}")
    if refractive_index < 1.0:
        raise DomainError(f"refractive_index must be >= 1, got {refractive_index!r}")
    return refractive_index ** 2 / math.sin(fov) ** 2


def radiant_intensity(order: float, irradiance_angle: float) -> float:
    if order <= 0:
        raise DomainError(f"Lambertian order must be positive, got {order!r}")
    if not 0.0 <= irradiance_angle <= math.pi / 2:
        raise DomainError(f"irradiance_angle must lie in [0, pi/2], got {irradiance_angle!r}")
    return _radiant_intensity_cos(order, math.cos(irradiance_angle))


def _radiant_intensity_cos(order: float, cos_irradiance: float) -> float:
    # cos(pi/2) is ~6e-17 in floating point, not zero
    if cos_irradiance < 1e-15:
        return 0.0
    return (order + 1.0) / (2.0 * math.pi) * cos_irradiance ** order


class LedConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    position: Vector3
    normal: Vector3 = (0.0, 0.0, -1.0)
    semiangle_half_power: float = Field(default=LED["semiangle_half_power"], gt=0.0, lt=math.pi / 2)

    @field_validator("normal")
    @classmethod
    def _unit_normal(cls, v: Vector3) -> Vector3:
        return _check_unit(v)

    @cached_property
    def lambertian_order(self) -> float:
        return lambertian_order(self.semiangle_half_power)


class OpticalFrontEnd(BaseModel):
    model_config = ConfigDict(frozen=True)

    detector_area: float = Field(default=OPTICS["detector_area"], gt=0.0)
    filter_gain: float = Field(default=OPTICS["filter_gain"], gt=0.0)
    refractive_index: float = Field(default=OPTICS["refractive_index"], ge=1.0)
    fov: float = Field(default=OPTICS["fov"], gt=0.0, le=math.pi / 2)

    @property
    def concentrator_gain(self) -> float:
        return concentrator_gain(self.fov, self.refractive_index)


class ReceiverPose(BaseModel):
    model_config = ConfigDict(frozen=True)

    position: Vector3
    normal: Vector3 = (0.0, 0.0, 1.0)

    @field_validator("normal")
    @classmethod
    def _unit_normal(cls, v: Vector3) -> Vector3:
        return _check_unit(v)


class ChannelGain(BaseModel):
    model_config = ConfigDict(frozen=True)

    h: float = Field(ge=0.0)
    g: float = Field(ge=0.0)

    @model_validator(mode="after")
    def _power_gain_is_square(self):
        if self.g != self.h * self.h:
            raise ValueError("power gain g must equal h**2")
        return self

    @classmethod
    def from_dc_gain(cls, h: float) -> "ChannelGain":
        return cls(h=h, g=h * h)


def channel_dc_gain(led: LedConfig, rx: ReceiverPose, fe: OpticalFrontEnd) -> ChannelGain:
    led_pos = np.asarray(led.position, dtype=float)
    rx_pos = np.asarray(rx.position, dtype=float)
    ray = rx_pos - led_pos
    d = float(np.linalg.norm(ray))
    if d == 0.0:
        raise GeometryError("receiver position coincides with the LED position")

    cos_irradiance = float(np.dot(led.normal, ray)) / d
    cos_incidence = float(np.dot(rx.normal, -ray)) / d
    incidence = math.acos(min(1.0, max(-1.0, cos_incidence)))

    if cos_irradiance <= 0.0 or incidence > fe.fov:
        return ChannelGain.from_dc_gain(0.0)

    h = (
        fe.detector_area / d ** 2
        * _radiant_intensity_cos(led.lambertian_order, cos_irradiance)
        * fe.filter_gain
        * fe.concentrator_gain
        * cos_incidence
    )
    return ChannelGain.from_dc_gain(h)
