"""Seeded user drops in a single-LED room.

Users are placed uniformly on the receiver plane; any user whose incidence
angle falls outside the receiver FOV is resampled so every served user has a
line-of-sight gain.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.channel.channel_model import LedConfig, OpticalFrontEnd, ReceiverPose, channel_dc_gain
from src.config.defaults import LED, MAX_RESAMPLES, ROOM, SIGNAL
from src.exceptions import GenerationError
from src.noma.noma_model import Scenario, build_scenario, dbm_to_mw

logger = logging.getLogger(__name__)

Vector3 = Tuple[float, float, float]


class RoomConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dimensions: Vector3 = ROOM["dimensions"]
    led_position: Vector3 = ROOM["led_position"]
    led_normal: Vector3 = ROOM["led_normal"]
    receiver_plane_z: float = ROOM["receiver_plane_z"]
    receiver_normal: Vector3 = ROOM["receiver_normal"]
    num_users: int = Field(default=ROOM["num_users"], ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def _led_inside_room(self):
        if any(d <= 0 for d in self.dimensions):
            raise ValueError("room dimensions must be positive")
        if any(not 0.0 <= c <= d for c, d in zip(self.led_position, self.dimensions)):
            raise ValueError("LED must be inside the room")
        if not 0.0 <= self.receiver_plane_z < self.led_position[2]:
            raise ValueError("receiver plane must lie below the LED")
        return self


class SimulationDefaults(BaseModel):
    """Optics and signal constants applied to every generated scenario"""
    model_config = ConfigDict(frozen=True)

    optics: OpticalFrontEnd = OpticalFrontEnd()
    semiangle_half_power: float = Field(default=LED["semiangle_half_power"], gt=0.0, lt=math.pi / 2)
    noise_power_dbm: float = SIGNAL["noise_power_dbm"]
    p_max_mw: float = Field(default=SIGNAL["p_max_mw"], gt=0.0)
    dc_bias: float = Field(default=SIGNAL["dc_bias"], gt=0.0)
    peak_intensity: float = SIGNAL["peak_intensity"]
    pam_coefficient: Optional[float] = Field(default=None, gt=0.0)


def _led(room: RoomConfig, defaults: SimulationDefaults) -> LedConfig:
    return LedConfig(
        position=room.led_position,
        normal=room.led_normal,
        semiangle_half_power=defaults.semiangle_half_power,
    )


def sample_users(room: RoomConfig, defaults: SimulationDefaults) -> Tuple[List[Vector3], List[float]]:
    """Positions and power gains of the users, in drop order"""
    rng = np.random.default_rng(room.seed)
    led = _led(room, defaults)
    width, depth, _ = room.dimensions
    positions: List[Vector3] = []
    gains: List[float] = []
    resampled = 0
    for user in range(room.num_users):
        for attempt in range(MAX_RESAMPLES):
            x, y = rng.uniform(0.0, width), rng.uniform(0.0, depth)
            position = (float(x), float(y), room.receiver_plane_z)
            rx = ReceiverPose(position=position, normal=room.receiver_normal)
            gain = channel_dc_gain(led, rx, defaults.optics).g
            if gain > 0.0:
                positions.append(position)
                gains.append(gain)
                resampled += attempt
                break
        else:
            raise GenerationError(
                f"user {user} found no position inside the receiver FOV after "
                f"{MAX_RESAMPLES} draws; widen the FOV or shrink the room"
            )
    if resampled:
        logger.info(f"Resampled {resampled} user positions outside the receiver FOV")
    return positions, gains


def gen_scenario(room: Optional[RoomConfig] = None, defaults: Optional[SimulationDefaults] = None) -> Scenario:
    room = room or RoomConfig()
    defaults = defaults or SimulationDefaults()
    pam = defaults.pam_coefficient
    if pam is None:
        pam = SIGNAL["pam_coefficient"]
        logger.warning(f"PAM coefficient not given; using {pam}")

    positions, gains = sample_users(room, defaults)
    provenance = {
        "seed": room.seed,
        "room": room.model_dump(mode="json", exclude={"seed"}),
        "optics": defaults.optics.model_dump(mode="json"),
        "semiangle_half_power": defaults.semiangle_half_power,
        "noise_power_dbm": defaults.noise_power_dbm,
        "users": [list(p) for p in positions],
    }
    return build_scenario(
        gains,
        noise_power=dbm_to_mw(defaults.noise_power_dbm),
        p_max=defaults.p_max_mw,
        dc_bias=defaults.dc_bias,
        peak_intensity=defaults.peak_intensity,
        pam_coefficient=pam,
        provenance=provenance,
    )
