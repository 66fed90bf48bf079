"""
Node placement and 3GPP UMi path loss.

Source sits at (0, 0), destination at (d_sd, 0) and the assisting node
(surface or relay) at (d_1, d_r).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from config import SPEED_OF_LIGHT, SYSTEM_DEFAULTS
from utils.exceptions import ConfigError, DistanceOutOfRange

MIN_DISTANCE_M = 10.0


class LinkCondition(Enum):
    LOS = "LOS"
    NLOS = "NLOS"


@dataclass
class Geometry:
    """Planar placement of the three nodes, in meters"""
    d_sd: float = SYSTEM_DEFAULTS["d_sd"]
    d_1: float = SYSTEM_DEFAULTS["d_1"]
    d_r: float = SYSTEM_DEFAULTS["d_r"]

    def validate(self):
        if not self.d_sd > 0:
            raise ConfigError(f"d_sd must be positive, got {self.d_sd}")
        for name in ("d_sd", "d_1", "d_r"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")


@dataclass
class PathLossParams:
    """Inputs of the UMi path-loss formulas"""
    carrier_ghz: float = SYSTEM_DEFAULTS["carrier_ghz"]
    condition: LinkCondition = LinkCondition.LOS
    bs_height_m: float = SYSTEM_DEFAULTS["bs_height_m"]
    ut_height_m: float = SYSTEM_DEFAULTS["ut_height_m"]

    def validate(self):
        if not self.carrier_ghz > 0:
            raise ConfigError(f"carrier_ghz must be positive, got {self.carrier_ghz}")
        # effective heights are h - 1 m and must stay positive
        if not self.bs_height_m > 1.0 or not self.ut_height_m > 1.0:
            raise ConfigError("antenna heights must exceed 1 m")

    @property
    def breakpoint_m(self) -> float:
        """LOS breakpoint distance 4 h'_BS h'_UT f_c / c"""
        h_bs = self.bs_height_m - 1.0
        h_ut = self.ut_height_m - 1.0
        return 4.0 * h_bs * h_ut * self.carrier_ghz * 1e9 / SPEED_OF_LIGHT


def hop_distances(g: Geometry) -> Tuple[float, float, float]:
    """Return (d_sr, d_rd, d_sd) for the given placement"""
    g.validate()
    d_sr = math.hypot(g.d_1, g.d_r)
    d_rd = math.hypot(g.d_sd - g.d_1, g.d_r)
    return d_sr, d_rd, g.d_sd


def pathloss_db(d: float, p: PathLossParams) -> float:
    """UMi path loss in dB; only the first LOS slope is modeled"""
    p.validate()
    if d < MIN_DISTANCE_M:
        raise DistanceOutOfRange(f"UMi path loss is defined for d >= {MIN_DISTANCE_M} m, got {d:.3f} m")

    log_f = math.log10(p.carrier_ghz)
    if p.condition == LinkCondition.LOS:
        if d >= p.breakpoint_m:
            raise DistanceOutOfRange(
                f"LOS distance {d:.3f} m is at or beyond the breakpoint {p.breakpoint_m:.3f} m"
            )
        return 22.0 * math.log10(d) + 28.0 + 20.0 * log_f
    return 36.7 * math.log10(d) + 22.7 + 26.0 * log_f


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)
