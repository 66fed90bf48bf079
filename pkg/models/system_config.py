import math
from dataclasses import dataclass, field, replace
from enum import Enum

from channel.geometry import Geometry, dbm_to_watts
from config import NOISE_FIGURE_DB, SYSTEM_DEFAULTS, THERMAL_NOISE_DBM_PER_HZ
from utils.exceptions import ConfigError


class Scheme(Enum):
    RIS = "RIS"
    FDR = "FDR"
    HDR = "HDR"
    DIRECT = "DIRECT"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        try:
            return cls(name.strip().upper())
        except ValueError:
            raise ConfigError(f"Unknown scheme: {name}")


def thermal_noise_watts(bandwidth_hz: float, noise_figure_db: float = NOISE_FIGURE_DB) -> float:
    """kTB noise plus noise figure, in Watts"""
    noise_dbm = THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return dbm_to_watts(noise_dbm)


_DEFAULT_NOISE = thermal_noise_watts(SYSTEM_DEFAULTS["bandwidth_hz"])


@dataclass
class SystemConfig:
    """Antenna counts, budgets, noise and placement for one link"""
    M: int = SYSTEM_DEFAULTS["M"]
    N: int = SYSTEM_DEFAULTS["N"]
    K: int = SYSTEM_DEFAULTS["K"]
    L: int = SYSTEM_DEFAULTS["L"]
    l: int = SYSTEM_DEFAULTS["l"]
    P_s: float = dbm_to_watts(SYSTEM_DEFAULTS["P_s_dbm"])
    P_r: float = dbm_to_watts(SYSTEM_DEFAULTS["P_r_dbm"])
    sigma2_D: float = _DEFAULT_NOISE
    sigma2_R: float = _DEFAULT_NOISE
    geometry: Geometry = field(default_factory=Geometry)
    carrier_ghz: float = SYSTEM_DEFAULTS["carrier_ghz"]
    bandwidth_hz: float = SYSTEM_DEFAULTS["bandwidth_hz"]
    bs_height_m: float = SYSTEM_DEFAULTS["bs_height_m"]
    ut_height_m: float = SYSTEM_DEFAULTS["ut_height_m"]

    def validate(self) -> "SystemConfig":
        for name in ("M", "N", "K", "L", "l"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.l > min(self.M, self.N):
            raise ConfigError(f"l={self.l} exceeds min(M, N)={min(self.M, self.N)}")
        for name in ("P_s", "P_r", "sigma2_D", "sigma2_R", "carrier_ghz", "bandwidth_hz"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        self.geometry.validate()
        return self

    def with_power_budgets(self, P_s: float, P_r: float) -> "SystemConfig":
        return replace(self, P_s=P_s, P_r=P_r)
