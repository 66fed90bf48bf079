"""Water-filling capacity of a point-to-point MIMO link."""

import math
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from utils.exceptions import ConfigError


def waterfill(gains: np.ndarray, P: float) -> Tuple[np.ndarray, float]:
    """
    Optimum powers over parallel channels with power gains `gains`.

    Drops the weakest channel while the level that just reaches it needs
    more than P, then spreads the rest evenly. Returns (powers, water level).
    """
    gains = np.asarray(gains, dtype=float)
    powers = np.zeros_like(gains)
    order = np.argsort(gains)[::-1]
    active = int(np.count_nonzero(gains[order] > 0))
    if active == 0 or P <= 0:
        return powers, 0.0

    inverse = 1.0 / gains[order[:active]]
    while active > 1 and np.sum(inverse[active - 1] - inverse[:active]) >= P:
        active -= 1
    level = (P + np.sum(inverse[:active])) / active
    powers[order[:active]] = level - inverse[:active]
    return np.clip(powers, 0.0, None), level


def waterfilling_capacity(H: np.ndarray, sigma2: float, P: float, streams: Optional[int] = None) -> float:
    """
    max log2 det(I + H Q H^H / sigma2) over Q >= 0 with tr Q <= P, in bits/s/Hz.

    `streams` keeps only the strongest eigenmodes, matching a beamformer
    with that many columns.
    """
    if not sigma2 > 0:
        raise ConfigError(f"noise power must be positive, got {sigma2}")
    if P < 0:
        raise ConfigError(f"power must be non-negative, got {P}")
    singular = linalg.svdvals(np.atleast_2d(H))
    if streams is not None:
        singular = singular[:streams]
    gains = singular ** 2 / sigma2
    powers, _ = waterfill(gains, P)
    return float(np.sum(np.log1p(gains * powers)) / math.log(2.0))
