from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import FEASIBILITY_SLACK
from models.link_models import relay_tx_power


@dataclass
class RisSolution:
    """Transmit beamformer, reflection vector and the matching receiver/weight"""
    V: np.ndarray
    Phi: np.ndarray
    U: np.ndarray
    W: np.ndarray

    def max_violation(self, P_s: float) -> float:
        power = float(np.real(np.vdot(self.V, self.V)))
        magnitude = float(np.max(np.abs(self.Phi), initial=0.0))
        return max(power - P_s, magnitude - 1.0, 0.0)

    def is_feasible(self, P_s: float) -> bool:
        return self.max_violation(P_s) <= FEASIBILITY_SLACK


@dataclass
class RelaySolution:
    """
    Transmit beamformer, relay matrix and the matching receiver/weight.

    F is the effective relay matrix the optimizer works with (G for the
    half-duplex link). G holds the realizable full-duplex matrix when the
    drop carried a self-interference channel.
    """
    V: np.ndarray
    F: np.ndarray
    U: np.ndarray
    W: np.ndarray
    G: Optional[np.ndarray] = None

    def max_violation(self, H_1: np.ndarray, sigma2_R: float, P_s: float, P_r: float) -> float:
        power = float(np.real(np.vdot(self.V, self.V)))
        relay_power = relay_tx_power(self.F, H_1, self.V, sigma2_R)
        return max(power - P_s, relay_power - P_r, 0.0)

    def is_feasible(self, H_1: np.ndarray, sigma2_R: float, P_s: float, P_r: float) -> bool:
        return self.max_violation(H_1, sigma2_R, P_s, P_r) <= FEASIBILITY_SLACK
