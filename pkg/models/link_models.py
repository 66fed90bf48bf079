"""
System-level quantities shared by the surface, full-duplex and half-duplex links.
"""

import math
from typing import Optional

import numpy as np

from models.system_config import Scheme
from optimization.linalg import hermitize, logdet_pd, whiten
from utils.exceptions import ConfigError, ShapeMismatch, SingularNoise, SingularRecovery

DUPLEX_FACTORS = (1.0, 0.5)
RECOVERY_COND_LIMIT = 1e12


def _require(condition: bool, message: str):
    if not condition:
        raise ShapeMismatch(message)


def _check_cascade(H_d: np.ndarray, H_1: np.ndarray, H_2: np.ndarray, n_el: int):
    N, M = H_d.shape
    _require(H_1.shape == (n_el, M), f"H_1 shape {H_1.shape} does not match ({n_el}, {M})")
    _require(H_2.shape == (N, n_el), f"H_2 shape {H_2.shape} does not match ({N}, {n_el})")


def effective_channel_ris(H_d: np.ndarray, H_1: np.ndarray, H_2: np.ndarray, Phi: np.ndarray) -> np.ndarray:
    """H_d + H_2 diag(Phi) H_1"""
    H_d, H_1, H_2 = np.atleast_2d(H_d, H_1, H_2)
    Phi = np.atleast_1d(np.asarray(Phi))
    _require(Phi.ndim == 1, "Phi must be the vector of reflection coefficients")
    _check_cascade(H_d, H_1, H_2, Phi.shape[0])
    return H_d + (H_2 * Phi[np.newaxis, :]) @ H_1


def effective_channel_relay(H_d: np.ndarray, H_1: np.ndarray, H_2: np.ndarray, F: np.ndarray) -> np.ndarray:
    """H_d + H_2 F H_1"""
    H_d, H_1, H_2, F = np.atleast_2d(H_d, H_1, H_2, F)
    _require(F.shape[0] == F.shape[1], f"F must be square, got {F.shape}")
    _check_cascade(H_d, H_1, H_2, F.shape[0])
    return H_d + H_2 @ F @ H_1


def noise_cov_relay(H_2: np.ndarray, F: np.ndarray, sigma2_R: float, sigma2_D: float) -> np.ndarray:
    """Destination noise after amplify-and-forward: sigma2_R H_2 F F^H H_2^H + sigma2_D I"""
    H_2, F = np.atleast_2d(H_2, F)
    _require(H_2.shape[1] == F.shape[0], f"H_2 {H_2.shape} and F {F.shape} do not chain")
    if not sigma2_D > 0:
        raise ConfigError(f"sigma2_D must be positive, got {sigma2_D}")
    forwarded = H_2 @ F
    N = H_2.shape[0]
    return hermitize(sigma2_R * forwarded @ forwarded.conj().T + sigma2_D * np.eye(N))


def spectral_efficiency(H: np.ndarray, V: np.ndarray, R_n: np.ndarray, duplex_factor: float = 1.0) -> float:
    """duplex_factor * log2 det(I + H V V^H H^H R_n^-1), in bits/s/Hz"""
    if duplex_factor not in DUPLEX_FACTORS:
        raise ConfigError(f"duplex_factor must be one of {DUPLEX_FACTORS}, got {duplex_factor}")
    H, V, R_n = np.atleast_2d(H, V, R_n)
    _require(H.shape[1] == V.shape[0], f"H {H.shape} and V {V.shape} do not chain")
    _require(R_n.shape == (H.shape[0], H.shape[0]), f"R_n shape {R_n.shape} does not match N={H.shape[0]}")

    # det(I_N + HVV^H H^H R^-1) = det(I_l + X^H X) with X = L^-1 H V
    X = whiten(R_n, H @ V, SingularNoise)
    gram = np.eye(X.shape[1]) + X.conj().T @ X
    nats = logdet_pd(gram, SingularNoise)
    return max(duplex_factor * nats / math.log(2.0), 0.0)


def relay_tx_power(F: np.ndarray, H_1: np.ndarray, V: np.ndarray, sigma2_R: float) -> float:
    """tr(F (H_1 V V^H H_1^H + sigma2_R I) F^H)"""
    F, H_1, V = np.atleast_2d(F, H_1, V)
    _require(F.shape[1] == H_1.shape[0], f"F {F.shape} and H_1 {H_1.shape} do not chain")
    _require(H_1.shape[1] == V.shape[0], f"H_1 {H_1.shape} and V {V.shape} do not chain")
    signal = F @ H_1 @ V
    return float(np.real(np.vdot(signal, signal)) + sigma2_R * np.real(np.vdot(F, F)))


def energy_efficiency(rate_bps: float, scheme: Scheme, P_s: float, P_r: Optional[float] = None) -> float:
    """Rate over radiated power, in bits/Joule"""
    if rate_bps < 0:
        raise ConfigError(f"rate must be non-negative, got {rate_bps}")
    if scheme in (Scheme.RIS, Scheme.DIRECT):
        total_power = P_s
    else:
        if P_r is None:
            raise ConfigError(f"{scheme.value} needs the relay power P_r")
        # half-duplex spends 2P_s and 2P_r over two slots
        total_power = P_s + P_r
    if not total_power > 0:
        raise ConfigError("total radiated power must be positive")
    return rate_bps / total_power


def recover_g(F: np.ndarray, H_s: np.ndarray) -> np.ndarray:
    """Relay matrix G = F (I + H_s F)^-1 realizing F under self-interference H_s"""
    F, H_s = np.atleast_2d(F, H_s)
    _require(F.shape == H_s.shape and F.shape[0] == F.shape[1],
             f"F {F.shape} and H_s {H_s.shape} must be equal square shapes")
    T = np.eye(F.shape[0]) + H_s @ F
    cond = np.linalg.cond(T) if np.all(np.isfinite(T)) else np.inf
    if not cond <= RECOVERY_COND_LIMIT:
        raise SingularRecovery("I + H_s F is numerically singular")
    # G T = F  <=>  T^T G^T = F^T
    return np.linalg.solve(T.T, F.T).T
