"""
Weighted-MMSE building blocks.

For fixed transmitter and assisting-node variables, taking the MMSE
receiver and W = E^-1 makes tr(WE) - ln det W equal to
l - ln det(I + H V V^H H^H R_n^-1), which is what ties the weighted-MSE
problem to rate maximization.
"""

from dataclasses import dataclass

import numpy as np

from optimization.linalg import hermitian_inverse, hermitian_solve, hermitize, whiten
from utils.exceptions import ShapeMismatch, SingularMse, SingularNoise


@dataclass
class WmmseState:
    U: np.ndarray
    W: np.ndarray
    E: np.ndarray
    objective: float


def mmse_receiver(H: np.ndarray, V: np.ndarray, R_n: np.ndarray) -> np.ndarray:
    """(H V V^H H^H + R_n)^-1 H V"""
    H, V, R_n = np.atleast_2d(H, V, R_n)
    HV = H @ V
    return hermitian_solve(HV @ HV.conj().T + R_n, HV, SingularNoise)


def mse_matrix(U: np.ndarray, H: np.ndarray, V: np.ndarray, R_n: np.ndarray) -> np.ndarray:
    """(U^H H V - I)(U^H H V - I)^H + U^H R_n U"""
    U, H, V, R_n = np.atleast_2d(U, H, V, R_n)
    if U.shape[0] != H.shape[0] or H.shape[1] != V.shape[0] or U.shape[1] != V.shape[1]:
        raise ShapeMismatch(f"U {U.shape}, H {H.shape}, V {V.shape} do not chain")
    if R_n.shape != (H.shape[0], H.shape[0]):
        raise ShapeMismatch(f"R_n shape {R_n.shape} does not match N={H.shape[0]}")
    residual = U.conj().T @ H @ V - np.eye(V.shape[1])
    return hermitize(residual @ residual.conj().T + U.conj().T @ R_n @ U)


def mmse_matrix(H: np.ndarray, V: np.ndarray, R_n: np.ndarray) -> np.ndarray:
    """
    MSE matrix at the MMSE receiver.

    Evaluated as (I + X^H X)^-1 with X = L^-1 H V, R_n = L L^H, which equals
    I - V^H H^H R_n^-1 (H V V^H H^H R_n^-1 + I)^-1 H V.
    """
    H, V, R_n = np.atleast_2d(H, V, R_n)
    X = whiten(R_n, H @ V, SingularNoise)
    return hermitian_inverse(np.eye(X.shape[1]) + X.conj().T @ X, SingularNoise)


def weight_update(E: np.ndarray) -> np.ndarray:
    return hermitian_inverse(np.atleast_2d(E), SingularMse)


def wmmse_objective(W: np.ndarray, E: np.ndarray) -> float:
    """tr(W E) - ln det W"""
    W, E = np.atleast_2d(W, E)
    _, logdet = np.linalg.slogdet(hermitize(W))
    return float(np.real(np.trace(W @ E)) - logdet)


def fresh_state(H: np.ndarray, V: np.ndarray, R_n: np.ndarray) -> WmmseState:
    """Closed-form receiver and weight for the current transmitter"""
    U = mmse_receiver(H, V, R_n)
    E = mmse_matrix(H, V, R_n)
    W = weight_update(E)
    return WmmseState(U=U, W=W, E=E, objective=wmmse_objective(W, E))
