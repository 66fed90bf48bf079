"""
Convex block subproblems of the alternating WMMSE loops.

Every solver works on an eigen-decomposition of its quadratic term so that
the transmitted power is an explicit, non-increasing function of the
Lagrange multiplier; the multiplier is then found by bisection.

Vectorization is column-major throughout: vec(F) = F.reshape(-1, order="F"),
so tr(F D F^H) = vec(F)^H (D^T kron I) vec(F).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from config import SUBSOLVER_TOLERANCES
from optimization.linalg import hermitize
from utils.exceptions import ConfigError, DegenerateForm, InfeasibleSubproblem, ShapeMismatch

logger = logging.getLogger(__name__)

NULL_EIG_REL = 1e-12
NULL_ENERGY_REL = 1e-20


@dataclass
class QuadraticForm:
    """x^H Xi x + 2 Re(b^H x)"""
    Xi: np.ndarray
    b: np.ndarray

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x).reshape(-1)
        return float(np.real(np.vdot(x, self.Xi @ x)) + 2.0 * np.real(np.vdot(self.b, x)))


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(x: np.ndarray, rows: int) -> np.ndarray:
    return np.asarray(x).reshape((rows, -1), order="F")


def v_step_objective(A: np.ndarray, B: np.ndarray, V: np.ndarray) -> float:
    """tr(V^H A V) - 2 Re tr(B^H V)"""
    return float(np.real(np.trace(V.conj().T @ A @ V)) - 2.0 * np.real(np.vdot(B, V)))


def _bisect_multiplier(excess: Callable[[float], float], scale: float) -> float:
    """
    Smallest mu >= 0 (up to tolerance) with excess(mu) <= 0.

    excess must be non-increasing. The returned point always satisfies
    excess(mu) <= 0, so the caller's constraint holds exactly.
    """
    steps = SUBSOLVER_TOLERANCES["bisection_max_steps"]
    rel_tol = SUBSOLVER_TOLERANCES["bisection_rel_tol"]

    hi = 1.0
    for _ in range(steps):
        if excess(hi) <= 0:
            break
        hi *= 2.0
    else:
        raise InfeasibleSubproblem("no multiplier brings the constraint within budget")

    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        value = excess(mid)
        if value <= 0:
            hi = mid
            if value >= -rel_tol * scale:
                break
        else:
            lo = mid
        if hi - lo <= rel_tol * hi:
            break
    return hi


class _EigenSystem:
    """
    Minimizer of x^H A x - 2 Re(c^H x) (columnwise) shifted by mu, in the
    eigenbasis of A, with the weighted norm sum_i |(Z^H c)_i|^2 / (lam_i + mu)^2.
    """

    def __init__(self, lam: np.ndarray, Z: np.ndarray, C: np.ndarray):
        self.lam = np.clip(lam, 0.0, None)
        self.Z = Z
        self.coeffs = Z.conj().T @ C
        self.energy = np.sum(np.abs(self.coeffs) ** 2, axis=1)
        total = float(np.sum(self.energy))
        lam_max = float(np.max(self.lam, initial=0.0))
        self.null = self.lam <= NULL_EIG_REL * max(lam_max, np.finfo(float).tiny)
        self.bounded_at_zero = not np.any(self.energy[self.null] > NULL_ENERGY_REL * max(total, np.finfo(float).tiny))

    def norm2(self, mu: float) -> float:
        if mu == 0.0:
            if not self.bounded_at_zero:
                return math.inf
            keep = ~self.null
            return float(np.sum(self.energy[keep] / self.lam[keep] ** 2))
        return float(np.sum(self.energy / (self.lam + mu) ** 2))

    def solution(self, mu: float) -> np.ndarray:
        if mu == 0.0:
            inv = np.zeros_like(self.lam)
            keep = ~self.null
            inv[keep] = 1.0 / self.lam[keep]
        else:
            inv = 1.0 / (self.lam + mu)
        return self.Z @ (self.coeffs * inv[:, np.newaxis])


def _solve_ball(A: np.ndarray, B: np.ndarray, P: float) -> Tuple[Optional[np.ndarray], float]:
    """min tr(V^H A V) - 2Re tr(B^H V) s.t. tr(V V^H) <= P (P may be inf); None if unbounded"""
    lam, Q = np.linalg.eigh(hermitize(A))
    system = _EigenSystem(lam, Q, B)
    if system.norm2(0.0) <= P:
        return system.solution(0.0), 0.0
    if math.isinf(P):
        return None, 0.0
    mu = _bisect_multiplier(lambda m: system.norm2(m) - P, P)
    return system.solution(mu), mu


def solve_v_power_constrained(A: np.ndarray,
                              B: np.ndarray,
                              P: float,
                              full_output: bool = False) -> Union[np.ndarray, Tuple[np.ndarray, float]]:
    """
    Transmit beamformer under a total power budget.

    Solves (A + mu I) V = B with mu >= 0 and mu (tr(V V^H) - P) = 0.
    Returns V, or (V, mu) when full_output is set.
    """
    A, B = np.atleast_2d(A, B)
    if A.shape[0] != A.shape[1] or A.shape[0] != B.shape[0]:
        raise ShapeMismatch(f"A {A.shape} and B {B.shape} do not match")
    if not P > 0:
        raise ConfigError(f"power budget must be positive, got {P}")

    if not np.any(B):
        V, mu = np.zeros_like(B, dtype=complex), 0.0
    else:
        V, mu = _solve_ball(A, B, P)
    return (V, mu) if full_output else V


def _second_constraint(J: np.ndarray, V: np.ndarray) -> float:
    return float(np.real(np.trace(V.conj().T @ J @ V)))


def solve_v_two_constraints(A: np.ndarray,
                            B: np.ndarray,
                            J: np.ndarray,
                            P1: float,
                            c2: float,
                            full_output: bool = False) -> Union[np.ndarray, Tuple[np.ndarray, Tuple[float, float]]]:
    """
    Transmit beamformer under the source budget and the relay budget.

    min tr(V^H A V) - 2Re tr(B^H V)  s.t.  tr(V V^H) <= P1,  tr(V^H J V) <= c2.

    Tries the unconstrained minimizer, then each single-constraint
    solution against the other constraint, and finally bisects the
    second multiplier with the first one re-solved at every step.
    """
    A, B, J = np.atleast_2d(A, B, J)
    if A.shape != J.shape or A.shape[0] != B.shape[0]:
        raise ShapeMismatch(f"A {A.shape}, J {J.shape} and B {B.shape} do not match")
    if c2 < 0:
        raise InfeasibleSubproblem(f"relay budget left for the transmitter is negative: {c2}")
    if not P1 > 0:
        raise ConfigError(f"power budget must be positive, got {P1}")

    J = hermitize(J)
    tol = 1e-12 * max(P1, c2)

    def result(V: np.ndarray, mu1: float, mu2: float):
        return (V, (mu1, mu2)) if full_output else V

    if not np.any(B):
        return result(np.zeros_like(B, dtype=complex), 0.0, 0.0)

    # unconstrained
    V, _ = _solve_ball(A, B, math.inf)
    if V is not None and np.real(np.vdot(V, V)) <= P1 and _second_constraint(J, V) <= c2 + tol:
        return result(V, 0.0, 0.0)

    # source budget only
    V, mu1 = _solve_ball(A, B, P1)
    if _second_constraint(J, V) <= c2 + tol:
        return result(V, mu1, 0.0)

    # relay budget only
    solved = _bisect_second(A, B, J, c2, tol, math.inf)
    if solved is not None:
        V, _, mu2 = solved
        if np.real(np.vdot(V, V)) <= P1:
            return result(V, 0.0, mu2)

    # both active
    solved = _bisect_second(A, B, J, c2, tol, P1)
    if solved is None:
        raise InfeasibleSubproblem("two-constraint transmitter step did not converge")
    V, mu1, mu2 = solved
    return result(V, mu1, mu2)


def _bisect_second(A: np.ndarray, B: np.ndarray, J: np.ndarray, c2: float, tol: float,
                   P1: float) -> Optional[Tuple[np.ndarray, float, float]]:
    """Bisection on the relay-budget multiplier; the dual derivative c2 - tr(V^H J V) is monotone"""
    cache = {}

    def inner(mu2: float):
        if mu2 not in cache:
            cache[mu2] = _solve_ball(A + mu2 * J, B, P1)
        return cache[mu2]

    def excess(mu2: float) -> float:
        V, _ = inner(mu2)
        if V is None:
            return math.inf
        return _second_constraint(J, V) - c2 - tol

    steps = SUBSOLVER_TOLERANCES["dual_outer_steps"]
    rel_tol = SUBSOLVER_TOLERANCES["bisection_rel_tol"]

    hi = 1.0
    for _ in range(steps):
        if excess(hi) <= 0:
            break
        hi *= 2.0
    else:
        return None

    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        value = excess(mid)
        if value <= 0:
            hi = mid
            if value >= -rel_tol * max(c2, tol):
                break
        else:
            lo = mid
        if hi - lo <= rel_tol * hi:
            break

    V, mu1 = inner(hi)
    return V, mu1, hi


def build_phi_quadratic(H_d: np.ndarray, H_1: np.ndarray, H_2: np.ndarray,
                        U: np.ndarray, W: np.ndarray, V: np.ndarray) -> QuadraticForm:
    """
    Reflection-vector part of tr(W E) as phi^H Xi phi + 2 Re(b^H phi).

    Xi = (H_2^H U W U^H H_2) o (H_1 V V^H H_1^H)^T and b = conj(diag(B))
    with B = H_1 V (V^H H_d^H U - I) W U^H H_2.
    """
    H_d, H_1, H_2, U, W, V = np.atleast_2d(H_d, H_1, H_2, U, W, V)
    K = H_1.shape[0]
    if H_2.shape[1] != K or H_1.shape[1] != V.shape[0] or H_2.shape[0] != U.shape[0] \
            or H_d.shape != (U.shape[0], V.shape[0]) or W.shape != (V.shape[1], V.shape[1]):
        raise ShapeMismatch("inputs of the reflection quadratic form do not chain")

    H1V = H_1 @ V
    UH2 = U.conj().T @ H_2
    C = UH2.conj().T @ W @ UH2
    Xi = hermitize(C * (H1V @ H1V.conj().T).T)
    residual = V.conj().T @ H_d.conj().T @ U - np.eye(V.shape[1])
    B = H1V @ residual @ W @ UH2
    return QuadraticForm(Xi=Xi, b=np.conj(np.diag(B)).copy())


def solve_phi(q: QuadraticForm, phi0: np.ndarray) -> np.ndarray:
    """
    Cyclic coordinate descent over the product of unit disks.

    Each coordinate takes its exact scalar minimizer -c_k / Xi_kk clipped
    to the disk; coordinates are visited in ascending order.
    """
    Xi = np.asarray(q.Xi)
    b = np.asarray(q.b).reshape(-1)
    phi = np.array(phi0, dtype=complex).reshape(-1)
    K = phi.shape[0]
    if Xi.shape != (K, K) or b.shape != (K,):
        raise ShapeMismatch(f"quadratic form of size {Xi.shape} does not match phi of length {K}")
    if np.any(np.abs(phi) > 1.0 + 1e-12):
        raise ConfigError("initial reflection coefficients must lie in the unit disk")

    diag = np.real(np.diag(Xi)).copy()
    curvature_floor = NULL_EIG_REL * max(float(np.max(np.abs(diag), initial=0.0)), np.finfo(float).tiny)
    rel_tol = SUBSOLVER_TOLERANCES["cd_rel_tol"]

    grad = Xi @ phi
    objective = float(np.real(np.vdot(phi, grad)) + 2.0 * np.real(np.vdot(b, phi)))
    for cycle in range(SUBSOLVER_TOLERANCES["cd_max_cycles"]):
        start = objective
        for k in range(K):
            old = phi[k]
            c_k = grad[k] - Xi[k, k] * old + b[k]
            if diag[k] > curvature_floor:
                new = -c_k / diag[k]
                magnitude = abs(new)
                if magnitude > 1.0:
                    new /= magnitude
            elif c_k != 0:
                new = -c_k / abs(c_k)
            else:
                continue
            delta = new - old
            if delta == 0:
                continue
            change = diag[k] * (abs(new) ** 2 - abs(old) ** 2) + 2.0 * np.real(np.conj(delta) * c_k)
            if change > 0:
                continue
            phi[k] = new
            grad += Xi[:, k] * delta
            objective += change
        if start - objective <= rel_tol * max(abs(objective), np.finfo(float).tiny):
            logger.debug("reflection coordinate descent stopped after %d cycles", cycle + 1)
            break
    return phi


def build_f_quadratic(H_d: np.ndarray, H_1: np.ndarray, H_2: np.ndarray, U: np.ndarray,
                      W: np.ndarray, V: np.ndarray, sigma2_R: float) -> Tuple[QuadraticForm, np.ndarray]:
    """
    Relay-matrix part of tr(W E) in f = vec(F).

    Xi = (H_1 V V^H H_1^H)^T kron C + sigma2_R (I kron C), C = H_2^H U W U^H H_2,
    b = vec(B^H) with B = H_1 V (V^H H_d^H U - I) W U^H H_2.
    Also returns D = H_1 V V^H H_1^H + sigma2_R I.
    """
    H_d, H_1, H_2, U, W, V = np.atleast_2d(H_d, H_1, H_2, U, W, V)
    L = H_1.shape[0]
    if H_2.shape[1] != L or H_1.shape[1] != V.shape[0] or H_2.shape[0] != U.shape[0] \
            or H_d.shape != (U.shape[0], V.shape[0]) or W.shape != (V.shape[1], V.shape[1]):
        raise ShapeMismatch("inputs of the relay quadratic form do not chain")

    H1V = H_1 @ V
    UH2 = U.conj().T @ H_2
    C = hermitize(UH2.conj().T @ W @ UH2)
    signal = hermitize(H1V @ H1V.conj().T)
    eye = np.eye(L)
    Xi = hermitize(np.kron(signal.T, C) + sigma2_R * np.kron(eye, C))
    residual = V.conj().T @ H_d.conj().T @ U - np.eye(V.shape[1])
    B = H1V @ residual @ W @ UH2
    D = signal + sigma2_R * eye
    return QuadraticForm(Xi=Xi, b=vec(B.conj().T)), D


def relay_constraint_matrix(D: np.ndarray) -> np.ndarray:
    """Q with f^H Q f = tr(F D F^H)"""
    L = D.shape[0]
    return np.kron(np.asarray(D).T, np.eye(L))


def _generalized_eigh(Xi: np.ndarray, Q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        return linalg.eigh(Xi, Q, check_finite=False)
    except linalg.LinAlgError:
        dim = Xi.shape[0]
        jitter = SUBSOLVER_TOLERANCES["jitter"]
        xi_shift = jitter * abs(np.trace(Xi).real) / dim
        q_shift = jitter * abs(np.trace(Q).real) / dim
        logger.debug("generalized eigh failed, retrying with jitter")
        try:
            return linalg.eigh(Xi + xi_shift * np.eye(dim), Q + q_shift * np.eye(dim), check_finite=False)
        except linalg.LinAlgError as exc:
            raise DegenerateForm(f"relay quadratic form cannot be factorized: {exc}") from exc


def solve_f(q: QuadraticForm,
            D: np.ndarray,
            P_r: float,
            full_output: bool = False) -> Union[np.ndarray, Tuple[np.ndarray, float]]:
    """
    Relay matrix under tr(F D F^H) <= P_r.

    f(lambda) = -(Xi + lambda Q)^-1 b with Q = D^T kron I; lambda found by
    bisection on the non-increasing power p(lambda) = f^H Q f.
    """
    D = hermitize(np.atleast_2d(D))
    L = D.shape[0]
    Xi = hermitize(np.atleast_2d(q.Xi))
    b = np.asarray(q.b, dtype=complex).reshape(-1)
    if Xi.shape != (L * L, L * L) or b.shape != (L * L,):
        raise ShapeMismatch(f"quadratic form of size {Xi.shape} does not match D of size {D.shape}")
    if not P_r > 0:
        raise ConfigError(f"relay budget must be positive, got {P_r}")
    if not np.all(np.isfinite(Xi)) or not np.all(np.isfinite(D)):
        raise DegenerateForm("relay quadratic form has non-finite entries")

    if not np.any(b):
        F, lam = np.zeros((L, L), dtype=complex), 0.0
    else:
        theta, Z = _generalized_eigh(Xi, relay_constraint_matrix(D))
        # Z^H Q Z = I, so the power is the plain norm in eigen-coordinates
        system = _EigenSystem(theta, Z, (-b)[:, np.newaxis])
        if system.norm2(0.0) <= P_r:
            lam = 0.0
        else:
            lam = _bisect_multiplier(lambda m: system.norm2(m) - P_r, P_r)
        F = unvec(system.solution(lam)[:, 0], L)
    return (F, lam) if full_output else F
