"""
Generic projected-gradient reference solvers for the convex block steps.

They share nothing with the dedicated solvers beyond the objective, so
agreement between the two is evidence for both.
"""

from typing import Callable

import numpy as np
from scipy import linalg

from optimization.linalg import hermitize
from optimization.subsolvers import QuadraticForm, relay_constraint_matrix, unvec, v_step_objective

MAX_ITERS = 20000
REL_TOL = 1e-13
DYKSTRA_ITERS = 500
ELLIPSOID_BISECTION_STEPS = 200


def projected_gradient(value: Callable[[np.ndarray], float],
                       gradient: Callable[[np.ndarray], np.ndarray],
                       project: Callable[[np.ndarray], np.ndarray],
                       x0: np.ndarray,
                       lipschitz: float,
                       max_iters: int = MAX_ITERS) -> np.ndarray:
    """Accelerated projected gradient with restart whenever the objective rises"""
    step = 1.0 / max(lipschitz, np.finfo(float).tiny)
    x = project(np.array(x0, dtype=complex))
    y = x.copy()
    t = 1.0
    current = value(x)
    for _ in range(max_iters):
        candidate = project(y - step * gradient(y))
        new_value = value(candidate)
        if new_value > current:
            if t == 1.0:
                break
            # momentum restart
            y, t = x.copy(), 1.0
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = candidate + ((t - 1.0) / t_next) * (candidate - x)
        done = current - new_value <= REL_TOL * max(abs(new_value), 1.0)
        x, current, t = candidate, new_value, t_next
        if done and np.linalg.norm(y - x) <= REL_TOL * max(np.linalg.norm(x), 1.0):
            break
    return x


def project_ball(x: np.ndarray, radius2: float) -> np.ndarray:
    norm2 = float(np.real(np.vdot(x, x)))
    if norm2 <= radius2:
        return x
    return x * np.sqrt(radius2 / norm2)


def project_disks(x: np.ndarray) -> np.ndarray:
    magnitude = np.abs(x)
    return np.where(magnitude > 1.0, x / np.maximum(magnitude, 1.0), x)


def project_ellipsoid(Y: np.ndarray, lam: np.ndarray, Q: np.ndarray, c: float) -> np.ndarray:
    """Euclidean projection of Y onto {X : tr(X^H J X) <= c}, J = Q diag(lam) Q^H"""
    coeffs = Q.conj().T @ Y
    energy = np.sum(np.abs(coeffs) ** 2, axis=1)

    def load(nu: float) -> float:
        return float(np.sum(lam * energy / (1.0 + nu * lam) ** 2))

    if load(0.0) <= c:
        return Y
    hi = 1.0
    while load(hi) > c and hi < 1e300:
        hi *= 2.0
    lo = 0.0
    for _ in range(ELLIPSOID_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if load(mid) > c:
            lo = mid
        else:
            hi = mid
    return Q @ (coeffs / (1.0 + hi * lam)[:, np.newaxis])


def _v_step_pieces(A: np.ndarray, B: np.ndarray):
    A = hermitize(np.atleast_2d(A))
    B = np.atleast_2d(B).astype(complex)
    lipschitz = 2.0 * float(np.max(np.linalg.eigvalsh(A), initial=0.0))
    return A, B, (lambda V: v_step_objective(A, B, V)), (lambda V: 2.0 * (A @ V - B)), lipschitz


def oracle_v_power(A: np.ndarray, B: np.ndarray, P: float) -> np.ndarray:
    A, B, value, gradient, lipschitz = _v_step_pieces(A, B)
    return projected_gradient(value, gradient, lambda V: project_ball(V, P), np.zeros_like(B), lipschitz)


def oracle_v_two(A: np.ndarray, B: np.ndarray, J: np.ndarray, P1: float, c2: float) -> np.ndarray:
    A, B, value, gradient, lipschitz = _v_step_pieces(A, B)
    lam, Q = np.linalg.eigh(hermitize(np.atleast_2d(J)))
    lam = np.clip(lam, 0.0, None)

    def project(Y: np.ndarray) -> np.ndarray:
        # Dykstra's alternating projections onto ball and ellipsoid
        X = Y.copy()
        p = np.zeros_like(Y)
        q = np.zeros_like(Y)
        for _ in range(DYKSTRA_ITERS):
            Z = project_ball(X + p, P1)
            p = X + p - Z
            X_next = project_ellipsoid(Z + q, lam, Q, c2)
            q = Z + q - X_next
            moved = np.linalg.norm(X_next - X)
            X = X_next
            if moved <= 1e-15 * max(np.linalg.norm(X), 1.0):
                break
        return X

    return projected_gradient(value, gradient, project, np.zeros_like(B), lipschitz)


def oracle_phi(q: QuadraticForm, phi0: np.ndarray) -> np.ndarray:
    Xi = hermitize(np.asarray(q.Xi))
    b = np.asarray(q.b, dtype=complex)
    lipschitz = 2.0 * float(np.max(np.linalg.eigvalsh(Xi), initial=0.0))
    return projected_gradient(q.value, lambda x: 2.0 * (Xi @ x + b), project_disks, phi0, lipschitz)


def oracle_f(q: QuadraticForm, D: np.ndarray, P_r: float) -> np.ndarray:
    """Minimize over the ball in whitened coordinates g = Q^1/2 f, Q = D^T kron I"""
    Q = relay_constraint_matrix(hermitize(np.atleast_2d(D)))
    root = linalg.sqrtm(Q)
    root_inv = np.linalg.inv(root)
    Xi_w = hermitize(root_inv.conj().T @ np.asarray(q.Xi) @ root_inv)
    b_w = root_inv.conj().T @ np.asarray(q.b, dtype=complex)
    whitened = QuadraticForm(Xi=Xi_w, b=b_w)
    lipschitz = 2.0 * float(np.max(np.linalg.eigvalsh(Xi_w), initial=0.0))
    g = projected_gradient(whitened.value, lambda x: 2.0 * (Xi_w @ x + b_w),
                           lambda x: project_ball(x, P_r), np.zeros_like(b_w), lipschitz)
    return unvec(root_inv @ g, D.shape[0])
