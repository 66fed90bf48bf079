"""
Hermitian positive-definite factorizations with a single jitter retry.
"""

import logging
from typing import Tuple, Type

import numpy as np
from scipy import linalg

from config import SUBSOLVER_TOLERANCES

logger = logging.getLogger(__name__)


def hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def cholesky_factor(A: np.ndarray, error_cls: Type[Exception]) -> Tuple[np.ndarray, bool]:
    """
    Lower Cholesky factor of a Hermitian PD matrix in cho_solve format.

    On failure adds jitter 1e-12 * tr(A)/dim to the diagonal once and
    retries; raises error_cls when the retry fails as well.
    """
    A = hermitize(np.asarray(A, dtype=complex))
    if not np.all(np.isfinite(A)):
        raise error_cls("matrix has non-finite entries")
    try:
        return linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError:
        dim = A.shape[0]
        jitter = SUBSOLVER_TOLERANCES["jitter"] * abs(np.trace(A).real) / dim
        logger.debug("Cholesky failed, retrying with jitter %.3e", jitter)
        try:
            return linalg.cho_factor(A + jitter * np.eye(dim), lower=True, check_finite=False)
        except linalg.LinAlgError as exc:
            raise error_cls(f"matrix is not positive definite: {exc}") from exc


def hermitian_solve(A: np.ndarray, B: np.ndarray, error_cls: Type[Exception]) -> np.ndarray:
    """Solve A X = B for Hermitian PD A"""
    factor = cholesky_factor(A, error_cls)
    return linalg.cho_solve(factor, np.asarray(B, dtype=complex), check_finite=False)


def hermitian_inverse(A: np.ndarray, error_cls: Type[Exception]) -> np.ndarray:
    dim = np.asarray(A).shape[0]
    return hermitize(hermitian_solve(A, np.eye(dim), error_cls))


def whiten(R: np.ndarray, X: np.ndarray, error_cls: Type[Exception]) -> np.ndarray:
    """Return L^-1 X where R = L L^H"""
    c, lower = cholesky_factor(R, error_cls)
    L = np.tril(c) if lower else np.triu(c).conj().T
    return linalg.solve_triangular(L, np.asarray(X, dtype=complex), lower=True, check_finite=False)


def logdet_pd(A: np.ndarray, error_cls: Type[Exception]) -> float:
    """Natural log-determinant of a Hermitian PD matrix via its Cholesky factor"""
    c, _ = cholesky_factor(A, error_cls)
    return float(2.0 * np.sum(np.log(np.diag(c).real)))
