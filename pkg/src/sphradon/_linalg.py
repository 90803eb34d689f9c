"""Symmetric positive definite solves, float64 and extended precision.

The float64 path wraps LAPACK Cholesky plus a reciprocal condition
estimate.  The extended path is a plain right-looking Cholesky in numpy
longdouble (80-bit on x86), used for interpolation systems whose condition
exceeds what float64 can carry; at the problem sizes in this package the
pure-numpy loops cost a few seconds at most.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.linalg.lapack import dpocon

from .errors import SingularSystemError

LONGDOUBLE_EPS = float(np.finfo(np.longdouble).eps)


def spd_solve_float64(B: np.ndarray, v: np.ndarray, cond_guard: float) -> tuple[np.ndarray, float]:
    """Solve B x = v with Cholesky; returns (x, condition estimate).

    Raises ``SingularSystemError`` when factorisation fails or the 1-norm
    condition estimate exceeds the guard.  One step of iterative
    refinement is applied.
    """
    anorm = float(np.linalg.norm(B, 1))
    try:
        factor = cho_factor(B, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Cholesky factorisation failed: {exc}") from exc
    rcond, info = dpocon(factor[0], anorm, lower=1)
    if info != 0 or rcond <= 0.0:
        raise SingularSystemError("condition estimation failed")
    cond = 1.0 / float(rcond)
    if cond > cond_guard:
        raise SingularSystemError(
            f"condition estimate {cond:.3e} exceeds guard {cond_guard:.1e}; "
            "functionals are numerically dependent at this order"
        )
    x = cho_solve(factor, v, check_finite=False)
    x = x + cho_solve(factor, v - B @ x, check_finite=False)
    return x, cond


def cholesky_longdouble(B: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor in longdouble; raises on non-positive pivots."""
    A = np.array(B, dtype=np.longdouble)
    n = A.shape[0]
    for j in range(n):
        s = A[j, :j]
        d = A[j, j] - s @ s
        if d <= 0.0:
            raise SingularSystemError(
                f"matrix not positive definite at pivot {j} even in extended precision"
            )
        d = np.sqrt(d)
        A[j, j] = d
        if j + 1 < n:
            A[j + 1 :, j] = (A[j + 1 :, j] - A[j + 1 :, :j] @ s) / d
    return np.tril(A)


def spd_solve_longdouble(
    B: np.ndarray, v: np.ndarray, cond_guard: float = 5.0e17
) -> tuple[np.ndarray, float]:
    """Extended-precision Cholesky solve with a crude condition estimate.

    The estimate max(diag L)^2 / min(diag L)^2 is a lower bound on the true
    condition number; it is only used as a sanity guard.
    """
    L = cholesky_longdouble(np.asarray(B, dtype=np.longdouble))
    dg = np.diag(L)
    cond = float((dg.max() / dg.min()) ** 2)
    if cond > cond_guard:
        raise SingularSystemError(
            f"extended-precision condition estimate {cond:.3e} exceeds guard {cond_guard:.1e}"
        )
    y = _forward_sub(L, np.asarray(v, dtype=np.longdouble))
    x = _backward_sub(L.T, y)
    return x, cond


def _forward_sub(L: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    x = np.array(v, dtype=np.longdouble)
    for j in range(n):
        x[j] = (x[j] - L[j, :j] @ x[:j]) / L[j, j]
    return x


def _backward_sub(U: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = U.shape[0]
    x = np.array(v, dtype=np.longdouble)
    for j in range(n - 1, -1, -1):
        x[j] = (x[j] - U[j, j + 1 :] @ x[j + 1 :]) / U[j, j]
    return x
