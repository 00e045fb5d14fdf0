"""Naive dense linear algebra used to cross-check the structured code.

Everything here is deliberately textbook: Gaussian elimination with partial
pivoting, cyclic Jacobi rotations for symmetric eigenproblems and norms read
straight off the definitions.  Nothing in this module knows about the
structure of the Wasserstein matrices.
"""

from dataclasses import dataclass
from math import sqrt

import numba
import numpy as np

from .config import TOL
from .errors import ConvergenceError, NotSymmetricError, SingularMatrixError

__all__ = [
    "EigenResult",
    "dense_solve",
    "dense_inverse",
    "dense_logdet",
    "dense_eigs_symmetric",
    "dense_norm",
    "spectral_norm",
    "dense_sinkhorn",
]


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    iterations: int


def _square(a):
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _eliminate(a, b, pivot_min):
    """Reduce ``[a | b]`` to upper triangular form in place.

    Returns the number of row swaps.
    """
    n = a.shape[0]
    swaps = 0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < pivot_min:
            raise SingularMatrixError(f"pivot {a[p, k]:.3e} in column {k} is below {pivot_min:g}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            if b is not None:
                b[[k, p]] = b[[p, k]]
            swaps += 1
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        if b is not None:
            b[k + 1:] -= np.outer(factors, b[k]).reshape(b[k + 1:].shape)
    return swaps


def dense_solve(a, b, pivot_min=TOL.pivot_min):
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    a = _square(a)
    b = np.array(b, dtype=np.float64)
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, matrix has {a.shape[0]}")
    _eliminate(a, b, pivot_min)
    n = a.shape[0]
    x = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def dense_inverse(a, pivot_min=TOL.pivot_min):
    a = _square(a)
    return dense_solve(a, np.eye(a.shape[0]), pivot_min)


def dense_logdet(a, pivot_min=TOL.pivot_min):
    """Return ``(sign, log|det a|)`` from the elimination pivots."""
    a = _square(a)
    swaps = _eliminate(a, None, pivot_min)
    d = np.diag(a)
    sign = (-1.0) ** swaps * np.prod(np.sign(d))
    return float(sign), float(np.sum(np.log(np.abs(d))))


@numba.njit(cache=True)
def _jacobi(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if sqrt(2.0 * off) < tol:
            return a, v, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return a, v, max_sweeps, False


def dense_eigs_symmetric(a, tol=TOL.jacobi_off, max_sweeps=TOL.jacobi_max_sweeps):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps continue until the off-diagonal Frobenius mass drops below
    ``tol * max(1, ||a||_F)``.

    Returns
    -------
    EigenResult
        Eigenvalues in ascending order, matching eigenvector columns and the
        number of sweeps performed.
    """
    a = _square(a)
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.max(np.abs(a - a.T), initial=0.0) > TOL.symmetry * scale:
        raise NotSymmetricError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    d, v, sweeps, ok = _jacobi(a, tol * scale, max_sweeps)
    if not ok:
        raise ConvergenceError("Jacobi sweeps did not converge", sweeps)
    w = np.diag(d).copy()
    order = np.argsort(w, kind="stable")
    return EigenResult(w[order], v[:, order], sweeps)


def spectral_norm(a):
    """Largest singular value, via the eigenvalues of ``a^T a``."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return 0.0
    top = dense_eigs_symmetric(a.T @ a).values[-1]
    return sqrt(max(top, 0.0))


def dense_norm(a, which):
    """Induced matrix norm; ``which`` is 1, 2 or ``"inf"``."""
    a = np.asarray(a, dtype=np.float64)
    if which == 1:
        return float(np.abs(a).sum(axis=0).max())
    if which in ("inf", np.inf):
        return float(np.abs(a).sum(axis=1).max())
    if which == 2:
        return spectral_norm(a)
    raise ValueError(f"unsupported norm {which!r}")


def dense_sinkhorn(kernel, u, v, tol=TOL.sinkhorn_tol, max_iter=TOL.sinkhorn_max_iter):
    """Plain Sinkhorn scaling against an explicit kernel matrix.

    Uses the same update order as the structured solver (``b`` starts at ones,
    ``a`` is updated first).  Returns the scalings, the iterate history and the
    number of iterations.
    """
    K = np.asarray(kernel, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    b = np.ones_like(v)
    history = []
    Kb = K @ b
    it = 0
    for it in range(1, max_iter + 1):
        a = u / Kb
        Ka = K.T @ a
        b = v / Ka
        Kb = K @ b
        history.append((a.copy(), b.copy()))
        err = max(np.max(np.abs(a * Kb - u)), np.max(np.abs(b * Ka - v)))
        if err < tol:
            break
    return a, b, history, it
