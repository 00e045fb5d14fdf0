"""Implicit one- and two-dimensional Wasserstein-1 metric matrices.

The one-dimensional matrix of order ``n`` has entries ``lam**|i - j|``.  It is
never stored: products, solves and determinants use the bidiagonal
factorization

    (I - lam N^T) Q (I - lam N) = diag(1 - lam**2, ..., 1 - lam**2, 1)

where ``N`` is the lower shift.  Products with ``Q`` split into a forward and a
backward first-order recurrence, and solves with ``Q`` reduce to two
bidiagonal products and a diagonal scaling, so both cost O(n).

The two-dimensional matrix is ``Q2 kron Q1`` with ``Q1`` of order ``n`` and
``Q2`` of order ``m``.  Flat vectors of length ``n*m`` are ordered with the
``Q1`` index varying fastest, i.e. ``x.reshape(m, n)`` in C order puts the
``Q1`` index on axis 1.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from . import _kernels
from .config import dense_limit
from .errors import DenseLimitError, DimensionError, ParameterDomainError

__all__ = [
    "Wass1D",
    "Wass2D",
    "BidiagFactor",
    "TridiagInverse",
    "new_1d",
    "new_2d",
    "powers",
    "apply_bidiag_inverse",
]


def _check_params(n, lam):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterDomainError(f"order must be a positive integer, got {n!r}")
    lam = float(lam)
    if not (0.0 < lam < 1.0):
        raise ParameterDomainError(f"lambda must lie in the open interval (0, 1), got {lam!r}")
    return int(n), lam


def _check_limit(order, limit):
    limit = dense_limit() if limit is None else limit
    if order > limit:
        raise DenseLimitError(f"order {order} exceeds the dense limit {limit}")


def powers(lam, n):
    """``[1, lam, lam**2, ..., lam**(n-1)]`` by running product."""
    out = np.empty(n)
    out[0] = 1.0
    if n > 1:
        out[1:] = lam
        np.cumprod(out, out=out)
    return out


def _as_vector(x, n=None):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or (n is not None and x.shape[0] != n):
        expected = "a vector" if n is None else f"a vector of length {n}"
        raise DimensionError(f"expected {expected}, got shape {x.shape}")
    return x


def _sweep_axis(kernel, lam, X, axis):
    # apply a row kernel along one axis of a 2D array
    if axis == 1:
        return kernel(lam, np.ascontiguousarray(X))
    return kernel(lam, np.ascontiguousarray(X.T)).T


def apply_bidiag_inverse(lam, which, x):
    """Apply the inverse of a unit bidiagonal matrix ``I - lam N``.

    Parameters
    ----------
    lam : float
        Off-diagonal magnitude.
    which : {"lower", "upper"}
        ``"lower"`` applies ``(I - lam N)^-1`` (forward substitution),
        ``"upper"`` applies ``(I - lam N^T)^-1`` (backward substitution).
    x : array_like, shape (n,)

    Returns
    -------
    ndarray, shape (n,)
        Equal to multiplying by the triangular Toeplitz matrix with
        entries ``lam**(i-j)`` below (or above) the diagonal.
    """
    x = _as_vector(x)
    if which == "lower":
        return _kernels.forward_sweep(float(lam), x)
    if which == "upper":
        return _kernels.backward_sweep(float(lam), x)
    raise ValueError(f"which must be 'lower' or 'upper', got {which!r}")


def _solve_axis(lam, b, axis=-1):
    # x = (I - lam N) D^-1 (I - lam N^T) b along one axis
    b = np.moveaxis(np.asarray(b, dtype=np.float64), axis, -1)
    y = b.copy()
    y[..., :-1] -= lam * b[..., 1:]
    y[..., :-1] /= 1.0 - lam * lam
    x = y.copy()
    x[..., 1:] -= lam * y[..., :-1]
    return np.moveaxis(x, -1, axis)


@dataclass(frozen=True)
class BidiagFactor:
    """Factors of ``(I - lam N^T) Q (I - lam N) = D``."""

    n: int
    lam: float

    @property
    def dhat(self):
        d = np.full(self.n, 1.0 - self.lam * self.lam)
        d[-1] = 1.0
        return d

    def lower(self):
        """Dense ``I - lam N``."""
        return np.eye(self.n) - self.lam * np.eye(self.n, k=-1)

    def upper(self):
        """Dense ``I - lam N^T``."""
        return self.lower().T


@dataclass(frozen=True)
class TridiagInverse:
    """Closed-form symmetric tridiagonal inverse of a :class:`Wass1D`."""

    n: int
    diag: np.ndarray
    offdiag: np.ndarray

    def todense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, x):
        x = _as_vector(x, self.n)
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y


@dataclass(frozen=True)
class Wass1D:
    """One-dimensional Wasserstein-1 metric matrix with entries ``lam**|i-j|``.

    Parameters
    ----------
    n : int
        Matrix order (number of grid points), at least 1.
    lam : float
        Decay parameter ``exp(-h / eps)``, strictly between 0 and 1.
    """

    n: int
    lam: float

    def __post_init__(self):
        n, lam = _check_params(self.n, self.lam)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lam", lam)

    @property
    def shape(self):
        return (self.n, self.n)

    def todense(self, limit=None):
        """Materialize the matrix; refuses orders above the dense limit."""
        _check_limit(self.n, limit)
        return toeplitz(powers(self.lam, self.n))

    def strict_lower(self, limit=None):
        """Dense strictly lower part ``L`` with ``Q = I + L + L^T``."""
        return np.tril(self.todense(limit), -1)

    def matvec(self, x):
        return _kernels.symmetric_sweep(self.lam, _as_vector(x, self.n))

    def solve(self, b):
        return _solve_axis(self.lam, _as_vector(b, self.n))

    def factor(self):
        return BidiagFactor(self.n, self.lam)

    def inverse_tridiagonal(self):
        n, lam = self.n, self.lam
        if n == 1:
            return TridiagInverse(1, np.ones(1), np.empty(0))
        s = 1.0 - lam * lam
        diag = np.full(n, (1.0 + lam * lam) / s)
        diag[0] = diag[-1] = 1.0 / s
        offdiag = np.full(n - 1, -lam / s)
        return TridiagInverse(n, diag, offdiag)

    def logdet(self):
        """``log det Q = (n - 1) log(1 - lam**2)``."""
        return (self.n - 1) * np.log1p(-self.lam * self.lam)

    def l_matvec(self, x):
        """Product with the strictly lower part ``L``."""
        x = _as_vector(x, self.n)
        return _kernels.forward_sweep(self.lam, x) - x

    def lt_matvec(self, x):
        """Product with ``L^T``."""
        x = _as_vector(x, self.n)
        return _kernels.backward_sweep(self.lam, x) - x


@dataclass(frozen=True)
class Wass2D:
    """Two-dimensional metric matrix ``q2 kron q1`` of order ``n*m``.

    ``q1`` (order ``n``) acts on the fast index of flat vectors and ``q2``
    (order ``m``) on the slow index.
    """

    q1: Wass1D
    q2: Wass1D

    @property
    def n(self):
        return self.q1.n

    @property
    def m(self):
        return self.q2.n

    @property
    def order(self):
        return self.q1.n * self.q2.n

    @property
    def grid_shape(self):
        return (self.q2.n, self.q1.n)

    def _grid(self, x):
        x = _as_vector(x, self.order)
        return x.reshape(self.grid_shape)

    def todense(self, limit=None):
        _check_limit(self.order, limit)
        return np.kron(self.q2.todense(limit), self.q1.todense(limit))

    def matvec(self, x):
        X = self._grid(x)
        Y = _sweep_axis(_kernels.symmetric_sweep_rows, self.q1.lam, X, axis=1)
        Y = _sweep_axis(_kernels.symmetric_sweep_rows, self.q2.lam, Y, axis=0)
        return np.ascontiguousarray(Y).reshape(-1)

    def solve(self, b):
        X = _solve_axis(self.q1.lam, self._grid(b), axis=1)
        X = _solve_axis(self.q2.lam, X, axis=0)
        return X.reshape(-1)

    def logdet(self):
        return self.m * self.q1.logdet() + self.n * self.q2.logdet()


def new_1d(n, lam):
    return Wass1D(n, lam)


def new_2d(n, lam1, m, lam2):
    return Wass2D(Wass1D(n, lam1), Wass1D(m, lam2))
