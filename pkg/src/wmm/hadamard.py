"""Hadamard (entrywise) structure of the metric matrix.

``Q`` splits as ``A o A^T`` where ``A`` holds the powers of ``lam`` on and
below the diagonal and ones above it.  The entrywise reciprocal
``Q^(o-1)`` with entries ``lam**-|i-j|`` has a closed-form 1-norm and an
``r1 * c1`` bound on its spectral norm; both grow like ``lam**-(n-1)`` so
they switch to natural logs once the exponent passes
:attr:`Tolerances.log_exponent`.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import TOL
from .core import _check_limit, _check_params, powers

__all__ = [
    "Magnitude",
    "HadamardInverse",
    "Table1Row",
    "hadamard_split",
    "row_norm_max",
    "col_norm_max",
    "hinv_norm1_exact",
    "hinv_norm2_bound",
    "table1",
    "hinv_2d_norms",
]


class Magnitude(NamedTuple):
    """A positive value, or its natural log when ``is_log`` is set."""

    value: float
    is_log: bool = False

    @property
    def log(self):
        return self.value if self.is_log else math.log(self.value)

    def __float__(self):
        return math.exp(self.value) if self.is_log else self.value


def _use_log(exponent, log):
    return exponent > TOL.log_exponent if log is None else log


def _linear(log_value):
    if log_value > math.log(np.finfo(float).max):
        raise OverflowError(f"value exp({log_value:.6g}) is not representable; request log=True")


@dataclass(frozen=True)
class HadamardInverse:
    """Entrywise reciprocal of :class:`~wmm.core.Wass1D`."""

    n: int
    lam: float

    def __post_init__(self):
        n, lam = _check_params(self.n, self.lam)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def of(cls, q):
        return cls(q.n, q.lam)

    @property
    def log_scale(self):
        return (self.n - 1) * math.log(1 / self.lam) > TOL.log_exponent

    def todense(self, limit=None):
        _check_limit(self.n, limit)
        i = np.arange(self.n)
        return 1.0 / powers(self.lam, self.n)[np.abs(i[:, None] - i[None, :])]


@dataclass(frozen=True)
class Table1Row:
    n: int
    y1: float
    y2: float
    diff: float


def hadamard_split(q, limit=None):
    """Return ``(A, A^T)`` with ``A o A^T == Q`` entrywise.

    ``A[i, j] = lam**(i-j)`` for ``i >= j`` and 1 above the diagonal.
    """
    _check_limit(q.n, limit)
    p = powers(q.lam, q.n)
    i = np.arange(q.n)
    d = i[:, None] - i[None, :]
    A = np.where(d >= 0, p[np.abs(d)], 1.0)
    return A, A.T.copy()


def row_norm_max(a):
    """Largest Euclidean row norm ``r1``."""
    return float(np.sqrt((np.abs(np.asarray(a)) ** 2).sum(axis=1)).max())


def col_norm_max(a):
    """Largest Euclidean column norm ``c1``."""
    return float(np.sqrt((np.abs(np.asarray(a)) ** 2).sum(axis=0)).max())


def _log_geometric(lam, n):
    # log((1 - lam**n) / (1 - lam))
    return math.log1p(-(lam**n)) - math.log1p(-lam)


def hinv_norm1_exact(h, log=None):
    """``||Q^(o-1)||_1 = lam**-(n-1) (1 - lam**n) / (1 - lam)``.

    ``log=None`` applies the overflow policy, ``True``/``False`` force the
    representation.
    """
    n, lam = h.n, h.lam
    exponent = (n - 1) * math.log(1 / lam)
    if _use_log(exponent, log):
        return Magnitude(exponent + _log_geometric(lam, n), True)
    _linear(exponent + _log_geometric(lam, n))
    return Magnitude((1 - lam**n) / (1 - lam) / lam ** (n - 1))


def hinv_norm2_bound(h, log=None):
    """``r1 * c1`` bound ``lam**-2(n-1) (1 - lam**2n) / (1 - lam**2)``."""
    n, lam = h.n, h.lam
    exponent = 2 * (n - 1) * math.log(1 / lam)
    if _use_log(exponent, log):
        return Magnitude(exponent + _log_geometric(lam * lam, n), True)
    _linear(exponent + _log_geometric(lam * lam, n))
    return Magnitude((1 - lam ** (2 * n)) / (1 - lam * lam) / lam ** (2 * (n - 1)))


def _snap(x, tol=1e-9):
    r = round(x)
    return int(r) if abs(x - r) <= tol * max(1.0, abs(x)) else x


def table1(lam=0.5, ns=(1, 2, 3, 4, 5, 10)):
    """Hadamard-inverse spectral-norm bound against the inverse bound.

    ``y1`` is :func:`hinv_norm2_bound`, ``y2 = (1+lam)/(1-lam)``.  Values
    within ``1e-9`` (relative) of an integer are returned as ``int``.
    """
    rows = []
    for n in ns:
        h = HadamardInverse(n, lam)
        y1 = float(hinv_norm2_bound(h, log=False))
        y2 = (1 + h.lam) / (1 - h.lam)
        y1, y2 = _snap(y1), _snap(y2)
        rows.append(Table1Row(h.n, y1, y2, _snap(y1 - y2)))
    return rows


@dataclass(frozen=True)
class HadamardInverse2DNorms:
    norm1: Magnitude
    norm2_bound: Magnitude


def hinv_2d_norms(q, log=None):
    """Norms of ``(Q2 kron Q1)^(o-1) = Q2^(o-1) kron Q1^(o-1)``."""
    h1, h2 = HadamardInverse.of(q.q1), HadamardInverse.of(q.q2)
    exponent = (h1.n - 1) * math.log(1 / h1.lam) + (h2.n - 1) * math.log(1 / h2.lam)
    out = []
    for fn, scale in ((hinv_norm1_exact, 1), (hinv_norm2_bound, 2)):
        if _use_log(scale * exponent, log):
            out.append(Magnitude(fn(h1, log=True).value + fn(h2, log=True).value, True))
        else:
            out.append(Magnitude(fn(h1, log=False).value * fn(h2, log=False).value))
    return HadamardInverse2DNorms(*out)
