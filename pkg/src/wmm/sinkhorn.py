"""Entropy-regularized Wasserstein-1 transport on uniform 1D and 2D grids.

The Gibbs kernel of the cost ``|i - j| h`` at regularization ``eps`` is the
metric matrix with ``lam = exp(-h / eps)``, so every kernel application in
the Sinkhorn loop is an O(n) structured product.  In 2D the kernel is
``Q2 kron Q1``, which corresponds to the separable cost
``h1 |i1 - j1| + h2 |i2 - j2|``.

The plan ``gamma = diag(a) Q diag(b)`` is never formed.  With row sums ``r``
and column sums ``c`` of the plan,

    eps * sum gamma ln gamma = eps * (r . ln a + c . ln b) - <gamma, C>

so the regularized objective ``<gamma, C> + eps * sum gamma ln gamma`` equals
``eps * (r . ln a + c . ln b)`` and costs O(n) as well.
"""

import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import TOL, dense_limit
from .core import Wass1D, Wass2D, _sweep_axis
from .errors import (
    DimensionError,
    DistributionError,
    ParameterDomainError,
    SinkhornUnderflowError,
)

__all__ = [
    "lambda_from_grid",
    "DiscreteDist",
    "SinkhornProblem",
    "SinkhornResult",
    "sinkhorn",
    "sinkhorn_1d",
    "sinkhorn_2d",
    "transport_cost",
    "parse_distribution",
    "load_distribution",
]


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterDomainError(f"{name} must be a real number, got {value!r}") from None
    if not (value > 0.0 and math.isfinite(value)):
        raise ParameterDomainError(f"{name} must be positive and finite, got {value!r}")
    return value


def lambda_from_grid(h, epsilon):
    """Kernel decay ``exp(-h / epsilon)`` for grid spacing ``h``."""
    h = _positive("h", h)
    epsilon = _positive("epsilon", epsilon)
    lam = math.exp(-h / epsilon)
    if lam == 0.0:
        raise ParameterDomainError(
            f"exp(-h/epsilon) underflows for h/epsilon = {h / epsilon:g}; use a larger epsilon"
        )
    if lam == 1.0:
        raise ParameterDomainError(f"exp(-h/epsilon) rounds to 1 for h/epsilon = {h / epsilon:g}")
    return lam


@dataclass(frozen=True)
class DiscreteDist:
    """Normalized nonnegative mass on a 1D or 2D grid.

    Attributes
    ----------
    mass : ndarray
        Flat masses summing to 1.  For 2D grids the ``Q1`` (column) index
        varies fastest, matching :class:`~wmm.core.Wass2D`.
    shape : tuple
        ``(n,)`` in 1D, ``(n, m)`` in 2D with ``n`` columns and ``m`` rows.
    total : float
        Mass before normalization.
    """

    mass: np.ndarray
    shape: tuple
    total: float = 1.0

    @classmethod
    def from_values(cls, values, shape=None):
        """Validate and normalize raw masses.

        ``values`` may be flat or a 2D ``(m, n)`` array of rows.  ``shape``
        defaults to the array's own layout.
        """
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 2 and shape is None:
            shape = (arr.shape[1], arr.shape[0])
        flat = arr.reshape(-1)
        shape = (flat.size,) if shape is None else tuple(int(s) for s in shape)
        if len(shape) not in (1, 2) or min(shape, default=0) < 1:
            raise DimensionError(f"grid shape must be (n,) or (n, m) with positive sizes, got {shape}")
        if math.prod(shape) != flat.size:
            raise DimensionError(f"{flat.size} values do not fill a grid of shape {shape}")
        if not np.all(np.isfinite(flat)):
            raise DistributionError("masses must be finite")
        if np.any(flat < 0):
            raise DistributionError(f"negative mass at index {int(np.argmax(flat < 0))}")
        total = float(flat.sum())
        if total <= 0.0:
            raise DistributionError("all masses are zero")
        return cls(flat / total, shape, total)

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def size(self):
        return self.mass.size

    def grid(self):
        """Masses as an ``(m, n)`` array (2D) or a vector (1D)."""
        if self.ndim == 1:
            return self.mass
        n, m = self.shape
        return self.mass.reshape(m, n)


@dataclass(frozen=True)
class SinkhornProblem:
    """Source ``u`` and target ``v`` on a common grid.

    ``h`` is the grid spacing; in 2D it may be a pair ``(h1, h2)`` for the
    column and row axes.
    """

    u: DiscreteDist
    v: DiscreteDist
    h: object
    epsilon: float

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise DimensionError(f"source shape {self.u.shape} differs from target shape {self.v.shape}")
        object.__setattr__(self, "epsilon", _positive("epsilon", self.epsilon))
        h = self.h
        if np.ndim(h) == 0:
            h = _positive("h", h)
            if self.u.ndim == 2:
                h = (h, h)
        else:
            h = tuple(_positive("h", x) for x in h)
            if self.u.ndim == 1 or len(h) != 2:
                raise ParameterDomainError(f"h must be a scalar or, on a 2D grid, a pair; got {self.h!r}")
        object.__setattr__(self, "h", h)
        # fail early on lambda underflow
        self.lam

    @property
    def ndim(self):
        return self.u.ndim

    @property
    def spacings(self):
        return (self.h,) if self.ndim == 1 else self.h

    @property
    def lam(self):
        lams = tuple(lambda_from_grid(h, self.epsilon) for h in self.spacings)
        return lams[0] if self.ndim == 1 else lams

    def kernel(self):
        if self.ndim == 1:
            return Wass1D(self.u.shape[0], self.lam)
        n, m = self.u.shape
        lam1, lam2 = self.lam
        return Wass2D(Wass1D(n, lam1), Wass1D(m, lam2))

    def swapped(self):
        return SinkhornProblem(self.v, self.u, self.h, self.epsilon)


@dataclass(frozen=True)
class SinkhornResult:
    a: np.ndarray
    b: np.ndarray
    distance: float
    transport_cost: float
    entropy_term: float
    iterations: int
    marginal_error: float
    converged: bool
    lam: object = field(default=None)

    def to_dict(self):
        lam = list(self.lam) if isinstance(self.lam, tuple) else self.lam
        return {
            "distance": self.distance,
            "transport_cost": self.transport_cost,
            "entropy_term": self.entropy_term,
            "iterations": self.iterations,
            "marginal_error": self.marginal_error,
            "lambda": lam,
        }


def _scale(target, k):
    # target / k with 0 / x = 0 on empty cells
    out = np.zeros_like(target)
    with np.errstate(divide="ignore", over="ignore"):
        np.divide(target, k, out=out, where=target > 0)
    return out


def _check_scaling(x, target, which, epsilon):
    if not np.all(np.isfinite(x)) or np.any(x[target > 0] <= 0.0):
        raise SinkhornUnderflowError(
            f"scaling {which} under- or overflowed at epsilon={epsilon:g}; "
            "retry with a larger epsilon"
        )


def _xlogy_sum(x, y):
    mask = x > 0
    return float(np.dot(x[mask], np.log(y[mask])))


def _point_mass(d):
    nz = np.flatnonzero(d.mass)
    return int(nz[0]) if nz.size == 1 else None


def _grid_offsets(p, i):
    # per-axis coordinates of flat index i
    if p.ndim == 1:
        return (i,)
    n = p.u.shape[0]
    return (i % n, i // n)


def _forced_plan(p):
    """Closed-form result when one marginal is a point mass.

    The plan is then ``e_i v^T`` (or ``u e_j^T``) whatever the kernel, so no
    iteration is needed and ``1 * ln 1 = 0`` is exact.
    """
    i, j = _point_mass(p.u), _point_mass(p.v)
    if i is None and j is None:
        return None
    if i is not None:
        fixed, spread, fixed_is_source = i, p.v.mass, True
    else:
        fixed, spread, fixed_is_source = j, p.u.mass, False
    idx = np.flatnonzero(spread)
    w = spread[idx]
    here = _grid_offsets(p, fixed)
    there = _grid_offsets(p, idx)
    steps = [np.abs(np.asarray(t) - h0) for t, h0 in zip(there, here)]
    cost_cells = sum(h * s for h, s in zip(p.spacings, steps))
    cost = float(np.dot(w, cost_cells))
    entropy = p.epsilon * _xlogy_sum(w, w)
    # scalings with a_i Q_ij b_j = gamma_ij: put the fixed side at 1
    lam = p.lam if p.ndim == 2 else (p.lam,)
    kvals = np.prod([np.asarray(l) ** s for l, s in zip(lam, steps)], axis=0)
    fixed_vec = np.zeros(p.u.size)
    fixed_vec[fixed] = 1.0
    other = np.zeros(p.u.size)
    other[idx] = w / kvals
    a, b = (fixed_vec, other) if fixed_is_source else (other, fixed_vec)
    return SinkhornResult(
        a=a,
        b=b,
        distance=cost + entropy,
        transport_cost=cost,
        entropy_term=entropy,
        iterations=0,
        marginal_error=0.0,
        converged=True,
        lam=p.lam,
    )


def _finish(p, q, a, b, it, err, converged):
    r = a * q.matvec(b)
    c = b * q.matvec(a)
    distance = p.epsilon * (_xlogy_sum(r, a) + _xlogy_sum(c, b))
    cost = _cost(p, a, b)
    return SinkhornResult(
        a=a,
        b=b,
        distance=distance,
        transport_cost=cost,
        entropy_term=distance - cost,
        iterations=it,
        marginal_error=err,
        converged=converged,
        lam=p.lam,
    )


def sinkhorn(p, tol=TOL.sinkhorn_tol, max_iter=TOL.sinkhorn_max_iter, callback=None):
    """Alternating diagonal scaling for the regularized transport problem.

    Starts from ``b = 1`` and updates ``a <- u / (Q b)`` then
    ``b <- v / (Q a)`` until the larger of the two marginal residuals drops
    below ``tol``.

    Parameters
    ----------
    p : SinkhornProblem
    tol : float
        Stopping threshold on the max-norm marginal residual.
    max_iter : int
    callback : callable, optional
        Called as ``callback(iteration, a, b, residual)`` after each sweep.

    Returns
    -------
    SinkhornResult
        If the budget runs out, the iterate with the smallest residual and
        ``converged=False``.

    Raises
    ------
    SinkhornUnderflowError
        A scaling entry on a cell with positive mass reached 0 or infinity.
    """
    tol = _positive("tol", tol)
    if int(max_iter) != max_iter or max_iter < 1:
        raise ParameterDomainError(f"max_iter must be a positive integer, got {max_iter!r}")
    q = p.kernel()
    forced = _forced_plan(p)
    if forced is not None:
        return forced
    u, v = p.u.mass, p.v.mass
    Kb = q.matvec(np.ones_like(v))
    best = None
    for it in range(1, int(max_iter) + 1):
        a = _scale(u, Kb)
        _check_scaling(a, u, "a", p.epsilon)
        Ka = q.matvec(a)
        b = _scale(v, Ka)
        _check_scaling(b, v, "b", p.epsilon)
        Kb = q.matvec(b)
        err = max(float(np.max(np.abs(a * Kb - u))), float(np.max(np.abs(b * Ka - v))))
        if callback is not None:
            callback(it, a, b, err)
        if err < tol:
            return _finish(p, q, a, b, it, err, True)
        if best is None or err < best[3]:
            best = (a, b, it, err)
    a, b, _, err = best
    return _finish(p, q, a, b, int(max_iter), err, False)


def sinkhorn_1d(p, tol=TOL.sinkhorn_tol, max_iter=TOL.sinkhorn_max_iter, callback=None):
    if p.ndim != 1:
        raise DimensionError("sinkhorn_1d needs distributions on a 1D grid")
    return sinkhorn(p, tol, max_iter, callback)


def sinkhorn_2d(p, tol=TOL.sinkhorn_tol, max_iter=TOL.sinkhorn_max_iter, callback=None):
    if p.ndim != 2:
        raise DimensionError("sinkhorn_2d needs distributions on a 2D grid")
    return sinkhorn(p, tol, max_iter, callback)


def _steps(n):
    i = np.arange(n)
    return np.abs(i[:, None] - i[None, :]).astype(np.float64)


def _cost(p, a, b, method="auto"):
    q = p.kernel()
    order = q.n if p.ndim == 1 else q.order
    if method == "auto":
        method = "dense" if order <= dense_limit() else "recurrence"
    if method not in ("dense", "recurrence"):
        raise ValueError(f"method must be 'auto', 'dense' or 'recurrence', got {method!r}")
    if p.ndim == 1:
        (h,) = p.spacings
        if method == "dense":
            C = h * _steps(q.n)
            return float(a @ ((q.todense(order) * C) @ b))
        return h * float(a @ _kernels.weighted_sweep(q.lam, b))
    h1, h2 = p.spacings
    if method == "dense":
        Q1, Q2 = q.q1.todense(order), q.q2.todense(order)
        C1, C2 = _steps(q.n), _steps(q.m)
        M = h1 * np.kron(Q2, Q1 * C1) + h2 * np.kron(Q2 * C2, Q1)
        return float(a @ (M @ b))
    B = b.reshape(q.grid_shape)
    rows = _kernels.symmetric_sweep_rows
    wrows = _kernels.weighted_sweep_rows
    W1 = _sweep_axis(rows, q.q2.lam, _sweep_axis(wrows, q.q1.lam, B, 1), 0)
    W2 = _sweep_axis(wrows, q.q2.lam, _sweep_axis(rows, q.q1.lam, B, 1), 0)
    return float(a @ (h1 * W1 + h2 * W2).reshape(-1))


def transport_cost(r, p, method="auto"):
    """``<gamma, C>`` for the plan implied by the scalings in ``r``.

    ``method="auto"`` sums densely up to the dense limit and otherwise uses
    the O(n) weighted recurrence ``sum_j |i-j| lam**|i-j| b_j``.
    """
    return _cost(p, r.a, r.b, method)


def parse_distribution(text, shape=None):
    """Parse masses from text.

    One value per line for 1D; comma-separated rows for 2D.  Blank lines and
    lines starting with ``#`` are skipped.  ``shape`` (``(n,)`` or
    ``(n, m)`` with ``n`` columns) is checked when given.
    """
    rows = []
    lines = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.replace("−", "-").split(",")
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise DistributionError(f"cannot parse {line!r} as numbers", lineno) from None
        for x in row:
            if not math.isfinite(x):
                raise DistributionError(f"non-finite value in {line!r}", lineno)
            if x < 0:
                raise DistributionError(f"negative mass {x!r}", lineno)
        if rows and len(row) != len(rows[0]):
            raise DistributionError(f"expected {len(rows[0])} values, found {len(row)}", lineno)
        rows.append(row)
        lines.append(lineno)
    if not rows:
        raise DistributionError("no values found")
    two_d = len(rows[0]) > 1 or (shape is not None and len(shape) == 2)
    if two_d:
        grid_shape = (len(rows[0]), len(rows))
        if shape is not None and tuple(shape) != grid_shape:
            raise DistributionError(
                f"grid has {grid_shape[0]} columns and {grid_shape[1]} rows, expected {tuple(shape)}"
            )
        return DiscreteDist.from_values(np.array(rows), grid_shape)
    values = [r[0] for r in rows]
    if shape is not None and tuple(shape) != (len(values),):
        raise DistributionError(f"found {len(values)} values, expected {shape[0]}")
    return DiscreteDist.from_values(values)


def load_distribution(source, shape=None):
    """Read a distribution from a path or an open text stream."""
    if hasattr(source, "read"):
        return parse_distribution(source.read(), shape)
    try:
        with open(os.fspath(source), encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DistributionError(f"cannot read {source}: {exc.strerror}") from None
    return parse_distribution(text, shape)
