"""Exact norms, closed-form bounds and spectral regions.

The bound formulas are plain arithmetic in ``n`` and ``lam`` so the rational
ones also accept :class:`fractions.Fraction` and can be compared exactly.

Several one-dimensional bounds degenerate at ``n = 1``: the spectral radius
bound ``1 + lam``, the numerical-range endpoint, the third term of the
spectral-norm minimum, the inverse 1-norm lower bound and the quantities built
from them.  Their derivations need the leading 2x2 principal submatrix.  In a
:class:`BoundReport` such bounds are left empty for ``n = 1`` and the formula
value is listed under a separate ``*_as_printed`` entry that is never
asserted.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .config import TOL, bound_slack
from .errors import ConvergenceError, DegenerateOrderError

__all__ = [
    "BoundEntry",
    "BoundReport",
    "ExactValues",
    "Region",
    "CayleyChecks",
    "exact_norm1",
    "exact_inv_norm1",
    "norm2_extremes",
    "l_norm2",
    "exact_values",
    "oracle_exact_values",
    "bounds_1d",
    "bounds_2d",
    "gershgorin_region",
    "numerical_range_interval",
    "cayley_checks",
]

ORACLE_LIMIT = 256


# ---------------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------------


def norm1_lower(lam):
    return 1 / (1 + lam) ** 2


def norm1_upper(n, lam):
    return 1 + 2 * lam * (1 - lam ** (n - 1)) / (1 - lam)


def baseline_norm1_upper(lam):
    return (1 + lam) / (1 - lam)


def baseline_cond1_upper(lam):
    return (1 + lam) ** 2 / (1 - lam) ** 2


def l_norm2_bound(n, lam):
    """Upper bound on the spectral norm of the strictly lower part ``L``."""
    if n < 2:
        raise DegenerateOrderError("the bound on ||L||_2 needs n >= 2")
    return math.sqrt((n - 2 + lam**2) * (1 + (lam**4 - lam ** (2 * n)) / (1 - lam**2)))


def norm2_upper_terms(n, lam, l_norm):
    return (
        1 + 2 * l_norm,
        (3 - lam) / (1 - lam),
        2 * (1 + lam) * (1 - lam ** (n - 1)) / (1 - lam),
    )


def norm2_upper(n, lam, l_norm):
    return min(norm2_upper_terms(n, lam, l_norm))


def inv_norm1_lower(n, lam):
    return (1 - lam) / ((1 + lam) * (1 - lam**n) ** 2)


def inv_norm2_lower(lam):
    return (1 - lam) / (1 + lam)


def inv_norm2_upper(lam):
    return (1 + lam) / (1 - lam)


def cond1_lower(n, lam):
    return (1 - lam) / ((1 + lam) ** 3 * (1 - lam**n) ** 2)


def cond1_upper(n, lam):
    return (1 + lam) * (1 - lam + 2 * lam * (1 - lam ** (n - 1))) / (1 - lam) ** 2


def cond2_lower(lam):
    return (1 - lam) / (1 + lam) ** 3


def cond2_upper(n, lam, l_norm):
    return (1 + lam) / (1 - lam) * norm2_upper(n, lam, l_norm)


def spectral_radius_lower(lam):
    return 1 + lam


def eigenvalue_upper(n, lam, l_norm):
    return 1 + 2 * l_norm * math.cos(math.pi / (n + 1))


def numerical_range_endpoint(n, lam):
    return (1 + lam) * (1 - lam ** (n - 1)) / (1 - lam)


def norm1_tightening_gap(n, lam):
    """Baseline 1-norm bound minus the sharper one, free of cancellation."""
    return 2 * lam**n / (1 - lam)


def cond1_tightening_gap(n, lam):
    return 2 * (1 + lam) * lam**n / (1 - lam) ** 2


# ---------------------------------------------------------------------------
# exact quantities
# ---------------------------------------------------------------------------


def exact_norm1(q):
    """``||Q||_1 = ||Q||_inf``: the largest row sum, from geometric sums."""
    n, lam = q.n, q.lam
    i = np.arange(n)
    # row i: sum_{k=0}^{i} lam^k + sum_{k=1}^{n-1-i} lam^k
    left = (1 - np.power(lam, i + 1)) / (1 - lam)
    right = lam * (1 - np.power(lam, n - 1 - i)) / (1 - lam)
    return float(np.max(left + right))


def exact_inv_norm1(q):
    """``||Q^-1||_1`` from the closed-form tridiagonal inverse."""
    n, lam = q.n, q.lam
    if n == 1:
        return 1.0
    if n == 2:
        return 1 / (1 - lam)
    return (1 + lam) / (1 - lam)


def _power(apply, v, tol, max_iter, what):
    v = v / np.linalg.norm(v)
    mu_old = None
    for it in range(1, max_iter + 1):
        w = apply(v)
        mu = float(v @ w)
        v = w / np.linalg.norm(w)
        if mu_old is not None and abs(mu - mu_old) <= tol * abs(mu):
            return mu
        mu_old = mu
    raise ConvergenceError(f"power iteration for {what} did not converge", max_iter)


def norm2_extremes(q, tol=TOL.power_tol, max_iter=TOL.power_max_iter):
    """Smallest and largest eigenvalues of ``Q`` by power and inverse iteration.

    The largest eigenvector of a positive symmetric Toeplitz matrix is
    symmetric and the smallest has the parity of ``(-1)**i``, so the two runs
    start from the all-ones and the alternating vector respectively.  Both
    iterate on shifted operators whose spectra start at zero:
    ``Q - s I`` with ``s = (1-lam)/(1+lam) <= lambda_min``, then
    ``Q^-1 - I / lambda_max``.
    """
    if q.n == 1:
        return 1.0, 1.0
    shift = inv_norm2_lower(q.lam)
    top = _power(lambda x: q.matvec(x) - shift * x, np.ones(q.n), tol, max_iter, "lambda_max")
    lmax = top + shift
    alt = (-1.0) ** np.arange(q.n)
    inv_top = _power(lambda x: q.solve(x) - x / lmax, alt, tol, max_iter, "lambda_min")
    return 1.0 / (inv_top + 1.0 / lmax), lmax


def l_norm2(q, tol=TOL.power_tol, max_iter=TOL.power_max_iter):
    """Spectral norm of the strictly lower part of ``Q``.

    Dense singular value for orders up to ``ORACLE_LIMIT``, structured power
    iteration on ``L^T L`` beyond.
    """
    if q.n == 1:
        return 0.0
    if q.n <= ORACLE_LIMIT:
        return oracle.spectral_norm(q.strict_lower())
    top = _power(lambda x: q.lt_matvec(q.l_matvec(x)), np.ones(q.n), tol, max_iter, "||L||_2")
    return math.sqrt(top)


@dataclass(frozen=True)
class ExactValues:
    norm1: float
    inv_norm1: float
    lmin: float
    lmax: float
    l_norm2: float

    @property
    def inv_norm2(self):
        return 1.0 / self.lmin


def exact_values(q):
    lmin, lmax = norm2_extremes(q)
    return ExactValues(exact_norm1(q), exact_inv_norm1(q), lmin, lmax, l_norm2(q))


def oracle_exact_values(q):
    """Every exact quantity from dense brute force (no structure used)."""
    Q = q.todense()
    eig = oracle.dense_eigs_symmetric(Q).values
    return ExactValues(
        norm1=oracle.dense_norm(Q, 1),
        inv_norm1=oracle.dense_norm(oracle.dense_inverse(Q), 1),
        lmin=float(eig[0]),
        lmax=float(eig[-1]),
        l_norm2=oracle.spectral_norm(np.tril(Q, -1)),
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _num(x):
    return None if x is None else float(x)


@dataclass
class BoundEntry:
    name: str
    exact: float = None
    lower: float = None
    upper: float = None
    baseline: float = None
    strict_lower: bool = False
    passed: bool = None
    slack: float = None

    def evaluate(self, tol=TOL.bound_slack):
        if self.exact is None or (self.lower is None and self.upper is None):
            self.passed, self.slack = None, None
            return self
        margins = []
        ok = True
        if self.lower is not None:
            margins.append(self.exact - self.lower)
            if self.strict_lower and self.lower == 0:
                ok &= self.exact > 0
            else:
                ok &= self.exact >= self.lower - bound_slack(self.lower, tol)
        if self.upper is not None:
            margins.append(self.upper - self.exact)
            ok &= self.exact <= self.upper + bound_slack(self.upper, tol)
        self.passed = bool(ok)
        self.slack = float(min(margins))
        return self

    def to_dict(self):
        return {
            "name": self.name,
            "exact": _num(self.exact),
            "lower": _num(self.lower),
            "upper": _num(self.upper),
            "baseline": _num(self.baseline),
            "pass": self.passed,
            "slack": _num(self.slack),
        }


CSV_FIELDS = ("name", "exact", "lower", "upper", "baseline", "pass", "slack")


@dataclass
class BoundReport:
    """Exact values, bounds and pass flags for one matrix.

    ``quantities`` entries without an exact value (formula-only reports, or
    ``*_as_printed`` entries) carry ``passed = None`` and do not affect
    :attr:`all_pass`.
    """

    n: int
    lam: float
    quantities: list = field(default_factory=list)
    m: int = None
    lam2: float = None

    @property
    def all_pass(self):
        return all(e.passed is not False for e in self.quantities)

    def __getitem__(self, name):
        for e in self.quantities:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self):
        return [e.name for e in self.quantities]

    def failures(self):
        return [e for e in self.quantities if e.passed is False]

    def to_dict(self):
        d = {"n": self.n, "lambda": self.lam}
        if self.m is not None:
            d["m"] = self.m
            d["lambda2"] = self.lam2
        d["quantities"] = [e.to_dict() for e in self.quantities]
        d["all_pass"] = self.all_pass
        return d

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def csv_rows(self):
        for e in self.quantities:
            d = e.to_dict()
            yield [d[k] for k in CSV_FIELDS]


def _entries_1d(n, lam, ex, l_norm):
    """Bound entries for one factor; ``ex`` may be None (formula only)."""
    get = (lambda attr: None) if ex is None else (lambda attr: getattr(ex, attr))
    lmin, lmax = get("lmin"), get("lmax")
    inv2 = None if ex is None else ex.inv_norm2
    cond1 = None if ex is None else ex.norm1 * ex.inv_norm1
    cond2 = None if ex is None else lmax * inv2
    full = n >= 2
    out = []
    add = out.append

    add(BoundEntry("eig_min", lmin, lower=0.0, strict_lower=True))
    if lam <= 1 / 3:
        add(BoundEntry("eig_max_small_lambda", lmax, upper=2.0))
    add(BoundEntry("eig_upper", lmax, upper=eigenvalue_upper(n, lam, l_norm)))
    add(BoundEntry("spectral_radius", lmax, lower=spectral_radius_lower(lam) if full else None))
    add(BoundEntry("numerical_range", lmax, upper=numerical_range_endpoint(n, lam) if full else None))
    add(BoundEntry("norm1", get("norm1"), lower=norm1_lower(lam), upper=norm1_upper(n, lam),
                   baseline=baseline_norm1_upper(lam)))
    add(BoundEntry("norm2", lmax, lower=norm1_lower(lam),
                   upper=norm2_upper(n, lam, l_norm) if full else None))
    add(BoundEntry("norm2_hadamard", lmax, upper=float(n)))
    if full:
        add(BoundEntry("l_norm2", get("l_norm2"), upper=l_norm2_bound(n, lam)))
    add(BoundEntry("inv_norm1", get("inv_norm1"), lower=inv_norm1_lower(n, lam) if full else None,
                   upper=baseline_norm1_upper(lam), baseline=baseline_norm1_upper(lam)))
    add(BoundEntry("inv_norm2", inv2, lower=inv_norm2_lower(lam), upper=inv_norm2_upper(lam)))
    add(BoundEntry("cond1", cond1, lower=cond1_lower(n, lam) if full else None,
                   upper=cond1_upper(n, lam), baseline=baseline_cond1_upper(lam)))
    add(BoundEntry("cond2", cond2, lower=cond2_lower(lam),
                   upper=cond2_upper(n, lam, l_norm) if full else None))
    add(BoundEntry("cond2_numerical_radius", cond2, lower=1.0,
                   upper=None if ex is None else 2 * lmax * inv2))
    if not full:
        add(BoundEntry("spectral_radius_as_printed", lmax, lower=spectral_radius_lower(lam)))
        add(BoundEntry("numerical_range_as_printed", lmax, upper=numerical_range_endpoint(n, lam)))
        add(BoundEntry("norm2_as_printed", lmax, upper=norm2_upper(n, lam, l_norm)))
        add(BoundEntry("inv_norm1_as_printed", get("inv_norm1"), lower=inv_norm1_lower(n, lam)))
        add(BoundEntry("cond1_as_printed", cond1, lower=cond1_lower(n, lam)))
        add(BoundEntry("cond2_as_printed", cond2, upper=cond2_upper(n, lam, l_norm)))
    return out


def _finish(entries, tol):
    for e in entries:
        if e.name.endswith("_as_printed"):
            e.passed, e.slack = None, None
        else:
            e.evaluate(tol)
    return entries


def bounds_1d(q, with_exact=False, exact=None, tol=TOL.bound_slack):
    """Evaluate every one-dimensional bound for ``q``.

    Parameters
    ----------
    q : Wass1D
    with_exact : bool
        Fill exact values (closed forms plus power iteration) and pass flags.
    exact : ExactValues, optional
        Externally computed exact values, e.g. :func:`oracle_exact_values`.
        Implies ``with_exact``.
    tol : float
        Relative slack for the inequality checks.

    Returns
    -------
    BoundReport
    """
    if exact is None and with_exact:
        exact = exact_values(q)
    if exact is not None:
        l_norm = exact.l_norm2
    else:
        l_norm = l_norm2_bound(q.n, q.lam) if q.n >= 2 else 0.0
    entries = _entries_1d(q.n, q.lam, exact, l_norm)
    return BoundReport(q.n, q.lam, _finish(entries, tol))


def _product_values(e1, e2):
    return ExactValues(
        norm1=e1.norm1 * e2.norm1,
        inv_norm1=e1.inv_norm1 * e2.inv_norm1,
        lmin=e1.lmin * e2.lmin,
        lmax=e1.lmax * e2.lmax,
        l_norm2=float("nan"),
    )


def bounds_2d(q, with_exact=False, exact=None, tol=TOL.bound_slack):
    """Two-dimensional bounds as products of per-factor one-dimensional ones.

    Each factor's bounds use that factor's own order (``n`` for ``q1``,
    ``m`` for ``q2``).  Where the published two-dimensional statement writes
    ``n`` in the exponents of the ``lam2`` terms, that variant is listed as an
    ``*_as_printed`` entry when ``n != m``.
    """
    q1, q2 = q.q1, q.q2
    if exact is None and with_exact:
        exact = (exact_values(q1), exact_values(q2))
    if exact is not None:
        ex1, ex2 = exact
        ln1, ln2 = ex1.l_norm2, ex2.l_norm2
        ex = _product_values(ex1, ex2)
    else:
        ln1 = l_norm2_bound(q1.n, q1.lam) if q1.n >= 2 else 0.0
        ln2 = l_norm2_bound(q2.n, q2.lam) if q2.n >= 2 else 0.0
        ex = None
    n, m, l1, l2 = q1.n, q2.n, q1.lam, q2.lam
    full = n >= 2 and m >= 2
    get = (lambda attr: None) if ex is None else (lambda attr: getattr(ex, attr))
    lmin, lmax = get("lmin"), get("lmax")
    inv2 = None if ex is None else 1.0 / ex.lmin
    cond1 = None if ex is None else ex.norm1 * ex.inv_norm1
    cond2 = None if ex is None else lmax * inv2
    m1 = norm2_upper(n, l1, ln1)
    m2 = norm2_upper(m, l2, ln2)

    out = []
    add = out.append
    add(BoundEntry("eig_min", lmin, lower=0.0, strict_lower=True))
    if l1 <= 1 / 3 and l2 <= 1 / 3:
        add(BoundEntry("eig_max_small_lambda", lmax, upper=4.0))
    add(BoundEntry("eig_upper", lmax, upper=eigenvalue_upper(n, l1, ln1) * eigenvalue_upper(m, l2, ln2)))
    add(BoundEntry("spectral_radius", lmax,
                   lower=spectral_radius_lower(l1) * spectral_radius_lower(l2) if full else None))
    add(BoundEntry("numerical_range", lmax,
                   upper=numerical_range_endpoint(n, l1) * numerical_range_endpoint(m, l2) if full else None))
    add(BoundEntry("norm1", get("norm1"), lower=norm1_lower(l1) * norm1_lower(l2),
                   upper=norm1_upper(n, l1) * norm1_upper(m, l2),
                   baseline=baseline_norm1_upper(l1) * baseline_norm1_upper(l2)))
    add(BoundEntry("norm2", lmax, lower=norm1_lower(l1) * norm1_lower(l2), upper=m1 * m2 if full else None))
    add(BoundEntry("norm2_hadamard", lmax, upper=float(n * m)))
    add(BoundEntry("inv_norm1", get("inv_norm1"),
                   lower=inv_norm1_lower(n, l1) * inv_norm1_lower(m, l2) if full else None,
                   upper=baseline_norm1_upper(l1) * baseline_norm1_upper(l2),
                   baseline=baseline_norm1_upper(l1) * baseline_norm1_upper(l2)))
    add(BoundEntry("inv_norm2", inv2, lower=inv_norm2_lower(l1) * inv_norm2_lower(l2),
                   upper=inv_norm2_upper(l1) * inv_norm2_upper(l2)))
    add(BoundEntry("cond1", cond1, lower=cond1_lower(n, l1) * cond1_lower(m, l2) if full else None,
                   upper=cond1_upper(n, l1) * cond1_upper(m, l2),
                   baseline=baseline_cond1_upper(l1) * baseline_cond1_upper(l2)))
    add(BoundEntry("cond2", cond2, lower=cond2_lower(l1) * cond2_lower(l2),
                   upper=m1 * m2 * inv_norm2_upper(l1) * inv_norm2_upper(l2) if full else None))
    add(BoundEntry("cond2_numerical_radius", cond2, lower=1.0,
                   upper=None if ex is None else 2 * lmax * inv2))
    if n != m:
        # published variant: lam2 terms carry the exponent of the first factor
        add(BoundEntry("numerical_range_as_printed", lmax,
                       upper=numerical_range_endpoint(n, l1) * numerical_range_endpoint(n, l2)))
        add(BoundEntry("norm1_as_printed", get("norm1"), upper=norm1_upper(n, l1) * norm1_upper(n, l2)))
        add(BoundEntry("norm2_as_printed", lmax, upper=m1 * norm2_upper(n, l2, ln2)))
        add(BoundEntry("inv_norm1_as_printed", get("inv_norm1"),
                       lower=inv_norm1_lower(n, l1) * inv_norm1_lower(n, l2)))
        add(BoundEntry("cond1_as_printed", cond1, lower=cond1_lower(n, l1) * cond1_lower(n, l2),
                       upper=cond1_upper(n, l1) * cond1_upper(n, l2)))
    report = BoundReport(n, l1, _finish(out, tol), m=m, lam2=l2)
    return report


# ---------------------------------------------------------------------------
# regions and Cayley transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """A union of closed discs or a real interval.

    For intervals ``endpoints = (lo, hi)``; ``open_lo`` marks ``(lo, hi]``.
    ``in_open_0_2`` is set on Gershgorin regions for ``lam <= 1/3``, where
    every eigenvalue is known to lie in ``(0, 2)``.
    """

    kind: str
    centers: tuple = ()
    radii: tuple = ()
    endpoints: tuple = ()
    open_lo: bool = False
    in_open_0_2: bool = False

    def contains(self, z, tol=0.0):
        if self.kind == "disc-union":
            return any(abs(z - c) <= r + tol for c, r in zip(self.centers, self.radii))
        lo, hi = self.endpoints
        above = z > lo - tol if self.open_lo else z >= lo - tol
        return bool(above and z <= hi + tol)

    def to_dict(self):
        if self.kind == "disc-union":
            return {"kind": self.kind, "centers": list(self.centers), "radii": list(self.radii)}
        return {"kind": self.kind, "endpoints": list(self.endpoints), "open_lo": self.open_lo}


def gershgorin_region(q):
    """All Gershgorin discs of ``Q`` coincide in centre; return the largest."""
    radius = exact_norm1(q) - 1.0
    return Region("disc-union", centers=(1.0,), radii=(radius,), in_open_0_2=q.lam <= 1 / 3)


def numerical_range_interval(q):
    """Interval ``(0, (1+lam)(1-lam**(n-1))/(1-lam)]`` containing ``W(Q)``."""
    if q.n < 2:
        raise DegenerateOrderError("the numerical-range bound is stated for n >= 2")
    return Region("interval", endpoints=(0.0, numerical_range_endpoint(q.n, q.lam)), open_lo=True)


@dataclass(frozen=True)
class CayleyChecks:
    symmetric: bool
    round_trip: bool
    not_positive_definite: bool
    eigenvalues: np.ndarray

    @property
    def all_pass(self):
        return self.symmetric and self.round_trip and self.not_positive_definite


def cayley_checks(q, limit=None):
    """Check ``F = (I + Q)^-1 (I - Q)``: symmetric, involutive, never PD."""
    Q = q.todense(limit)
    eye = np.eye(q.n)
    F = oracle.dense_solve(eye + Q, eye - Q)
    symmetric = bool(np.max(np.abs(F - F.T)) <= 1e-10)
    back = oracle.dense_solve(eye + F, eye - F)
    round_trip = bool(np.max(np.abs(back - Q)) <= 1e-9)
    eig = oracle.dense_eigs_symmetric(0.5 * (F + F.T)).values
    return CayleyChecks(symmetric, round_trip, bool(eig[0] <= 0.0), eig)
