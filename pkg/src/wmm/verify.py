"""Grid verification suites behind ``wmm verify``.

Each suite maps a grid point to a list of :class:`Check` records.  Points are
independent, so they may be farmed out to worker processes; results are
always reassembled in canonical order (``n`` ascending, then ``lam``).

Bound formulas are looked up through the :mod:`wmm.bounds` module at call
time, so a patched formula is seen by every suite.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import product

import numpy as np

from . import bounds, hadamard, oracle
from .config import TOL, dense_limit
from .core import Wass1D, new_2d

__all__ = [
    "Check",
    "SuiteResult",
    "VerifyConfig",
    "SUITES",
    "parse_int_range",
    "parse_real_range",
    "run_suite",
    "run_verify",
]

SUITES = (
    "sandwich",
    "tightening",
    "containment",
    "factorization",
    "determinant",
    "hadamard",
    "kronecker",
)

# per-suite order caps; grid points above them are skipped
FACTOR_MAX_N = 64
LOGDET_MAX_N = 32
HADAMARD_MAX_N = 32
HADAMARD_LOG_CAP = 300.0
CAYLEY_MAX_N = 64


@dataclass(frozen=True)
class Check:
    point: str
    quantity: str
    passed: bool
    slack: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "slack", float(self.slack))

    def label(self):
        return f"{self.point} {self.quantity}"


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    passed: int = 0
    skipped: int = 0
    worst_slack: float = None
    worst_at: str = None
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return self.passed == self.checks

    def add(self, check):
        self.checks += 1
        if check.passed:
            self.passed += 1
        else:
            self.failures.append(check)
        if self.worst_slack is None or check.slack < self.worst_slack:
            self.worst_slack = check.slack
            self.worst_at = check.label()

    def to_dict(self):
        return {
            "suite": self.name,
            "checks": self.checks,
            "passed": self.passed,
            "failed": self.checks - self.passed,
            "skipped_points": self.skipped,
            "worst_slack": self.worst_slack,
            "worst_at": self.worst_at,
            "failures": [f"{c.label()}: {c.detail}" for c in self.failures],
        }


def _decimal_values(lo, hi, step):
    if step <= 0:
        raise ValueError(f"range step must be positive, got {step}")
    out = []
    x = lo
    while x <= hi:
        out.append(x)
        x += step
    return out


def parse_int_range(text):
    """``"1:64"``, ``"1:64:2"`` or ``"1,2,5"`` to a sorted tuple of ints."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        values = _decimal_values(lo, hi, step)
    else:
        values = [int(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError(f"empty range {text!r}")
    return tuple(sorted(set(values)))


def parse_real_range(text):
    """``"0.05:0.95:0.05"`` or ``"0.1,0.5"``; steps are exact decimals."""
    text = text.strip()
    if ":" in text:
        parts = [Decimal(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError(f"real ranges need lo:hi:step, got {text!r}")
        values = [float(x) for x in _decimal_values(*parts)]
    else:
        values = [float(Decimal(p)) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError(f"empty range {text!r}")
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class VerifyConfig:
    """Grid and tolerances for a verification run.

    ``ns`` and ``lams`` span the one-dimensional grid; the Kronecker suite
    uses its own small grid ``kron_ns`` x ``kron_lams`` for both factors.
    """

    ns: tuple = tuple(range(1, 65))
    lams: tuple = tuple(float(Decimal(k) / 20) for k in range(1, 20))
    suites: tuple = SUITES
    tol: float = TOL.bound_slack
    jobs: int = 1
    dense_limit: int = None
    kron_ns: tuple = tuple(range(1, 7))
    kron_lams: tuple = (0.1, 0.5, 0.9)

    def __post_init__(self):
        if not self.ns or min(self.ns) < 1:
            raise ValueError("grid orders must be positive integers")
        if not self.lams or not all(0.0 < lam < 1.0 for lam in self.lams):
            raise ValueError("grid lambda values must lie in (0, 1)")
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise ValueError(f"unknown suites: {', '.join(sorted(unknown))}")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if not (math.isfinite(self.tol) and self.tol >= 0):
            raise ValueError("tolerance must be a finite non-negative number")
        object.__setattr__(self, "ns", tuple(sorted(set(self.ns))))
        object.__setattr__(self, "lams", tuple(sorted(set(self.lams))))
        object.__setattr__(self, "suites", tuple(s for s in SUITES if s in self.suites))

    @property
    def limit(self):
        return dense_limit() if self.dense_limit is None else self.dense_limit

    def points(self, suite):
        if suite == "kronecker":
            return list(product(self.kron_ns, self.kron_ns, self.kron_lams, self.kron_lams))
        return list(product(self.ns, self.lams))


def _tol_check(point, quantity, err, tol):
    return Check(point, quantity, bool(err <= tol), float(tol - err), f"error {err!r} vs tolerance {tol!r}")


def _label(n, lam):
    return f"n={n} lambda={lam!r}"


def _sandwich(n, lam, tol, limit):
    q = Wass1D(n, lam)
    if n <= min(limit, bounds.ORACLE_LIMIT):
        ex = bounds.oracle_exact_values(q)
    else:
        ex = bounds.exact_values(q)
    report = bounds.bounds_1d(q, exact=ex, tol=tol)
    out = []
    for e in report.quantities:
        if e.passed is None:
            continue
        detail = f"exact={e.exact!r} lower={e.lower!r} upper={e.upper!r}"
        out.append(Check(_label(n, lam), e.name, e.passed, e.slack, detail))
    return out


def _tightening(n, lam, tol, limit):
    # exact rational arithmetic: ties in floating point are not ties
    r = Fraction(repr(lam))
    point = _label(n, lam)
    out = []
    for name, new, old in (
        ("norm1_upper", bounds.norm1_upper(n, r), bounds.baseline_norm1_upper(r)),
        ("cond1_upper", bounds.cond1_upper(n, r), bounds.baseline_cond1_upper(r)),
    ):
        gap = old - new
        out.append(Check(point, name, gap > 0, float(gap), f"new={float(new)!r} baseline={float(old)!r}"))
    return out


def _containment(n, lam, tol, limit):
    if n > limit:
        return None
    q = Wass1D(n, lam)
    eig = oracle.dense_eigs_symmetric(q.todense(limit)).values
    point = _label(n, lam)
    out = []
    disc = bounds.gershgorin_region(q)
    # eigenvalues carry Jacobi error of order 1e-12 * ||Q||
    etol = 1e-10 * max(1.0, disc.radii[0] + 1.0)
    margin = min(disc.radii[0] - abs(z - 1.0) for z in eig)
    out.append(Check(point, "gershgorin", all(disc.contains(z, etol) for z in eig), margin))
    if n >= 2:
        iv = bounds.numerical_range_interval(q)
        lo, hi = iv.endpoints
        margin = min(eig[0] - lo, hi - eig[-1])
        out.append(Check(point, "numerical_range", all(iv.contains(z, etol) for z in eig), margin))
    if disc.in_open_0_2:
        margin = min(eig[0], 2.0 - eig[-1])
        out.append(Check(point, "eigenvalues_in_0_2", bool(eig[0] > 0 and eig[-1] < 2), margin))
    if n <= CAYLEY_MAX_N:
        c = bounds.cayley_checks(q, limit)
        out.append(Check(point, "cayley", c.all_pass, -float(c.eigenvalues[0]),
                         f"symmetric={c.symmetric} round_trip={c.round_trip} "
                         f"not_pd={c.not_positive_definite}"))
    return out


def _factorization(n, lam, tol, limit):
    if n > min(limit, FACTOR_MAX_N):
        return None
    q = Wass1D(n, lam)
    Q = q.todense(limit)
    f = q.factor()
    point = _label(n, lam)
    rng = np.random.default_rng(n)
    x = rng.standard_normal(n)
    resid = np.max(np.abs(f.upper() @ Q @ f.lower() - np.diag(f.dhat)))
    inv = np.max(np.abs(q.inverse_tridiagonal().todense() @ Q - np.eye(n)))
    mv = np.max(np.abs(q.matvec(x) - Q @ x))
    sol = np.linalg.norm(Q @ q.solve(x) - x) / np.linalg.norm(x)
    return [
        _tol_check(point, "factor_residual", resid, TOL.factor_residual),
        _tol_check(point, "tridiagonal_inverse", inv, 1e-10),
        _tol_check(point, "matvec", mv, TOL.matvec_abs_per_n * n),
        _tol_check(point, "solve_residual", sol, TOL.solve_rel),
    ]


def _determinant(n, lam, tol, limit):
    if n > min(limit, LOGDET_MAX_N):
        return None
    q = Wass1D(n, lam)
    sign, logdet = oracle.dense_logdet(q.todense(limit))
    point = _label(n, lam)
    return [
        _tol_check(point, "logdet", abs(q.logdet() - logdet), TOL.logdet_abs),
        Check(point, "det_sign", sign == 1.0, sign),
    ]


def _hadamard(n, lam, tol, limit):
    if n > min(limit, HADAMARD_MAX_N):
        return None
    q = Wass1D(n, lam)
    Q = q.todense(limit)
    point = _label(n, lam)
    A, At = hadamard.hadamard_split(q, limit)
    out = [_tol_check(point, "split_exact", float(np.max(np.abs(A * At - Q))), 0.0)]
    h = hadamard.HadamardInverse.of(q)
    if (n - 1) * math.log(1 / lam) >= HADAMARD_LOG_CAP:
        return out
    H = h.todense(limit)
    if lam >= 0.1:
        out.append(_tol_check(point, "product_ones", float(np.max(np.abs(Q * H - 1.0))), 1e-12))
    closed = float(hadamard.hinv_norm1_exact(h, log=False))
    dense = oracle.dense_norm(H, 1)
    out.append(_tol_check(point, "hinv_norm1", abs(closed - dense) / dense, 1e-9))
    return out


def _kronecker(n, m, l1, l2, tol, limit):
    q = new_2d(n, l1, m, l2)
    N = q.order
    if N > limit:
        return None
    Q = q.todense(limit)
    point = f"n={n} m={m} lambda1={l1!r} lambda2={l2!r}"
    rng = np.random.default_rng(N)
    x = rng.standard_normal(N)
    e1 = oracle.dense_eigs_symmetric(q.q1.todense(limit)).values
    e2 = oracle.dense_eigs_symmetric(q.q2.todense(limit)).values
    eig = oracle.dense_eigs_symmetric(Q).values
    pairs = np.sort(np.outer(e2, e1).reshape(-1))
    norm1 = bounds.exact_norm1(q.q1) * bounds.exact_norm1(q.q2)
    inv1 = bounds.exact_inv_norm1(q.q1) * bounds.exact_inv_norm1(q.q2)
    dense_norm1 = oracle.dense_norm(Q, 1)
    dense_inv1 = oracle.dense_norm(oracle.dense_inverse(Q), 1)
    _, dense_logdet = oracle.dense_logdet(Q)
    return [
        _tol_check(point, "matvec", float(np.max(np.abs(q.matvec(x) - Q @ x))), TOL.matvec_abs_per_n * N),
        _tol_check(point, "solve_residual",
                   float(np.linalg.norm(Q @ q.solve(x) - x) / np.linalg.norm(x)), TOL.solve_rel),
        _tol_check(point, "norm1_product", abs(norm1 - dense_norm1) / dense_norm1, 1e-12),
        _tol_check(point, "inv_norm1_product", abs(inv1 - dense_inv1) / dense_inv1, 1e-9),
        _tol_check(point, "norm2_product", abs(e1[-1] * e2[-1] - eig[-1]), 1e-8),
        _tol_check(point, "spectrum_products", float(np.max(np.abs(pairs - eig))), 1e-8),
        _tol_check(point, "logdet", abs(q.logdet() - dense_logdet), TOL.logdet_abs),
    ]


_POINT_FUNCS = {
    "sandwich": _sandwich,
    "tightening": _tightening,
    "containment": _containment,
    "factorization": _factorization,
    "determinant": _determinant,
    "hadamard": _hadamard,
    "kronecker": _kronecker,
}


def _run_point(args):
    suite, point, tol, limit = args
    return _POINT_FUNCS[suite](*point, tol, limit)


def run_suite(name, config=None, executor=None):
    """Run one suite over the configured grid and collect its checks."""
    config = VerifyConfig() if config is None else config
    limit = config.limit
    tasks = [(name, p, config.tol, limit) for p in config.points(name)]
    if executor is None:
        results = map(_run_point, tasks)
    else:
        results = executor.map(_run_point, tasks, chunksize=max(1, len(tasks) // (8 * config.jobs)))
    out = SuiteResult(name)
    for checks in results:
        if checks is None:
            out.skipped += 1
            continue
        for c in checks:
            out.add(c)
    return out


def run_verify(config=None):
    """Run every configured suite; returns results in canonical suite order."""
    config = VerifyConfig() if config is None else config
    if config.jobs == 1:
        return [run_suite(s, config) for s in config.suites]
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        return [run_suite(s, config, pool) for s in config.suites]
