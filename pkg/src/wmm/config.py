"""Tolerance constants and the dense-materialization cap.

All numerical thresholds used by the package live here so that tests and the
command line can override them in one place.
"""

import os
from dataclasses import dataclass

DEFAULT_DENSE_LIMIT = 4096
DENSE_LIMIT_ENV = "WMM_DENSE_LIMIT"


@dataclass(frozen=True)
class Tolerances:
    solve_rel: float = 1e-10
    matvec_abs_per_n: float = 1e-12
    factor_residual: float = 1e-12
    logdet_abs: float = 1e-8
    bound_slack: float = 1e-9
    jacobi_off: float = 1e-12
    jacobi_max_sweeps: int = 100
    pivot_min: float = 1e-14
    symmetry: float = 1e-12
    power_tol: float = 1e-12
    power_max_iter: int = 50000
    sinkhorn_tol: float = 1e-8
    sinkhorn_max_iter: int = 100000
    # closed forms whose exponent exceeds this are reported as natural logs
    log_exponent: float = 600.0


TOL = Tolerances()


def dense_limit():
    """Return the dense cap, honouring the ``WMM_DENSE_LIMIT`` override."""
    raw = os.environ.get(DENSE_LIMIT_ENV)
    if raw is None:
        return DEFAULT_DENSE_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{DENSE_LIMIT_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{DENSE_LIMIT_ENV} must be positive, got {value}")
    return value


def bound_slack(bound, tol=TOL.bound_slack):
    """Absolute slack allowed when checking an inequality against ``bound``."""
    return tol * max(1.0, abs(float(bound)))
