"""Structured Wasserstein-1 metric matrices.

``Q`` has entries ``lam**|i-j|`` on a uniform grid.  The package provides O(n)
products and solves, exact norms and closed-form bounds, Hadamard-inverse
norms and Sinkhorn transport built on the structured kernel, each checked
against a naive dense oracle.
"""

from .bounds import (
    BoundReport,
    bounds_1d,
    bounds_2d,
    cayley_checks,
    exact_inv_norm1,
    exact_norm1,
    exact_values,
    gershgorin_region,
    norm2_extremes,
    numerical_range_interval,
)
from .config import TOL, Tolerances, dense_limit
from .core import Wass1D, Wass2D, new_1d, new_2d
from .errors import (
    ConvergenceError,
    DegenerateOrderError,
    DenseLimitError,
    DimensionError,
    DistributionError,
    NotSymmetricError,
    ParameterDomainError,
    SingularMatrixError,
    SinkhornUnderflowError,
    WmmError,
)
from .hadamard import HadamardInverse, hadamard_split, hinv_2d_norms, hinv_norm1_exact, hinv_norm2_bound, table1
from .sinkhorn import (
    DiscreteDist,
    SinkhornProblem,
    SinkhornResult,
    lambda_from_grid,
    load_distribution,
    sinkhorn_1d,
    sinkhorn_2d,
    transport_cost,
)

__all__ = [
    "BoundReport",
    "bounds_1d",
    "bounds_2d",
    "cayley_checks",
    "exact_inv_norm1",
    "exact_norm1",
    "exact_values",
    "gershgorin_region",
    "norm2_extremes",
    "numerical_range_interval",
    "TOL",
    "Tolerances",
    "dense_limit",
    "Wass1D",
    "Wass2D",
    "new_1d",
    "new_2d",
    "ConvergenceError",
    "DegenerateOrderError",
    "DenseLimitError",
    "DimensionError",
    "DistributionError",
    "NotSymmetricError",
    "ParameterDomainError",
    "SingularMatrixError",
    "SinkhornUnderflowError",
    "WmmError",
    "HadamardInverse",
    "hadamard_split",
    "hinv_2d_norms",
    "hinv_norm1_exact",
    "hinv_norm2_bound",
    "table1",
    "DiscreteDist",
    "SinkhornProblem",
    "SinkhornResult",
    "lambda_from_grid",
    "load_distribution",
    "sinkhorn_1d",
    "sinkhorn_2d",
    "transport_cost",
]

__version__ = "0.1.0"
