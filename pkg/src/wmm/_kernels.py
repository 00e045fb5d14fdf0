"""Compiled first-order recurrences behind the structured products."""

import numba
import numpy as np


@numba.njit(cache=True)
def forward_sweep(lam, x):
    out = np.empty_like(x)
    acc = 0.0
    for i in range(x.shape[0]):
        acc = lam * acc + x[i]
        out[i] = acc
    return out


@numba.njit(cache=True)
def backward_sweep(lam, x):
    out = np.empty_like(x)
    acc = 0.0
    for i in range(x.shape[0] - 1, -1, -1):
        acc = lam * acc + x[i]
        out[i] = acc
    return out


@numba.njit(cache=True)
def symmetric_sweep(lam, x):
    # forward sums (including x_i) plus backward sums excluding x_i
    n = x.shape[0]
    out = np.empty_like(x)
    acc = 0.0
    for i in range(n):
        acc = lam * acc + x[i]
        out[i] = acc
    acc = 0.0
    for i in range(n - 1, -1, -1):
        out[i] += lam * acc
        acc = lam * acc + x[i]
    return out


@numba.njit(cache=True)
def symmetric_sweep_rows(lam, X):
    out = np.empty_like(X)
    for r in range(X.shape[0]):
        out[r] = symmetric_sweep(lam, X[r])
    return out


@numba.njit(cache=True)
def weighted_sweep(lam, x):
    """``sum_j |i-j| lam**|i-j| x_j`` for every ``i``."""
    n = x.shape[0]
    out = np.empty_like(x)
    # g_i = lam * (g_{i-1} + f_{i-1} + x_{i-1}), f_i = lam * (f_{i-1} + x_{i-1})
    f = 0.0
    g = 0.0
    for i in range(n):
        out[i] = g
        g = lam * (g + f + x[i])
        f = lam * (f + x[i])
    f = 0.0
    g = 0.0
    for i in range(n - 1, -1, -1):
        out[i] += g
        g = lam * (g + f + x[i])
        f = lam * (f + x[i])
    return out


@numba.njit(cache=True)
def weighted_sweep_rows(lam, X):
    out = np.empty_like(X)
    for r in range(X.shape[0]):
        out[r] = weighted_sweep(lam, X[r])
    return out
