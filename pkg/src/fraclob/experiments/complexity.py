"""Step-count model for the cost of a run, and a timing helper."""
from __future__ import annotations

import time

import numpy as np


def complexity_estimate(T: float, K: float, X: float, dx: float, alpha: float,
                        full_memory: bool = False) -> float:
    """Abstract step count.

    Truncated memory: T K X / dx^(1 + 4/alpha).  Full memory, where the
    convolution grows with the run: X T^2 / dx^(1 + 4/alpha).
    """
    if min(T, X, dx, alpha) <= 0 or K < 0:
        raise ValueError("arguments must be positive")
    p = 1.0 + 4.0 / alpha
    if full_memory:
        return X * T * T * dx ** (-p)
    return T * K * X * dx ** (-p)


def complexity_table(alphas, dxs, T: float = 20.0, K: float = 1.0, X: float = 200.0,
                     full_memory: bool = False):
    rows = []
    for a in alphas:
        for d in dxs:
            rows.append((a, d, complexity_estimate(T, K, X, d, a, full_memory)))
    return rows


def time_run(fn, *args, repeat: int = 1, **kw) -> float:
    """Best wall-clock of ``repeat`` calls."""
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args, **kw)
        best = min(best, time.perf_counter() - t0)
    return float(best)
