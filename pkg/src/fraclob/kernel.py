"""Truncated Sibuya memory kernel."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import DomainError

DEFAULT_EPS = 0.01


def sibuya_weights(alpha: float, n: int) -> np.ndarray:
    """K_1..K_n by the running product, with the delta term added to K_1."""
    k = np.arange(1, n + 1, dtype=float)
    w = np.cumprod(1.0 - (2.0 - alpha) / k)
    if n:
        w[0] += 1.0
    return w


@dataclass(frozen=True)
class KernelTable:
    alpha: float
    weights: np.ndarray = field(repr=False)
    eps: float
    cutoff: int
    min_memory: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def window(self) -> int:
        """Number of past steps the update convolves."""
        return int(self.weights.size)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["j", "K_j"])
            for j, w in enumerate(self.weights, start=1):
                out.writerow([j, repr(float(w))])


def _first_below(alpha: float, eps: float) -> int:
    # |K_j| decays like j^(alpha-2), so this loop is short for any sane eps
    prod, j = 1.0, 0
    while True:
        j += 1
        prod *= 1.0 - (2.0 - alpha) / j
        kj = prod + (1.0 if j == 1 else 0.0)
        if abs(kj) < eps:
            return j


def build_kernel(alpha: float, eps: float = DEFAULT_EPS, m0: int | None = None) -> KernelTable:
    """Kernel weights K_1..K_W.

    ``cutoff`` is the first index with |K_j| < eps.  The stored window keeps
    every weight above tolerance (W = cutoff - 1) unless ``m0`` asks for more.
    """
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not (eps > 0):
        raise DomainError(f"eps must be positive, got {eps}")
    n_c = _first_below(alpha, eps)
    window = n_c - 1
    m0 = 0 if m0 is None else int(m0)
    if m0 > window:
        window = m0
    return KernelTable(alpha, sibuya_weights(alpha, window), eps, n_c, m0)


def memory_window_for_trades(alpha: float, eps: float, trades: float, gamma1: float) -> int:
    """Smallest m0 whose window spans ``trades`` trade events of ``gamma1`` steps each."""
    if trades < 1 or gamma1 < 1:
        raise DomainError("trades and gamma1 must be >= 1")
    if alpha == 1.0:
        return 1
    steps = math.ceil(trades * gamma1 - 1e-9)
    return max(steps, _first_below(alpha, eps) - 1)
