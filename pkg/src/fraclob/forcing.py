"""AR(1) information potential and the jump probabilities it induces."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

CLAMP_MARGIN = 1e-9


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; ``seed`` may be an int or a SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


def step_potential(prev: float, rho: float, sigma: float, rng: np.random.Generator) -> float:
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    eps = rng.normal(0.0, sigma) if sigma > 0 else 0.0
    return rho * prev + eps


@dataclass(frozen=True)
class ForcingPath:
    rho: float
    sigma: float
    beta: float
    seed: int | None
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return int(self.values.size)

    def to_csv(self, path) -> None:
        write_potential_csv(path, self.values)


def generate_potential(n_steps: int, rho: float, sigma: float, seed=None,
                       beta: float = 1.0, v0: float = 0.0) -> ForcingPath:
    """V_1..V_n with V_t = rho V_{t-1} + N(0, sigma), starting from ``v0``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if not (0 <= rho < 1):
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if sigma == 0:
        eps = np.zeros(n_steps)
    else:
        eps = make_rng(seed).normal(0.0, sigma, size=n_steps)
    v = np.empty(n_steps)
    prev = v0
    for i in range(n_steps):
        prev = rho * prev + eps[i]
        v[i] = prev
    return ForcingPath(rho, sigma, beta, seed, v)


def force_from_potential(V, beta: float = 1.0, D_alpha: float = 0.5, r: float | None = None,
                         margin: float = CLAMP_MARGIN):
    """F = V / (2 beta D); clamped into [-(r - margin), r - margin] when r is given."""
    if beta <= 0 or D_alpha <= 0:
        raise ValueError("beta and D_alpha must be positive")
    F = np.asarray(V, dtype=float) / (2.0 * beta * D_alpha)
    if r is not None:
        lim = r - margin
        F = np.clip(F, -lim, lim)
    return F if F.ndim else float(F)


@dataclass(frozen=True)
class JumpProbabilities:
    p_right: float
    p_self: float
    p_left: float

    @property
    def left_weight(self) -> float:
        """Weight on the donor at x_{i-1}: mass that jumped right."""
        return self.p_right

    @property
    def right_weight(self) -> float:
        """Weight on the donor at x_{i+1}: mass that jumped left."""
        return self.p_left


def jump_probabilities(r: float, F: float) -> JumpProbabilities:
    if abs(F) > r:
        raise ValueError(f"|F| = {abs(F)} exceeds r = {r}; clamp the force first")
    return JumpProbabilities(0.5 * (r - F), 1.0 - r, 0.5 * (r + F))


def write_potential_csv(path, values) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["step", "V"])
        for i, v in enumerate(values, start=1):
            out.writerow([i, repr(float(v))])


def read_potential_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["V"]) for r in rows])
