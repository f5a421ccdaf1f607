"""Price/time lattice geometry and the diffusion coupling between Δx and Δt."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when a lattice argument lies outside its admissible range."""


def _check_coupling(D_alpha: float, alpha: float, r: float) -> None:
    if not (D_alpha > 0):
        raise DomainError(f"D_alpha must be positive, got {D_alpha}")
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not (0 < r <= 1):
        raise DomainError(f"r must lie in (0, 1], got {r}")


def derive_dx(dt: float, D_alpha: float, alpha: float, r: float) -> float:
    """Price increment matching a time increment: sqrt(2 D / r) * dt^(alpha/2)."""
    _check_coupling(D_alpha, alpha, r)
    if not (dt > 0):
        raise DomainError(f"dt must be positive, got {dt}")
    return math.sqrt(2.0 * D_alpha / r) * dt ** (alpha / 2.0)


def derive_dt(dx: float, D_alpha: float, alpha: float, r: float) -> float:
    """Inverse of :func:`derive_dx`."""
    _check_coupling(D_alpha, alpha, r)
    if not (dx > 0):
        raise DomainError(f"dx must be positive, got {dx}")
    return (dx * dx * r / (2.0 * D_alpha)) ** (1.0 / alpha)


@dataclass(frozen=True)
class LatticeSpec:
    """Background price grid plus the constants tying it to the time step.

    The grid has ``grid_count + 1`` nodes ``x_min + i*dx``.  When ``x_min``
    is omitted it is chosen so that ``initial_mid`` falls halfway between two
    nodes, which is the configuration the impact bounds are stated for.
    """

    price_span: float = 200.0
    grid_count: int = 400
    alpha: float = 1.0
    diffusion: float = 0.5
    jump_prob: float = 0.5
    initial_mid: float = 1300.0
    x_min: float | None = None

    def __post_init__(self):
        if self.grid_count < 4:
            raise DomainError(f"grid_count must be >= 4, got {self.grid_count}")
        if not (self.price_span > 0):
            raise DomainError(f"price_span must be positive, got {self.price_span}")
        _check_coupling(self.diffusion, self.alpha, self.jump_prob)
        if self.x_min is None:
            x0 = self.initial_mid - 0.5 * self.price_span + 0.5 * self.dx
            object.__setattr__(self, "x_min", x0)

    @property
    def dx(self) -> float:
        return self.price_span / self.grid_count

    @property
    def dt(self) -> float:
        """Nominal time step, ``1/intensity``."""
        return 1.0 / self.intensity

    @property
    def intensity(self) -> float:
        return 1.0 / derive_dt(self.dx, self.diffusion, self.alpha, self.jump_prob)

    @property
    def n_points(self) -> int:
        return self.grid_count + 1

    @property
    def x_max(self) -> float:
        return self.x_min + self.grid_count * self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points, dtype=float)

    def with_alpha(self, alpha: float) -> "LatticeSpec":
        return LatticeSpec(self.price_span, self.grid_count, alpha, self.diffusion,
                           self.jump_prob, self.initial_mid, self.x_min)


UNIFORM = "uniform"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class TimeGrid:
    mode: str
    intensity: float
    steps: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=float)
        if steps.ndim != 1 or steps.size == 0:
            raise DomainError("time grid needs at least one step")
        if not np.all(steps > 0):
            raise DomainError("time steps must be positive")
        steps = steps.copy()
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)

    @property
    def n_steps(self) -> int:
        return int(self.steps.size)

    @property
    def times(self) -> np.ndarray:
        """Cumulative times t_0 = 0, t_1, ..., t_n."""
        return np.concatenate(([0.0], np.cumsum(self.steps)))

    def to_json(self, spec: LatticeSpec) -> str:
        doc = {
            "mode": self.mode,
            "lambda": self.intensity,
            "seed": self.seed,
            "n_steps": self.n_steps,
            "dx": spec.dx,
            "alpha": spec.alpha,
            "D_alpha": spec.diffusion,
            "r": spec.jump_prob,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TimeGrid":
        doc = json.loads(text)
        return build_time_grid(doc["mode"], doc["lambda"], doc["n_steps"], doc["seed"])


def exponential_steps(intensity: float, n_steps: int, seed: int) -> np.ndarray:
    """Exp(intensity) waiting times by inverse-CDF on a Philox stream."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    u = rng.random(n_steps)
    return -np.log1p(-u) / intensity


def build_time_grid(mode: str, intensity: float, n_steps: int, seed: int | None = None) -> TimeGrid:
    if not (intensity > 0):
        raise DomainError(f"lambda must be positive, got {intensity}")
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    mode = mode.lower()
    if mode == UNIFORM:
        steps = np.full(n_steps, 1.0 / intensity)
    elif mode == EXPONENTIAL:
        if seed is None:
            raise DomainError("exponential grid needs a seed")
        steps = exponential_steps(intensity, n_steps, seed)
    else:
        raise DomainError(f"unknown time-grid mode {mode!r}")
    return TimeGrid(mode, float(intensity), steps, seed)


@dataclass(frozen=True)
class SamplingRatios:
    gamma1: float
    gamma2: float
    gamma21: float


def sampling_ratios(delta_tau: float, delta_t: float, dt_sim: float) -> SamplingRatios:
    """Trade-event and order-book-event spacings in units of simulation steps."""
    if min(delta_tau, delta_t, dt_sim) <= 0:
        raise DomainError("sampling intervals must be positive")
    return SamplingRatios(delta_tau / dt_sim, delta_t / dt_sim, delta_t / delta_tau)
