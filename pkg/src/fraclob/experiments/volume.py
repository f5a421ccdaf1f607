"""Daily volume, daily volatility and the impact prefactor Y.

With an impact fit ``dp = a Q^delta`` and the square-root-law form
``dp = Y sigma_D (Q / V_D)^delta``, ``Y = a V_D^delta / sigma_D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .session import HOURS_PER_SESSION, SESSION_EVENTS


@dataclass(frozen=True)
class VolumeVolatility:
    trade_rate: float
    V_D: float
    sigma_h: float
    sigma_D: float
    a: float
    delta: float
    Y: float
    n_hours: int


def daily_volume(rate: float, events: int = SESSION_EVENTS) -> float:
    return rate * events


def daily_sigma(sigma_h: float, hours: int = HOURS_PER_SESSION) -> float:
    return math.sqrt(hours) * sigma_h


def hourly_changes(paths, hours: int = HOURS_PER_SESSION) -> np.ndarray:
    """Start-to-end change of each equal-event slice of each session."""
    out = []
    for p in paths:
        p = np.asarray(p, dtype=float)
        per = (p.size - 1) // hours
        if per < 1:
            raise ValueError("session too short to slice")
        edges = p[::per][:hours + 1]
        out.append(np.diff(edges))
    return np.concatenate(out)


def y_factor(a: float, delta: float, V_D: float, sigma_D: float) -> float:
    return a * V_D ** delta / sigma_D


def volume_volatility(paths, rate: float, a: float, delta: float, events: int = SESSION_EVENTS,
                      hours: int = HOURS_PER_SESSION, min_hours: int = 32) -> VolumeVolatility:
    """Y from session paths, the trade rate and a power-law impact fit (a, delta)."""
    if len(paths) < 1:
        raise ValueError("no sessions given")
    dh = hourly_changes(paths, hours)
    if dh.size < min_hours:
        raise ValueError(f"{dh.size} hourly samples, need at least {min_hours}")
    sigma_h = float(np.std(dh, ddof=1))
    sigma_D = daily_sigma(sigma_h, hours)
    V_D = daily_volume(rate, events)
    return VolumeVolatility(rate, V_D, sigma_h, sigma_D, a, delta,
                            y_factor(a, delta, V_D, sigma_D), int(dh.size))
