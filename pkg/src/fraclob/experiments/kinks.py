"""Closed-form flash-limit impact on the delta-kernel lattice.

With alpha = 1, no forcing and a static background, the first two delays of
a buy flash order depend only on a handful of bars around the mid-price:

* delay 1: the spike ``v = V/dx`` sits on the bid node k, the crossing moves
  inside [x_k, x_{k+1}];
* delay 2: the spike has taken one step (``r/2`` to each neighbour, the
  decayed remainder in place) and the source has followed the delay-1 mid.
  Once node k+1 turns positive the crossing jumps to [x_{k+1}, x_{k+2}].
  The volume where that happens is the critical volume V_c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..dynamics import SourceSpec


@dataclass(frozen=True)
class LocalProfile:
    """Bars on nodes k-1 .. k+2 around a mid-price p0 in (x_k, x_{k+1})."""
    x: tuple
    phi: tuple
    p0: float
    dx: float
    dt: float
    r: float
    nu: float
    source: SourceSpec

    @classmethod
    def from_state(cls, state, source: SourceSpec) -> "LocalProfile":
        lat = state.lattice
        k = int(math.floor((state.centre - lat.x_min) / lat.dx))
        idx = slice(k - 1, k + 3)
        return cls(tuple(state.x[idx]), tuple(state.phi[idx]), state.centre, lat.dx,
                   lat.dt, lat.jump_prob, state.nu, source)


def _root(xa, fa, fb, dx):
    return xa + dx * fa / (fa - fb)


def _delay1(V, prof: LocalProfile):
    x, f = prof.x, prof.phi
    v = V / prof.dx
    return _root(x[1], f[1] + v, f[2], prof.dx)


def _after_step(V, prof: LocalProfile):
    """Nodes k-1..k+2 after one step, given the delay-1 mid as source centre."""
    x = np.array(prof.x)
    f = np.array(prof.phi)
    v = V / prof.dx
    c1 = _delay1(V, prof)
    shift = prof.dt * (prof.source.density(x, c1) - prof.source.density(x, prof.p0))
    spread = np.array([0.5 * prof.r, math.exp(-prof.nu * prof.dt) - prof.r, 0.5 * prof.r, 0.0]) * v
    return f + shift + spread


def critical_volume(prof: LocalProfile, v_max: float = 1e6) -> float:
    """Smallest V at which node k+1 is non-negative one step after the order."""
    g = lambda V: _after_step(V, prof)[2]
    if g(0.0) >= 0:
        return 0.0
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
        if hi > v_max:
            return math.inf
    return brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def kink_oracle(V: float, prof: LocalProfile, delay: int = 2) -> float:
    """Displacement of the linear mid-price after a buy flash order of size V."""
    if V < 0:
        raise ValueError("volume must be non-negative")
    if delay == 1:
        return _delay1(V, prof) - prof.p0
    if delay != 2:
        raise ValueError("the closed form covers delays 1 and 2")
    x = prof.x
    g = _after_step(V, prof)
    if g[2] > 0:
        return _root(x[2], g[2], g[3], prof.dx) - prof.p0
    if g[2] == 0:
        return x[2] - prof.p0
    return _root(x[1], g[1], g[2], prof.dx) - prof.p0


def kink_grid(v_c: float, n: int = 50, span: float = 20.0) -> np.ndarray:
    """Log-spaced volumes from V_c/span to V_c*span, V_c included."""
    lo = np.geomspace(v_c / span, v_c, n // 2, endpoint=False)
    hi = np.geomspace(v_c, v_c * span, n - n // 2)
    return np.concatenate((lo, hi))
