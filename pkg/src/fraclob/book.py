"""Observables of a book state and the two exogenous order types.

Sign convention: ``phi > 0`` is resting bid volume (left of the mid-price),
``phi < 0`` resting ask volume.  Volumes are bars ``|phi_i| * dx``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .lattice import LatticeSpec


class OneSidedBookError(ValueError):
    """The density has no descending zero crossing."""


class DepthError(ValueError):
    def __init__(self, requested: float, available: float, side: str):
        super().__init__(f"{side} order of {requested:g} exceeds the available depth {available:.6g}")
        self.requested = requested
        self.available = available


@dataclass(frozen=True)
class MidPrice:
    value: float
    method: str
    bracket: tuple  # (k, m): phi[k] > 0 >= ... > phi[m]


@dataclass(frozen=True)
class OrderEvent:
    kind: str          # "flash" or "market"
    volume: float
    side: str = "buy"
    step: int = 0

    def __post_init__(self):
        if self.kind not in ("flash", "market"):
            raise ValueError(f"unknown order kind {self.kind!r}")
        if self.side not in ("buy", "sell"):
            raise ValueError(f"unknown side {self.side!r}")
        if not self.volume > 0:
            raise ValueError("order volume must be positive")


def _axis(grid):
    if isinstance(grid, LatticeSpec):
        return grid.x
    return np.asarray(grid, dtype=float)


def _brackets(phi, sign=1.0):
    """All (k, m) with sign*phi[k] > 0, phi[k+1..m-1] == 0, sign*phi[m] < 0."""
    out = []
    n = phi.size
    f = sign * phi
    for k in np.nonzero((f[:-1] > 0) & (f[1:] <= 0))[0]:
        m = k + 1
        while m < n and f[m] == 0.0:
            m += 1
        if m < n and f[m] < 0:
            out.append((int(k), int(m)))
    return out


def _linear_root(phi, x, k, m):
    if m == k + 1:
        return x[k] + (x[m] - x[k]) * phi[k] / (phi[k] - phi[m])
    return 0.5 * (x[k + 1] + x[m - 1])


def midprice(phi, grid, method: str = "linear", prev: float | None = None) -> MidPrice:
    """Zero crossing of the density.

    With several descending crossings the one nearest ``prev`` (default:
    the middle of the grid) is used.  A field with only ascending sign
    changes (asks left of bids) falls back to those.  ``cubic`` takes the root of a natural
    spline through all nodes, inside the same bracket.
    """
    phi = np.asarray(phi, dtype=float)
    x = _axis(grid)
    if phi.shape != x.shape:
        raise ValueError("phi and grid differ in length")
    br = _brackets(phi) or _brackets(phi, -1.0)
    if not br:
        raise OneSidedBookError("no sign change in the density")
    ref = 0.5 * (x[0] + x[-1]) if prev is None else prev
    roots = [_linear_root(phi, x, k, m) for k, m in br]
    i = int(np.argmin([abs(r - ref) for r in roots]))
    k, m = br[i]
    lin = roots[i]
    if method == "linear":
        return MidPrice(float(lin), "linear", (k, m))
    if method != "cubic":
        raise ValueError(f"unknown interpolation {method!r}")
    cs = CubicSpline(x, phi, bc_type="natural")
    roots = [rt for rt in cs.roots(extrapolate=False) if x[k] <= rt <= x[m]]
    if not roots:
        return MidPrice(float(lin), "cubic", (k, m))
    best = min(roots, key=lambda v: abs(v - lin))
    return MidPrice(float(best), "cubic", (k, m))


def state_midprice(state, method: str = "linear") -> float:
    if method == "linear":
        return state.centre
    return midprice(state.phi, state.lattice, method, prev=state.centre).value


def inject_flash_limit(state, V: float, side: str = "buy"):
    """Add a resting limit order of volume V at the nearest own-side node.

    A buy lands on the last grid node at or below the mid-price (the node
    itself when the mid sits on the grid); a sell on the first node at or
    above it, with negative density.
    """
    if V == 0:
        return state
    if V < 0:
        raise ValueError("flash-limit volume must be non-negative")
    lat = state.lattice
    p = state.centre
    u = (p - lat.x_min) / lat.dx
    on_grid = abs(u - round(u)) < 1e-9
    if side == "buy":
        k = int(round(u)) if on_grid else int(math.floor(u))
        sign = 1.0
    elif side == "sell":
        k = int(round(u)) if on_grid else int(math.ceil(u))
        sign = -1.0
    else:
        raise ValueError(f"unknown side {side!r}")
    if not 0 <= k <= lat.grid_count:
        raise ValueError("mid-price is outside the grid")
    state.phi[k] += sign * V / lat.dx
    state.touch()
    return state


def side_depth(phi, dx: float, p: float, x0: float, side: str) -> float:
    """Opposite-side volume a market order of ``side`` can consume."""
    k = int(math.floor((p - x0) / dx))
    if side == "buy":
        seg = phi[k + 1:]
        return float(np.sum(np.abs(np.minimum(seg, 0.0))) * dx)
    seg = phi[:k + 1]
    return float(np.sum(np.maximum(seg, 0.0)) * dx)


def execute_market(state, Q: float, side: str = "buy"):
    """Walk the book from the mid-price, removing exactly Q of volume.

    Each node is a bar of volume ``|phi_i| dx``.  Bars wholly consumed are
    zeroed; the last one is scaled by the unconsumed fraction.  A buy eats
    asks to the right, a sell bids to the left.
    """
    if Q == 0:
        return state
    if Q < 0:
        raise ValueError("market-order volume must be non-negative")
    lat = state.lattice
    phi = state.phi
    dx = lat.dx
    p = state.centre
    k = int(math.floor((p - lat.x_min) / dx))
    if side == "buy":
        idx = range(k + 1, lat.n_points)
        take = lambda v: v < 0
    elif side == "sell":
        idx = range(k, -1, -1)
        take = lambda v: v > 0
    else:
        raise ValueError(f"unknown side {side!r}")
    avail = side_depth(phi, dx, p, lat.x_min, side)
    if Q > avail * (1 + 1e-12):
        raise DepthError(Q, avail, side)
    rem = float(Q)
    for j in idx:
        if not take(phi[j]):
            continue
        vol = abs(phi[j]) * dx
        if rem < vol:
            phi[j] *= 1.0 - rem / vol
            rem = 0.0
            break
        rem -= vol
        phi[j] = 0.0
        if rem == 0.0:
            break
    state.touch()
    return state


def trade_rate(phi, grid, D_alpha: float, prev: float | None = None) -> float:
    """Flux through the mid-price: D times the slope across the bracketing cell."""
    phi = np.asarray(phi, dtype=float)
    x = _axis(grid)
    try:
        mp = midprice(phi, x, "linear", prev)
    except OneSidedBookError:
        if not np.any(phi):
            return 0.0
        raise
    k, m = mp.bracket
    if m > k + 1:
        return 0.0  # the mid sits on an empty plateau: no local gradient
    return float(D_alpha * abs(phi[m] - phi[k]) / (x[m] - x[k]))


def bid_area(phi, grid, p: float | None = None) -> float:
    """Trapezoid area of the bid side, max(phi, 0) on [x_min, p]."""
    phi = np.asarray(phi, dtype=float)
    x = _axis(grid)
    if p is None:
        try:
            p = midprice(phi, x).value
        except OneSidedBookError:
            p = x[-1]
    pos = np.maximum(phi, 0.0)
    inside = x <= p
    xs, ys = x[inside], pos[inside]
    if xs.size and xs[-1] < p:
        # close the last partial cell at the crossing, where phi = 0
        xs = np.append(xs, p)
        ys = np.append(ys, 0.0)
    if xs.size < 2:
        return 0.0
    return float(np.trapezoid(ys, xs))


def write_frame_csv(path, x, phi) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "phi"])
        for a, b in zip(x, phi):
            w.writerow([repr(float(a)), repr(float(b))])


def write_midprice_csv(path, ell, t, p) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ell", "t", "p"])
        for a, b, c in zip(ell, t, p):
            w.writerow([int(a), repr(float(b)), repr(float(c))])
