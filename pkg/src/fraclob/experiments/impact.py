"""Price impact of flash-limit and market orders.

Timing: the book is advanced to step n, ``p(n)`` is read, step n+1 is
taken and the order is applied straight after it.  ``J(1)`` is therefore
the displacement caused by the order alone and every further delay adds one
background step.  With noise, each replication also runs an order-free
control on the same potential path and reports the difference, so the
forcing common to both cancels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit

from ..book import bid_area, execute_market, inject_flash_limit, state_midprice
from ..dynamics import SourceSpec, Simulator, relax_to_equilibrium, seeded_state
from ..forcing import generate_potential
from ..kernel import build_kernel
from ..lattice import LatticeSpec, build_time_grid
from ._io import run_jobs


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class Fit:
    params: tuple
    errors: tuple
    rss: float

    def as_dict(self, names):
        d = {n: v for n, v in zip(names, self.params)}
        d.update({f"{n}_err": e for n, e in zip(names, self.errors)})
        d["rss"] = self.rss
        return d


def power_model(q, a, b):
    return a * np.power(q, b)


def log_model(q, c, d):
    return c * np.log1p(d * q)


def _fit(model, q, y, p0, sigma=None, bounds=(-np.inf, np.inf)):
    q = np.asarray(q, dtype=float)
    y = np.asarray(y, dtype=float)
    if q.size < 3:
        raise FitError("need at least 3 points")
    if np.any(q <= 0):
        raise FitError("volumes must be positive")
    try:
        popt, pcov = curve_fit(model, q, y, p0=p0, sigma=sigma, absolute_sigma=sigma is not None,
                               bounds=bounds, maxfev=50000, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    except RuntimeError as exc:
        resid = y - model(q, *p0)
        raise FitError(f"{exc}; residual norm at start {np.linalg.norm(resid):.3e}") from exc
    rss = float(np.sum((y - model(q, *popt)) ** 2))
    err = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
    return Fit(tuple(float(v) for v in popt), tuple(float(v) for v in err), rss)


def fit_power(q, y, sigma=None) -> Fit:
    """y = a q^b by nonlinear least squares."""
    return _fit(power_model, q, y, (max(float(np.max(y)), 1e-6), 0.5), sigma)


def fit_log(q, y, sigma=None) -> Fit:
    """y = c log(1 + d q) by nonlinear least squares."""
    return _fit(log_model, q, y, (max(float(np.max(y)), 1e-6), 1.0), sigma, ([0.0, 0.0], [np.inf, np.inf]))


def crossings(f1: Fit, f2: Fit, q) -> int:
    """Sign changes of power minus log fit over the grid ``q``."""
    d = power_model(np.asarray(q), *f1.params) - log_model(np.asarray(q), *f2.params)
    s = np.sign(d)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


@dataclass(frozen=True)
class ImpactSetup:
    kind: str = "market"           # "market" or "flash"
    side: str = "buy"
    alpha: float = 1.0
    scheme: str = "uniform"
    interp: str = "linear"
    delays: tuple = (1, 2, 3, 4, 5, 6, 7)
    rho: float = 0.0
    sigma: float = 0.0
    warmup: int = 0
    m0: int | None = None
    nu: float = 0.5
    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    source: SourceSpec = field(default_factory=SourceSpec)
    relax_tol: float = 1e-14

    @property
    def noisy(self) -> bool:
        return self.sigma > 0


@dataclass
class ImpactCurve:
    delay: int
    volumes: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    replications: int
    samples: np.ndarray = field(repr=False, default=None)  # (replications, volumes)
    power: Fit | None = None
    log: Fit | None = None

    def fit(self, weighted: bool = False) -> "ImpactCurve":
        sel = self.volumes > 0
        q, y = self.volumes[sel], self.mean[sel]
        sig = None
        if weighted and self.replications > 1:
            sig = np.maximum(self.std[sel] / math.sqrt(self.replications), 1e-12)
        self.power = fit_power(q, y, sig)
        self.log = fit_log(q, y, sig)
        return self


_BASE_CACHE: dict = {}


def _relaxed(setup: ImpactSetup):
    key = (setup.lattice, setup.source, setup.nu, setup.relax_tol)
    if key not in _BASE_CACHE:
        _BASE_CACHE.clear()
        _BASE_CACHE[key] = relax_to_equilibrium(setup.lattice, setup.source, setup.nu,
                                                tol=setup.relax_tol, max_steps=400_000)
    return _BASE_CACHE[key]


def _simulator(setup: ImpactSetup, seed) -> Simulator:
    base = _relaxed(setup)
    lat = setup.lattice.with_alpha(setup.alpha)
    kern = build_kernel(setup.alpha, m0=setup.m0)
    state = seeded_state(base, kern, setup.scheme == "nonuniform")
    state.lattice = lat
    n = setup.warmup + max(setup.delays) + 1
    V = None
    if setup.noisy:
        V = generate_potential(n, setup.rho, setup.sigma, seed=[int(seed), 0]).values
    steps = None
    if setup.scheme == "nonuniform":
        steps = build_time_grid("exponential", lat.intensity, n, [int(seed), 1]).steps
    return Simulator(state, kern, setup.source, setup.scheme, V, steps)


def _apply(setup: ImpactSetup, state, q: float) -> None:
    if setup.kind == "market":
        execute_market(state, q, setup.side)
    elif setup.kind == "flash":
        inject_flash_limit(state, q, setup.side)
    else:
        raise ValueError(f"unknown order kind {setup.kind!r}")


def impact_path(setup: ImpactSetup, q: float, seed: int = 0) -> np.ndarray:
    """J(dn, q) for dn = 1..max(delays) on one potential path."""
    sim = _simulator(setup, seed)
    sim.advance(setup.warmup)
    p_n = state_midprice(sim.state, setup.interp)
    ctrl = sim.copy() if setup.noisy else None
    horizon = max(setup.delays)
    out = np.empty(horizon)
    sim.step()
    _apply(setup, sim.state, q)
    for dn in range(1, horizon + 1):
        if dn > 1:
            sim.step()
        p = state_midprice(sim.state, setup.interp)
        if ctrl is not None:
            ctrl.step()
            out[dn - 1] = p - state_midprice(ctrl.state, setup.interp)
        else:
            out[dn - 1] = p - p_n
    return out


def _job(args):
    setup, q, seed = args
    return impact_path(setup, q, seed)


def impact_experiment(setup: ImpactSetup, volumes, seeds=(0,), workers: int = 1, fit: bool = True):
    """One :class:`ImpactCurve` per delay, fitted where there are enough points.

    Jobs are keyed (seed, volume) and gathered in that order whatever the
    pool size.
    """
    volumes = np.asarray(volumes, dtype=float)
    if volumes.size == 0 or np.any(np.diff(volumes) <= 0):
        raise ValueError("volume grid must be non-empty and strictly increasing")
    seeds = [int(s) for s in seeds]
    if not setup.noisy and setup.scheme == "uniform":
        seeds = seeds[:1]  # nothing random left
    jobs = [(setup, float(q), s) for s in seeds for q in volumes]
    res = run_jobs(_job, jobs, workers)
    arr = np.array(res).reshape(len(seeds), volumes.size, -1)
    curves = []
    for dn in setup.delays:
        samp = arr[:, :, dn - 1]
        c = ImpactCurve(dn, volumes, samp.mean(axis=0),
                        samp.std(axis=0, ddof=1) if len(seeds) > 1 else np.zeros(volumes.size),
                        len(seeds), samp)
        if fit and np.count_nonzero(volumes > 0) >= 3:
            c.fit(weighted=False)
        curves.append(c)
    return curves


def bound(dn: int, dx: float) -> float:
    """Largest displacement the linear scheme allows after dn steps."""
    return (0.5 + (dn - 1)) * dx


def reference_area(setup: ImpactSetup) -> float:
    base = _relaxed(setup)
    return bid_area(base.phi, base.lattice, base.centre)


def default_market_volumes(n: int = 60, q_max: float = 1.7) -> np.ndarray:
    return np.linspace(q_max / n, q_max, n)


def with_updates(setup: ImpactSetup, **kw) -> ImpactSetup:
    return replace(setup, **kw)
