"""Stylised facts of a sampled mid-price path.

Prices on the lattice are already log-prices, so returns are plain
differences.  Tails are studied on absolute returns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar


class DegeneratePathError(ValueError):
    pass


def acf(z, nlags: int) -> np.ndarray:
    """Sample autocorrelation at lags 0..nlags (biased normalisation)."""
    z = np.asarray(z, dtype=float)
    z = z - z.mean()
    den = float(np.dot(z, z))
    if den == 0:
        raise DegeneratePathError("constant series has no autocorrelation")
    out = np.empty(nlags + 1)
    out[0] = 1.0
    for k in range(1, nlags + 1):
        out[k] = np.dot(z[:-k], z[k:]) / den
    return out


def tick_signs(p) -> np.ndarray:
    """+1 after an up-tick, -1 after a down-tick, carried through zero ticks.

    Leading zero ticks (before any move) are dropped.
    """
    d = np.sign(np.diff(np.asarray(p, dtype=float)))
    s = np.empty_like(d)
    last = 0.0
    for i, v in enumerate(d):
        if v != 0:
            last = v
        s[i] = last
    nz = np.nonzero(s)[0]
    return s[nz[0]:] if nz.size else s[:0]


def first_inside(values, band: float) -> int:
    """First lag >= 1 whose |ACF| is inside the band (len(values) if none)."""
    for k in range(1, len(values)):
        if abs(values[k]) < band:
            return k
    return len(values)


@dataclass
class GPDFit:
    shape: float
    scale: float
    threshold: float
    n_exceed: int
    n_total: int
    method: str

    @property
    def light_tailed(self) -> bool:
        return self.shape < 0

    def return_level(self, m):
        """Level exceeded on average once every m observations."""
        m = np.asarray(m, dtype=float)
        rate = self.n_exceed / self.n_total
        if abs(self.shape) < 1e-12:
            return self.threshold + self.scale * np.log(m * rate)
        return self.threshold + self.scale / self.shape * ((m * rate) ** self.shape - 1.0)


def mean_excess(x, thresholds):
    """Mean excess and its standard error above each threshold."""
    x = np.asarray(x, dtype=float)
    me = np.full(len(thresholds), np.nan)
    se = np.full(len(thresholds), np.nan)
    cnt = np.zeros(len(thresholds), dtype=int)
    for i, u in enumerate(thresholds):
        e = x[x > u] - u
        cnt[i] = e.size
        if e.size:
            me[i] = e.mean()
        if e.size > 1:
            se[i] = e.std(ddof=1) / math.sqrt(e.size)
    return me, se, cnt


def select_threshold(x, zeta: float, n_grid: int = 60, min_exceed: int = 30) -> float:
    """Threshold for the tail fit.

    zeta in [-1, 0): keep the top ``-zeta`` fraction of the sample.
    zeta >= 0: smallest grid threshold above which a straight line through
    the mean-excess curve stays inside error bars widened by (1 + zeta).
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if zeta < -1.0:
        raise ValueError(f"zeta must be >= -1, got {zeta}")
    if -1.0 <= zeta < 0.0:
        k = int(round(-zeta * n))
        if k < 1:
            raise ValueError("tail fraction keeps no observations")
        if k >= n:
            return float(x[0]) - 1e-12
        return float(x[n - k - 1])
    top = x[max(n - min_exceed - 1, 0)]
    grid = np.linspace(x[0], top, n_grid, endpoint=False)
    me, se, cnt = mean_excess(x, grid)
    for i in range(n_grid - 3):
        u, m, s = grid[i:], me[i:], se[i:]
        ok = np.isfinite(m) & np.isfinite(s) & (s > 0)
        if ok.sum() < 3:
            break
        coef = np.polyfit(u[ok], m[ok], 1)
        if np.all(np.abs(np.polyval(coef, u[ok]) - m[ok]) <= (1.0 + zeta) * s[ok]):
            return float(grid[i])
    return float(grid[-1])


def _profile_fit(excess):
    """Shape by profile likelihood over a grid, scale re-optimised at each shape."""
    top = float(excess.max())

    def nll_scale(xi):
        # for xi < 0 the support ends at scale/(-xi), which must cover the data
        lo = math.log(-xi * top) + 1e-12 if xi < 0 else math.log(top) - 8
        lo = max(lo, math.log(top) - 8)

        def f(log_s):
            v = -np.sum(stats.genpareto.logpdf(excess, xi, loc=0.0, scale=math.exp(log_s)))
            return v if np.isfinite(v) else 1e300
        res = minimize_scalar(f, bounds=(lo, math.log(top) + 4), method="bounded")
        return res.fun, math.exp(res.x)

    best = (math.inf, 0.0, 1.0)
    for xi in np.linspace(-1.0, 0.5, 151):
        v, s = nll_scale(xi)
        if v < best[0]:
            best = (v, float(xi), s)
    return best[1], best[2]


def fit_gpd(x, threshold: float) -> GPDFit:
    """Maximum-likelihood GPD on the excesses over ``threshold``.

    Near shape -1/2 and below the likelihood is irregular; there the
    profile estimate replaces the direct optimum.
    """
    x = np.asarray(x, dtype=float)
    excess = x[x > threshold] - threshold
    if excess.size < 10:
        raise ValueError("too few exceedances for a tail fit")
    with np.errstate(invalid="ignore"):
        shape, _, scale = stats.genpareto.fit(excess, floc=0.0)
    method = "mle"
    if shape < -0.45:
        shape, scale = _profile_fit(excess)
        method = "profile"
    return GPDFit(float(shape), float(scale), float(threshold), int(excess.size), int(x.size), method)


@dataclass
class StylisedFacts:
    returns: np.ndarray
    signs: np.ndarray
    acf_signs: np.ndarray
    acf_returns: np.ndarray
    acf_abs: np.ndarray
    band: float
    hist_density: np.ndarray
    hist_edges: np.ndarray
    qq_theory: np.ndarray
    qq_sample: np.ndarray
    me_thresholds: np.ndarray
    me_values: np.ndarray
    me_errors: np.ndarray
    gpd: GPDFit
    zeta: float
    extra: dict = field(default_factory=dict)

    def first_inside(self, which: str) -> int:
        vals = {"signs": self.acf_signs, "returns": self.acf_returns, "abs": self.acf_abs}[which]
        return first_inside(vals, self.band)

    def all_inside(self, which: str) -> bool:
        vals = {"signs": self.acf_signs, "returns": self.acf_returns, "abs": self.acf_abs}[which]
        return bool(np.all(np.abs(vals[1:]) < self.band))


def stylised_facts(p, zeta: float = -0.1, nlags: int = 20, bins: int = 60,
                   min_length: int = 1000) -> StylisedFacts:
    p = np.asarray(p, dtype=float)
    if p.size < min_length:
        raise ValueError(f"path has {p.size} points, need at least {min_length}")
    ret = np.diff(p)
    if not np.any(ret):
        raise DegeneratePathError("price path is constant")
    signs = tick_signs(p)
    N = ret.size
    band = 1.96 / math.sqrt(N)
    dens, edges = np.histogram(ret, bins=bins, density=True)
    z = np.sort((ret - ret.mean()) / ret.std())
    qq_t = stats.norm.ppf((np.arange(1, N + 1) - 0.5) / N)
    a = np.abs(ret)
    u = select_threshold(a, zeta)
    thr = np.quantile(a, np.linspace(0.0, 0.99, 50))
    me, se, _ = mean_excess(a, thr)
    gpd = fit_gpd(a, u)
    return StylisedFacts(ret, signs, acf(signs, nlags), acf(ret, nlags), acf(a, nlags), band,
                         dens, edges, qq_t, z, thr, me, se, gpd, zeta)
