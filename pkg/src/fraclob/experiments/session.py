"""Long noisy runs sampled at trade events."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..book import state_midprice, trade_rate, write_frame_csv
from ..dynamics import BookState, SourceSpec, Simulator, relax_to_equilibrium
from ..forcing import generate_potential
from ..kernel import build_kernel, memory_window_for_trades
from ..lattice import LatticeSpec, build_time_grid

SESSION_EVENTS = 25_000
HOURS_PER_SESSION = 8


@dataclass(frozen=True)
class SessionSetup:
    alpha: float = 0.8
    rho: float = 0.9
    sigma: float = 1.0
    beta: float = 1.0
    nu: float = 0.5
    gamma1: int = 8
    memory_trades: int = 13
    m0: int | None = None
    scheme: str = "uniform"
    interp: str = "linear"
    events: int = SESSION_EVENTS
    recentre: float = 50.0
    burn_in: int = 200        # trade events run unforced before sampling starts
    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    source: SourceSpec = field(default_factory=SourceSpec)

    def kernel(self):
        m0 = self.m0
        if m0 is None:
            m0 = memory_window_for_trades(self.alpha, 0.01, self.memory_trades, self.gamma1)
        return build_kernel(self.alpha, m0=m0)


@dataclass
class Session:
    seed: int
    ell: np.ndarray
    t: np.ndarray
    p: np.ndarray
    rate: np.ndarray   # trade rate at each sampled event
    dt_mean: float


def run_session(setup: SessionSetup, seed: int, frames: int = 0, frame_dir=None,
                potentials=None) -> Session:
    """Relax, then run ``events`` trade events of ``gamma1`` steps each.

    ``frames > 0`` dumps (x, phi) every ``frames`` events into ``frame_dir``.
    ``potentials`` replays a stored V path instead of drawing one from ``seed``.
    """
    base = relax_to_equilibrium(setup.lattice, setup.source, setup.nu)
    lat = setup.lattice.with_alpha(setup.alpha)
    kern = setup.kernel()
    state = BookState(lat, base.phi, kern.window, setup.nu, base.centre,
                      nonuniform=setup.scheme == "nonuniform")
    n = setup.events * setup.gamma1
    if potentials is None:
        V = generate_potential(n, setup.rho, setup.sigma, seed=[int(seed), 0], beta=setup.beta).values
    else:
        V = np.asarray(potentials, dtype=float)
        if V.size < n:
            raise ValueError(f"potential path has {V.size} steps, the run needs {n}")
    steps = None
    if setup.scheme == "nonuniform":
        steps = build_time_grid("exponential", lat.intensity, n, [int(seed), 1]).steps
    if setup.burn_in:
        # let the memory fill up: the relaxed book is an alpha = 1 equilibrium
        nb = setup.burn_in * setup.gamma1
        pre_steps = None
        if setup.scheme == "nonuniform":
            pre_steps = np.full(nb, lat.dt)
        Simulator(state, kern, setup.source, setup.scheme, None, pre_steps).advance(nb)
        state.n, state.t = 0, 0.0
        state.times[:] -= state.times[state.head]
    sim = Simulator(state, kern, setup.source, setup.scheme, V, steps, setup.beta,
                    recentre=setup.recentre)
    k = setup.events + 1
    p = np.empty(k)
    t = np.empty(k)
    rate = np.empty(k)
    p[0] = state_midprice(state, setup.interp)
    t[0] = 0.0
    rate[0] = trade_rate(state.phi, state.x, lat.diffusion, state.centre)
    for ell in range(1, k):
        sim.advance(setup.gamma1)
        p[ell] = state_midprice(state, setup.interp)
        t[ell] = state.t
        rate[ell] = trade_rate(state.phi, state.x, lat.diffusion, state.centre)
        if frames and ell % frames == 0 and frame_dir is not None:
            write_frame_csv(f"{frame_dir}/frame_{ell:06d}.csv", state.x, state.phi)
    return Session(int(seed), np.arange(k), t, p, rate, float(state.t / n))
