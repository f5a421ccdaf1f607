"""Time stepping of the order-density field.

Both schemes convolve a ring buffer of past fields with the kernel weights,
then apply the three-point stencil once to the aggregated field.  Mass that
sits at ``x_{i-1}`` and jumps right arrives at ``x_i`` with weight
``p_right = (r - F)/2``; the mirror term uses ``p_left``.  The same pairing
is used on the uniform and the non-uniform lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .forcing import JumpProbabilities, force_from_potential, jump_probabilities
from .kernel import KernelTable, build_kernel
from .lattice import LatticeSpec, derive_dt


class EquilibriumError(RuntimeError):
    def __init__(self, residual: float, steps: int):
        super().__init__(f"no equilibrium after {steps} steps (residual {residual:.3e})")
        self.residual = residual
        self.steps = steps


def source_density(x, p, kappa=1.0, mu=0.1):
    """Lit-market order inflow, antisymmetric about the mid-price p."""
    y = mu * (np.asarray(x, dtype=float) - p)
    return -kappa * y * np.exp(-y * y)


@dataclass(frozen=True)
class SourceSpec:
    kappa: float = 1.0
    mu: float = 0.1
    kind: str = "lit"

    def density(self, x, p):
        return source_density(x, p, self.kappa, self.mu)


class BookState:
    """Current field plus the history ring the kernel reads.

    ``ring[head]`` is the newest row.  Rows that were never written hold
    zeros, which is the zero-padded history before t = 0.  For the
    non-uniform scheme each row also stores its two off-grid donor rows.
    """

    def __init__(self, lattice: LatticeSpec, phi, depth: int, nu: float,
                 centre: float | None = None, nonuniform: bool = False):
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (lattice.n_points,):
            raise ValueError(f"phi has shape {phi.shape}, lattice needs ({lattice.n_points},)")
        depth = max(int(depth), 1)
        self.lattice = lattice
        self.nu = float(nu)
        self.x = lattice.x
        self.ring = np.zeros((depth, lattice.n_points))
        self.ring[0] = phi
        self.times = np.zeros(depth)
        self.head = 0
        self.count = 1
        self.n = 0
        self.t = 0.0
        self.nonuniform = nonuniform
        if nonuniform:
            self.hat_left = np.zeros_like(self.ring)
            self.hat_right = np.zeros_like(self.ring)
            self.hat_shift = np.zeros(depth)
        self._hat_ready = False
        self._k0 = lattice.grid_count // 2
        self.centre = lattice.initial_mid if centre is None else float(centre)
        self._work = np.empty((4, lattice.n_points))
        self._wcache = None
        self.refresh_centre()

    @property
    def depth(self) -> int:
        return self.ring.shape[0]

    @property
    def phi(self) -> np.ndarray:
        return self.ring[self.head]

    def lag_row(self, j: int) -> np.ndarray:
        """phi_{n-j+1}: j = 1 is the newest row."""
        return self.ring[(self.head - j + 1) % self.depth]

    def touch(self) -> None:
        """Call after editing ``phi`` in place."""
        self._hat_ready = False
        self.refresh_centre()

    def refresh_centre(self) -> float:
        lat = self.lattice
        root = _kernels.nearest_crossing(self.phi, lat.x_min, lat.dx, self._k0)
        if root == root:
            self.centre = root
            self._k0 = int(min(max((root - lat.x_min) // lat.dx, 0), lat.grid_count - 1))
        return self.centre

    def copy(self) -> "BookState":
        new = object.__new__(BookState)
        new.__dict__.update(self.__dict__)
        new.ring = self.ring.copy()
        new.times = self.times.copy()
        if self.nonuniform:
            new.hat_left = self.hat_left.copy()
            new.hat_right = self.hat_right.copy()
            new.hat_shift = self.hat_shift.copy()
        new._work = np.empty_like(self._work)
        return new

    def shift_window(self, cells: int) -> None:
        """Move the stored price window by whole cells (positive = rightwards).

        Nodes entering the window start at zero, which is what the vanishing
        boundary condition says the density is out there.
        """
        cells = int(cells)
        if cells == 0:
            return
        lat = self.lattice
        arrays = [self.ring] + ([self.hat_left, self.hat_right] if self.nonuniform else [])
        for a in arrays:
            if abs(cells) >= a.shape[1]:
                a[:] = 0.0
            elif cells > 0:
                a[:, :-cells] = a[:, cells:]
                a[:, -cells:] = 0.0
            else:
                a[:, -cells:] = a[:, :cells]
                a[:, :-cells] = 0.0
        self.lattice = LatticeSpec(lat.price_span, lat.grid_count, lat.alpha, lat.diffusion,
                                   lat.jump_prob, lat.initial_mid, lat.x_min + cells * lat.dx)
        self.x = self.lattice.x
        self._k0 -= cells
        self.refresh_centre()

    def _push(self, row: np.ndarray, dt: float) -> None:
        self.head = (self.head + 1) % self.depth
        self.ring[self.head] = row
        self.t += dt
        self.times[self.head] = self.t
        self.n += 1
        self.count = min(self.count + 1, self.depth)
        self._hat_ready = False
        self.refresh_centre()

    def _lags(self) -> np.ndarray:
        return (self.head - np.arange(self.depth)) % self.depth + 1


def ghost_values(left: float, right: float, V: float, D_alpha: float, dt: float):
    """Ghost nodes beyond x_min and x_max for boundary values ``left``/``right``."""
    c = dt * V / D_alpha
    return left * (1.0 + c), right * (1.0 - c)


def apply_ghost_boundary(row, V: float, D_alpha: float, dt: float) -> np.ndarray:
    """Row padded with one ghost node on each side."""
    row = np.asarray(row, dtype=float)
    gl, gr = ghost_values(row[0], row[-1], V, D_alpha, dt)
    return np.concatenate(([gl], row, [gr]))


def _uniform_weights(state: BookState, kernel: KernelTable, dt: float) -> np.ndarray:
    key = (id(kernel), kernel.window, state.nu, dt, state.depth)
    if state._wcache is None or state._wcache[0] != key:
        W = kernel.window
        lag_w = np.zeros(state.depth + 1)
        j = np.arange(1, W + 1)
        lag_w[1:W + 1] = kernel.weights * np.exp(-(j - 1) * state.nu * dt)
        state._wcache = (key, lag_w)
    return state._wcache[1]


def _check(state: BookState, kernel: KernelTable) -> None:
    if state.depth < kernel.window:
        raise ValueError(f"history depth {state.depth} is shorter than the kernel window {kernel.window}")


def step_uniform(state: BookState, kernel: KernelTable, probs: JumpProbabilities,
                 source: SourceSpec, V: float = 0.0, dt: float | None = None) -> BookState:
    """Advance one step on the uniform lattice (in place; returns the state)."""
    _check(state, kernel)
    lat = state.lattice
    dt = lat.dt if dt is None else dt
    lag_w = _uniform_weights(state, kernel, dt)
    w = lag_w[state._lags()]
    H, src, out = state._work[0], state._work[1], state._work[2]
    _kernels.weighted_sum(state.ring, w, H)
    gl, gr = ghost_values(H[0], H[-1], V, lat.diffusion, dt)
    _kernels.lit_source(state.x, state.centre, source.kappa, source.mu, src)
    _kernels.uniform_update(H, state.phi, src, probs.left_weight, probs.right_weight,
                            lat.jump_prob, math.exp(-state.nu * dt), dt, gl, gr, out)
    state._push(out, dt)
    return state


def interpolate_offgrid(phi_row, x_target: float, x_min: float, dx: float) -> float:
    """Mid-point rule phi_k + (x - x_k)/(2 dx) (phi_{k+1} - phi_{k-1}).

    Targets outside the grid take the boundary value; at the first node a
    one-sided slope is used.
    """
    row = np.asarray(phi_row, dtype=float)
    n = row.size
    u = (x_target - x_min) / dx
    if u <= 0:
        return float(row[0])
    if u >= n - 1:
        return float(row[-1])
    k = int(math.floor(u))
    f = u - k
    if f == 0.0:
        return float(row[k])
    if k == 0:
        return float(row[0] + f * (row[1] - row[0]))
    return float(row[k] + 0.5 * f * (row[k + 1] - row[k - 1]))


def donor_shift(lattice: LatticeSpec, dt_m: float) -> float:
    """Jump-lattice spacing for a step of length dt_m, in background cells."""
    s = (dt_m / lattice.dt) ** (lattice.alpha / 2.0)
    near = round(s)
    if abs(s - near) < 1e-12:
        s = float(near)
    return s


def _ghost_correction(state: BookState, w, probs: JumpProbabilities, c: float, out) -> None:
    """Donors past a wall read the ghost value phi_wall (1 +- c), not the clamped phi_wall."""
    sh = state.hat_shift
    reach = min(int(math.ceil(sh.max())), out.size)
    if reach <= 0:
        return
    left = state.ring[:, 0] * w
    right = state.ring[:, -1] * w
    N = out.size - 1
    for i in range(reach):
        beyond = sh > i
        out[i] += probs.left_weight * c * left[beyond].sum()
        out[N - i] -= probs.right_weight * c * right[beyond].sum()


def step_nonuniform(state: BookState, kernel: KernelTable, probs: JumpProbabilities,
                    source: SourceSpec, dt_m: float, V: float = 0.0) -> BookState:
    """Advance one step of length ``dt_m`` with off-grid donors."""
    if not state.nonuniform:
        raise ValueError("state was not built for the non-uniform scheme")
    _check(state, kernel)
    lat = state.lattice
    h = state.head
    if not state._hat_ready:
        s = donor_shift(lat, dt_m)
        _kernels.shifted_row(state.ring[h], -s, state.hat_left[h])
        _kernels.shifted_row(state.ring[h], s, state.hat_right[h])
        state.hat_shift[h] = s
        state._hat_ready = True
    lags = state._lags()
    K = np.zeros(state.depth + 1)
    K[1:kernel.window + 1] = kernel.weights
    w = K[lags] * np.exp(-state.nu * (state.t - state.times))
    HL, HR, H, src = state._work
    _kernels.weighted_sum(state.hat_left, w, HL)
    _kernels.weighted_sum(state.hat_right, w, HR)
    _kernels.weighted_sum(state.ring, w, H)
    _kernels.lit_source(state.x, state.centre, source.kappa, source.mu, src)
    out = np.empty(lat.n_points)
    _kernels.nonuniform_update(HL, HR, H, state.phi, src, probs.left_weight, probs.right_weight,
                               lat.jump_prob, math.exp(-state.nu * dt_m), dt_m, out)
    if V != 0.0:
        _ghost_correction(state, w, probs, dt_m * V / lat.diffusion, out)
    state._push(out, dt_m)
    return state


def simple_diffusion_step(phi, r: float, nu: float, dt: float, src) -> np.ndarray:
    """Delta-kernel update with zero-flux ends, written out directly."""
    phi = np.asarray(phi, dtype=float)
    left = np.concatenate(([phi[0]], phi[:-1]))
    right = np.concatenate((phi[1:], [phi[-1]]))
    return (r / 2) * left + (r / 2) * right - (r - math.exp(-nu * dt)) * phi + src * dt


def relax_to_equilibrium(spec: LatticeSpec, source: SourceSpec, nu: float = 0.5,
                         tol: float = 1e-10, max_steps: int = 200_000,
                         depth: int = 1, nonuniform: bool = False) -> BookState:
    """Run simple diffusion (alpha = 1, F = 0) from phi = 0 until it stops changing.

    The source stays centred on ``spec.initial_mid``.  The returned state
    holds the relaxed field as its only history row, so an anomalous run
    started from it sees zeros before t = 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dt = derive_dt(spec.dx, spec.diffusion, 1.0, spec.jump_prob)
    src = source.density(spec.x, spec.initial_mid)
    phi = np.zeros(spec.n_points)
    resid = math.inf
    for n in range(1, max_steps + 1):
        new = simple_diffusion_step(phi, spec.jump_prob, nu, dt, src)
        resid = float(np.max(np.abs(new - phi)))
        phi = new
        if resid < tol:
            break
    else:
        raise EquilibriumError(resid, max_steps)
    return BookState(spec, phi, depth, nu, spec.initial_mid, nonuniform)


def seeded_state(base: BookState, kernel: KernelTable, nonuniform: bool = False) -> BookState:
    """Fresh state holding ``base.phi`` with a zero history deep enough for ``kernel``."""
    st = BookState(base.lattice, base.phi.copy(), kernel.window, base.nu, base.centre, nonuniform)
    return st


class Simulator:
    """Drives a state through a run with AR(1) forcing and a time grid.

    ``potentials`` and ``steps`` are per-step arrays (``steps`` only for the
    non-uniform scheme).  One call to :meth:`advance` consumes them in order.
    """

    def __init__(self, state: BookState, kernel: KernelTable, source: SourceSpec,
                 scheme: str = "uniform", potentials=None, steps=None, beta: float = 1.0,
                 recentre: float | None = None):
        self.state = state
        # recentre: move the window once the mid-price is this far from its middle
        self.recentre = recentre
        self.kernel = kernel
        self.source = source
        self.scheme = scheme
        self.potentials = None if potentials is None else np.asarray(potentials, dtype=float)
        self.steps = None if steps is None else np.asarray(steps, dtype=float)
        if scheme == "nonuniform" and self.steps is None:
            raise ValueError("non-uniform scheme needs a step sequence")
        self.beta = beta
        self.cursor = 0
        lat = state.lattice
        self._zero = jump_probabilities(lat.jump_prob, 0.0)

    def copy(self) -> "Simulator":
        new = object.__new__(Simulator)
        new.__dict__.update(self.__dict__)
        new.state = self.state.copy()
        return new

    def step(self) -> BookState:
        st, lat, i = self.state, self.state.lattice, self.cursor
        V = 0.0 if self.potentials is None else float(self.potentials[i])
        if V == 0.0:
            probs = self._zero
        else:
            F = force_from_potential(V, self.beta, lat.diffusion, lat.jump_prob)
            probs = jump_probabilities(lat.jump_prob, F)
        if self.scheme == "uniform":
            step_uniform(st, self.kernel, probs, self.source, V)
        else:
            step_nonuniform(st, self.kernel, probs, self.source, float(self.steps[i]), V)
        self.cursor += 1
        if self.recentre is not None:
            lat = st.lattice
            off = st.centre - 0.5 * (lat.x_min + lat.x_max)
            if abs(off) > self.recentre:
                st.shift_window(int(round(off / lat.dx)))
        return st

    def advance(self, n: int) -> BookState:
        for _ in range(n):
            self.step()
        return self.state


def default_kernel(alpha: float, m0: int | None = None) -> KernelTable:
    return build_kernel(alpha, m0=m0)
