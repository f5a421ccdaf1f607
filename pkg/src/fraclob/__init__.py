"""Fractional-diffusion limit order book simulator."""
from .lattice import LatticeSpec, TimeGrid, build_time_grid, derive_dt, derive_dx, sampling_ratios
from .kernel import KernelTable, build_kernel, memory_window_for_trades
from .forcing import ForcingPath, JumpProbabilities, force_from_potential, generate_potential, jump_probabilities
from .dynamics import BookState, SourceSpec, Simulator, relax_to_equilibrium, step_nonuniform, step_uniform
from . import _kernels

__version__ = "0.1.0"
backend = _kernels.BACKEND
