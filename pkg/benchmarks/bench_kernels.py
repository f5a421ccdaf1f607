"""Wall-clock of the compiled core against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from fraclob import LatticeSpec, SourceSpec, Simulator, _kernels, build_kernel, relax_to_equilibrium
from fraclob.dynamics import seeded_state
from fraclob.experiments.variance import spike_variance
from fraclob.forcing import generate_potential
from fraclob.lattice import build_time_grid


def session_chunk(base, scheme, steps=4000, alpha=0.8, m0=104):
    kern = build_kernel(alpha, m0=m0)
    st = seeded_state(base, kern, scheme == "nonuniform")
    st.lattice = LatticeSpec(alpha=alpha)
    V = generate_potential(steps, 0.9, 1.0, seed=[1, 0]).values
    dts = build_time_grid("exponential", st.lattice.intensity, steps, [1, 1]).steps
    Simulator(st, kern, SourceSpec(), scheme, V, dts if scheme == "nonuniform" else None,
              recentre=50.0).advance(steps)
    return st.centre


CASES = {
    "uniform, a=0.8, window 104, 4000 steps": lambda b: session_chunk(b, "uniform"),
    "nonuniform, a=0.8, window 104, 4000 steps": lambda b: session_chunk(b, "nonuniform"),
    "spike variance, a=0.7, dx=0.2, full memory": lambda b: spike_variance(0.7, 0.2).b_hat,
}


def best_of(fn, base, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(base)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    base = relax_to_equilibrium(LatticeSpec(), SourceSpec())
    backends = _kernels.available()
    start = _kernels.BACKEND
    print(f"{'case':46s}" + "".join(f"{b:>12s}" for b in backends) + "     speed-up")
    for name, fn in CASES.items():
        times, results = [], []
        for b in backends:
            _kernels.use_backend(b)
            t, r = best_of(fn, base, args.repeat)
            times.append(t)
            results.append(r)
        _kernels.use_backend(start)
        ratio = times[-1] / times[0] if len(times) > 1 else 1.0
        print(f"{name:46s}" + "".join(f"{t:11.3f}s" for t in times) + f"{ratio:12.2f}x")
        if len(results) > 1 and abs(results[0] - results[1]) > 1e-8:
            print(f"  warning: backends disagree ({results[0]!r} vs {results[1]!r})")


if __name__ == "__main__":
    main()
