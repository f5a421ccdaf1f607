"""Backend selection for the hot loops.

The compiled extension is used when it imports; ``FRACLOB_BACKEND=python``
forces the numpy fallback.  :func:`use_backend` switches at runtime (tests,
benchmarks).
"""
import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_NAMES = ("weighted_sum", "lit_source", "uniform_update", "nonuniform_update",
          "shifted_row", "crossing_root", "nearest_crossing")


def available():
    return ("compiled", "python") if _core is not None else ("python",)


def use_backend(name: str) -> None:
    if name == "compiled":
        if _core is None:
            raise ImportError("compiled core is not built")
        mod = _core
    elif name == "python":
        mod = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    for fn in _NAMES:
        g[fn] = getattr(mod, fn)
    g["BACKEND"] = mod.BACKEND


def _default():
    want = os.environ.get("FRACLOB_BACKEND", "").strip().lower()
    if want == "python" or _core is None:
        return "python"
    return "compiled"


use_backend(_default())
