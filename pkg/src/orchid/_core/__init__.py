"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-NumPy lane.
Set ORCHID_KERNELS=py (or =c) to force a lane, e.g. for benchmarking.
"""

import os

from .kernels_py import radio_constants
from . import kernels_py

_requested = os.environ.get("ORCHID_KERNELS", "").strip().lower()

if _requested == "py":
    radio_snapshot = kernels_py.radio_snapshot
    BACKEND = "python"
elif _requested in ("", "c", "compiled"):
    try:
        from ._kernels import radio_snapshot
        BACKEND = "compiled"
    except ImportError:
        if _requested in ("c", "compiled"):
            raise
        radio_snapshot = kernels_py.radio_snapshot
        BACKEND = "python"
else:
    raise ValueError(f"ORCHID_KERNELS must be 'py' or 'c', got {_requested!r}")

__all__ = ["radio_snapshot", "radio_constants", "BACKEND", "kernels_py"]
