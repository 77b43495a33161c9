"""Scheduling engine selection.

The dynamic program and the exhaustive search are implemented twice: once in
pure Python (`engine_py`) and once as a Cython extension (`_engine_cy`) for
large workloads.  Both follow the same loop structure and accumulation order,
so they produce bit-identical results; the extension is selected at import
when available unless HETSCHED_PURE_PYTHON=1 is set.
"""
import os

from . import engine_py

if os.environ.get("HETSCHED_PURE_PYTHON") == "1":
    active = engine_py
    BACKEND = "python"
else:
    try:
        from . import _engine_cy as active  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        active = engine_py
        BACKEND = "python"

solve_dp = active.solve_dp
enumerate_all = active.enumerate_all

__all__ = ["solve_dp", "enumerate_all", "engine_py", "BACKEND"]
