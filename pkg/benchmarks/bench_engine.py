"""Benchmark the compiled scheduling engine against the pure-Python one.

Runs the frontier dynamic program on workloads of increasing size with the
demo system and models, reporting wall time for each backend and verifying
that both return the same candidate set.

Usage: python3 benchmarks/bench_engine.py [--repeats N]
"""
import argparse
import time

from hetsched import build_preset, demo_registry, demo_system
from hetsched._engine import BACKEND, engine_py
from hetsched._engine.problem import build_problem

try:
    from hetsched._engine import _engine_cy
except ImportError:
    _engine_cy = None

CASES = [
    ("gcn OA (4 kernels)", lambda: build_preset("gcn", "OA")),
    ("gcn S2 (4 kernels)", lambda: build_preset("gcn", "S2")),
    ("transformer 8 layers (32 kernels)",
     lambda: build_preset("transformer", seq_len=1024, window=512, layers=8)),
    ("transformer 16 layers (64 kernels)",
     lambda: build_preset("transformer", seq_len=1024, window=512, layers=16)),
    ("transformer 32 layers (128 kernels)",
     lambda: build_preset("transformer", seq_len=1024, window=512, layers=32)),
]


def _time(fn, problem, repeats):
    best, out = float("inf"), None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(problem)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if _engine_cy is None:
        print("compiled engine not available; benchmarking pure Python only")
    print(f"default backend: {BACKEND}\n")
    sys_spec, reg = demo_system(), demo_registry()

    header = f"{'case':<38}{'python':>12}{'cython':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, build in CASES:
        problem = build_problem(build(), sys_spec, reg)
        t_py, out_py = _time(engine_py.solve_dp, problem, args.repeats)
        if _engine_cy is None:
            print(f"{name:<38}{t_py * 1e3:>10.1f}ms{'—':>12}{'—':>10}")
            continue
        t_cy, out_cy = _time(_engine_cy.solve_dp, problem, args.repeats)
        same = sorted(out_py) == sorted(out_cy)
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<38}{t_py * 1e3:>10.1f}ms{t_cy * 1e3:>10.1f}ms"
              f"{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
