"""Numeric problem representation consumed by the scheduling engines.

Everything the DP and the exhaustive search need is lowered here to plain
lists of floats/ints: per-kernel stage-time contributions (left-to-right
range sums), boundary transfer occupancies, transfer powers, and static
powers.  Both engines and the schedule evaluator read these tables, which
pins a single floating-point path for every consumer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from ..comm import boundary_comm
from ..core import SystemSpec, Workload
from ..errors import InfeasibleError
from ..perf import ModelRegistry, kernel_unit_time


@dataclass
class Problem:
    n: int  # kernels
    n_types: int
    avail: Tuple[int, ...]  # per type
    options: Tuple[Tuple[int, int], ...]  # (type index, device count)
    host: int  # endpoint index of the host pseudo-device (== len(options))
    allowed: list  # allowed[i][o] -> bool
    allowed_prefix: list  # per option: prefix counts of allowed kernels
    s_exec: list  # s_exec[o][a][b]: exec time of kernels [a,b) on option o
    s_edyn: list  # same layout; per-device kind-weighted dynamic energy
    comm: list  # comm[b][src_ep][dst_ep]: boundary transfer occupancy
    pxfer: list  # per endpoint: count * p_transfer_dynamic (0 for host)
    pstat: list  # per type: static watts of one device

    def range_allowed(self, a: int, b: int, o: int) -> bool:
        pref = self.allowed_prefix[o]
        return pref[b] - pref[a] == b - a

    def usage_index(self, usage: Sequence[int]) -> int:
        idx = 0
        for t in range(self.n_types):
            idx = idx * (self.avail[t] + 1) + usage[t]
        return idx

    @property
    def n_usage(self) -> int:
        prod = 1
        for c in self.avail:
            prod *= c + 1
        return prod


def build_problem(wl: Workload, sys_spec: SystemSpec,
                  registry: ModelRegistry,
                  type_restriction: Optional[Sequence[Optional[str]]] = None
                  ) -> Problem:
    """Lower a scheduling instance to numeric tables.

    `type_restriction` optionally pins kernel i to one device-type name
    (None entries stay free); used by the FleetRec and single-type baselines.
    """
    n = len(wl)
    types = sys_spec.device_types
    avail = tuple(d.count_available for d in types)
    options: list[Tuple[int, int]] = []
    for t, dev in enumerate(types):
        for c in range(1, dev.count_available + 1):
            options.append((t, c))
    n_opts = len(options)
    host = n_opts

    allowed = [[False] * n_opts for _ in range(n)]
    unschedulable = []
    for i, k in enumerate(wl.kernels):
        any_ok = False
        for o, (t, _c) in enumerate(options):
            dev = types[t]
            ok = (k.kind in dev.eligible
                  and registry.has(dev.perf_model_id, k.kind))
            if ok and type_restriction is not None:
                pinned = type_restriction[i]
                ok = pinned is None or pinned == dev.name
            allowed[i][o] = ok
            any_ok = any_ok or ok
        if not any_ok:
            unschedulable.append(k.label or f"kernel {i}")
    if unschedulable:
        raise InfeasibleError(
            "no eligible device type for: " + ", ".join(unschedulable))

    allowed_prefix = []
    for o in range(n_opts):
        pref = [0] * (n + 1)
        for i in range(n):
            pref[i + 1] = pref[i] + (1 if allowed[i][o] else 0)
        allowed_prefix.append(pref)

    # Per-kernel stage-time contributions, then left-to-right range sums.
    u = [[0.0] * n_opts for _ in range(n)]
    ed = [[0.0] * n_opts for _ in range(n)]
    for i, k in enumerate(wl.kernels):
        for o, (t, c) in enumerate(options):
            if not allowed[i][o]:
                continue
            dev = types[t]
            ti = kernel_unit_time(k, wl.replication_input[i], dev, c,
                                  sys_spec, registry)
            u[i][o] = ti
            ed[i][o] = dev.p_dynamic.get(k.kind, 0.0) * ti

    s_exec = [[[0.0] * (n + 1) for _ in range(n + 1)] for _ in range(n_opts)]
    s_edyn = [[[0.0] * (n + 1) for _ in range(n + 1)] for _ in range(n_opts)]
    for o in range(n_opts):
        for a in range(n):
            se = 0.0
            sd = 0.0
            row_e = s_exec[o][a]
            row_d = s_edyn[o][a]
            for b in range(a + 1, n + 1):
                se += u[b - 1][o]
                sd += ed[b - 1][o]
                row_e[b] = se
                row_d[b] = sd

    endpoints = [(types[t], c) for t, c in options] + [None]
    comm = [[[0.0] * (n_opts + 1) for _ in range(n_opts + 1)]
            for _ in range(n + 1)]
    for b in range(n + 1):
        nbytes = wl.boundary_bytes(b)
        for so in range(n_opts + 1):
            for do in range(n_opts + 1):
                comm[b][so][do] = boundary_comm(
                    nbytes, endpoints[so], endpoints[do], sys_spec)

    pxfer = [c * types[t].p_transfer_dynamic for t, c in options] + [0.0]
    pstat = [d.p_static for d in types]

    return Problem(
        n=n, n_types=len(types), avail=avail, options=tuple(options),
        host=host, allowed=allowed, allowed_prefix=allowed_prefix,
        s_exec=s_exec, s_edyn=s_edyn, comm=comm, pxfer=pxfer, pstat=pstat)
