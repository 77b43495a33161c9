"""Discrete-event simulator for pipeline schedules.

Each stage is a sequential server over three operations per iteration:
receive input (shared with the upstream stage's send), execute, send output
(shared with the downstream receive).  Depth-1 buffers: a stage cannot
receive iteration t+1 before it finished sending iteration t.  Host ingest
of the second iteration is delayed by one ingest duration (the stagger
rule) to desynchronize host traffic from inter-accelerator transfers.

The simulator shares stage and transfer times with the analytic model, so
the measured steady period and energy must agree with the closed forms;
that agreement is the cross-module oracle.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .core import PipelineSchedule, SystemSpec, Workload
from .comm import stagger_offset
from .energy import f_eng, stage_dynamic_energy_per_device
from .errors import ConfigError, SimConflictError
from .perf import ModelRegistry


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str  # Ingest | XferStart | XferEnd | StageStart | StageEnd
    stage: int
    iteration: int
    device_type: str

    SORT_RANK = {"Ingest": 0, "XferStart": 1, "XferEnd": 2,
                 "StageStart": 3, "StageEnd": 4}


@dataclass(frozen=True)
class DeviceStats:
    device_type: str
    device_count: int
    busy_s: float
    transfer_s: float
    idle_s: float


@dataclass(frozen=True)
class SimReport:
    steady_period: float
    latency: float
    energy: float
    iterations: int
    warmup: int
    per_stage: Tuple[DeviceStats, ...]
    trace: Optional[Tuple[SimEvent, ...]] = None

    @property
    def energy_per_inference(self) -> float:
        return self.energy / (self.iterations - self.warmup)

    def to_dict(self) -> dict:
        return {
            "steady_period": self.steady_period,
            "throughput": 1.0 / self.steady_period,
            "latency": self.latency,
            "energy": self.energy,
            "iterations": self.iterations,
            "warmup": self.warmup,
            "per_stage": [
                {"device_type": d.device_type, "device_count": d.device_count,
                 "busy_s": d.busy_s, "transfer_s": d.transfer_s,
                 "idle_s": d.idle_s}
                for d in self.per_stage],
        }


def _check_no_overlap(intervals, stage, sched):
    prev_end = None
    prev_win = None
    for win in intervals:
        if prev_end is not None and win[0] < prev_end - 1e-15:
            raise SimConflictError(
                f"stage {stage} ({sched.stages[stage].device_type}): "
                f"transfer windows {prev_win} and {win} overlap")
        prev_end = win[1]
        prev_win = win


def simulate(schedule: PipelineSchedule, wl: Workload, sys_spec: SystemSpec,
             registry: ModelRegistry, iterations: int = 0,
             warmup: int = 0, trace: bool = False) -> SimReport:
    """Drive `iterations` batches through the pipeline and measure the
    steady-state period and energy."""
    stages = schedule.stages
    n_stages = len(stages)
    if warmup <= 0:
        warmup = 3 * n_stages
    warmup = max(warmup, 2 * n_stages)
    if iterations <= 0:
        iterations = warmup + 25
    if iterations <= warmup:
        raise ConfigError("iterations must exceed warmup")

    offset = stagger_offset(schedule, wl, sys_spec)
    free = [0.0] * n_stages
    ingest_start = [0.0] * iterations
    completions = [0.0] * iterations
    xfer_windows = [[] for _ in range(n_stages)]
    compute_windows = [[] for _ in range(n_stages)]
    events: list[SimEvent] = []
    first_ingest_end = 0.0

    for t in range(iterations):
        for s in range(n_stages):
            st = stages[s]
            if s == 0:
                start = free[0]
                if t == 1:
                    start = max(start, first_ingest_end + offset)
                end = start + st.t_comm_in
                free[0] = end
                ingest_start[t] = start
                if t == 0:
                    first_ingest_end = end
                xfer_windows[0].append((start, end))
                if trace:
                    events.append(SimEvent(start, "Ingest", 0, t,
                                           st.device_type))
                    events.append(SimEvent(end, "XferEnd", 0, t,
                                           st.device_type))
            else:
                start = max(free[s - 1], free[s])
                end = start + st.t_comm_in
                free[s - 1] = end
                free[s] = end
                xfer_windows[s - 1].append((start, end))
                xfer_windows[s].append((start, end))
                if trace:
                    events.append(SimEvent(start, "XferStart", s, t,
                                           st.device_type))
                    events.append(SimEvent(end, "XferEnd", s, t,
                                           st.device_type))
            cstart = free[s]
            cend = cstart + st.t_exec
            free[s] = cend
            compute_windows[s].append((cstart, cend))
            if trace:
                events.append(SimEvent(cstart, "StageStart", s, t,
                                       st.device_type))
                events.append(SimEvent(cend, "StageEnd", s, t,
                                       st.device_type))
        last = stages[-1]
        estart = free[-1]
        eend = estart + last.t_comm_out
        free[-1] = eend
        xfer_windows[-1].append((estart, eend))
        completions[t] = eend
        if trace:
            events.append(SimEvent(estart, "XferStart", n_stages - 1, t,
                                   last.device_type))
            events.append(SimEvent(eend, "XferEnd", n_stages - 1, t,
                                   last.device_type))

    for s in range(n_stages):
        _check_no_overlap(sorted(xfer_windows[s]), s, schedule)

    n_measured = iterations - warmup
    span = completions[-1] - completions[warmup - 1]
    steady_period = span / n_measured

    # Energy: static power over the measured span plus exact per-iteration
    # dynamic attribution, mirroring the analytic accrual order.
    p_static = 0.0
    for st in stages:
        p_static += st.device_count * sys_spec.device(st.device_type).p_static
    e_dyn_iter = 0.0
    prev = None
    for st in stages:
        dev = sys_spec.device(st.device_type)
        if prev is not None:
            prev_dev = sys_spec.device(prev.device_type)
            e_dyn_iter += (prev.device_count * prev_dev.p_transfer_dynamic
                           * prev.t_comm_out)
        e_dyn_iter += st.device_count * stage_dynamic_energy_per_device(
            wl, st.start, st.end, dev, st.device_count, sys_spec, registry)
        e_dyn_iter += st.device_count * dev.p_transfer_dynamic * st.t_comm_in
        prev = st
    e_dyn_iter += (prev.device_count
                   * sys_spec.device(prev.device_type).p_transfer_dynamic
                   * prev.t_comm_out)
    energy = p_static * span + n_measured * e_dyn_iter

    per_stage = []
    for s, st in enumerate(stages):
        busy = st.t_exec * n_measured
        xfer = (st.t_comm_in + st.t_comm_out) * n_measured
        per_stage.append(DeviceStats(
            device_type=st.device_type, device_count=st.device_count,
            busy_s=busy, transfer_s=xfer,
            idle_s=max(span - busy - xfer, 0.0)))

    latency = completions[-1] - ingest_start[-1]
    ordered = tuple(sorted(
        events, key=lambda e: (e.time, e.iteration, e.stage,
                               SimEvent.SORT_RANK[e.kind]))) if trace else None
    return SimReport(steady_period=steady_period, latency=latency,
                     energy=energy, iterations=iterations, warmup=warmup,
                     per_stage=tuple(per_stage), trace=ordered)


def emit_trace(report: SimReport, path) -> None:
    """Write the captured event timeline as CSV for external Gantt tools."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "event", "stage", "iteration", "device_type"])
        for e in report.trace or ():
            w.writerow([repr(e.time), e.kind, e.stage, e.iteration,
                        e.device_type])
