"""Energy per pipeline period (f_eng).

Allocated devices pay static power for the whole period, kind-weighted
dynamic power while executing, and transfer power while their stage's
boundary transfers are in flight.  Devices not allocated to any stage are
powered down and contribute nothing.

The accumulation order here (per stage: previous boundary's source-side
transfer energy, then execution energy, then incoming-transfer energy;
finally the egress term) is the canonical order shared with the DP engine,
the oracle, and the simulator so that analytic and searched energies agree
bit for bit.
"""
from __future__ import annotations

from .core import PipelineSchedule, SystemSpec, Workload
from .errors import ValidationError
from .perf import ModelRegistry, kernel_unit_time


def stage_dynamic_energy_per_device(wl: Workload, start: int, end: int,
                                    device, n_dev: int,
                                    sys_spec: SystemSpec,
                                    registry: ModelRegistry) -> float:
    """Kind-weighted execution energy of one device over a stage's kernels."""
    total = 0.0
    for i in range(start, end):
        k = wl.kernels[i]
        t = kernel_unit_time(k, wl.replication_input[i], device, n_dev,
                             sys_spec, registry)
        total += device.p_dynamic.get(k.kind, 0.0) * t
    return total


def f_eng(schedule: PipelineSchedule, period: float, sys_spec: SystemSpec,
          wl: Workload, registry: ModelRegistry) -> float:
    """Joules consumed by one pipeline period of the given schedule."""
    peak = max(s.t_stage for s in schedule.stages)
    if period < peak:
        raise ValidationError(
            f"period {period} is below the longest stage time {peak}")
    e_dyn = 0.0
    prev = None
    for s in schedule.stages:
        dev = sys_spec.device(s.device_type)
        if prev is not None:
            prev_dev = sys_spec.device(prev.device_type)
            e_dyn += (prev.device_count * prev_dev.p_transfer_dynamic
                      * prev.t_comm_out)
        e_dyn += s.device_count * stage_dynamic_energy_per_device(
            wl, s.start, s.end, dev, s.device_count, sys_spec, registry)
        e_dyn += s.device_count * dev.p_transfer_dynamic * s.t_comm_in
        prev = s
    last_dev = sys_spec.device(prev.device_type)
    e_dyn += prev.device_count * last_dev.p_transfer_dynamic * prev.t_comm_out

    p_static = 0.0
    for s in schedule.stages:
        p_static += s.device_count * sys_spec.device(s.device_type).p_static
    return p_static * period + e_dyn


def energy_per_inference(energy_per_period: float) -> float:
    """One inference drains per period in steady state."""
    return energy_per_period


def efficiency(energy_per_period: float) -> float:
    """Inferences per joule."""
    return 1.0 / energy_per_period
