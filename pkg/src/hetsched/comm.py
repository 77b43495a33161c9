"""Inter-stage transfer occupancy (f_comm) and the host-ingest stagger rule.

A transfer occupies both endpoint device groups for its full wall duration,
so the Source and Destination sides of one boundary see the same occupancy.
The analytic model assumes transfers sharing an endpoint never overlap;
the simulator enforces that contract by assertion.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .core import DeviceType, InterconnectSpec, SystemSpec
from .errors import ConfigError

HOST = "host"  # pseudo-device name for ingest/egress endpoints


class TransferSide(str, Enum):
    SOURCE = "source"
    DESTINATION = "destination"


@dataclass(frozen=True)
class Endpoint:
    """One side of a transfer: a device group or the host pseudo-device."""

    bandwidth: float  # bytes/s per device, unscaled
    count: int = 1
    name: str = HOST

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("endpoint count must be >= 1")
        if self.bandwidth <= 0:
            raise ConfigError(f"endpoint {self.name}: zero bandwidth")

    @classmethod
    def of(cls, device: DeviceType, count: int) -> "Endpoint":
        return cls(bandwidth=device.link_bandwidth, count=count,
                   name=device.name)

    @classmethod
    def host(cls, sys_spec: SystemSpec) -> "Endpoint":
        return cls(bandwidth=sys_spec.effective_host_bandwidth())


@dataclass(frozen=True)
class TransferQuery:
    bytes: int
    src: Endpoint
    dst: Endpoint
    side: TransferSide = TransferSide.DESTINATION

    def __post_init__(self):
        if self.bytes < 0:
            raise ConfigError("transfer bytes must be >= 0")


def f_comm(q: TransferQuery, ic: InterconnectSpec) -> float:
    """Occupancy time of a transfer on either endpoint group.

    Wall duration is bytes over the narrower aggregate bandwidth (scaled by
    the interconnect generation); the CPU-routed path stretches it by
    cpu_route_factor and adds the larger fixed latency.
    """
    agg_src = q.src.count * q.src.bandwidth * ic.bandwidth_scale
    agg_dst = q.dst.count * q.dst.bandwidth * ic.bandwidth_scale
    duration = q.bytes / min(agg_src, agg_dst)
    if ic.p2p_enabled:
        return duration + ic.p2p_fixed_latency
    return duration * ic.cpu_route_factor + ic.cpu_fixed_latency


def boundary_comm(bytes_: int, src: Optional[tuple[DeviceType, int]],
                  dst: Optional[tuple[DeviceType, int]],
                  sys_spec: SystemSpec) -> float:
    """f_comm for a stage boundary; None endpoints are the host."""
    src_ep = Endpoint.host(sys_spec) if src is None else Endpoint.of(*src)
    dst_ep = Endpoint.host(sys_spec) if dst is None else Endpoint.of(*dst)
    return f_comm(TransferQuery(bytes=bytes_, src=src_ep, dst=dst_ep),
                  sys_spec.interconnect)


def stagger_offset(schedule, wl, sys_spec: SystemSpec) -> float:
    """One-time host-ingest delay inserted after the first pipeline iteration.

    Desynchronizes host ingest from the inter-accelerator transfer at the
    first stage boundary; zero for single-stage pipelines.
    """
    if len(schedule.stages) < 2:
        return 0.0
    first = schedule.stages[0]
    dev = sys_spec.device(first.device_type)
    return boundary_comm(wl.input_bytes, None, (dev, first.device_count),
                         sys_spec)
