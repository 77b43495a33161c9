"""Shared domain vocabulary: kernels, workloads, device pools, and schedules.

Everything here is an immutable value object.  Times are seconds, sizes are
bytes, powers are watts, energies are joules.  Tensor elements are FP32
(see ELEMENT_BYTES) throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence, Tuple

from .errors import ConfigError, ValidationError

ELEMENT_BYTES = 4  # FP32; single point of change for the element size


class KernelKind(str, Enum):
    SPMM = "spmm"
    GEMM = "gemm"
    WINDOW_ATTENTION = "window_attention"


@dataclass(frozen=True)
class Kernel:
    """One compute step; the unit of scheduling.

    SpMM computes sparse(m x k) @ dense(k x n) with `nnz` stored nonzeros.
    GEMM computes dense(m x k) @ dense(k x n).  WindowAttention is described
    by (seq_len, window) only; m/k/n are unused and held at 0.
    """

    kind: KernelKind
    m: int = 0
    k: int = 0
    n: int = 0
    nnz: int = 0
    seq_len: int = 0
    window: int = 0
    label: str = ""

    def output_shape(self) -> Optional[Tuple[int, int]]:
        """(rows, cols) of the result tensor, or None for WindowAttention."""
        if self.kind is KernelKind.WINDOW_ATTENTION:
            return None
        return (self.m, self.n)

    def local_errors(self) -> list[str]:
        errs = []
        tag = self.label or self.kind.value
        if self.kind is KernelKind.WINDOW_ATTENTION:
            if self.seq_len < 1:
                errs.append(f"{tag}: seq_len must be >= 1")
            if not (1 <= self.window <= self.seq_len):
                errs.append(f"{tag}: window must be in [1, seq_len]")
        else:
            if min(self.m, self.k, self.n) < 1:
                errs.append(f"{tag}: m, k, n must be >= 1")
            if self.kind is KernelKind.SPMM:
                if self.nnz < 1:
                    errs.append(f"{tag}: SpMM needs nnz >= 1")
                if self.nnz > self.m * self.k:
                    errs.append(f"{tag}: nnz exceeds matrix capacity")
        return errs

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "m": self.m,
            "k": self.k,
            "n": self.n,
            "nnz": self.nnz,
            "seq_len": self.seq_len,
            "window": self.window,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Kernel":
        return cls(
            kind=KernelKind(d["kind"]),
            m=int(d.get("m", 0)),
            k=int(d.get("k", 0)),
            n=int(d.get("n", 0)),
            nnz=int(d.get("nnz", 0)),
            seq_len=int(d.get("seq_len", 0)),
            window=int(d.get("window", 0)),
            label=str(d.get("label", "")),
        )


@dataclass(frozen=True)
class Workload:
    """Ordered kernel chain with the tensor sizes flowing along its edges.

    ``edge_bytes[i]`` is the output of kernel i streamed into kernel i+1;
    ``replication_input[i]`` marks kernels whose streamed operand must be
    all-gathered when the producing stage is row-partitioned.
    """

    kernels: Tuple[Kernel, ...]
    edge_bytes: Tuple[int, ...]
    input_bytes: int
    output_bytes: int
    replication_input: Tuple[bool, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.kernels)

    def boundary_bytes(self, b: int) -> int:
        """Bytes crossing boundary b: 0 = host ingest, len(wl) = host egress,
        otherwise the edge between kernels b-1 and b."""
        if b == 0:
            return self.input_bytes
        if b == len(self.kernels):
            return self.output_bytes
        return self.edge_bytes[b - 1]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kernels": [k.to_dict() for k in self.kernels],
            "edge_bytes": list(self.edge_bytes),
            "input_bytes": self.input_bytes,
            "output_bytes": self.output_bytes,
            "replication_input": list(self.replication_input),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Workload":
        kernels = tuple(Kernel.from_dict(k) for k in d["kernels"])
        return cls(
            kernels=kernels,
            edge_bytes=tuple(int(b) for b in d["edge_bytes"]),
            input_bytes=int(d["input_bytes"]),
            output_bytes=int(d["output_bytes"]),
            replication_input=tuple(bool(b) for b in d.get(
                "replication_input", [False] * len(kernels))),
            name=str(d.get("name", "")),
        )


def validate_workload(wl: Workload) -> list[str]:
    """Return every violated invariant (empty list means the workload is ok)."""
    errs: list[str] = []
    if not wl.kernels:
        return ["workload has no kernels"]
    if len(wl.edge_bytes) != len(wl.kernels) - 1:
        errs.append("edge_bytes length must be |kernels| - 1")
    if len(wl.replication_input) != len(wl.kernels):
        errs.append("replication_input length must be |kernels|")
    labels = [k.label for k in wl.kernels if k.label]
    if len(labels) != len(set(labels)):
        errs.append("kernel labels must be unique within a workload")
    for k in wl.kernels:
        errs.extend(k.local_errors())

    # Dimension chaining and edge sizes; WindowAttention carries no dims, so
    # checks are skipped on either side of it.
    for i, k in enumerate(wl.kernels):
        shape = k.output_shape()
        if shape is not None and i < len(wl.edge_bytes):
            expect = ELEMENT_BYTES * shape[0] * shape[1]
            if wl.edge_bytes[i] != expect:
                errs.append(
                    f"{k.label or i}: edge_bytes[{i}] = {wl.edge_bytes[i]}, "
                    f"expected {expect} from output shape {shape}")
        if i == 0:
            continue
        prev = wl.kernels[i - 1].output_shape()
        if prev is None or shape is None:
            continue
        rows, cols = prev
        if k.kind is KernelKind.GEMM:
            if k.m != rows or k.k != cols:
                errs.append(
                    f"{k.label or i}: GEMM dims ({k.m},{k.k}) do not chain "
                    f"from predecessor output ({rows},{cols})")
        elif k.kind is KernelKind.SPMM:
            if k.k != rows or k.n != cols:
                errs.append(
                    f"{k.label or i}: SpMM dense operand ({k.k},{k.n}) does "
                    f"not chain from predecessor output ({rows},{cols})")
    return errs


@dataclass(frozen=True)
class DeviceType:
    """A pool of identical accelerators.

    `p_dynamic` maps kernel kinds to active power; `eligible` limits which
    kernels the pool may run; `perf_model_id` names the entry in the
    performance-model registry used to predict kernel times.
    """

    name: str
    count_available: int
    link_bandwidth: float  # bytes/s per device
    p_static: float
    p_dynamic: Mapping[KernelKind, float]
    eligible: frozenset[KernelKind]
    perf_model_id: str
    p_transfer_dynamic: float = 0.0

    def __post_init__(self):
        if self.count_available < 0:
            raise ConfigError(f"{self.name}: count_available must be >= 0")
        if self.link_bandwidth <= 0:
            raise ConfigError(f"{self.name}: link_bandwidth must be > 0")
        if self.p_static <= 0:
            raise ConfigError(f"{self.name}: p_static must be > 0")
        if self.p_transfer_dynamic < 0:
            raise ConfigError(f"{self.name}: p_transfer_dynamic must be >= 0")

    @property
    def letter(self) -> str:
        return self.name[0].upper()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "count_available": self.count_available,
            "link_bandwidth": self.link_bandwidth,
            "p_static": self.p_static,
            "p_dynamic": {k.value: v for k, v in self.p_dynamic.items()},
            "p_transfer_dynamic": self.p_transfer_dynamic,
            "eligible": sorted(k.value for k in self.eligible),
            "perf_model_id": self.perf_model_id,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DeviceType":
        return cls(
            name=d["name"],
            count_available=int(d["count_available"]),
            link_bandwidth=float(d["link_bandwidth"]),
            p_static=float(d["p_static"]),
            p_dynamic={KernelKind(k): float(v)
                       for k, v in d["p_dynamic"].items()},
            p_transfer_dynamic=float(d.get("p_transfer_dynamic", 0.0)),
            eligible=frozenset(KernelKind(k) for k in d["eligible"]),
            perf_model_id=d["perf_model_id"],
        )


GENERATION_SCALES = {"pcie4": 1.0, "pcie5": 2.0, "cxl3": 4.0}


@dataclass(frozen=True)
class InterconnectSpec:
    """Bus parameters: generation scaling plus the P2P/CPU-routed distinction."""

    generation: str = "pcie4"
    bandwidth_scale: float = 1.0
    p2p_enabled: bool = True
    cpu_route_factor: float = 2.0
    p2p_fixed_latency: float = 10e-6
    cpu_fixed_latency: float = 50e-6

    def __post_init__(self):
        if self.bandwidth_scale <= 0:
            raise ConfigError("bandwidth_scale must be > 0")
        if self.cpu_route_factor < 1:
            raise ConfigError("cpu_route_factor must be >= 1")
        if self.p2p_fixed_latency < 0 or self.cpu_fixed_latency < 0:
            raise ConfigError("fixed latencies must be >= 0")

    @classmethod
    def for_generation(cls, generation: str, **overrides) -> "InterconnectSpec":
        if generation not in GENERATION_SCALES and generation != "custom":
            raise ConfigError(f"unknown interconnect generation {generation!r}")
        scale = overrides.pop(
            "bandwidth_scale", GENERATION_SCALES.get(generation, 1.0))
        return cls(generation=generation, bandwidth_scale=scale, **overrides)

    def to_dict(self) -> dict:
        return {
            "generation": self.generation,
            "bandwidth_scale": self.bandwidth_scale,
            "p2p_enabled": self.p2p_enabled,
            "cpu_route_factor": self.cpu_route_factor,
            "p2p_fixed_latency": self.p2p_fixed_latency,
            "cpu_fixed_latency": self.cpu_fixed_latency,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "InterconnectSpec":
        return cls(
            generation=d.get("generation", "custom"),
            bandwidth_scale=float(d.get("bandwidth_scale", GENERATION_SCALES.get(
                d.get("generation", "custom"), 1.0))),
            p2p_enabled=bool(d.get("p2p_enabled", True)),
            cpu_route_factor=float(d.get("cpu_route_factor", 2.0)),
            p2p_fixed_latency=float(d.get("p2p_fixed_latency", 10e-6)),
            cpu_fixed_latency=float(d.get("cpu_fixed_latency", 50e-6)),
        )


@dataclass(frozen=True)
class SystemSpec:
    """Device-type catalog plus interconnect parameters.

    `host_bandwidth` is the pseudo-device bandwidth for stage-0 ingest and
    final egress; it defaults to the fastest device link when unset.
    """

    device_types: Tuple[DeviceType, ...]
    interconnect: InterconnectSpec = field(default_factory=InterconnectSpec)
    host_bandwidth: Optional[float] = None

    def __post_init__(self):
        names = [d.name for d in self.device_types]
        if len(names) != len(set(names)):
            raise ConfigError("device-type names must be unique")

    def device(self, name: str) -> DeviceType:
        for d in self.device_types:
            if d.name == name:
                return d
        raise ConfigError(f"unknown device type {name!r}")

    def effective_host_bandwidth(self) -> float:
        if self.host_bandwidth is not None:
            return self.host_bandwidth
        return max(d.link_bandwidth for d in self.device_types)

    def to_dict(self) -> dict:
        return {
            "device_types": [d.to_dict() for d in self.device_types],
            "interconnect": self.interconnect.to_dict(),
            "host_bandwidth": self.host_bandwidth,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SystemSpec":
        return cls(
            device_types=tuple(DeviceType.from_dict(x)
                               for x in d["device_types"]),
            interconnect=InterconnectSpec.from_dict(d.get("interconnect", {})),
            host_bandwidth=(float(d["host_bandwidth"])
                            if d.get("host_bandwidth") is not None else None),
        )


@dataclass(frozen=True)
class Stage:
    """A contiguous kernel range run by a dedicated group of one device type.

    `t_exec` covers kernels plus intra-stage gather/scatter; the comm fields
    are the transfer occupancies on the receiving and sending side.  The
    stage time is accumulated as (t_exec + t_comm_in) + t_comm_out, in that
    order, everywhere in the package.
    """

    start: int
    end: int  # half-open
    device_type: str
    device_count: int
    t_exec: float
    t_comm_in: float
    t_comm_out: float

    @property
    def t_stage(self) -> float:
        return (self.t_exec + self.t_comm_in) + self.t_comm_out

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "device_type": self.device_type,
            "device_count": self.device_count,
            "t_exec": self.t_exec,
            "t_comm_in": self.t_comm_in,
            "t_comm_out": self.t_comm_out,
            "t_stage": self.t_stage,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Stage":
        return cls(
            start=int(d["start"]),
            end=int(d["end"]),
            device_type=d["device_type"],
            device_count=int(d["device_count"]),
            t_exec=float(d["t_exec"]),
            t_comm_in=float(d["t_comm_in"]),
            t_comm_out=float(d["t_comm_out"]),
        )


@dataclass(frozen=True)
class PipelineSchedule:
    stages: Tuple[Stage, ...]
    period: float
    latency: float
    devices_used: Mapping[str, int]
    energy_per_period: float

    @property
    def throughput(self) -> float:
        return 1.0 / self.period

    @property
    def mnemonic(self) -> str:
        return mnemonic(self)

    def total_devices(self) -> int:
        return sum(self.devices_used.values())

    def to_dict(self) -> dict:
        return {
            "stages": [s.to_dict() for s in self.stages],
            "period": self.period,
            "latency": self.latency,
            "devices_used": dict(self.devices_used),
            "energy_per_period": self.energy_per_period,
            "mnemonic": self.mnemonic,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineSchedule":
        return cls(
            stages=tuple(Stage.from_dict(s) for s in d["stages"]),
            period=float(d["period"]),
            latency=float(d["latency"]),
            devices_used={k: int(v) for k, v in d["devices_used"].items()},
            energy_per_period=float(d["energy_per_period"]),
        )


def mnemonic(sched: PipelineSchedule) -> str:
    """Compact schedule notation: per-stage "<count><type letter>" in order."""
    return "".join(f"{s.device_count}{s.device_type[0].upper()}"
                   for s in sched.stages)


def parse_mnemonic(text: str) -> list[Tuple[int, str]]:
    """Inverse of :func:`mnemonic`; returns (count, type letter) pairs."""
    out: list[Tuple[int, str]] = []
    i = 0
    while i < len(text):
        j = i
        while j < len(text) and text[j].isdigit():
            j += 1
        if j == i or j >= len(text):
            raise ValidationError(f"malformed mnemonic {text!r}")
        out.append((int(text[i:j]), text[j]))
        i = j + 1
    return out


def validate_schedule(sched: PipelineSchedule, wl: Workload,
                      sys_spec: SystemSpec) -> list[str]:
    """Structural checks of a schedule against its workload and system."""
    errs: list[str] = []
    if not sched.stages:
        return ["schedule has no stages"]
    pos = 0
    used: dict[str, int] = {}
    for s in sched.stages:
        if s.start != pos or s.end <= s.start:
            errs.append(f"stage [{s.start},{s.end}) breaks the contiguous "
                        f"partition at kernel {pos}")
        pos = s.end
        if s.device_count < 1:
            errs.append(f"stage [{s.start},{s.end}): device_count must be >= 1")
        try:
            dev = sys_spec.device(s.device_type)
        except ConfigError:
            errs.append(f"stage [{s.start},{s.end}): unknown device type "
                        f"{s.device_type!r}")
            continue
        used[dev.name] = used.get(dev.name, 0) + s.device_count
        for k in wl.kernels[s.start:s.end]:
            if k.kind not in dev.eligible:
                errs.append(f"kernel {k.label or s.start}: kind {k.kind.value} "
                            f"not eligible on {dev.name}")
    if pos != len(wl):
        errs.append(f"stages cover [0,{pos}) but workload has {len(wl)} kernels")
    for name, count in used.items():
        avail = sys_spec.device(name).count_available
        if count > avail:
            errs.append(f"{name}: {count} devices used but only "
                        f"{avail} available")
    peak = max(s.t_stage for s in sched.stages)
    if sched.period != peak:
        errs.append("period does not equal the longest stage time")
    return errs


def dump_json(obj, path=None, **kwargs) -> str:
    """Serialize any core object (or plain data) to JSON."""
    data = obj.to_dict() if hasattr(obj, "to_dict") else obj
    text = json.dumps(data, indent=2, **kwargs) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
