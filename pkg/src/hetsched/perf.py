"""Kernel performance models.

Five model kinds cover the two device families:

* ``spmm_gpu``      t = C1*N + C2*nnz + C3*GFLOP + C4*arm
* ``spmm_fpga``     t[ms] = C * (nnz + 13*M) * N / (F * N_M * 1e3)
* ``gemm_gpu``      t = C1*K + C2*N + C3*MN + C4*MK + C5*KN + C6*MKN + b
* ``winattn_fpga``  t[us] = C * (seq_len * t_pipeline + t_init) * (w/1024) / F
* ``winattn_gpu_dense``  dense attention as 2 GEMMs per head through the
  gemm polynomial (window-independent by construction)

All public predictions are in seconds.  Fitted coefficients can produce
non-positive times on out-of-range inputs; predictions clamp to
``time_floor`` (default 1 us) with a warning.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import ELEMENT_BYTES, DeviceType, Kernel, KernelKind, SystemSpec, Workload
from .errors import ConfigError, FitError, InfeasibleError

DEFAULT_TIME_FLOOR = 1e-6


class ModelKind(str, Enum):
    SPMM_GPU = "spmm_gpu"
    SPMM_FPGA = "spmm_fpga"
    GEMM_GPU = "gemm_gpu"
    WINATTN_FPGA = "winattn_fpga"
    WINATTN_GPU_DENSE = "winattn_gpu_dense"


_DEFAULT_CONSTANTS = {
    ModelKind.SPMM_GPU: {},
    ModelKind.SPMM_FPGA: {"F_mhz": 215.0, "N_M": 640.0},
    ModelKind.GEMM_GPU: {},
    ModelKind.WINATTN_FPGA: {"t_pipeline": 201.0, "t_init": 904.0,
                             "F_mhz": 421.0},
    ModelKind.WINATTN_GPU_DENSE: {"heads": 8.0, "head_dim": 64.0},
}

_COEF_NAMES = {
    ModelKind.SPMM_GPU: ("C1", "C2", "C3", "C4"),
    ModelKind.SPMM_FPGA: ("C",),
    ModelKind.GEMM_GPU: ("C1", "C2", "C3", "C4", "C5", "C6", "b"),
    ModelKind.WINATTN_FPGA: ("C",),
    ModelKind.WINATTN_GPU_DENSE: ("C1", "C2", "C3", "C4", "C5", "C6", "b"),
}

_KERNEL_KIND = {
    ModelKind.SPMM_GPU: KernelKind.SPMM,
    ModelKind.SPMM_FPGA: KernelKind.SPMM,
    ModelKind.GEMM_GPU: KernelKind.GEMM,
    ModelKind.WINATTN_FPGA: KernelKind.WINDOW_ATTENTION,
    ModelKind.WINATTN_GPU_DENSE: KernelKind.WINDOW_ATTENTION,
}


def coefficient_names(kind: ModelKind) -> Tuple[str, ...]:
    return _COEF_NAMES[kind]


def spmm_gpu_features(k: Kernel) -> Tuple[float, float, float, float]:
    """Feature vector [N, nnz, GFLOP, arm] of the SpMM-on-GPU model."""
    if k.kind is not KernelKind.SPMM:
        raise ConfigError("spmm_gpu_features needs a SpMM kernel")
    gflop = (2.0 * k.nnz * k.n - k.m * k.n) * 1e-9
    arm = gflop * 1e9 / (8.0 * (k.nnz + k.m * k.n))
    return (float(k.n), float(k.nnz), gflop, arm)


def gemm_features(m: int, k: int, n: int) -> Tuple[float, ...]:
    """[K, N, MN, MK, KN, MKN] for the gemm polynomial (intercept separate)."""
    return (float(k), float(n), float(m) * n, float(m) * k,
            float(k) * n, float(m) * k * n)


@dataclass(frozen=True)
class PerfModel:
    """Immutable fitted model; evaluation is pure and thread-safe."""

    kind: ModelKind
    coefficients: Mapping[str, float]
    constants: Mapping[str, float] = field(default_factory=dict)
    time_floor: float = DEFAULT_TIME_FLOOR

    def __post_init__(self):
        names = _COEF_NAMES[self.kind]
        missing = [n for n in names if n not in self.coefficients]
        if missing:
            raise ConfigError(
                f"{self.kind.value}: missing coefficients {missing}")
        extra = [n for n in self.coefficients if n not in names]
        if extra:
            raise ConfigError(
                f"{self.kind.value}: unexpected coefficients {extra}")
        if not any(v != 0.0 for v in self.coefficients.values()):
            raise ConfigError(f"{self.kind.value}: all-zero coefficient "
                              "vector predicts no positive time")

    def constant(self, name: str) -> float:
        if name in self.constants:
            return float(self.constants[name])
        return _DEFAULT_CONSTANTS[self.kind][name]

    def raw_seconds(self, k: Kernel) -> float:
        """Model prediction before the positivity clamp."""
        c = self.coefficients
        if self.kind is ModelKind.SPMM_GPU:
            f = spmm_gpu_features(k)
            return (c["C1"] * f[0] + c["C2"] * f[1]
                    + c["C3"] * f[2] + c["C4"] * f[3])
        if self.kind is ModelKind.SPMM_FPGA:
            ms = (c["C"] * (k.nnz + 13.0 * k.m) * k.n
                  / (self.constant("F_mhz") * self.constant("N_M") * 1e3))
            return ms * 1e-3
        if self.kind is ModelKind.GEMM_GPU:
            f = gemm_features(k.m, k.k, k.n)
            return (c["C1"] * f[0] + c["C2"] * f[1] + c["C3"] * f[2]
                    + c["C4"] * f[3] + c["C5"] * f[4] + c["C6"] * f[5]
                    + c["b"])
        if self.kind is ModelKind.WINATTN_FPGA:
            us = (c["C"] * (k.seq_len * self.constant("t_pipeline")
                            + self.constant("t_init"))
                  * (k.window / 1024.0) / self.constant("F_mhz"))
            return us * 1e-6
        if self.kind is ModelKind.WINATTN_GPU_DENSE:
            heads = int(self.constant("heads"))
            dh = int(self.constant("head_dim"))
            t = 0.0
            for _ in range(heads):
                t += self._gemm_poly(k.seq_len, dh, k.seq_len)
                t += self._gemm_poly(k.seq_len, k.seq_len, dh)
            return t
        raise AssertionError(self.kind)

    def _gemm_poly(self, m: int, kk: int, n: int) -> float:
        c = self.coefficients
        f = gemm_features(m, kk, n)
        return (c["C1"] * f[0] + c["C2"] * f[1] + c["C3"] * f[2]
                + c["C4"] * f[3] + c["C5"] * f[4] + c["C6"] * f[5] + c["b"])

    def time_seconds(self, k: Kernel) -> float:
        expected = _KERNEL_KIND[self.kind]
        if k.kind is not expected:
            raise ConfigError(f"{self.kind.value} model cannot evaluate a "
                              f"{k.kind.value} kernel")
        t = self.raw_seconds(k)
        if t <= 0.0:
            if k.n != 0 or k.seq_len != 0:
                warnings.warn(
                    f"{self.kind.value}: non-positive predicted time "
                    f"{t:.3e}s clamped to {self.time_floor:.0e}s",
                    RuntimeWarning, stacklevel=2)
            return self.time_floor
        return t

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "coefficients": dict(self.coefficients),
            "constants": dict(self.constants),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PerfModel":
        return cls(
            kind=ModelKind(d["kind"]),
            coefficients={k: float(v) for k, v in d["coefficients"].items()},
            constants={k: float(v) for k, v in d.get("constants", {}).items()},
        )


def spmm_fpga_time(k: Kernel, model: PerfModel) -> float:
    return model.time_seconds(k) if k.n else model.raw_seconds(k)


def gemm_gpu_time(k: Kernel, model: PerfModel) -> float:
    return model.time_seconds(k)


def winattn_fpga_time(k: Kernel, model: PerfModel) -> float:
    return model.time_seconds(k)


def winattn_gpu_time(k: Kernel, model: PerfModel) -> float:
    return model.time_seconds(k)


class ModelRegistry:
    """Maps (perf_model_id, kernel kind) to a fitted PerfModel."""

    def __init__(self):
        self._models: dict[tuple[str, KernelKind], PerfModel] = {}

    def register(self, model_id: str, model: PerfModel) -> None:
        self._models[(model_id, _KERNEL_KIND[model.kind])] = model

    def lookup(self, model_id: str, kind: KernelKind) -> PerfModel:
        try:
            return self._models[(model_id, kind)]
        except KeyError:
            raise ConfigError(
                f"no model registered for id {model_id!r}, "
                f"kind {kind.value}") from None

    def has(self, model_id: str, kind: KernelKind) -> bool:
        return (model_id, kind) in self._models

    def to_dict(self) -> dict:
        return {"models": [
            {"id": mid, **model.to_dict()}
            for (mid, _), model in sorted(self._models.items(),
                                          key=lambda kv: (kv[0][0],
                                                          kv[0][1].value))
        ]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelRegistry":
        reg = cls()
        for entry in d["models"]:
            reg.register(entry["id"], PerfModel.from_dict(entry))
        return reg


@dataclass(frozen=True)
class MeasurementSet:
    """Single-device timing rows used for coefficient fitting."""

    rows: Tuple[Tuple[Kernel, float], ...]

    def __post_init__(self):
        for kernel, seconds in self.rows:
            if seconds <= 0:
                raise ConfigError(
                    f"{kernel.label or kernel.kind.value}: measured time "
                    "must be > 0")

    @classmethod
    def from_csv(cls, path) -> "MeasurementSet":
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                kernel = Kernel(
                    kind=KernelKind(rec["kind"]),
                    m=int(rec.get("m") or 0), k=int(rec.get("k") or 0),
                    n=int(rec.get("n") or 0), nnz=int(rec.get("nnz") or 0),
                    seq_len=int(rec.get("seq_len") or 0),
                    window=int(rec.get("window") or 0))
                rows.append((kernel, float(rec["seconds"])))
        return cls(rows=tuple(rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "m", "k", "n", "nnz", "seq_len", "window",
                        "seconds"])
            for k, t in self.rows:
                w.writerow([k.kind.value, k.m, k.k, k.n, k.nnz, k.seq_len,
                            k.window, repr(t)])


@dataclass(frozen=True)
class FitReport:
    rmse: float
    max_rel_error: float
    n_rows: int


def _design_row(kind: ModelKind, k: Kernel,
                constants: Mapping[str, float]) -> Tuple[float, ...]:
    if kind is ModelKind.SPMM_GPU:
        return spmm_gpu_features(k)
    if kind is ModelKind.GEMM_GPU:
        return gemm_features(k.m, k.k, k.n) + (1.0,)
    if kind is ModelKind.SPMM_FPGA:
        base = PerfModel(kind, {"C": 1.0}, constants)
        return (base.raw_seconds(k),)
    if kind is ModelKind.WINATTN_FPGA:
        base = PerfModel(kind, {"C": 1.0}, constants)
        return (base.raw_seconds(k),)
    if kind is ModelKind.WINATTN_GPU_DENSE:
        # Coefficients are the gemm polynomial, so they are fitted from
        # GEMM measurements; attention-shaped rows would make the design
        # matrix rank-deficient (the per-head matmul features are
        # pairwise symmetric in seq_len).
        return gemm_features(k.m, k.k, k.n) + (1.0,)
    raise AssertionError(kind)


def fit_model(kind: ModelKind, data: MeasurementSet,
              constants: Optional[Mapping[str, float]] = None
              ) -> Tuple[PerfModel, FitReport]:
    """Ordinary least squares on the kind's feature vector.

    Deterministic SVD-based solve on the column-scaled design; raises
    FitError when underdetermined or rank-deficient, naming the collinear
    features.
    """
    constants = dict(constants or {})
    names = _COEF_NAMES[kind]
    expected = (KernelKind.GEMM if kind is ModelKind.WINATTN_GPU_DENSE
                else _KERNEL_KIND[kind])
    for kernel, _ in data.rows:
        if kernel.kind is not expected:
            raise FitError(f"{kind.value}: measurement row has kind "
                           f"{kernel.kind.value}")
    if len(data.rows) < len(names):
        raise FitError(f"{kind.value}: underdetermined fit "
                       f"({len(data.rows)} rows for {len(names)} coefficients)")
    X = np.array([_design_row(kind, k, constants) for k, _ in data.rows],
                 dtype=np.float64)
    y = np.array([t for _, t in data.rows], dtype=np.float64)

    # Column scaling keeps the solve well conditioned without changing the
    # minimizer.
    scale = np.max(np.abs(X), axis=0)
    degenerate = [names[i] for i in np.nonzero(scale == 0.0)[0]]
    if degenerate:
        raise FitError(f"{kind.value}: features {degenerate} are identically "
                       "zero over the measurement set (collinear/degenerate)")
    Xs = X / scale
    sol, _, rank, _ = np.linalg.lstsq(Xs, y, rcond=1e-10)
    if rank < len(names):
        _, r = np.linalg.qr(Xs)
        diag = np.abs(np.diag(r))
        bad = [names[i] for i in np.nonzero(diag < 1e-10 * diag.max())[0]]
        raise FitError(f"{kind.value}: rank-deficient design matrix; "
                       f"collinear features: {bad or list(names)}")
    coef = sol / scale

    pred = X @ coef
    resid = pred - y
    rmse = float(math.sqrt(float(np.mean(resid ** 2))))
    max_rel = float(np.max(np.abs(resid) / np.abs(y)))
    model = PerfModel(kind=kind,
                      coefficients=dict(zip(names, map(float, coef))),
                      constants=constants)
    return model, FitReport(rmse=rmse, max_rel_error=max_rel,
                            n_rows=len(data.rows))


def partition_kernel(k: Kernel, n_dev: int) -> Kernel:
    """Row-partitioned view of a kernel split across n_dev devices."""
    if n_dev == 1:
        return k
    if k.kind is KernelKind.WINDOW_ATTENTION:
        seq = -(-k.seq_len // n_dev)
        return Kernel(kind=k.kind, seq_len=seq, window=min(k.window, seq),
                      label=k.label)
    m = -(-k.m // n_dev)
    nnz = -(-k.nnz // n_dev) if k.nnz else 0
    return Kernel(kind=k.kind, m=m, k=k.k, n=k.n, nnz=nnz, label=k.label)


def gather_time(k: Kernel, device: DeviceType, n_dev: int,
                sys_spec: SystemSpec) -> float:
    """All-gather cost of a replicated streamed operand across n_dev devices."""
    if n_dev <= 1:
        return 0.0
    if k.kind is KernelKind.WINDOW_ATTENTION:
        return 0.0
    operand_bytes = ELEMENT_BYTES * k.k * k.n
    bw = device.link_bandwidth * sys_spec.interconnect.bandwidth_scale
    return (n_dev - 1) / n_dev * operand_bytes / (n_dev * bw)


def kernel_unit_time(k: Kernel, replicated: bool, device: DeviceType,
                     n_dev: int, sys_spec: SystemSpec,
                     registry: ModelRegistry) -> float:
    """Per-kernel contribution to a stage's execution time."""
    if k.kind not in device.eligible:
        raise InfeasibleError(
            f"kernel {k.label or k.kind.value} ({k.kind.value}) is not "
            f"eligible on device type {device.name}")
    model = registry.lookup(device.perf_model_id, k.kind)
    t = model.time_seconds(partition_kernel(k, n_dev))
    if replicated:
        t += gather_time(k, device, n_dev, sys_spec)
    return t


def f_perf(wl: Workload, start: int, end: int, device: DeviceType,
           n_dev: int, sys_spec: SystemSpec,
           registry: ModelRegistry) -> float:
    """Execution time of kernels [start, end) on n_dev devices of one type.

    Left-to-right summation of per-kernel times; this exact accumulation
    order is shared with the DP engine and the schedule evaluator.
    """
    if n_dev < 1:
        raise ConfigError("n_dev must be >= 1")
    total = 0.0
    for i in range(start, end):
        total += kernel_unit_time(wl.kernels[i], wl.replication_input[i],
                                  device, n_dev, sys_spec, registry)
    return total
