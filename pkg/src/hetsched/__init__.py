"""Heterogeneous pipeline-scheduling toolkit.

Builds kernel-chain workloads (GNNs, sliding-window transformers), predicts
per-kernel time and energy with fitted regression models, and searches
pipeline-stage partitions across FPGA/GPU pools under throughput, energy,
or balanced objectives; a brute-force oracle and a discrete-event simulator
validate the analytic schedules.
"""
from ._engine import BACKEND as engine_backend
from .comm import Endpoint, TransferQuery, TransferSide, f_comm, stagger_offset
from .core import (
    ELEMENT_BYTES,
    DeviceType,
    InterconnectSpec,
    Kernel,
    KernelKind,
    PipelineSchedule,
    Stage,
    SystemSpec,
    Workload,
    mnemonic,
    parse_mnemonic,
    validate_schedule,
    validate_workload,
)
from .energy import energy_per_inference, f_eng
from .errors import (
    ConfigError,
    FitError,
    HetschedError,
    InfeasibleError,
    OracleSizeError,
    SimConflictError,
    ValidationError,
)
from .perf import (
    MeasurementSet,
    ModelKind,
    ModelRegistry,
    PerfModel,
    f_perf,
    fit_model,
    spmm_gpu_features,
)
from .presets import demo_registry, demo_system
from .scheduler import (
    BaselineMode,
    Objective,
    ParetoPoint,
    ScheduleResult,
    baseline_schedule,
    dype_schedule,
    oracle_schedule,
    robustness_study,
    theoretical_additive,
)
from .sim import SimReport, emit_trace, simulate
from .workloads import (
    GnnSpec,
    GraphSpec,
    TransformerSpec,
    build_gcn,
    build_gin,
    build_preset,
    build_transformer,
    dataset_presets,
)

__version__ = "0.1.0"
