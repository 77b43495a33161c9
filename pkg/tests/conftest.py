"""Shared fixtures and the seeded random-instance generator.

`random_instance` builds a small but fully random scheduling instance —
random kernel chain (kinds, dimensions, sparsity), random device pools
(up to 3 FPGAs and 2 GPUs, random eligibility), and random positive model
coefficients — used to cross-check the dynamic program against the
exhaustive search and the simulator against the analytic model.
"""
import random
import warnings

import pytest

from hetsched import (
    DeviceType,
    InterconnectSpec,
    Kernel,
    KernelKind,
    ModelKind,
    ModelRegistry,
    PerfModel,
    SystemSpec,
    Workload,
    demo_registry,
    demo_system,
    validate_workload,
)

KINDS = (KernelKind.SPMM, KernelKind.GEMM, KernelKind.WINDOW_ATTENTION)


def random_workload(rng: random.Random, max_kernels: int = 6) -> Workload:
    n = rng.randint(1, max_kernels)
    kernels = []
    shape = None  # output shape of the previous kernel, None = unconstrained
    for i in range(n):
        kind = rng.choice(KINDS)
        if kind is KernelKind.WINDOW_ATTENTION:
            seq = rng.randint(8, 64)
            kernels.append(Kernel(kind, seq_len=seq,
                                  window=rng.randint(1, seq),
                                  label=f"k{i}"))
            shape = None
        elif kind is KernelKind.GEMM:
            m, k = shape if shape else (rng.randint(2, 40), rng.randint(2, 40))
            nn = rng.randint(2, 40)
            kernels.append(Kernel(kind, m=m, k=k, n=nn, label=f"k{i}"))
            shape = (m, nn)
        else:
            k, nn = shape if shape else (rng.randint(2, 40), rng.randint(2, 40))
            m = rng.randint(2, 40)
            kernels.append(Kernel(kind, m=m, k=k, n=nn,
                                  nnz=rng.randint(1, m * k), label=f"k{i}"))
            shape = (m, nn)
    edge_bytes = []
    for kern in kernels[:-1]:
        out = kern.output_shape()
        if out is None:
            edge_bytes.append(rng.randint(64, 65536))
        else:
            edge_bytes.append(4 * out[0] * out[1])
    wl = Workload(
        kernels=tuple(kernels),
        edge_bytes=tuple(edge_bytes),
        input_bytes=rng.randint(64, 65536),
        output_bytes=rng.randint(64, 65536),
        replication_input=tuple(rng.random() < 0.5 for _ in kernels),
        name=f"rand-{n}",
    )
    assert not validate_workload(wl)
    return wl


def _random_models(rng: random.Random, gpu_id: str, fpga_id: str
                   ) -> ModelRegistry:
    reg = ModelRegistry()
    u = rng.uniform
    gemm = {"C1": u(1e-8, 1e-6), "C2": u(1e-8, 1e-6), "C3": u(1e-11, 1e-9),
            "C4": u(1e-11, 1e-9), "C5": u(1e-11, 1e-9), "C6": u(1e-12, 1e-10),
            "b": u(1e-6, 1e-4)}
    reg.register(gpu_id, PerfModel(ModelKind.SPMM_GPU, {
        "C1": u(1e-7, 1e-5), "C2": u(1e-10, 1e-8),
        "C3": u(1e-4, 1e-2), "C4": u(1e-6, 1e-4)}))
    reg.register(gpu_id, PerfModel(ModelKind.GEMM_GPU, dict(gemm)))
    reg.register(gpu_id, PerfModel(
        ModelKind.WINATTN_GPU_DENSE, dict(gemm),
        constants={"heads": 2.0, "head_dim": 8.0}))
    reg.register(fpga_id, PerfModel(ModelKind.SPMM_FPGA, {"C": u(0.5, 2.0)}))
    reg.register(fpga_id, PerfModel(ModelKind.GEMM_GPU, {
        "C1": 0.0, "C2": 0.0, "C3": 0.0, "C4": 0.0, "C5": 0.0,
        "C6": u(1e-12, 1e-10), "b": u(1e-6, 1e-4)}))
    reg.register(fpga_id, PerfModel(ModelKind.WINATTN_FPGA, {"C": u(0.5, 2.0)}))
    return reg


def random_instance(seed: int):
    """(workload, system, registry) drawn deterministically from the seed."""
    rng = random.Random(seed)
    wl = random_workload(rng)
    present = {k.kind for k in wl.kernels}
    gpu_elig, fpga_elig = set(), set()
    for kind in KINDS:
        pick = rng.randint(0, 2) if kind in present else rng.randint(-1, 2)
        if pick in (0, 2):
            gpu_elig.add(kind)
        if pick in (1, 2):
            fpga_elig.add(kind)
    u = rng.uniform
    devices = (
        DeviceType(
            name="FPGA", count_available=rng.randint(1, 3),
            link_bandwidth=u(1e9, 4e10), p_static=u(5.0, 50.0),
            p_dynamic={k: u(10.0, 100.0) for k in KINDS},
            p_transfer_dynamic=u(0.0, 20.0),
            eligible=frozenset(fpga_elig), perf_model_id="f"),
        DeviceType(
            name="GPU", count_available=rng.randint(1, 2),
            link_bandwidth=u(1e9, 4e10), p_static=u(20.0, 80.0),
            p_dynamic={k: u(50.0, 300.0) for k in KINDS},
            p_transfer_dynamic=u(0.0, 20.0),
            eligible=frozenset(gpu_elig), perf_model_id="g"),
    )
    sys_spec = SystemSpec(
        device_types=devices,
        interconnect=InterconnectSpec(
            generation="custom", bandwidth_scale=u(0.5, 4.0),
            p2p_enabled=rng.random() < 0.5, cpu_route_factor=u(1.0, 3.0),
            p2p_fixed_latency=u(0.0, 1e-4), cpu_fixed_latency=u(0.0, 2e-4)),
        host_bandwidth=u(1e9, 4e10) if rng.random() < 0.5 else None,
    )
    return wl, sys_spec, _random_models(rng, "g", "f")


@pytest.fixture(scope="session")
def demo_sys():
    return demo_system()


@pytest.fixture(scope="session")
def demo_reg():
    return demo_registry()


@pytest.fixture(autouse=True)
def _quiet_clamp_warnings():
    # Random coefficients occasionally predict non-positive times that get
    # clamped; the clamp warning is tested explicitly in test_perf.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
