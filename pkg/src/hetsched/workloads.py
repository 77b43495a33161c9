"""Workload construction: GCN / GIN kernel chains and sliding-window
transformers, plus the bundled dataset presets."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .core import ELEMENT_BYTES, Kernel, KernelKind, Workload, validate_workload
from .errors import ConfigError, ValidationError


@dataclass(frozen=True)
class GraphSpec:
    vertices: int
    edges: int
    feature_len: int
    name: str = ""

    def __post_init__(self):
        if min(self.vertices, self.feature_len) < 1 or self.edges < 0:
            raise ConfigError("graph dimensions must be positive")
        if self.edges > self.vertices ** 2:
            raise ConfigError("edges exceed vertices^2")

    @property
    def sparsity(self) -> float:
        return 1.0 - self.edges / self.vertices ** 2


@dataclass(frozen=True)
class GnnSpec:
    arch: str = "gcn"  # "gcn" | "gin"
    layers: int = 2
    hidden: int = 128
    out_dim: Optional[int] = None  # defaults to hidden
    mlp_depth: int = 2  # GIN only

    def __post_init__(self):
        if self.arch not in ("gcn", "gin"):
            raise ConfigError(f"unknown GNN arch {self.arch!r}")
        if self.layers < 1 or self.hidden < 1 or self.mlp_depth < 1:
            raise ConfigError("layers, hidden, mlp_depth must be >= 1")

    @property
    def output_dim(self) -> int:
        return self.hidden if self.out_dim is None else self.out_dim


@dataclass(frozen=True)
class TransformerSpec:
    seq_len: int
    window: int
    layers: int = 32
    d_model: int = 512
    heads: int = 8
    ffn_hidden: int = 2048
    split_qkv: bool = False

    def __post_init__(self):
        if self.window > self.seq_len:
            raise ConfigError("window must not exceed seq_len")
        if min(self.seq_len, self.window, self.layers, self.d_model,
               self.heads, self.ffn_hidden) < 1:
            raise ConfigError("transformer dimensions must be >= 1")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.heads


def _finish(kernels, flags, name, input_bytes, output_bytes) -> Workload:
    edge_bytes = []
    for k in kernels[:-1]:
        shape = k.output_shape()
        if shape is None:
            # WindowAttention output is (seq_len, d_model); the builder stores
            # the byte count directly on the kernel's edge via closure below.
            raise AssertionError("attention edges are set explicitly")
        edge_bytes.append(ELEMENT_BYTES * shape[0] * shape[1])
    wl = Workload(
        kernels=tuple(kernels),
        edge_bytes=tuple(edge_bytes),
        input_bytes=input_bytes,
        output_bytes=output_bytes,
        replication_input=tuple(flags),
        name=name,
    )
    errs = validate_workload(wl)
    if errs:
        raise ValidationError(errs)
    return wl


def build_gcn(g: GraphSpec, s: GnnSpec) -> Workload:
    """GCN inference chain: per layer one SpMM (self-loops inserted into the
    adjacency) followed by one GEMM for the feature transform."""
    if s.arch != "gcn":
        raise ConfigError("build_gcn requires arch='gcn'")
    nnz = g.edges + g.vertices  # adjacency with inserted self-loops
    dims = [g.feature_len] + [s.hidden] * (s.layers - 1) + [s.output_dim]
    kernels, flags = [], []
    for layer in range(s.layers):
        f_in, f_out = dims[layer], dims[layer + 1]
        kernels.append(Kernel(KernelKind.SPMM, m=g.vertices, k=g.vertices,
                              n=f_in, nnz=nnz, label=f"spmm{layer + 1}"))
        flags.append(True)  # dense operand X is all-gathered if partitioned
        kernels.append(Kernel(KernelKind.GEMM, m=g.vertices, k=f_in, n=f_out,
                              label=f"gemm{layer + 1}"))
        flags.append(False)
    return _finish(
        kernels, flags, f"gcn-{g.name or 'graph'}",
        input_bytes=ELEMENT_BYTES * g.vertices * g.feature_len,
        output_bytes=ELEMENT_BYTES * g.vertices * s.output_dim)


def build_gin(g: GraphSpec, s: GnnSpec) -> Workload:
    """GIN inference chain: per layer one SpMM followed by an MLP expanded
    into `mlp_depth` consecutive GEMMs."""
    if s.arch != "gin":
        raise ConfigError("build_gin requires arch='gin'")
    nnz = g.edges + g.vertices
    kernels, flags = [], []
    f_in = g.feature_len
    for layer in range(s.layers):
        f_last = s.output_dim if layer == s.layers - 1 else s.hidden
        kernels.append(Kernel(KernelKind.SPMM, m=g.vertices, k=g.vertices,
                              n=f_in, nnz=nnz, label=f"spmm{layer + 1}"))
        flags.append(True)
        width = f_in
        for d in range(s.mlp_depth):
            f_out = f_last if d == s.mlp_depth - 1 else s.hidden
            kernels.append(Kernel(KernelKind.GEMM, m=g.vertices, k=width,
                                  n=f_out, label=f"gemm{layer + 1}_{d + 1}"))
            flags.append(False)
            width = f_out
        f_in = f_last
    return _finish(
        kernels, flags, f"gin-{g.name or 'graph'}",
        input_bytes=ELEMENT_BYTES * g.vertices * g.feature_len,
        output_bytes=ELEMENT_BYTES * g.vertices * s.output_dim)


def build_transformer(s: TransformerSpec) -> Workload:
    """Sliding-window transformer chain: per layer the QKV projection
    (fused into one GEMM unless split_qkv), the banded attention kernel,
    and the two FFN GEMMs."""
    kernels = []
    edge_bytes = []
    flags = []
    act = ELEMENT_BYTES * s.seq_len * s.d_model

    def add(kernel, out_bytes):
        if kernels:
            edge_bytes.append(pending[0])
        kernels.append(kernel)
        flags.append(False)
        pending[0] = out_bytes

    pending = [0]
    for layer in range(1, s.layers + 1):
        if s.split_qkv:
            for tag in ("q", "k", "v"):
                add(Kernel(KernelKind.GEMM, m=s.seq_len, k=s.d_model,
                           n=s.d_model, label=f"l{layer}_{tag}proj"), act)
        else:
            add(Kernel(KernelKind.GEMM, m=s.seq_len, k=s.d_model,
                       n=3 * s.d_model, label=f"l{layer}_qkv"), 3 * act)
        add(Kernel(KernelKind.WINDOW_ATTENTION, seq_len=s.seq_len,
                   window=s.window, label=f"l{layer}_attn"), act)
        add(Kernel(KernelKind.GEMM, m=s.seq_len, k=s.d_model, n=s.ffn_hidden,
                   label=f"l{layer}_ffn_up"),
            ELEMENT_BYTES * s.seq_len * s.ffn_hidden)
        add(Kernel(KernelKind.GEMM, m=s.seq_len, k=s.ffn_hidden, n=s.d_model,
                   label=f"l{layer}_ffn_down"), act)

    wl = Workload(
        kernels=tuple(kernels),
        edge_bytes=tuple(edge_bytes),
        input_bytes=act,
        output_bytes=act,
        replication_input=tuple(flags),
        name=f"swt-l{s.layers}-s{s.seq_len}-w{s.window}",
    )
    errs = validate_workload(wl)
    if errs:
        raise ValidationError(errs)
    return wl


_DATASETS = None


def dataset_presets() -> dict[str, GraphSpec]:
    """Bundled GNN dataset summaries, addressable by short name (S1..S4, OA,
    OP) or full name."""
    global _DATASETS
    if _DATASETS is None:
        text = resources.files("hetsched.presets").joinpath(
            "datasets.json").read_text()
        _DATASETS = {}
        for entry in json.loads(text)["datasets"]:
            g = GraphSpec(vertices=entry["vertices"], edges=entry["edges"],
                          feature_len=entry["feature_len"], name=entry["name"])
            _DATASETS[entry["short"]] = g
            _DATASETS[entry["name"]] = g
    return dict(_DATASETS)


def build_preset(model: str, dataset: Optional[str] = None, *,
                 layers: Optional[int] = None, hidden: Optional[int] = None,
                 seq_len: Optional[int] = None,
                 window: Optional[int] = None) -> Workload:
    """Build a workload from a model name and either a dataset preset (GNNs)
    or seq_len/window (transformers)."""
    model = model.lower()
    if model in ("gcn", "gin"):
        presets = dataset_presets()
        if dataset not in presets:
            raise ConfigError(f"unknown dataset {dataset!r}; "
                              f"known: {sorted(presets)}")
        spec = GnnSpec(arch=model, layers=layers or 2, hidden=hidden or 128)
        builder = build_gcn if model == "gcn" else build_gin
        return builder(presets[dataset], spec)
    if model in ("transformer", "swt"):
        if seq_len is None or window is None:
            raise ConfigError("transformer presets need seq_len and window")
        return build_transformer(TransformerSpec(
            seq_len=seq_len, window=window, layers=layers or 32))
    raise ConfigError(f"unknown model {model!r}")
