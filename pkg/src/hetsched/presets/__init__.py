"""Bundled presets: dataset summaries, a demo two-type system, and
illustrative (not measured) perf-model coefficients."""
from __future__ import annotations

import json
from importlib import resources

from ..core import SystemSpec
from ..perf import ModelRegistry


def _load(name: str) -> dict:
    return json.loads(
        resources.files("hetsched.presets").joinpath(name).read_text())


def demo_system(generation: str = "pcie4", **overrides) -> SystemSpec:
    """The bundled 3-FPGA / 2-GPU demo system."""
    data = _load("demo_system.json")
    spec = SystemSpec.from_dict(data)
    if generation != spec.interconnect.generation or overrides:
        from ..core import InterconnectSpec

        spec = SystemSpec(
            device_types=spec.device_types,
            interconnect=InterconnectSpec.for_generation(
                generation, **overrides),
            host_bandwidth=spec.host_bandwidth)
    return spec


def demo_registry() -> ModelRegistry:
    """Illustrative demo coefficients; not fitted to hardware."""
    return ModelRegistry.from_dict(_load("demo_models.json"))
