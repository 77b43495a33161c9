"""Command-line interface.

Exit codes: 0 success, 2 invalid input/config, 3 no feasible schedule,
4 instance too large for exhaustive search.
"""
from __future__ import annotations

import functools
import json
import os
import sys

import click

from .core import (PipelineSchedule, SystemSpec, Workload, dump_json,
                   validate_workload)
from .errors import (ConfigError, FitError, HetschedError, InfeasibleError,
                     OracleSizeError, SimConflictError, ValidationError)
from .perf import MeasurementSet, ModelKind, ModelRegistry, fit_model
from .presets import demo_registry, demo_system
from .scheduler import (BaselineMode, Objective, baseline_schedule,
                        dype_schedule, oracle_schedule, robustness_study,
                        theoretical_additive)
from .sim import emit_trace, simulate
from .workloads import build_preset

_EXIT_CODES = (
    (OracleSizeError, 4),
    (InfeasibleError, 3),
    ((ValidationError, ConfigError, FitError, SimConflictError), 2),
)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HetschedError as exc:
            for types, code in _EXIT_CODES:
                if isinstance(exc, types):
                    click.echo(f"error: {exc}", err=True)
                    sys.exit(code)
            raise
    return wrapper


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _workload_from_spec(spec: str) -> Workload:
    """A preset string: gcn:S1, gin:OA, or transformer:<seq>:<window>."""
    parts = spec.split(":")
    if parts[0] in ("transformer", "swt") and len(parts) == 3:
        return build_preset(parts[0], seq_len=int(parts[1]),
                            window=int(parts[2]))
    if len(parts) == 2:
        return build_preset(parts[0], parts[1])
    raise ConfigError(f"bad workload preset {spec!r}")


def _load_workload(workload, model, dataset, seq_len, window,
                   layers) -> Workload:
    if workload:
        if ":" in workload and not os.path.exists(workload):
            wl = _workload_from_spec(workload)
        else:
            wl = Workload.from_dict(_load_json(workload))
    elif model:
        wl = build_preset(model, dataset, layers=layers,
                          seq_len=seq_len, window=window)
    else:
        raise ConfigError("give either --workload or --model")
    problems = validate_workload(wl)
    if problems:
        raise ValidationError(problems)
    return wl


def _load_system(system, interconnect) -> SystemSpec:
    if system:
        spec = SystemSpec.from_dict(_load_json(system))
        if interconnect:
            from .core import InterconnectSpec
            spec = SystemSpec(
                device_types=spec.device_types,
                interconnect=InterconnectSpec.for_generation(interconnect),
                host_bandwidth=spec.host_bandwidth)
        return spec
    return demo_system(interconnect or "pcie4")


def _load_models(models) -> ModelRegistry:
    if models:
        return ModelRegistry.from_dict(_load_json(models))
    return demo_registry()


def _workload_options(fn):
    for opt in reversed([
        click.option("--workload", "-w", type=click.Path(),
                     help="Workload JSON file."),
        click.option("--model", type=str,
                     help="Builtin builder: gcn, gin, or transformer."),
        click.option("--dataset", type=str,
                     help="Dataset preset name for GNN builders."),
        click.option("--seq-len", type=int, default=None),
        click.option("--window", type=int, default=None),
        click.option("--layers", type=int, default=None),
    ]):
        fn = opt(fn)
    return fn


def _system_options(fn):
    for opt in reversed([
        click.option("--system", type=click.Path(),
                     help="System JSON file (default: bundled demo)."),
        click.option("--models", type=click.Path(),
                     help="Model registry JSON (default: bundled demo)."),
        click.option("--interconnect",
                     type=click.Choice(["pcie4", "pcie5", "cxl3"]),
                     default=None, help="Interconnect generation."),
    ]):
        fn = opt(fn)
    return fn


def _objective(mode: str, fraction: float) -> Objective:
    if mode == "balanced":
        return Objective.balanced(fraction)
    return Objective(mode)


def _parse_static_stages(text: str):
    stages = []
    for part in text.split(","):
        fields = part.split(":")
        if len(fields) != 4:
            raise ConfigError(
                f"bad stage spec {part!r}; expected start:end:type:count")
        stages.append((int(fields[0]), int(fields[1]), fields[2],
                       int(fields[3])))
    return stages


def _parse_pin(text: str):
    pin = {}
    for part in text.split(","):
        idx, _, name = part.partition("=")
        if not name:
            raise ConfigError(f"bad pin {part!r}; expected index=type")
        pin[int(idx)] = name
    return pin


def _emit(text: str, output) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
@click.version_option(package_name="hetsched")
def main():
    """Pipeline scheduling for heterogeneous FPGA/GPU kernel chains."""


@main.command()
@_workload_options
@_system_options
@click.option("--mode", type=click.Choice(["perf", "energy", "balanced"]),
              default="perf", show_default=True)
@click.option("--fraction", type=float, default=0.7, show_default=True,
              help="Balanced mode: min throughput share of the optimum.")
@click.option("--baseline",
              type=click.Choice(["dype", "static", "fleetrec", "gpu-only",
                                 "fpga-only"]),
              default="dype", show_default=True)
@click.option("--stages", "stages_spec", type=str, default=None,
              help="Static baseline stages, start:end:type:count,...")
@click.option("--pin", "pin_spec", type=str, default=None,
              help="Fleetrec kernel pins, index=type,...")
@click.option("--oracle", is_flag=True,
              help="Use exhaustive search instead of the DP.")
@click.option("--output", "-o", type=click.Path(), default=None)
@_handle_errors
def schedule(workload, model, dataset, seq_len, window, layers, system,
             models, interconnect, mode, fraction, baseline, stages_spec,
             pin_spec, oracle, output):
    """Find a pipeline schedule for a workload."""
    wl = _load_workload(workload, model, dataset, seq_len, window, layers)
    sys_spec = _load_system(system, interconnect)
    registry = _load_models(models)
    objective = _objective(mode, fraction)
    if oracle:
        result = oracle_schedule(wl, sys_spec, registry, objective)
    elif baseline == "dype":
        result = dype_schedule(wl, sys_spec, registry, objective)
    else:
        if baseline == "static":
            if not stages_spec:
                raise ConfigError("--baseline static needs --stages")
            bl = BaselineMode.static(_parse_static_stages(stages_spec))
        elif baseline == "fleetrec":
            if not pin_spec:
                raise ConfigError("--baseline fleetrec needs --pin")
            bl = BaselineMode.fleetrec(_parse_pin(pin_spec))
        elif baseline == "gpu-only":
            bl = BaselineMode.gpu_only()
        else:
            bl = BaselineMode.fpga_only()
        result = baseline_schedule(wl, sys_spec, registry, bl, objective)
    sched = result.schedule
    payload = {
        "objective": mode,
        "baseline": baseline if not oracle else "oracle",
        "mnemonic": sched.mnemonic,
        "period_s": sched.period,
        "throughput_per_s": sched.throughput,
        "latency_s": sched.latency,
        "energy_per_inference_j": sched.energy_per_period,
        "schedule": sched.to_dict(),
    }
    _emit(json.dumps(payload, indent=2) + "\n", output)


@main.command()
@_workload_options
@_system_options
@click.option("--output", "-o", type=click.Path(), default=None,
              help="CSV output path (default: stdout).")
@_handle_errors
def pareto(workload, model, dataset, seq_len, window, layers, system,
           models, interconnect, output):
    """Emit the throughput/energy Pareto frontier as CSV."""
    wl = _load_workload(workload, model, dataset, seq_len, window, layers)
    sys_spec = _load_system(system, interconnect)
    registry = _load_models(models)
    result = dype_schedule(wl, sys_spec, registry, Objective.perf())
    lines = ["throughput_per_s,energy_per_inference_j,mnemonic"]
    for pt in result.pareto:
        lines.append(f"{pt.throughput!r},{pt.energy_per_inference!r},"
                     f"{pt.schedule.mnemonic}")
    _emit("\n".join(lines) + "\n", output)


@main.command("simulate")
@_workload_options
@_system_options
@click.option("--schedule", "schedule_path", type=click.Path(), default=None,
              help="Schedule JSON to replay (default: run the DP first).")
@click.option("--mode", type=click.Choice(["perf", "energy", "balanced"]),
              default="perf", show_default=True)
@click.option("--iterations", type=int, default=0,
              help="Batches to drive (default: warmup + 25).")
@click.option("--warmup", type=int, default=0)
@click.option("--trace", "trace_path", type=click.Path(), default=None,
              help="Write an event trace CSV here.")
@click.option("--output", "-o", type=click.Path(), default=None)
@_handle_errors
def simulate_cmd(workload, model, dataset, seq_len, window, layers, system,
                 models, interconnect, schedule_path, mode, iterations,
                 warmup, trace_path, output):
    """Replay a schedule through the discrete-event simulator."""
    wl = _load_workload(workload, model, dataset, seq_len, window, layers)
    sys_spec = _load_system(system, interconnect)
    registry = _load_models(models)
    if schedule_path:
        data = _load_json(schedule_path)
        sched = PipelineSchedule.from_dict(data.get("schedule", data))
    else:
        sched = dype_schedule(wl, sys_spec, registry,
                              _objective(mode, 0.7)).schedule
    report = simulate(sched, wl, sys_spec, registry, iterations=iterations,
                      warmup=warmup, trace=bool(trace_path))
    if trace_path:
        emit_trace(report, trace_path)
    payload = {
        "mnemonic": sched.mnemonic,
        "analytic_period_s": sched.period,
        "simulated_period_s": report.steady_period,
        "latency_s": report.latency,
        "energy_per_inference_j": report.energy_per_inference,
        "iterations": report.iterations,
        "warmup": report.warmup,
    }
    _emit(json.dumps(payload, indent=2) + "\n", output)


@main.command()
@click.option("--workload", "-w", "workloads", multiple=True, required=True,
              help="Workload JSON file or preset (repeatable).")
@click.option("--system", type=click.Path(),
              help="System JSON file (default: bundled demo).")
@click.option("--models", type=click.Path(),
              help="Model registry JSON (default: bundled demo).")
@click.option("--interconnect", "interconnects", multiple=True,
              type=click.Choice(["pcie4", "pcie5", "cxl3"]),
              help="Interconnect generations (repeatable; default: all).")
@click.option("--mode", type=click.Choice(["perf", "energy", "balanced"]),
              default="perf", show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@_handle_errors
def compare(workloads, system, models, interconnects, mode, output):
    """Cross-product workloads x interconnects x baselines into a CSV."""
    registry = _load_models(models)
    objective = _objective(mode, 0.7)
    gens = list(interconnects) or ["pcie4", "pcie5", "cxl3"]
    lines = ["workload,interconnect,baseline,mnemonic,"
             "throughput_per_s,energy_per_inference_j"]
    for spec in workloads:
        wl = _load_workload(spec, None, None, None, None, None)
        for gen in gens:
            sys_spec = _load_system(system, gen)
            rows = {"dype": dype_schedule(wl, sys_spec, registry, objective)}
            for name, bl in (("gpu_only", BaselineMode.gpu_only()),
                             ("fpga_only", BaselineMode.fpga_only())):
                try:
                    rows[name] = baseline_schedule(
                        wl, sys_spec, registry, bl, objective)
                except InfeasibleError:
                    rows[name] = None
            for name, result in rows.items():
                if result is None:
                    lines.append(f"{wl.name},{gen},{name},,,")
                    continue
                s = result.schedule
                lines.append(
                    f"{wl.name},{gen},{name},{s.mnemonic},"
                    f"{s.throughput!r},{s.energy_per_period!r}")
            gpu, fpga = rows.get("gpu_only"), rows.get("fpga_only")
            if gpu and fpga:
                thp, eff = theoretical_additive(
                    _as_point(gpu.schedule), _as_point(fpga.schedule))
                lines.append(
                    f"{wl.name},{gen},theoretical_additive,,"
                    f"{thp!r},{1.0 / eff!r}")
    _emit("\n".join(lines) + "\n", output)


def _as_point(sched):
    from .scheduler import ParetoPoint
    return ParetoPoint(sched.throughput, sched.energy_per_period, sched)


@main.command()
@_workload_options
@_system_options
@click.option("--epsilon", type=float, default=0.05, show_default=True,
              help="Relative coefficient noise half-width.")
@click.option("--trials", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["perf", "energy", "balanced"]),
              default="perf", show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@_handle_errors
def robustness(workload, model, dataset, seq_len, window, layers, system,
               models, interconnect, epsilon, trials, seed, mode, output):
    """Measure schedule quality under noisy coefficient estimates."""
    wl = _load_workload(workload, model, dataset, seq_len, window, layers)
    sys_spec = _load_system(system, interconnect)
    registry = _load_models(models)
    report = robustness_study([wl], sys_spec, registry, epsilon, trials,
                              seed, _objective(mode, 0.7))
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", output)


@main.command()
@click.option("--kind", required=True,
              type=click.Choice([k.value for k in ModelKind]))
@click.option("--data", required=True, type=click.Path(),
              help="Measurement CSV: kind,m,k,n,nnz,seq_len,window,seconds.")
@click.option("--model-id", default="fitted", show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
@_handle_errors
def fit(kind, data, model_id, output):
    """Fit model coefficients to measurement data by least squares."""
    measurements = MeasurementSet.from_csv(data)
    model, report = fit_model(ModelKind(kind), measurements)
    registry = ModelRegistry()
    registry.register(model_id, model)
    payload = registry.to_dict()
    payload["fit_report"] = {
        "rmse_s": report.rmse,
        "max_rel_error": report.max_rel_error,
        "n_rows": report.n_rows,
    }
    _emit(json.dumps(payload, indent=2) + "\n", output)


@main.command("gen-workload")
@_workload_options
@click.option("--hidden", type=int, default=None)
@click.option("--output", "-o", type=click.Path(), default=None)
@_handle_errors
def gen_workload(workload, model, dataset, seq_len, window, layers, hidden,
                 output):
    """Build a workload from the builtin builders and write it as JSON."""
    if workload:
        raise ConfigError("gen-workload builds from --model, not --workload")
    wl = build_preset(model or "", dataset, layers=layers, hidden=hidden,
                      seq_len=seq_len, window=window)
    problems = validate_workload(wl)
    if problems:
        raise ValidationError(problems)
    _emit(dump_json(wl), output)


if __name__ == "__main__":
    main()
