"""Schedule search: dynamic program, brute-force oracle, baselines, and the
estimation-error robustness harness."""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Tuple

from . import _engine
from ._engine.problem import Problem, build_problem
from .core import PipelineSchedule, Stage, SystemSpec, Workload
from .errors import ConfigError, InfeasibleError, OracleSizeError, ValidationError
from .perf import ModelRegistry, PerfModel

Candidate = Tuple[float, float, Tuple[int, ...], Tuple[Tuple[int, int, int], ...]]


@dataclass(frozen=True)
class Objective:
    mode: str  # "perf" | "energy" | "balanced"
    fraction: float = 0.7  # balanced: min throughput as share of perf-opt

    def __post_init__(self):
        if self.mode not in ("perf", "energy", "balanced"):
            raise ConfigError(f"unknown objective mode {self.mode!r}")
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError("fraction must be in (0, 1]")

    @classmethod
    def perf(cls) -> "Objective":
        return cls("perf")

    @classmethod
    def energy(cls) -> "Objective":
        return cls("energy")

    @classmethod
    def balanced(cls, fraction: float = 0.7) -> "Objective":
        return cls("balanced", fraction)


@dataclass(frozen=True)
class BaselineMode:
    """Restricted search modes used for comparison against the full DP."""

    mode: str  # "dype" | "static" | "fleetrec" | "only"
    stages: Tuple[Tuple[int, int, str, int], ...] = ()  # static
    pin: Mapping[int, str] = field(default_factory=dict)  # fleetrec
    type_name: str = ""  # only

    @classmethod
    def dype(cls) -> "BaselineMode":
        return cls("dype")

    @classmethod
    def static(cls, stages) -> "BaselineMode":
        return cls("static", stages=tuple(tuple(s) for s in stages))

    @classmethod
    def fleetrec(cls, pin: Mapping[int, str]) -> "BaselineMode":
        return cls("fleetrec", pin=dict(pin))

    @classmethod
    def gpu_only(cls) -> "BaselineMode":
        return cls("only", type_name="GPU")

    @classmethod
    def fpga_only(cls) -> "BaselineMode":
        return cls("only", type_name="FPGA")


@dataclass(frozen=True)
class ParetoPoint:
    throughput: float
    energy_per_inference: float
    schedule: PipelineSchedule

    def to_dict(self) -> dict:
        return {
            "throughput": self.throughput,
            "energy_per_inference": self.energy_per_inference,
            "mnemonic": self.schedule.mnemonic,
            "devices_used": dict(self.schedule.devices_used),
        }


@dataclass(frozen=True)
class ScheduleResult:
    schedule: PipelineSchedule
    pareto: Tuple[ParetoPoint, ...]
    objective: Objective

    @property
    def period(self) -> float:
        return self.schedule.period

    @property
    def energy(self) -> float:
        return self.schedule.energy_per_period


def _decode(problem: Problem, sys_spec: SystemSpec,
            cand: Candidate) -> PipelineSchedule:
    period, energy, usage, stage_defs = cand
    stages = []
    for s, (a, b, o) in enumerate(stage_defs):
        t_idx, count = problem.options[o]
        prev_ep = stage_defs[s - 1][2] if s > 0 else problem.host
        next_ep = stage_defs[s + 1][2] if s + 1 < len(stage_defs) \
            else problem.host
        stages.append(Stage(
            start=a, end=b,
            device_type=sys_spec.device_types[t_idx].name,
            device_count=count,
            t_exec=problem.s_exec[o][a][b],
            t_comm_in=problem.comm[a][prev_ep][o],
            t_comm_out=problem.comm[b][o][next_ep],
        ))
    latency = 0.0
    for st in stages:
        latency += st.t_stage
    devices_used = {}
    for t, dev in enumerate(sys_spec.device_types):
        if usage[t]:
            devices_used[dev.name] = usage[t]
    return PipelineSchedule(
        stages=tuple(stages), period=period, latency=latency,
        devices_used=devices_used, energy_per_period=energy)


def _tiebreak_key(sys_spec: SystemSpec, cand: Candidate, problem: Problem):
    _, _, usage, stage_defs = cand
    letters = "".join(
        sys_spec.device_types[problem.options[o][0]].letter
        for _, _, o in stage_defs)
    return (sum(usage), len(stage_defs), letters)


def _select(cands: Sequence[Candidate], objective: Objective,
            sys_spec: SystemSpec, problem: Problem) -> Candidate:
    if not cands:
        raise InfeasibleError("no feasible schedule")
    if objective.mode == "perf":
        best = min(c[0] for c in cands)
        pool = [c for c in cands if c[0] == best]
        best_e = min(c[1] for c in pool)
        pool = [c for c in pool if c[1] == best_e]
    elif objective.mode == "energy":
        best = min(c[1] for c in cands)
        pool = [c for c in cands if c[1] == best]
        best_p = min(c[0] for c in pool)
        pool = [c for c in pool if c[0] == best_p]
    else:
        p_min = min(c[0] for c in cands)
        thp_floor = objective.fraction * (1.0 / p_min)
        pool = [c for c in cands if 1.0 / c[0] >= thp_floor]
        best = min(c[1] for c in pool)
        pool = [c for c in pool if c[1] == best]
        best_p = min(c[0] for c in pool)
        pool = [c for c in pool if c[0] == best_p]
    return min(pool, key=lambda c: _tiebreak_key(sys_spec, c, problem))


def _pareto_candidates(cands: Sequence[Candidate], sys_spec: SystemSpec,
                       problem: Problem) -> list[Candidate]:
    """Non-dominated (period, energy) candidates, deterministic order."""
    best_at: dict[Tuple[float, float], Candidate] = {}
    for c in cands:
        key = (c[0], c[1])
        prev = best_at.get(key)
        if prev is None or (_tiebreak_key(sys_spec, c, problem)
                            < _tiebreak_key(sys_spec, prev, problem)):
            best_at[key] = c
    ordered = sorted(
        best_at.values(),
        key=lambda c: (c[0], c[1], _tiebreak_key(sys_spec, c, problem)))
    out = []
    best_energy = float("inf")
    for c in ordered:
        if c[1] < best_energy:
            out.append(c)
            best_energy = c[1]
    return out


def _result(cands: Sequence[Candidate], objective: Objective,
            sys_spec: SystemSpec, problem: Problem) -> ScheduleResult:
    winner = _select(cands, objective, sys_spec, problem)
    pareto = tuple(
        ParetoPoint(throughput=1.0 / c[0], energy_per_inference=c[1],
                    schedule=_decode(problem, sys_spec, c))
        for c in _pareto_candidates(cands, sys_spec, problem))
    return ScheduleResult(schedule=_decode(problem, sys_spec, winner),
                          pareto=pareto, objective=objective)


def dype_schedule(wl: Workload, sys_spec: SystemSpec, registry: ModelRegistry,
                  objective: Objective = Objective.perf(),
                  type_restriction: Optional[Sequence[Optional[str]]] = None
                  ) -> ScheduleResult:
    """Dynamic-programming search over contiguous stage partitions and
    per-stage device allocations; returns the objective winner plus the
    full throughput/energy Pareto set."""
    problem = build_problem(wl, sys_spec, registry, type_restriction)
    cands = _engine.solve_dp(problem)
    return _result(cands, objective, sys_spec, problem)


def oracle_schedule(wl: Workload, sys_spec: SystemSpec,
                    registry: ModelRegistry,
                    objective: Objective = Objective.perf(),
                    type_restriction: Optional[Sequence[Optional[str]]] = None,
                    max_kernels: int = 10,
                    max_devices: int = 8) -> ScheduleResult:
    """Exhaustive enumeration of every schedule; exponential, guarded."""
    total_devices = sum(d.count_available for d in sys_spec.device_types)
    if len(wl) > max_kernels or total_devices > max_devices:
        raise OracleSizeError(
            f"instance too large for exhaustive search: {len(wl)} kernels, "
            f"{total_devices} devices (limits {max_kernels}/{max_devices})")
    problem = build_problem(wl, sys_spec, registry, type_restriction)
    cands = _engine.enumerate_all(problem)
    return _result(cands, objective, sys_spec, problem)


def evaluate_static(wl: Workload, sys_spec: SystemSpec,
                    registry: ModelRegistry,
                    stage_defs: Sequence[Tuple[int, int, str, int]]
                    ) -> PipelineSchedule:
    """Evaluate a user-given (range, type, count) stage list verbatim."""
    problem = build_problem(wl, sys_spec, registry)
    name_to_type = {d.name: t for t, d in enumerate(sys_spec.device_types)}
    opt_index = {tc: o for o, tc in enumerate(problem.options)}
    stages = []
    for start, end, type_name, count in stage_defs:
        if type_name not in name_to_type:
            raise ConfigError(f"unknown device type {type_name!r}")
        key = (name_to_type[type_name], count)
        if key not in opt_index:
            raise ValidationError(
                f"stage [{start},{end}): {count}x{type_name} exceeds "
                "availability")
        stages.append((start, end, opt_index[key]))
    pos = 0
    for start, end, o in stages:
        if start != pos or end <= start:
            raise ValidationError("stages must partition the kernel chain "
                                  "contiguously")
        if not problem.range_allowed(start, end, o):
            type_name = sys_spec.device_types[problem.options[o][0]].name
            raise InfeasibleError(
                f"stage [{start},{end}) has a kernel ineligible for "
                f"{type_name}")
        pos = end
    if pos != problem.n:
        raise ValidationError("stages do not cover the whole workload")
    cand = _evaluate_on_problem(problem, tuple(stages))
    return _decode(problem, sys_spec, cand)


def _evaluate_on_problem(p: Problem,
                         stages: Tuple[Tuple[int, int, int], ...]) -> Candidate:
    """Engine-identical evaluation of one complete stage assignment."""
    usage = [0] * p.n_types
    t_last = 0.0
    t_max = 0.0
    e_dyn = 0.0
    lo = p.host
    for a, b, o in stages:
        t_idx, c = p.options[o]
        usage[t_idx] += c
        t_in = p.comm[a][lo][o]
        edyn_t = c * p.s_edyn[o][a][b]
        if lo == p.host:
            e_dyn = (e_dyn + edyn_t) + p.pxfer[o] * t_in
        else:
            upd = t_last + t_in
            if upd > t_max:
                t_max = upd
            e_dyn = ((e_dyn + p.pxfer[lo] * t_in) + edyn_t) \
                + p.pxfer[o] * t_in
        t_last = p.s_exec[o][a][b] + t_in
        lo = o
    o = stages[-1][2]
    t_out = p.comm[p.n][o][p.host]
    t_fin = t_last + t_out
    period = t_max if t_max > t_fin else t_fin
    e_fin = e_dyn + p.pxfer[o] * t_out
    p_static = 0.0
    for t in range(p.n_types):
        p_static += usage[t] * p.pstat[t]
    return (period, p_static * period + e_fin, tuple(usage), stages)


def baseline_schedule(wl: Workload, sys_spec: SystemSpec,
                      registry: ModelRegistry, baseline: BaselineMode,
                      objective: Objective = Objective.perf()
                      ) -> ScheduleResult:
    if baseline.mode == "dype":
        return dype_schedule(wl, sys_spec, registry, objective)
    if baseline.mode == "static":
        sched = evaluate_static(wl, sys_spec, registry, baseline.stages)
        point = ParetoPoint(throughput=sched.throughput,
                            energy_per_inference=sched.energy_per_period,
                            schedule=sched)
        return ScheduleResult(schedule=sched, pareto=(point,),
                              objective=objective)
    if baseline.mode == "fleetrec":
        restriction = [baseline.pin.get(i) for i in range(len(wl))]
        for i, name in enumerate(restriction):
            if name is not None:
                sys_spec.device(name)  # raises on unknown type
        return dype_schedule(wl, sys_spec, registry, objective, restriction)
    if baseline.mode == "only":
        sys_spec.device(baseline.type_name)
        restriction = [baseline.type_name] * len(wl)
        return dype_schedule(wl, sys_spec, registry, objective, restriction)
    raise ConfigError(f"unknown baseline mode {baseline.mode!r}")


def theoretical_additive(gpu_point: ParetoPoint,
                         fpga_point: ParetoPoint) -> Tuple[float, float]:
    """Summed throughput and averaged energy efficiency of the two
    homogeneous results: the "one plus one" reference."""
    throughput = gpu_point.throughput + fpga_point.throughput
    eff = (1.0 / gpu_point.energy_per_inference
           + 1.0 / fpga_point.energy_per_inference) / 2.0
    return throughput, eff


def perturb_registry(registry: ModelRegistry, epsilon: float,
                     rng: random.Random) -> ModelRegistry:
    """Multiplicative U(1-eps, 1+eps) noise on every model coefficient."""
    out = ModelRegistry()
    for entry in registry.to_dict()["models"]:
        model = PerfModel.from_dict(entry)
        noisy = {name: value * rng.uniform(1.0 - epsilon, 1.0 + epsilon)
                 for name, value in sorted(model.coefficients.items())}
        out.register(entry["id"], replace(model, coefficients=noisy))
    return out


@dataclass(frozen=True)
class RobustnessCase:
    workload: str
    objective: str
    trial: int
    chosen_value: float
    optimal_value: float

    @property
    def rel_loss(self) -> float:
        return (self.chosen_value - self.optimal_value) / self.optimal_value

    @property
    def suboptimal(self) -> bool:
        return self.chosen_value > self.optimal_value


@dataclass(frozen=True)
class RobustnessReport:
    epsilon: float
    seed: int
    cases: Tuple[RobustnessCase, ...]

    @property
    def n_suboptimal(self) -> int:
        return sum(1 for c in self.cases if c.suboptimal)

    @property
    def mean_rel_loss(self) -> float:
        losses = [c.rel_loss for c in self.cases if c.suboptimal]
        return sum(losses) / len(losses) if losses else 0.0

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "seed": self.seed,
            "n_cases": len(self.cases),
            "n_suboptimal": self.n_suboptimal,
            "mean_rel_loss": self.mean_rel_loss,
            "cases": [
                {"workload": c.workload, "objective": c.objective,
                 "trial": c.trial, "chosen_value": c.chosen_value,
                 "optimal_value": c.optimal_value,
                 "rel_loss": c.rel_loss, "suboptimal": c.suboptimal}
                for c in self.cases],
        }


def robustness_study(workloads: Sequence[Workload], sys_spec: SystemSpec,
                     registry: ModelRegistry, epsilon: float, trials: int,
                     seed: int,
                     objective: Objective = Objective.perf()
                     ) -> RobustnessReport:
    """Schedule with noisy coefficient estimates, then score the chosen
    schedule under the true models against the true optimum."""
    rng = random.Random(seed)
    cases = []
    for trial in range(trials):
        for wl in workloads:
            noisy = perturb_registry(registry, epsilon, rng)
            chosen = dype_schedule(wl, sys_spec, noisy, objective)
            true_problem = build_problem(wl, sys_spec, registry)
            stage_defs = tuple(
                (s.start, s.end,
                 _option_of(true_problem, sys_spec, s))
                for s in chosen.schedule.stages)
            chosen_cand = _evaluate_on_problem(true_problem, stage_defs)
            optimum = dype_schedule(wl, sys_spec, registry, objective)
            if objective.mode == "energy":
                chosen_value = chosen_cand[1]
                optimal_value = optimum.energy
            else:
                chosen_value = chosen_cand[0]
                optimal_value = optimum.period
            cases.append(RobustnessCase(
                workload=wl.name, objective=objective.mode, trial=trial,
                chosen_value=chosen_value, optimal_value=optimal_value))
    return RobustnessReport(epsilon=epsilon, seed=seed, cases=tuple(cases))


def _option_of(problem: Problem, sys_spec: SystemSpec, stage: Stage) -> int:
    t_idx = next(t for t, d in enumerate(sys_spec.device_types)
                 if d.name == stage.device_type)
    return problem.options.index((t_idx, stage.device_count))
