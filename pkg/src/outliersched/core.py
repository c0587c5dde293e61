"""Problem instances, schedules, validation and JSON (de)serialization.

All schedule endpoints live on a global grid of ``TICK = 2**-20`` time units
and are stored as integer tick counts, so validation arithmetic is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence, Union

TICKS_PER_UNIT = 1 << 20
TICK = Fraction(1, TICKS_PER_UNIT)


class ScheduleError(ValueError):
    """Structural problem with a schedule (unknown job or machine id)."""


class InstanceParseError(ValueError):
    """Malformed instance or schedule JSON."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class SizeError(ValueError):
    """A configured size cap (LP horizon, DP table, oracle search space) was exceeded."""


def to_ticks(value) -> int:
    """Convert a time value to ticks; raises if it is not on the grid."""
    q = Fraction(value) * TICKS_PER_UNIT
    if q.denominator != 1:
        raise ValueError(f"{value!r} is not a multiple of 2^-20")
    return int(q)


def from_ticks(ticks: int) -> Fraction:
    return Fraction(ticks, TICKS_PER_UNIT)


def size_class(p: int) -> int:
    """Class index k with p in (2^(k-1), 2^k]; p = 1 maps to 0."""
    if p < 1:
        raise ValueError("processing time must be >= 1")
    return (p - 1).bit_length()


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class GapJob:
    proc: tuple  # per machine
    cost: tuple  # per machine
    profit: float


@dataclass(frozen=True)
class GapInstance:
    machines: int
    jobs: tuple[GapJob, ...]
    profit_target: float
    cost_bound: float | None = None
    makespan_bound: float | None = None

    kind = "gap"

    def __post_init__(self):
        if self.machines < 1:
            raise ValueError("need at least one machine")
        for j, job in enumerate(self.jobs):
            if len(job.proc) != self.machines or len(job.cost) != self.machines:
                raise ValueError(f"job {j}: proc/cost length must equal machine count")
            if any(p <= 0 for p in job.proc):
                raise ValueError(f"job {j}: processing times must be positive")
            if job.profit < 0:
                raise ValueError(f"job {j}: negative profit")
        if self.profit_target > self.total_profit:
            raise ValueError("profit target exceeds total profit")

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def total_profit(self):
        return sum(job.profit for job in self.jobs)


@dataclass(frozen=True)
class WctJob:
    proc: tuple  # per machine, integers
    weight: float
    release: int = 0


@dataclass(frozen=True)
class ProfitTarget:
    profits: tuple
    target: float


@dataclass(frozen=True)
class WctInstance:
    machines: int
    jobs: tuple[WctJob, ...]
    targets: tuple[ProfitTarget, ...]

    kind = "wct"

    def __post_init__(self):
        if self.machines < 1:
            raise ValueError("need at least one machine")
        if not self.targets:
            raise ValueError("need at least one profit target")
        for j, job in enumerate(self.jobs):
            if len(job.proc) != self.machines:
                raise ValueError(f"job {j}: proc length must equal machine count")
            if any(int(p) != p or p < 1 for p in job.proc):
                raise ValueError(f"job {j}: processing times must be positive integers")
            if int(job.release) != job.release or job.release < 0:
                raise ValueError(f"job {j}: release must be a non-negative integer")
            if job.weight < 0:
                raise ValueError(f"job {j}: negative weight")
        for k, tgt in enumerate(self.targets):
            if len(tgt.profits) != len(self.jobs):
                raise ValueError(f"target {k}: profit vector length must equal job count")
            if any(p < 0 for p in tgt.profits):
                raise ValueError(f"target {k}: negative profit")
            if tgt.target > sum(tgt.profits):
                raise ValueError(f"target {k}: target exceeds total profit")

    @classmethod
    def single(cls, machines, procs, weights, profits, target, releases=None):
        """Convenience constructor for the one-target case."""
        n = len(procs)
        releases = releases if releases is not None else [0] * n
        procs = [tuple(p) if isinstance(p, (list, tuple)) else (p,) * machines for p in procs]
        jobs = tuple(WctJob(tuple(procs[j]), weights[j], releases[j]) for j in range(n))
        return cls(machines, jobs, (ProfitTarget(tuple(profits), target),))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def K(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class FlowJob:
    proc: int
    release: int = 0

    @property
    def klass(self) -> int:
        return size_class(self.proc)

    @property
    def rounded_proc(self) -> int:
        return 1 << self.klass


@dataclass(frozen=True)
class FlowInstance:
    jobs: tuple[FlowJob, ...]
    profit_target: int

    kind = "flow"
    machines = 1

    def __post_init__(self):
        for j, job in enumerate(self.jobs):
            if int(job.proc) != job.proc or job.proc < 1:
                raise ValueError(f"job {j}: processing time must be an integer >= 1")
            if int(job.release) != job.release or job.release < 0:
                raise ValueError(f"job {j}: release must be a non-negative integer")
        if not 0 <= self.profit_target <= len(self.jobs):
            raise ValueError("profit target must lie in [0, n]")

    @classmethod
    def from_lists(cls, procs, releases, target):
        return cls(tuple(FlowJob(int(p), int(r)) for p, r in zip(procs, releases)), int(target))

    @property
    def n(self) -> int:
        return len(self.jobs)


Instance = Union[GapInstance, WctInstance, FlowInstance]


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True, order=True)
class Segment:
    machine: int
    start: int  # ticks
    end: int  # ticks
    job: int


@dataclass(frozen=True)
class SegmentSchedule:
    segments: tuple[Segment, ...]
    selected: frozenset

    def __init__(self, segments: Sequence[Segment] = (), selected=()):
        object.__setattr__(self, "segments", tuple(sorted(segments)))
        object.__setattr__(self, "selected", frozenset(selected))

    @classmethod
    def from_times(cls, triples, selected=None):
        """Build from (job, machine, start, end) tuples given in time units."""
        segs = [Segment(m, to_ticks(s), to_ticks(e), j) for j, m, s, e in triples if e > s]
        if selected is None:
            selected = {s.job for s in segs}
        return cls(segs, selected)

    def job_segments(self, job: int) -> list[Segment]:
        return [s for s in self.segments if s.job == job]

    def completion(self, job: int) -> Fraction:
        return from_ticks(max(s.end for s in self.segments if s.job == job))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    objective: Fraction = Fraction(0)
    metrics: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return not self.violations


def _processing(instance: Instance, job: int, machine: int):
    if isinstance(instance, FlowInstance):
        return instance.jobs[job].proc
    return instance.jobs[job].proc[machine]


def _release(instance: Instance, job: int) -> int:
    if isinstance(instance, GapInstance):
        return 0
    return instance.jobs[job].release


def validate_schedule(instance: Instance, sched: SegmentSchedule) -> ValidationReport:
    """Check feasibility of ``sched`` and compute its objective exactly.

    Objective: total assignment cost for GAP (makespan in ``metrics``),
    sum of w_j C_j for weighted completion time, sum of C_j - r_j for flow time.
    Unscheduled jobs contribute nothing.
    """
    n = instance.n
    m = instance.machines
    for s in sched.segments:
        if not 0 <= s.job < n:
            raise ScheduleError(f"unknown job id {s.job}")
        if not 0 <= s.machine < m:
            raise ScheduleError(f"unknown machine id {s.machine}")
        if s.end <= s.start:
            raise ScheduleError(f"empty or reversed segment {s}")
    for j in sched.selected:
        if not 0 <= j < n:
            raise ScheduleError(f"unknown job id {j}")

    report = ValidationReport()
    v = report.violations

    last_end: dict[int, tuple[int, int]] = {}
    for s in sched.segments:  # sorted by (machine, start)
        prev = last_end.get(s.machine)
        if prev is not None and s.start < prev[0]:
            v.append(f"overlap: jobs {prev[1]} and {s.job} on machine {s.machine}")
        if prev is None or s.end > prev[0]:
            last_end[s.machine] = (s.end, s.job)

    per_job: dict[int, list[Segment]] = {}
    for s in sched.segments:
        per_job.setdefault(s.job, []).append(s)
    for j, segs in per_job.items():
        if j not in sched.selected:
            v.append(f"job {j} has segments but is not selected")
        if min(s.start for s in segs) < to_ticks(_release(instance, j)):
            v.append(f"release: job {j} starts before its release date")
        machines = {s.machine for s in segs}
        if len(machines) > 1:
            v.append(f"migration: job {j} runs on machines {sorted(machines)}")
            continue
        i = machines.pop()
        done = sum(s.end - s.start for s in segs)
        need = to_ticks(_processing(instance, j, i))
        if done < need:
            v.append(f"under-processing: job {j} gets {from_ticks(done)} of {from_ticks(need)}")
        elif done > need:
            v.append(f"over-processing: job {j} gets {from_ticks(done)} of {from_ticks(need)}")
    for j in sorted(sched.selected - per_job.keys()):
        v.append(f"under-processing: selected job {j} has no segments")

    sel = sorted(sched.selected)
    if isinstance(instance, GapInstance):
        machine_of = {j: per_job[j][0].machine for j in sel if j in per_job}
        cost = sum(Fraction(instance.jobs[j].cost[i]) for j, i in machine_of.items())
        loads = [Fraction(0)] * m
        for j, i in machine_of.items():
            loads[i] += Fraction(instance.jobs[j].proc[i])
        profit = sum(Fraction(instance.jobs[j].profit) for j in sel)
        report.objective = cost
        report.metrics.update(cost=cost, makespan=max(loads, default=Fraction(0)),
                              loads=loads, profit=profit)
        if profit < Fraction(instance.profit_target):
            v.append(f"profit shortfall: {profit} < {instance.profit_target}")
    elif isinstance(instance, WctInstance):
        total = Fraction(0)
        for j in sel:
            if j in per_job:
                total += Fraction(instance.jobs[j].weight) * sched.completion(j)
        report.objective = total
        for k, tgt in enumerate(instance.targets):
            profit = sum(Fraction(tgt.profits[j]) for j in sel)
            report.metrics[f"profit_{k}"] = profit
            if profit < Fraction(tgt.target):
                v.append(f"profit shortfall on target {k}: {profit} < {tgt.target}")
    else:
        total = Fraction(0)
        for j in sel:
            if j in per_job:
                total += sched.completion(j) - instance.jobs[j].release
        report.objective = total
        report.metrics["count"] = len(sel)
        if len(sel) < instance.profit_target:
            v.append(f"profit shortfall: {len(sel)} jobs < {instance.profit_target}")
    return report


# ---------------------------------------------------------------------------
# JSON


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise InstanceParseError(f"{where}{key}", "missing")
    return obj[key]


def _number(value, name: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceParseError(name, f"expected a number, got {value!r}")
    if isinstance(value, float) and not math.isfinite(value):
        raise InstanceParseError(name, "must be finite")
    return value


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceParseError(name, f"expected an integer, got {value!r}")
    return value


def _vector(value, length: int, name: str, conv=_number) -> tuple:
    if not isinstance(value, list) or len(value) != length:
        raise InstanceParseError(name, f"expected a list of length {length}")
    return tuple(conv(x, f"{name}[{i}]") for i, x in enumerate(value))


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise InstanceParseError("<root>", "expected an object")
    kind = _require(data, "kind", "")
    jobs = _require(data, "jobs", "")
    if not isinstance(jobs, list):
        raise InstanceParseError("jobs", "expected a list")
    try:
        if kind == "gap":
            m = _integer(_require(data, "machines", ""), "machines")
            parsed = []
            for j, job in enumerate(jobs):
                w = f"jobs[{j}]."
                parsed.append(GapJob(_vector(_require(job, "proc", w), m, w + "proc"),
                                     _vector(_require(job, "cost", w), m, w + "cost"),
                                     _number(_require(job, "profit", w), w + "profit")))
            opt = {k: _number(data[k], k) for k in ("cost_bound", "makespan_bound")
                   if data.get(k) is not None}
            return GapInstance(m, tuple(parsed),
                               _number(_require(data, "profit_target", ""), "profit_target"), **opt)
        if kind == "wct":
            m = _integer(_require(data, "machines", ""), "machines")
            parsed = []
            for j, job in enumerate(jobs):
                w = f"jobs[{j}]."
                parsed.append(WctJob(_vector(_require(job, "proc", w), m, w + "proc", _integer),
                                     _number(_require(job, "weight", w), w + "weight"),
                                     _integer(job.get("release", 0), w + "release")))
            if "profit_targets" in data:
                targets = []
                for k, tgt in enumerate(data["profit_targets"]):
                    w = f"profit_targets[{k}]."
                    targets.append(ProfitTarget(
                        _vector(_require(tgt, "profits", w), len(jobs), w + "profits"),
                        _number(_require(tgt, "target", w), w + "target")))
            else:
                target = _number(_require(data, "profit_target", ""), "profit_target")
                profits = tuple(_number(_require(job, "profit", f"jobs[{j}]."), f"jobs[{j}].profit")
                                for j, job in enumerate(jobs))
                targets = [ProfitTarget(profits, target)]
            return WctInstance(m, tuple(parsed), tuple(targets))
        if kind == "flow":
            m = data.get("machines", 1)
            if m != 1:
                raise InstanceParseError("machines", "flow instances are single-machine")
            parsed = []
            for j, job in enumerate(jobs):
                w = f"jobs[{j}]."
                parsed.append(FlowJob(_integer(_require(job, "proc", w), w + "proc"),
                                      _integer(job.get("release", 0), w + "release")))
            return FlowInstance(tuple(parsed),
                                _integer(_require(data, "profit_target", ""), "profit_target"))
    except InstanceParseError:
        raise
    except (ValueError, TypeError, AttributeError) as exc:
        raise InstanceParseError("<instance>", str(exc)) from exc
    raise InstanceParseError("kind", f"unknown kind {kind!r}")


def instance_to_dict(inst: Instance) -> dict:
    if isinstance(inst, GapInstance):
        d = {"kind": "gap", "machines": inst.machines,
             "jobs": [{"proc": list(j.proc), "cost": list(j.cost), "profit": j.profit}
                      for j in inst.jobs],
             "profit_target": inst.profit_target}
        if inst.cost_bound is not None:
            d["cost_bound"] = inst.cost_bound
        if inst.makespan_bound is not None:
            d["makespan_bound"] = inst.makespan_bound
        return d
    if isinstance(inst, WctInstance):
        jobs = [{"proc": list(j.proc), "weight": j.weight, "release": j.release} for j in inst.jobs]
        d = {"kind": "wct", "machines": inst.machines, "jobs": jobs}
        if inst.K == 1:
            for job, p in zip(jobs, inst.targets[0].profits):
                job["profit"] = p
            d["profit_target"] = inst.targets[0].target
        else:
            d["profit_targets"] = [{"profits": list(t.profits), "target": t.target}
                                   for t in inst.targets]
        return d
    return {"kind": "flow", "machines": 1,
            "jobs": [{"proc": j.proc, "release": j.release} for j in inst.jobs],
            "profit_target": inst.profit_target}


def _dumps(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def _loads(data: bytes | str):
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceParseError("<json>", str(exc)) from exc


def read_instance(data: bytes | str) -> Instance:
    return instance_from_dict(_loads(data))


def write_instance(inst: Instance) -> bytes:
    return _dumps(instance_to_dict(inst))


def fraction_str(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def schedule_to_dict(sched: SegmentSchedule, objective=None) -> dict:
    d = {"segments": [{"job": s.job, "machine": s.machine,
                       "start_ticks": s.start, "end_ticks": s.end} for s in sched.segments],
         "selected": sorted(sched.selected)}
    if objective is not None:
        d["objective"] = fraction_str(objective)
    return d


def schedule_from_dict(data: dict) -> SegmentSchedule:
    if not isinstance(data, dict):
        raise InstanceParseError("<root>", "expected an object")
    segs = []
    for i, s in enumerate(_require(data, "segments", "")):
        w = f"segments[{i}]."
        segs.append(Segment(_integer(_require(s, "machine", w), w + "machine"),
                            _integer(_require(s, "start_ticks", w), w + "start_ticks"),
                            _integer(_require(s, "end_ticks", w), w + "end_ticks"),
                            _integer(_require(s, "job", w), w + "job")))
    selected = [_integer(j, f"selected[{i}]") for i, j in enumerate(_require(data, "selected", ""))]
    return SegmentSchedule(segs, selected)


def read_schedule(data: bytes | str) -> tuple[SegmentSchedule, Fraction | None]:
    d = _loads(data)
    sched = schedule_from_dict(d)
    obj = d.get("objective")
    return sched, (Fraction(obj) if obj is not None else None)


def write_schedule(sched: SegmentSchedule, objective=None) -> bytes:
    return _dumps(schedule_to_dict(sched, objective))
