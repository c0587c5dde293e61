"""Generalized assignment with outliers.

Outliers are modelled by an extra "virtual" machine whose processing time for
job j is its profit; capping that machine's load at (total profit - target)
turns the profit requirement into an ordinary makespan bound.  The assignment
LP is rounded with the slot/matching construction, one high-profit virtual job
is pulled back if the target is missed, and the few expensive assignments of an
optimum are enumerated up front so every other pair costs at most eps * C.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import GapInstance, GapJob, SegmentSchedule, validate_schedule
from .lp import EQ, LE, LpBuilder, solve

_EPS = 1e-9


class GapInfeasible(RuntimeError):
    """No assignment meets the (cost, makespan, profit) triple."""


@dataclass(frozen=True)
class VirtualInstance:
    """``inst`` plus the virtual machine (index ``m``) and its load bound."""

    base: GapInstance
    inst: GapInstance  # m + 1 machines
    T_vpm: float
    kept: tuple  # jobs with some real machine p_ij <= T
    makespan_bound: float

    @property
    def virtual(self) -> int:
        return self.base.machines


def build_virtual_instance(inst: GapInstance, T: float | None = None) -> VirtualInstance:
    """Append the virtual profit machine.  Jobs that fit on no real machine
    (min_i p_ij > T) are dropped from ``kept`` and count as outliers."""
    T = inst.makespan_bound if T is None else T
    if T is None:
        T = math.inf
    kept = tuple(j for j, job in enumerate(inst.jobs) if min(job.proc) <= T)
    total = sum(inst.jobs[j].profit for j in kept)
    if inst.profit_target > total:
        raise GapInfeasible(f"profit target {inst.profit_target} exceeds reachable profit {total}")
    jobs = tuple(GapJob(tuple(job.proc) + (job.profit if job.profit > 0 else _tiny(job),),
                        tuple(job.cost) + (0,), job.profit) for job in inst.jobs)
    vinst = GapInstance(inst.machines + 1, jobs, inst.profit_target, inst.cost_bound, T)
    return VirtualInstance(inst, vinst, total - inst.profit_target, kept, T)


def _tiny(job):
    # a zero-profit job costs nothing on the virtual machine; GapInstance wants p > 0
    return 1e-300


@dataclass(frozen=True)
class Assignment:
    """``machine_of[j]``: real machine index, or ``m`` for the virtual machine."""

    machine_of: tuple
    machines: int  # real machines

    def loads(self, inst: GapInstance) -> list:
        out = [0] * self.machines
        for j, i in enumerate(self.machine_of):
            if i < self.machines:
                out[i] += inst.jobs[j].proc[i]
        return out

    def virtual_load(self, inst: GapInstance):
        return sum(inst.jobs[j].profit for j, i in enumerate(self.machine_of) if i == self.machines)

    def cost(self, inst: GapInstance):
        return sum(inst.jobs[j].cost[i] for j, i in enumerate(self.machine_of) if i < self.machines)

    def profit(self, inst: GapInstance):
        return sum(inst.jobs[j].profit for j, i in enumerate(self.machine_of) if i < self.machines)

    def makespan(self, inst: GapInstance):
        return max(self.loads(inst), default=0)

    def to_schedule(self, inst: GapInstance) -> SegmentSchedule:
        """Jobs back to back from time 0 on their machine, in id order."""
        clock = [Fraction(0)] * self.machines
        triples = []
        for j, i in enumerate(self.machine_of):
            if i < self.machines:
                p = Fraction(inst.jobs[j].proc[i])
                triples.append((j, i, clock[i], clock[i] + p))
                clock[i] += p
        return SegmentSchedule.from_times(triples)


# ---------------------------------------------------------------------------
# LP and rounding


def solve_assignment_lp(inst: GapInstance, C: float, bounds: Sequence[float],
                        allowed: np.ndarray | None = None, method: str = "auto") -> Optional[np.ndarray]:
    """Fractional assignment x[i, j] or None when the relaxation is infeasible.

    Rows: each job fully assigned, machine i load <= bounds[i], total cost <= C.
    Pairs with p_ij > bounds[i] (or masked out by ``allowed``) are fixed at 0.
    The objective minimizes cost, so the returned point is a cheapest one.
    """
    m, n = inst.machines, inst.n
    if n == 0:
        return np.zeros((m, 0))
    ok = np.array([[inst.jobs[j].proc[i] <= bounds[i] + _EPS for j in range(n)] for i in range(m)])
    if allowed is not None:
        ok &= allowed
    if not ok.any(axis=0).all():
        return None
    b = LpBuilder()
    var = {}
    for i in range(m):
        for j in range(n):
            if ok[i, j]:
                var[i, j] = b.var(("x", i, j), 0.0, 1.0, cost=float(inst.jobs[j].cost[i]))
    for j in range(n):
        b.row({var[i, j]: 1.0 for i in range(m) if ok[i, j]}, EQ, 1.0)
    for i in range(m):
        row = {var[i, j]: float(inst.jobs[j].proc[i]) for j in range(n) if ok[i, j]}
        if row:
            b.row(row, LE, float(bounds[i]))
    b.row({v: float(inst.jobs[j].cost[i]) for (i, j), v in var.items()}, LE, float(C))
    sol = solve(b.build(), method=method)
    if not sol.optimal:
        return None
    x = np.zeros((m, n))
    for (i, j), v in var.items():
        x[i, j] = sol.x[v]
    x[x < _EPS] = 0.0
    return x


def slot_graph(inst: GapInstance, x: np.ndarray):
    """Pour jobs into unit-capacity slots per machine, larger p_ij first.

    Returns (slots, edges): slots is a list of (machine, index); edges maps
    (job, slot number) -> fractional weight.  Machine i gets ceil(sum_j x_ij) slots.
    """
    m, n = x.shape
    slots, edges = [], {}
    for i in range(m):
        jobs = sorted((j for j in range(n) if x[i, j] > 0), key=lambda j: (-inst.jobs[j].proc[i], j))
        k = math.ceil(x[i].sum() - 1e-7)
        if not jobs:
            continue
        base = len(slots)
        slots.extend((i, s) for s in range(k))
        s, room = 0, 1.0
        for j in jobs:
            left = x[i, j]
            while left > 1e-7:
                if s >= k:  # float dust past the last slot
                    s, room = k - 1, 1.0
                amt = min(left, room)
                edges[j, base + s] = edges.get((j, base + s), 0.0) + amt
                left -= amt
                room -= amt
                if room <= 1e-7:
                    s, room = s + 1, 1.0
    return slots, edges


def shmoys_tardos_round(inst: GapInstance, x: np.ndarray) -> Assignment:
    """Round a fractional assignment via a min-cost job-to-slot matching.

    Each job is matched to a slot it was poured into, so its machine had
    x_ij > 0; cost does not exceed the fractional cost and each machine exceeds
    its fractional load by at most its largest job.
    """
    m, n = x.shape
    slots, edges = slot_graph(inst, x)
    if n == 0:
        return Assignment((), m - 1)
    big = 1.0 + 2 * sum(max(abs(c) for c in job.cost) for job in inst.jobs)
    cost = np.full((n, len(slots)), big * 4 + 1)
    for (j, s), _ in edges.items():
        cost[j, s] = inst.jobs[j].cost[slots[s][0]]
    rows, cols = linear_sum_assignment(cost)
    machine_of = [None] * n
    for j, s in zip(rows, cols):
        if (j, s) not in edges:
            raise AssertionError("slot matching used a non-edge; fractional assignment is not feasible")
        machine_of[j] = slots[s][0]
    return Assignment(tuple(machine_of), m - 1)


def repair_profit(inst: GapInstance, a: Assignment, target=None,
                  allowed: np.ndarray | None = None) -> Assignment:
    """Move the largest-profit virtual job to its fastest allowed real machine
    when the scheduled profit is below ``target`` (default: the instance target)."""
    target = inst.profit_target if target is None else target
    if a.profit(inst) >= target:
        return a
    m = a.machines
    virt = [j for j, i in enumerate(a.machine_of) if i == m]
    if not virt:
        raise AssertionError("profit short but no job on the virtual machine")
    j = min(virt, key=lambda j: (-inst.jobs[j].profit, j))
    options = [i for i in range(m) if allowed is None or allowed[i, j]]
    if not options:
        raise AssertionError(f"job {j} has no real machine to move to")
    i = min(options, key=lambda i: (inst.jobs[j].proc[i], i))
    mo = list(a.machine_of)
    mo[j] = i
    out = Assignment(tuple(mo), m)
    if out.profit(inst) < target:
        raise AssertionError("profit still short after repair; rounding bound broken")
    return out


# ---------------------------------------------------------------------------
# guessing driver


@dataclass
class GapResult:
    assignment: Assignment
    schedule: SegmentSchedule
    cost: float
    makespan: float
    profit: float
    guess: tuple
    guesses_tried: int

    def report(self, inst: GapInstance, eps: float, C: float, T: float) -> dict:
        pmax = max((min(j.proc) for j in inst.jobs), default=0)
        return {"cost": self.cost, "makespan": self.makespan, "profit": self.profit,
                "bound_ratios": {"cost_over_C": self.cost / C if C else 0.0,
                                 "makespan_over_T": self.makespan / T if T else 0.0},
                "cost_bound": (1 + eps) * C, "makespan_bound_3T": 3 * T,
                "makespan_bound_proof": T + 2 * min(pmax, T),
                "guesses_tried": self.guesses_tried}


def _solve_guess(inst: GapInstance, eps: float, C: float, T: float, fixed: tuple,
                 method: str) -> Optional[Assignment]:
    m, n = inst.machines, inst.n
    fixed_jobs = {j for j, _ in fixed}
    loads = [0.0] * m
    for j, i in fixed:
        loads[i] += inst.jobs[j].proc[i]
    if any(ld > T + _EPS for ld in loads):
        return None
    C_res = C - sum(inst.jobs[j].cost[i] for j, i in fixed)
    if C_res < -_EPS:
        return None
    target_res = inst.profit_target - sum(inst.jobs[j].profit for j in fixed_jobs)
    bounds = [T - ld for ld in loads]
    rest = [j for j in range(n) if j not in fixed_jobs]
    # cheap pairs only; the expensive ones are exactly the guessed ones
    cheap = np.array([[inst.jobs[j].cost[i] <= eps * C + _EPS and inst.jobs[j].proc[i] <= bounds[i] + _EPS
                       for j in rest] for i in range(m)], dtype=bool).reshape(m, len(rest))
    forced = [r for r, j in enumerate(rest) if not cheap[:, r].any()]
    free = [r for r in range(len(rest)) if cheap[:, r].any()]
    reachable = sum(inst.jobs[rest[r]].profit for r in free)
    if target_res > reachable + _EPS:
        return None
    machine_of = [None] * n
    for j, i in fixed:
        machine_of[j] = i
    for r in forced:
        machine_of[rest[r]] = m
    if free:
        sub_jobs = tuple(inst.jobs[rest[r]] for r in free)
        T_vpm = reachable - max(target_res, 0)
        sub = GapInstance(m, sub_jobs, 0)
        vsub = build_virtual_instance(sub, math.inf).inst
        allowed = np.vstack([cheap[:, free], np.ones((1, len(free)), dtype=bool)])
        x = solve_assignment_lp(vsub, C_res, bounds + [T_vpm], allowed, method)
        if x is None:
            return None
        a = shmoys_tardos_round(vsub, x)
        a = repair_profit(vsub, a, max(target_res, 0), allowed)
        for r, i in zip(free, a.machine_of):
            machine_of[rest[r]] = i
    return Assignment(tuple(machine_of), m)


def solve_gap_outliers(inst: GapInstance, eps: float, C: float | None = None,
                       T: float | None = None, method: str = "auto") -> GapResult:
    """Cost <= (1 + eps) C, makespan <= T + 2 min(max p, T) <= 3T, profit >= target.

    Every set of at most ceil(1/eps) pairs with c_ij > eps * C on distinct jobs
    is tried as the expensive part of an optimum; any guess whose LP is
    feasible yields a valid answer, the lexicographically best (cost, makespan)
    is kept.  Raises :class:`GapInfeasible` when every guess fails.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    C = inst.cost_bound if C is None else C
    T = inst.makespan_bound if T is None else T
    if C is None or T is None:
        raise ValueError("cost and makespan bounds are required")
    if inst.profit_target > inst.total_profit:
        raise GapInfeasible("profit target exceeds total profit")
    m, n = inst.machines, inst.n
    g = math.ceil(1 / eps - 1e-12)
    expensive = [(j, i) for j in range(n) for i in range(m)
                 if inst.jobs[j].cost[i] > eps * C + _EPS and inst.jobs[j].proc[i] <= T + _EPS
                 and inst.jobs[j].cost[i] <= C + _EPS]
    best, best_key, best_guess, tried = None, None, None, 0
    for size in range(g + 1):
        for guess in itertools.combinations(expensive, size):
            if len({j for j, _ in guess}) < size:
                continue
            if sum(inst.jobs[j].cost[i] for j, i in guess) > C + _EPS:
                continue
            tried += 1
            a = _solve_guess(inst, eps, C, T, guess, method)
            if a is None:
                continue
            key = (a.cost(inst), a.makespan(inst), a.machine_of)
            if best_key is None or key < best_key:
                best, best_key, best_guess = a, key, guess
    if best is None:
        raise GapInfeasible(f"no assignment with cost <= {C}, makespan <= {T} and profit >= {inst.profit_target}")
    sched = best.to_schedule(inst)
    rep = validate_schedule(inst, sched)
    assert rep.feasible, rep.violations
    return GapResult(best, sched, best.cost(inst), best.makespan(inst), best.profit(inst),
                     best_guess, tried)


def gap_sweep(inst: GapInstance, eps: float, method: str = "auto") -> list[dict]:
    """Double (C, T) together from small values until the pipeline succeeds.

    Maps a coarse Pareto frontier when the instance carries no bounds.
    """
    jobs = inst.jobs
    T = float(min((min(j.proc) for j in jobs), default=1))
    costs = [c for j in jobs for c in j.cost if c > 0]
    C = float(min(costs, default=1))
    T_hi = float(sum(max(j.proc) for j in jobs)) or 1.0
    C_hi = float(sum(max(j.cost) for j in jobs)) or 1.0
    out = []
    while True:
        try:
            r = solve_gap_outliers(inst, eps, C, T, method)
            out.append({"C": C, "T": T, "feasible": True, "cost": r.cost, "makespan": r.makespan})
        except GapInfeasible:
            out.append({"C": C, "T": T, "feasible": False})
        if out[-1]["feasible"] or (T >= T_hi and C >= C_hi):
            return out
        T = min(2 * T, T_hi) if T < T_hi else T
        C = min(2 * C, C_hi) if C < C_hi else C
