"""Exact solvers for small instances, used to check the approximation pipelines.

Every oracle enforces a hard cap on its search space and raises
:class:`~outliersched.core.SizeError` beyond it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .core import (FlowInstance, GapInstance, SegmentSchedule, SizeError, WctInstance,
                   validate_schedule)

FLOW_SUBSET_CAP = 10 ** 6
GAP_ASSIGNMENT_CAP = 10 ** 6
WCT_MAX_JOBS = 12
WCT_MAX_MACHINES = 3


@dataclass
class OracleResult:
    objective: Optional[Fraction]  # None when infeasible
    selected: frozenset = frozenset()
    schedule: Optional[SegmentSchedule] = None
    explored: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.objective is not None

    def to_dict(self) -> dict:
        from .core import fraction_str, schedule_to_dict
        return {"feasible": self.feasible,
                "objective": None if self.objective is None else fraction_str(self.objective),
                "selected": sorted(self.selected), "explored": self.explored,
                "schedule": None if self.schedule is None else schedule_to_dict(self.schedule),
                **{k: v for k, v in self.extra.items()}}


# ---------------------------------------------------------------------------
# flow time


def srpt(inst: FlowInstance, subset: Iterable[int] | None = None) -> OracleResult:
    """Preemptive shortest-remaining-processing-time schedule of ``subset``.

    Ties go to the smaller remaining time, then the smaller id.  Event times
    stay integral for integral data.
    """
    jobs = sorted(set(range(inst.n)) if subset is None else set(subset))
    rem = {j: inst.jobs[j].proc for j in jobs}
    pending = sorted(jobs, key=lambda j: (inst.jobs[j].release, j))
    k = 0
    t = 0
    active: list[int] = []
    pieces: list[list] = []
    flow = 0
    while k < len(pending) or active:
        if not active:
            t = max(t, inst.jobs[pending[k]].release)
        while k < len(pending) and inst.jobs[pending[k]].release <= t:
            active.append(pending[k])
            k += 1
        j = min(active, key=lambda j: (rem[j], j))
        horizon = inst.jobs[pending[k]].release if k < len(pending) else math.inf
        run = min(rem[j], horizon - t)
        if pieces and pieces[-1][0] == j and pieces[-1][2] == t:
            pieces[-1][2] = t + run
        else:
            pieces.append([j, t, t + run])
        t += run
        rem[j] -= run
        if rem[j] == 0:
            active.remove(j)
            flow += t - inst.jobs[j].release
    sched = SegmentSchedule.from_times([(j, 0, s, e) for j, s, e in pieces], jobs)
    return OracleResult(Fraction(flow), frozenset(jobs), sched, 1)


def exhaustive_preemptive(inst: FlowInstance, subset: Iterable[int] | None = None,
                          max_states: int = 2_000_000) -> Fraction:
    """Minimum total flow over all unit-step preemptive schedules (including idling)."""
    jobs = sorted(set(range(inst.n)) if subset is None else set(subset))
    if not jobs:
        return Fraction(0)
    rel = tuple(inst.jobs[j].release for j in jobs)
    states = 1
    for j in jobs:
        states *= inst.jobs[j].proc + 1
    if states * (max(rel) + sum(inst.jobs[j].proc for j in jobs) + 1) > max_states:
        raise SizeError("exhaustive preemptive search space too large")

    @lru_cache(maxsize=None)
    def best(t: int, rem: tuple) -> int:
        if not any(rem):
            return 0
        waiting = sum(1 for r, q in zip(rel, rem) if q and r <= t)
        avail = [i for i, (r, q) in enumerate(zip(rel, rem)) if q and r <= t]
        # idling is a choice only while releases are still ahead; after the last
        # release some job is always available
        out = waiting + best(t + 1, rem) if t < last_release else math.inf
        for i in avail:
            nxt = list(rem)
            nxt[i] -= 1
            out = min(out, waiting + best(t + 1, tuple(nxt)))
        return out

    last_release = max(rel)
    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10_000))
    try:
        return Fraction(best(0, tuple(inst.jobs[j].proc for j in jobs)))
    finally:
        sys.setrecursionlimit(old)


def brute_flow(inst: FlowInstance, fixed: Iterable[int] = ()) -> OracleResult:
    """Best SRPT flow over all job sets of size exactly Pi containing ``fixed``.

    Adding jobs never lowers SRPT flow, so sets larger than Pi are never needed.
    """
    fixed = sorted(set(fixed))
    free = [j for j in range(inst.n) if j not in set(fixed)]
    need = inst.profit_target - len(fixed)
    if need < 0:
        raise ValueError("fixed set larger than the profit target")
    count = math.comb(len(free), need)
    if count > FLOW_SUBSET_CAP:
        raise SizeError(f"{count} subsets exceed the cap of {FLOW_SUBSET_CAP}")
    best = None
    for extra in itertools.combinations(free, need):
        res = srpt(inst, fixed + list(extra))
        if best is None or res.objective < best.objective:
            best = res
    best.explored = count
    return best


# ---------------------------------------------------------------------------
# weighted completion time


def _machine_tables(inst: WctInstance, i: int):
    n = inst.n
    jobs = inst.jobs
    fronts: list[list] = [None] * (1 << n)
    fronts[0] = [(0, Fraction(0), -1, -1)]
    raw: list[list] = [[] for _ in range(1 << n)]
    for mask in range(1 << n):
        if mask:
            pts = sorted(raw[mask], key=lambda q: (q[0], q[1]))
            front = []
            for pt in pts:
                if not front or pt[1] < front[-1][1]:
                    front.append(pt)
            fronts[mask] = front
            raw[mask] = None
        for j in range(n):
            if mask >> j & 1:
                continue
            for k, (fin, cost, _, _) in enumerate(fronts[mask]):
                c = max(fin, jobs[j].release) + jobs[j].proc[i]
                raw[mask | (1 << j)].append((c, cost + Fraction(jobs[j].weight) * c, j, k))
    best = [min(f, key=lambda q: q[1])[1] for f in fronts]
    return fronts, best


def _order(fronts, mask: int) -> list[int]:
    k = min(range(len(fronts[mask])), key=lambda q: fronts[mask][q][1])
    order = []
    while mask:
        fin, cost, j, prev = fronts[mask][k]
        order.append(j)
        mask ^= 1 << j
        k = prev
    return order[::-1]


def brute_wct(inst: WctInstance) -> OracleResult:
    """Exact min sum w_j C_j over job sets meeting every target, machine
    assignments and non-preemptive orders respecting release dates."""
    n, m = inst.n, inst.machines
    if n > WCT_MAX_JOBS or m > WCT_MAX_MACHINES:
        raise SizeError(f"brute_wct handles n <= {WCT_MAX_JOBS}, m <= {WCT_MAX_MACHINES}")
    tables = [_machine_tables(inst, i) for i in range(m)]
    full = (1 << n) - 1
    prof = np.zeros((len(inst.targets), 1 << n))
    for k, tgt in enumerate(inst.targets):
        for j in range(n):
            prof[k, [mask for mask in range(1 << n) if mask >> j & 1]] += tgt.profits[j]
    ok_mask = np.all(prof >= np.array([[t.target] for t in inst.targets]) - 1e-9, axis=0)
    best_val, best_parts, explored = None, None, 0

    def parts(rest: int, i: int):
        # all ways to give disjoint submasks of ``rest`` to machines i..m-1
        if i == m - 1:
            sub = rest
            while True:
                yield (sub,)
                if sub == 0:
                    return
                sub = (sub - 1) & rest
        sub = rest
        while True:
            for tail in parts(rest & ~sub, i + 1):
                yield (sub,) + tail
            if sub == 0:
                return
            sub = (sub - 1) & rest

    for split in parts(full, 0):
        explored += 1
        union = 0
        for s in split:
            union |= s
        if not ok_mask[union]:
            continue
        val = sum((tables[i][1][s] for i, s in enumerate(split)), Fraction(0))
        if best_val is None or val < best_val or (val == best_val and split < best_parts):
            best_val, best_parts = val, split
    if best_val is None:
        return OracleResult(None, explored=explored)
    triples = []
    for i, s in enumerate(best_parts):
        clock = 0
        for j in _order(tables[i][0], s):
            st = max(clock, inst.jobs[j].release)
            clock = st + inst.jobs[j].proc[i]
            triples.append((j, i, st, clock))
    sched = SegmentSchedule.from_times(triples, [j for j, *_ in triples])
    rep = validate_schedule(inst, sched)
    assert rep.feasible and rep.objective == best_val, (rep.violations, rep.objective, best_val)
    return OracleResult(best_val, sched.selected, sched, explored)


# ---------------------------------------------------------------------------
# GAP


def brute_gap(inst: GapInstance, C: float | None = None, T: float | None = None) -> OracleResult:
    """Lexicographically smallest (makespan, cost) assignment with profit >= target,
    cost <= C and makespan <= T (bounds default to the instance's, then to none).

    Each job goes to one of the m machines or is an outlier.
    """
    m, n = inst.machines, inst.n
    C = inst.cost_bound if C is None else C
    T = inst.makespan_bound if T is None else T
    C = math.inf if C is None else C
    T = math.inf if T is None else T
    count = (m + 1) ** n
    if count > GAP_ASSIGNMENT_CAP:
        raise SizeError(f"{count} assignments exceed the cap of {GAP_ASSIGNMENT_CAP}")
    A = np.array(list(itertools.product(range(m + 1), repeat=n)), dtype=np.int64).reshape(count, n)
    P = np.array([list(j.proc) + [0] for j in inst.jobs], dtype=float).reshape(n, m + 1)
    Cm = np.array([list(j.cost) + [0] for j in inst.jobs], dtype=float).reshape(n, m + 1)
    pi = np.array([j.profit for j in inst.jobs], dtype=float)
    cols = np.arange(n)
    cost = Cm[cols, A].sum(axis=1) if n else np.zeros(count)
    profit = (pi * (A < m)).sum(axis=1) if n else np.zeros(count)
    loads = np.zeros((count, m))
    for i in range(m):
        loads[:, i] = (P[:, i] * (A == i)).sum(axis=1) if n else 0
    mk = loads.max(axis=1)
    ok = (profit >= inst.profit_target - 1e-9) & (cost <= C + 1e-9) & (mk <= T + 1e-9)
    if not ok.any():
        return OracleResult(None, explored=count)
    idx = np.nonzero(ok)[0]
    order = np.lexsort((cost[idx], mk[idx]))  # primary makespan, then cost
    k = idx[order[0]]
    sel = frozenset(int(j) for j in range(n) if A[k, j] < m)
    from .gap import Assignment
    a = Assignment(tuple(int(v) for v in A[k]), m)
    return OracleResult(Fraction(mk[k]).limit_denominator(10 ** 9), sel, a.to_schedule(inst), count,
                        {"cost": float(cost[k]), "makespan": float(mk[k]), "profit": float(profit[k])})


def gap_frontier(inst: GapInstance) -> list[tuple[float, float]]:
    """Pareto (cost, makespan) pairs of all profit-feasible assignments."""
    m, n = inst.machines, inst.n
    count = (m + 1) ** n
    if count > GAP_ASSIGNMENT_CAP:
        raise SizeError(f"{count} assignments exceed the cap of {GAP_ASSIGNMENT_CAP}")
    A = np.array(list(itertools.product(range(m + 1), repeat=n)), dtype=np.int64).reshape(count, n)
    P = np.array([list(j.proc) + [0] for j in inst.jobs], dtype=float).reshape(n, m + 1)
    Cm = np.array([list(j.cost) + [0] for j in inst.jobs], dtype=float).reshape(n, m + 1)
    pi = np.array([j.profit for j in inst.jobs], dtype=float)
    cols = np.arange(n)
    cost = Cm[cols, A].sum(axis=1)
    profit = (pi * (A < m)).sum(axis=1)
    mk = np.max(np.stack([(P[:, i] * (A == i)).sum(axis=1) for i in range(m)], axis=1), axis=1)
    ok = profit >= inst.profit_target - 1e-9
    pts = sorted(set(zip(cost[ok].tolist(), mk[ok].tolist())))
    front = []
    for c, t in pts:
        if not front or t < front[-1][1]:
            front.append((c, t))
    return front
