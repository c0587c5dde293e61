"""Pseudo-polynomial DP and FPTAS for sum of completion times with outliers.

Unit weights, no release dates, identical machines.  On each machine the chosen
jobs run in shortest-processing-time order, so scanning jobs by non-decreasing p
means every newly taken job is last on its machine and completes exactly at the
machine's new makespan.

``profit[C, L_1..L_m]`` after the first j jobs is the best profit of a subset
with total completion time at most C whose machine makespans are exactly L_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import SizeError, WctInstance

DP_CELL_CAP = 60_000_000  # choice-table bytes
MAX_DP_MACHINES = 3


@dataclass(frozen=True)
class DpResult:
    value: int  # optimal sum of completion times
    selected: frozenset
    orders: tuple  # per machine, job ids in processing order
    table_cells: int = 0
    K: float = 1.0
    P_max: int | None = None

    @property
    def order(self) -> tuple:
        return self.orders[0]


def _check(inst: WctInstance, machines: int):
    if inst.K != 1:
        raise ValueError("the DP handles a single profit target")
    for j, job in enumerate(inst.jobs):
        if job.weight != 1:
            raise ValueError(f"job {j}: the DP requires unit weights")
        if job.release != 0:
            raise ValueError(f"job {j}: the DP requires zero release dates")
        if len(set(job.proc)) != 1:
            raise ValueError(f"job {j}: the DP requires identical machines")
    if not 1 <= machines <= MAX_DP_MACHINES:
        raise ValueError(f"machine count must be in 1..{MAX_DP_MACHINES}")


def _table(p: list[int], profit: list[float], m: int, C_max: int, L_max: int):
    """Fill the profit table over jobs in the given (non-decreasing p) order.

    Returns the final layer and per-job choice arrays (0 = skip, i+1 = machine i).
    """
    shape = (C_max + 1,) + (L_max + 1,) * m
    cells = int(np.prod(shape))
    if cells * max(len(p), 1) > DP_CELL_CAP:
        raise SizeError(f"DP table of {cells} cells x {len(p)} jobs exceeds the cap; use the FPTAS")
    cur = np.full(shape, -np.inf)
    cur[(slice(None),) + (0,) * m] = 0.0
    choices = []
    for pj, pij in zip(p, profit):
        nxt = cur.copy()
        choice = np.zeros(shape, dtype=np.int8)
        for i in range(m):
            for L in range(pj, L_max + 1):
                # job goes last on machine i: makespan L, completion L, cost L
                if L > C_max:
                    break
                dst = [slice(L, None)] + [slice(None)] * m
                dst[1 + i] = L
                src = [slice(0, C_max + 1 - L)] + [slice(None)] * m
                src[1 + i] = L - pj
                cand = cur[tuple(src)] + pij
                d = tuple(dst)
                better = cand > nxt[d]
                nxt[d] = np.where(better, cand, nxt[d])
                choice[d] = np.where(better, i + 1, choice[d])
        choices.append(choice)
        cur = nxt
    return cur, choices, cells


def _solve(p: list[int], profit: list[float], target: float, m: int):
    """Minimal C reaching ``target`` and the witness (index sets per machine)."""
    n = len(p)
    C_max = sum((n - k) * q for k, q in enumerate(sorted(p)))  # all jobs, one machine, SPT
    L_max = sum(p)
    cur, choices, cells = _table(p, profit, m, C_max, L_max)
    best_by_C = cur.reshape(C_max + 1, -1).max(axis=1)
    hits = np.nonzero(best_by_C >= target - 1e-9)[0]
    if len(hits) == 0:
        return None
    C = int(hits[0])
    flat = int(np.argmax(cur[C].reshape(-1) >= target - 1e-9))
    L = list(np.unravel_index(flat, (L_max + 1,) * m)) if m else []
    L = [int(v) for v in L]
    per_machine = [[] for _ in range(m)]
    c = C
    for j in range(n - 1, -1, -1):
        ch = int(choices[j][(c,) + tuple(L)])
        if ch == 0:
            continue
        i = ch - 1
        per_machine[i].append(j)
        c -= L[i]
        L[i] -= p[j]
    assert all(v == 0 for v in L), "backtrack did not return to the empty state"
    return C, [lst[::-1] for lst in per_machine], cells


def _spt_value(p: list[int], orders) -> int:
    total = 0
    for order in orders:
        t = 0
        for j in order:
            t += p[j]
            total += t
    return total


def dp_multi_machine(inst: WctInstance, machines: int | None = None) -> DpResult:
    """Exact minimum sum of completion times meeting the profit target on
    ``machines`` identical machines (default: the instance's machine count)."""
    m = inst.machines if machines is None else machines
    _check(inst, m)
    tgt = inst.targets[0]
    order = sorted(range(inst.n), key=lambda j: (inst.jobs[j].proc[0], j))
    p = [inst.jobs[j].proc[0] for j in order]
    pi = [float(tgt.profits[j]) for j in order]
    if tgt.target <= 0:
        return DpResult(0, frozenset(), tuple(() for _ in range(m)))
    res = _solve(p, pi, float(tgt.target), m)
    if res is None:
        raise ValueError("profit target unreachable")
    C, per_machine, cells = res
    assert _spt_value(p, per_machine) == C
    orders = tuple(tuple(order[k] for k in lst) for lst in per_machine)
    sel = frozenset(j for o in orders for j in o)
    return DpResult(C, sel, orders, cells)


def dp_exact(inst: WctInstance) -> DpResult:
    """Single-machine exact DP."""
    return dp_multi_machine(inst, 1)


def scaling_constant(eps: float, P_max: int, n: int) -> float:
    return 2 * eps * P_max / (n * (n + 1))


def fptas(inst: WctInstance, eps: float) -> DpResult:
    """(1 + eps)-approximation by rounding p up to multiples of K.

    P_max, the largest processing time used by an optimum, is guessed over all
    distinct p values; larger jobs are dropped for that guess.  The chosen sets
    are re-evaluated with true processing times in SPT order and the best kept.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    _check(inst, 1)
    tgt = inst.targets[0]
    n = inst.n
    if tgt.target <= 0:
        return DpResult(0, frozenset(), ((),))
    best = None
    for P_max in sorted({job.proc[0] for job in inst.jobs}):
        keep = sorted((j for j in range(n) if inst.jobs[j].proc[0] <= P_max),
                      key=lambda j: (inst.jobs[j].proc[0], j))
        if sum(tgt.profits[j] for j in keep) < tgt.target:
            continue
        K = scaling_constant(eps, P_max, n)
        K = 1.0 if K <= 1 else K
        scaled = [math.ceil(Fraction(inst.jobs[j].proc[0]) / Fraction(K)) for j in keep]
        res = _solve(scaled, [float(tgt.profits[j]) for j in keep], float(tgt.target), 1)
        if res is None:
            continue
        _, per_machine, cells = res
        chosen = sorted((keep[k] for k in per_machine[0]), key=lambda j: (inst.jobs[j].proc[0], j))
        value = _spt_value([job.proc[0] for job in inst.jobs], [chosen])
        if best is None or value < best.value:
            best = DpResult(value, frozenset(chosen), (tuple(chosen),), cells, K, P_max)
    if best is None:
        raise ValueError("profit target unreachable")
    return best
