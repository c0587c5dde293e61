"""Seeded random instance families used by the tests, demos and ``sched gen``."""

from __future__ import annotations

import numpy as np

from .core import FlowInstance, GapInstance, GapJob, ProfitTarget, WctInstance, WctJob


def random_gap(rng: np.random.Generator, n: int, m: int, pmax: int = 6, cmax: int = 6,
               frac: float = 0.6) -> GapInstance:
    """Integer p, c in [1, pmax] x [0, cmax], profits in [1, 5]; target a
    fraction of the total profit."""
    jobs = tuple(GapJob(tuple(int(v) for v in rng.integers(1, pmax + 1, m)),
                        tuple(int(v) for v in rng.integers(0, cmax + 1, m)),
                        int(rng.integers(1, 6))) for _ in range(n))
    total = sum(j.profit for j in jobs)
    return GapInstance(m, jobs, max(1, int(frac * total)))


def random_wct(rng: np.random.Generator, n: int, m: int = 1, pmax: int = 5, wmax: int = 4,
               rmax: int = 0, K: int = 1, frac: float = 0.5, identical: bool = False,
               unit_weights: bool = False) -> WctInstance:
    jobs = []
    for _ in range(n):
        if identical:
            proc = (int(rng.integers(1, pmax + 1)),) * m
        else:
            proc = tuple(int(v) for v in rng.integers(1, pmax + 1, m))
        w = 1 if unit_weights else int(rng.integers(1, wmax + 1))
        jobs.append(WctJob(proc, w, int(rng.integers(0, rmax + 1)) if rmax else 0))
    targets = []
    for _ in range(K):
        profits = tuple(int(v) for v in rng.integers(1, 10, n))
        targets.append(ProfitTarget(profits, max(1, int(frac * sum(profits)))))
    return WctInstance(m, tuple(jobs), tuple(targets))


def random_flow(rng: np.random.Generator, n: int, pmax: int = 8, rmax: int = 12,
                target: int | None = None) -> FlowInstance:
    procs = [int(v) for v in rng.integers(1, pmax + 1, n)]
    rels = [int(v) for v in rng.integers(0, rmax + 1, n)]
    if target is None:
        target = int(rng.integers(1, n + 1))
    return FlowInstance.from_lists(procs, rels, target)
