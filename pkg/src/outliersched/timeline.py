"""Exact fractional single-machine timelines for the flow-time rounding.

A timeline maps each job to a sorted tuple of disjoint pieces ``(start, end)``
with :class:`~fractions.Fraction` endpoints.  The scheduled fraction of job j is
its total piece length over p_j.  Everything not covered by a piece is free.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import FlowInstance

F = Fraction
INF = math.inf
Interval = tuple  # (start, end)


# ---------------------------------------------------------------------------
# interval helpers


def merge(intervals: Iterable[Interval]) -> list[Interval]:
    out: list[list] = []
    for a, b in sorted(intervals):
        if b <= a:
            continue
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def lay(obstacles: Sequence[Interval], start, amount) -> list[Interval]:
    """Fill ``amount`` units of time from ``start`` on, skipping ``obstacles``
    (merged, sorted).  Returns the pieces used."""
    pieces = []
    if amount <= 0:
        return pieces
    ends = [b for _, b in obstacles]
    i = bisect.bisect_right(ends, start)
    t = start
    while amount > 0:
        if i < len(obstacles) and obstacles[i][0] <= t:
            t = max(t, obstacles[i][1])
            i += 1
            continue
        nxt = obstacles[i][0] if i < len(obstacles) else INF
        take = min(amount, nxt - t)
        if pieces and pieces[-1][1] == t:
            pieces[-1] = (pieces[-1][0], t + take)
        else:
            pieces.append((t, t + take))
        t += take
        amount -= take
    return pieces


def gaps(occupied: Sequence[Interval], lo=F(0), hi=INF) -> list[Interval]:
    """Uncovered sub-intervals of [lo, hi) given merged ``occupied``."""
    out = []
    t = lo
    for a, b in occupied:
        if b <= t:
            continue
        if a >= hi:
            break
        if a > t:
            out.append((t, min(a, hi)))
        t = max(t, b)
        if t >= hi:
            break
    if t < hi:
        out.append((t, hi))
    return out


def overlap(pieces: Iterable[Interval], lo, hi):
    """Total length of ``pieces`` inside [lo, hi)."""
    tot = F(0)
    for a, b in pieces:
        s, e = max(a, lo), min(b, hi)
        if e > s:
            tot += e - s
    return tot


def take_front(pieces: list[Interval], amount) -> tuple[list[Interval], list[Interval]]:
    """Split off the first ``amount`` units: (removed, remaining)."""
    removed, rest = [], []
    for a, b in pieces:
        if amount <= 0:
            rest.append((a, b))
        elif b - a <= amount:
            removed.append((a, b))
            amount -= b - a
        else:
            removed.append((a, a + amount))
            rest.append((a + amount, b))
            amount = 0
    return removed, rest


def take_back(pieces: list[Interval], amount) -> tuple[list[Interval], list[Interval]]:
    """Split off the last ``amount`` units: (removed, remaining)."""
    removed, rest = [], []
    for a, b in reversed(pieces):
        if amount <= 0:
            rest.append((a, b))
        elif b - a <= amount:
            removed.append((a, b))
            amount -= b - a
        else:
            removed.append((b - amount, b))
            rest.append((a, b - amount))
            amount = 0
    return removed[::-1], rest[::-1]


def piece_cost(a, b, ptilde: int, release: int):
    """LP cost contribution of processing in [a, b): per unit slot t the mass m
    costs m (t + 1/2 - r) / ptilde + m / 2."""
    cost = F(0)
    t = math.floor(a)
    while t < b:
        m = min(b, t + 1) - max(a, t)
        if m > 0:
            cost += m * (F(2 * t + 1, 2) - release) / ptilde + m / 2
        t += 1
    return cost


# ---------------------------------------------------------------------------
# timeline snapshot


@dataclass(frozen=True)
class FractionalTimeline:
    inst: FlowInstance
    pieces: tuple  # per job: tuple of (start, end)

    @classmethod
    def from_dict(cls, inst: FlowInstance, pcs: dict) -> "FractionalTimeline":
        return cls(inst, tuple(tuple(merge(pcs.get(j, ()))) for j in range(inst.n)))

    def to_dict(self) -> dict:
        return {j: list(p) for j, p in enumerate(self.pieces) if p}

    def mass(self, j: int):
        return sum((b - a for a, b in self.pieces[j]), F(0))

    def y(self, j: int) -> Fraction:
        return self.mass(j) / self.inst.jobs[j].proc

    def ys(self) -> tuple:
        return tuple(self.y(j) for j in range(self.inst.n))

    def full(self) -> frozenset:
        return frozenset(j for j in range(self.inst.n) if self.y(j) == 1)

    def first_start(self, j: int):
        return self.pieces[j][0][0]

    def last_end(self, j: int):
        return self.pieces[j][-1][1]

    def occupied(self) -> list[Interval]:
        return merge(p for ps in self.pieces for p in ps)

    def free(self, lo=F(0), hi=INF) -> list[Interval]:
        return gaps(self.occupied(), lo, hi)

    def processed(self) -> Fraction:
        """Total processed length (the fractional makespan mass)."""
        return sum((self.mass(j) for j in range(self.inst.n)), F(0))

    def job_cost(self, j: int) -> Fraction:
        job = self.inst.jobs[j]
        return sum((piece_cost(a, b, job.rounded_proc, job.release) for a, b in self.pieces[j]), F(0))

    def flow(self) -> Fraction:
        """LP cost sum_j f_j of this fractional schedule."""
        return sum((self.job_cost(j) for j in range(self.inst.n)), F(0))

    def class_flow(self, k: int) -> Fraction:
        return sum((self.job_cost(j) for j in range(self.inst.n) if self.inst.jobs[j].klass == k), F(0))

    def classes(self) -> list[int]:
        return sorted({job.klass for job in self.inst.jobs})

    def suffix_volume(self, k: int, t) -> Fraction:
        """Class-k processing at or after time t."""
        return sum((overlap(self.pieces[j], t, INF) for j in range(self.inst.n)
                    if self.inst.jobs[j].klass == k), F(0))

    def horizon(self):
        return max((ps[-1][1] for ps in self.pieces if ps), default=F(0))

    def release_violations(self) -> dict:
        """job -> how far its first piece starts before the release date."""
        out = {}
        for j, ps in enumerate(self.pieces):
            if ps and ps[0][0] < self.inst.jobs[j].release:
                out[j] = self.inst.jobs[j].release - ps[0][0]
        return out

    def check(self) -> list[str]:
        """Structural problems: overlaps, empty or reversed pieces, y > 1."""
        bad = []
        allp = sorted((a, b, j) for j, ps in enumerate(self.pieces) for a, b in ps)
        for (a, b, j), (c, d, k) in zip(allp, allp[1:]):
            if c < b:
                bad.append(f"overlap: jobs {j} and {k} at {c}")
        for j, ps in enumerate(self.pieces):
            if any(b <= a for a, b in ps):
                bad.append(f"job {j}: empty piece")
            if self.y(j) > 1:
                bad.append(f"job {j}: scheduled fraction above one")
        return bad

    def is_non_alternating(self, k: int) -> bool:
        jobs = sorted((j for j in range(self.inst.n) if self.inst.jobs[j].klass == k and self.pieces[j]),
                      key=lambda j: (self.inst.jobs[j].release, j))
        return all(self.last_end(a) <= self.first_start(b) for a, b in zip(jobs, jobs[1:]))

    def is_packed(self) -> bool:
        occ = self.occupied()
        for j, ps in enumerate(self.pieces):
            if ps and gaps(occ, F(self.inst.jobs[j].release), ps[-1][1]):
                return False
        return True


def from_slots(inst: FlowInstance, ticks, ticks_per_unit: int) -> FractionalTimeline:
    """Build a timeline from per-slot integer masses ``ticks[j][t]``; inside a
    slot jobs are packed from the slot start in id order."""
    pcs: dict[int, list] = {}
    T = max((len(r) for r in ticks), default=0)
    for t in range(T):
        clock = F(t)
        for j in range(inst.n):
            v = int(ticks[j][t]) if t < len(ticks[j]) else 0
            if v:
                d = F(v, ticks_per_unit)
                pcs.setdefault(j, []).append((clock, clock + d))
                clock += d
    return FractionalTimeline.from_dict(inst, pcs)


def normalize(tl: FractionalTimeline, max_passes: int = 100) -> FractionalTimeline:
    """Make every class non-alternating and the timeline packed.

    For each class in ascending order, its jobs are re-laid in (release, id)
    order as early as possible inside the time not used by other classes, each
    job as one contiguous run of its current mass.  Passes repeat until nothing
    moves, since later classes can open free time in front of earlier ones.
    """
    inst = tl.inst
    pcs = tl.to_dict()
    mass = {j: tl.mass(j) for j in range(inst.n)}
    by_class: dict[int, list[int]] = {}
    for j in range(inst.n):
        if mass[j] > 0:
            by_class.setdefault(inst.jobs[j].klass, []).append(j)
    for _ in range(max_passes):
        moved = False
        for k in sorted(by_class):
            jobs = sorted(by_class[k], key=lambda j: (inst.jobs[j].release, j))
            other = merge(p for j, ps in pcs.items() if inst.jobs[j].klass != k for p in ps)
            cursor = F(0)
            for j in jobs:
                laid = lay(other, max(cursor, F(inst.jobs[j].release)), mass[j])
                cursor = laid[-1][1]
                if laid != pcs[j]:
                    moved = True
                    pcs[j] = laid
        if not moved:
            break
    else:
        raise RuntimeError("normalization did not reach a fixpoint")
    return FractionalTimeline.from_dict(inst, pcs)
