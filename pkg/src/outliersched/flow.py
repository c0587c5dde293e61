"""Single-machine total flow time with unit profits (schedule at least Pi jobs).

Pipeline per guess k* of the largest size class used:

1. slot LP over jobs with p_j <= 2^k*, cost measured with the class-rounded
   size 2^k, snapped to the tick grid;
2. normalization (non-alternating within each class, packed);
3. Stage I per class: swapping until floor(sum y) - 1 jobs of the class are
   complete, with every charged interval recorded, then a right shift by
   2 * 2^k inside the class's space to undo release-date violations;
4. Stage II: per class, add the cheapest unfinished jobs up to ceil(sum y)
   and schedule them preemptively as early as possible.

Each run carries a certificate re-checking the cost inequalities of the
analysis with the number of size classes (k* + 1, classes start at 0) in the
role of the class count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import TICKS_PER_UNIT, FlowInstance, FlowJob, SegmentSchedule, SizeError
from .lp import EQ, GE, LE, LpBuilder, LpModel, solve
from .oracles import srpt
from .timeline import (INF, FractionalTimeline, from_slots, gaps, lay, merge, normalize,
                       overlap, take_back, take_front)
from .wct import snap_machine

F = Fraction
MAX_LP_CELLS = 400_000
MAX_SWAP_OPS = 20_000


class FlowInfeasible(RuntimeError):
    """No guess of the largest class produced a schedule."""


class FlowInvariantError(RuntimeError):
    """An internal guarantee of the rounding failed (signals a bug)."""


# ---------------------------------------------------------------------------
# LP


def work_conserving_makespan(jobs) -> int:
    t = 0
    for job in sorted(jobs, key=lambda q: q.release):
        t = max(t, job.release) + job.proc
    return t


@dataclass(frozen=True)
class FlowLp:
    model: LpModel
    horizon: int
    jobs: tuple  # original ids of the jobs in the LP
    x_index: dict  # (local job, t) -> var
    y_index: tuple
    f_index: tuple


def build_flow_lp(inst: FlowInstance, kstar: int | None = None, T: int | None = None) -> FlowLp:
    """Slot LP over jobs with p_j <= 2^kstar (all jobs when ``kstar`` is None)."""
    jobs = tuple(j for j, job in enumerate(inst.jobs) if kstar is None or job.klass <= kstar)
    T = work_conserving_makespan([inst.jobs[j] for j in jobs]) if T is None else T
    cells = sum(max(0, T - inst.jobs[j].release) for j in jobs)
    if cells > MAX_LP_CELLS:
        raise SizeError(f"flow LP would have {cells} slot variables")
    b = LpBuilder()
    x_index = {}
    for a, j in enumerate(jobs):
        for t in range(inst.jobs[j].release, T):
            x_index[a, t] = b.var(("x", j, t))
    y_index = tuple(b.var(("y", j), 0.0, 1.0) for j in jobs)
    f_index = tuple(b.var(("f", j), 0.0, np.inf, cost=1.0) for j in jobs)
    for a, j in enumerate(jobs):
        job = inst.jobs[j]
        cost = {f_index[a]: 1.0}
        ext = {y_index[a]: -float(job.proc)}
        for t in range(job.release, T):
            v = x_index[a, t]
            cost[v] = -((t + 0.5 - job.release) / job.rounded_proc + 0.5)
            ext[v] = 1.0
        b.row(cost, EQ, 0.0)
        b.row(ext, EQ, 0.0)
    for t in range(T):
        row = {x_index[a, t]: 1.0 for a in range(len(jobs)) if (a, t) in x_index}
        if row:
            b.row(row, LE, 1.0)
    b.row({v: 1.0 for v in y_index}, GE, float(inst.profit_target))
    return FlowLp(b.build(), T, jobs, x_index, y_index, f_index)


@dataclass(frozen=True)
class FlowLpSolution:
    timeline: FractionalTimeline
    lp_value: float  # solver objective
    flow: Fraction  # exact LP cost of the snapped point
    processed: Fraction
    horizon: int
    kstar: int | None


def solve_flow_lp(inst: FlowInstance, kstar: int | None = None, T: int | None = None,
                  method: str = "auto") -> FlowLpSolution | None:
    """Solve and snap; returns None when infeasible (fewer than Pi jobs fit)."""
    lp = build_flow_lp(inst, kstar, T)
    if len(lp.jobs) < inst.profit_target:
        return None
    sol = solve(lp.model, method=method)
    if not sol.optimal:
        return None
    n_loc = len(lp.jobs)
    X = np.zeros((n_loc, lp.horizon))
    for (a, t), v in lp.x_index.items():
        X[a, t] = sol.x[v]
    ticks = snap_flow(inst, lp.jobs, X)
    full = np.zeros((inst.n, lp.horizon), dtype=np.int64)
    for a, j in enumerate(lp.jobs):
        full[j] = ticks[a]
    tl = from_slots(inst, full, TICKS_PER_UNIT)
    return FlowLpSolution(tl, sol.objective, tl.flow(), tl.processed(), lp.horizon, kstar)


def snap_flow(inst: FlowInstance, jobs, X: np.ndarray) -> np.ndarray:
    """Grid snap keeping whole jobs whole: y within 1e-6 of 0 or 1 is made exact."""
    p = np.array([inst.jobs[j].proc for j in jobs], dtype=np.int64)
    y = X.sum(axis=1) / p if len(p) else np.zeros(0)
    totals = np.rint(X.sum(axis=1) * TICKS_PER_UNIT).astype(np.int64)
    totals[y > 1 - 1e-6] = p[y > 1 - 1e-6] * TICKS_PER_UNIT
    totals[y < 1e-6] = 0
    ticks = snap_machine(X, totals)
    cap = TICKS_PER_UNIT - ticks.sum(axis=0)
    for a, j in enumerate(jobs):
        short = int(totals[a] - ticks[a].sum())
        if short <= 0:
            continue
        # top up: slots already used by the job first, then the earliest with room
        used = [t for t in np.nonzero(ticks[a])[0]]
        rest = [t for t in range(inst.jobs[j].release, X.shape[1]) if t not in set(used)]
        for t in used + rest:
            add = min(short, int(cap[t]))
            ticks[a, t] += add
            cap[t] -= add
            short -= add
            if short == 0:
                break
    return ticks


# ---------------------------------------------------------------------------
# charging ledger


@dataclass(frozen=True)
class Charge:
    klass: int
    job: int
    lo: Fraction
    hi: Fraction
    amount: Fraction  # paid by every point of (lo, hi)

    @property
    def total(self) -> Fraction:
        return self.amount * (self.hi - self.lo)


@dataclass
class ChargeLedger:
    charges: list = field(default_factory=list)
    free_after_swap: dict = field(default_factory=dict)  # class -> free intervals before shifting

    def add(self, klass: int, job: int, lo, hi, amount):
        if hi > lo and amount > 0:
            self.charges.append(Charge(klass, job, F(lo), F(hi), F(amount)))

    def class_total(self, k: int) -> Fraction:
        return sum((c.total for c in self.charges if c.klass == k), F(0))

    def classes(self) -> list[int]:
        return sorted({c.klass for c in self.charges} | set(self.free_after_swap))


@dataclass
class AuditReport:
    free_time_never_pays: bool
    single_payer: bool
    total_bounded: bool
    class_totals: dict
    bound: Fraction
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.free_time_never_pays and self.single_payer and self.total_bounded


def audit_charges(ledger: ChargeLedger, P_star) -> AuditReport:
    """Re-check the ledger: charged points are busy at the end of swapping,
    no point pays for two jobs of one class, each class pays at most 2 P*."""
    details = []
    a2 = True
    for c in ledger.charges:
        free = ledger.free_after_swap.get(c.klass, [])
        if overlap(free, c.lo, c.hi) > 0:
            a2 = False
            details.append(f"class {c.klass}: free time inside charge ({c.lo}, {c.hi}) of job {c.job}")
    a3 = True
    by_class: dict[int, list[Charge]] = {}
    for c in ledger.charges:
        by_class.setdefault(c.klass, []).append(c)
    for k, cs in by_class.items():
        per_job: dict[int, list] = {}
        for c in cs:
            per_job.setdefault(c.job, []).append((c.lo, c.hi))
        merged = {j: merge(v) for j, v in per_job.items()}
        jobs = sorted(merged)
        for x in range(len(jobs)):
            for y in range(x + 1, len(jobs)):
                common = sum((overlap(merged[jobs[y]], a, b) for a, b in merged[jobs[x]]), F(0))
                if common > 0:
                    a3 = False
                    details.append(f"class {k}: jobs {jobs[x]} and {jobs[y]} both charged on {common} time")
    totals = {k: ledger.class_total(k) for k in ledger.classes()}
    bound = 2 * F(P_star)
    a4 = all(v <= bound for v in totals.values())
    if not a4:
        details.append(f"class totals {totals} exceed {bound}")
    return AuditReport(a2, a3, a4, totals, bound, details)


# ---------------------------------------------------------------------------
# Stage I


class _ClassState:
    """Mutable working copy of the timeline while one class is processed."""

    def __init__(self, tl: FractionalTimeline, k: int):
        self.inst = tl.inst
        self.k = k
        self.pcs = {j: list(ps) for j, ps in enumerate(tl.pieces)}
        self.members = [j for j in range(self.inst.n) if self.inst.jobs[j].klass == k]
        self.other = merge(p for j, ps in self.pcs.items() if self.inst.jobs[j].klass != k for p in ps)
        self.ptilde = 1 << k

    def p(self, j):
        return self.inst.jobs[j].proc

    def r(self, j):
        return self.inst.jobs[j].release

    def mass(self, j):
        return sum((b - a for a, b in self.pcs[j]), F(0))

    def y(self, j) -> Fraction:
        return self.mass(j) / self.p(j)

    def first(self, j):
        return self.pcs[j][0][0]

    def last(self, j):
        return self.pcs[j][-1][1]

    def order(self) -> list[int]:
        return sorted((j for j in self.members if self.pcs[j]), key=lambda j: (self.first(j), j))

    def full_count(self) -> int:
        return sum(1 for j in self.members if self.y(j) == 1)

    def occupied(self):
        return merge(p for ps in self.pcs.values() for p in ps)

    def free_between(self, lo, hi):
        if hi == INF:
            return INF
        return sum((b - a for a, b in gaps(self.occupied(), lo, hi)), F(0))

    def slot_mass(self, j, t):
        return overlap(self.pcs[j], t, t + 1)

    def earliest(self, j):
        """Lower bound for moving j left: its release, or its current start if already earlier."""
        return min(F(self.r(j)), self.first(j))

    def advance(self, seq: list[int]):
        """Left-compact ``seq`` (in order) inside the class's space, around the
        remaining class jobs, keeping each job's mass."""
        if not seq:
            return
        moving = set(seq)
        fixed = [p for j in self.members if j not in moving for p in self.pcs[j]]
        obstacles = merge(self.other + fixed)
        before = [self.last(j) for j in self.members if j not in moving and self.pcs[j]
                  and self.first(j) < self.first(seq[0])]
        cursor = max(before, default=F(0))
        for j in seq:
            m, lo = self.mass(j), self.earliest(j)
            laid = lay(obstacles, max(cursor, lo), m)
            self.pcs[j] = laid
            cursor = laid[-1][1]

    def to_timeline(self) -> FractionalTimeline:
        return FractionalTimeline.from_dict(self.inst, self.pcs)


@dataclass
class StageOneStats:
    klass: int
    mass: Fraction  # sum of y over the class
    target: int
    full: int
    operations: int = 0
    case_one: int = 0
    case_two: int = 0
    stalls: int = 0
    max_violation_space: Fraction = F(0)


def _space_coord(obstacles, t):
    """Measure of [0, t) outside ``obstacles``."""
    return t - overlap(obstacles, F(0), t)


def _from_space(obstacles, s):
    """Smallest time whose space coordinate is s."""
    t = F(0)
    left = s
    for a, b in obstacles:
        if a - t >= left:
            return t + left
        left -= max(F(0), a - t)
        t = max(t, b)
    return t + left


def stage1_swap(tl: FractionalTimeline, k: int, ledger: ChargeLedger | None = None,
                max_ops: int = MAX_SWAP_OPS) -> tuple[FractionalTimeline, ChargeLedger, StageOneStats]:
    """Swapping phase for class k: complete floor(sum y) - 1 class jobs.

    Sum of y over the class is invariant.  Charges are recorded in ``ledger``.
    """
    ledger = ChargeLedger() if ledger is None else ledger
    st = _ClassState(tl, k)
    S = sum((st.y(j) for j in st.members), F(0))
    target = math.floor(S) - 1
    stats = StageOneStats(k, S, target, st.full_count())

    def op():
        stats.operations += 1
        if stats.operations > max_ops:
            raise FlowInvariantError(f"class {k}: swapping exceeded {max_ops} operations")

    while st.full_count() < target:
        snapshot = {j: tuple(ps) for j, ps in st.pcs.items()}
        st.advance(st.order())
        seq = st.order()
        frac = [j for j in seq if 0 < st.y(j) < 1]
        j1 = frac[0]
        pos = seq.index(j1)
        window, jq1 = [], None
        for j in seq[pos + 1:]:
            if st.p(j) < st.p(j1):
                jq1 = j
                break
            window.append(j)
        chain = [j1] + window
        free = sum((st.free_between(st.last(a), st.first(b)) for a, b in zip(chain, chain[1:])), F(0))
        free = free + (st.free_between(st.last(chain[-1]), st.first(jq1)) if jq1 is not None else INF)
        lhs = sum((st.y(j) for j in window), F(0)) + free / st.p(j1)
        if lhs >= 1 - st.y(j1):
            stats.case_one += 1
            _case_one(st, j1, window, jq1, ledger, op)
        else:
            stats.case_two += 1
            _case_two(st, j1, window, jq1, op)
        if {j: tuple(ps) for j, ps in st.pcs.items()} == snapshot:
            stats.stalls += 1
            break
    st.advance([])  # no-op, keeps the call sites symmetric
    out = st.to_timeline()
    ledger.free_after_swap[k] = out.free()
    stats.full = st.full_count()
    space = st.other
    viol = [_space_coord(space, F(st.r(j))) - _space_coord(space, st.first(j))
            for j in st.members if st.pcs[j] and st.first(j) < st.r(j)]
    stats.max_violation_space = max(viol, default=F(0))
    return out, ledger, stats


def _case_one(st: _ClassState, j1, window, jq1, ledger, op):
    p1 = st.p(j1)
    while st.y(j1) < 1:
        op()
        js = next((j for j in window if st.pcs[j]), jq1)
        hi = st.first(js) if js is not None else INF
        free = st.free_between(st.last(j1), hi)
        if js is not None and free == 0:
            if js == jq1:
                return  # nothing left in the window; the outer loop re-plans
            # one swap covers all of js's slots at once; re-advancing between
            # single-slot swaps would shrink the step geometrically
            delta = min(1 - st.y(j1), st.y(js))
            before = st.order()
            after = [j for j in before[before.index(js):] if j != j1]
            region, st.pcs[js] = take_front(st.pcs[js], delta * st.p(js))
            st.pcs[j1] = merge(st.pcs[j1] + lay(_complement(region), region[0][0], delta * p1))
            if st.r(js) > st.r(j1):
                ledger.add(st.k, j1, st.r(j1), st.r(js), delta * p1 / st.ptilde)
            st.advance([j for j in after if st.pcs[j]])
        else:
            I = gaps(st.occupied(), st.last(j1), hi)[0]
            t = math.floor(I[0])
            room = I[1] - I[0]
            fracs = [j for j in st.members if st.pcs[j] and 0 < st.y(j) < 1 and j != j1]
            if not fracs:
                return
            jl = max(fracs, key=lambda j: (st.last(j), j))
            delta = min(1 - st.y(j1), st.y(jl), room / p1)
            st.pcs[j1] = merge(st.pcs[j1] + [(I[0], I[0] + delta * p1)])
            _, st.pcs[jl] = take_back(st.pcs[jl], delta * st.p(jl))
            if st.r(j1) <= t:
                ledger.add(st.k, j1, st.r(j1), t, delta * p1 / st.ptilde)


def _complement(region):
    """Obstacles that leave exactly ``region`` open (from its first point on)."""
    out = []
    for (a, b), (c, d) in zip(region, region[1:]):
        out.append((b, c))
    out.append((region[-1][1], INF))
    return out


def _case_two(st: _ClassState, j1, window, jq1, op):
    chain = [j1] + window
    start = min(st.first(j) for j in chain + [jq1] if st.pcs[j])
    pq = st.p(jq1)
    while st.y(jq1) < 1 and any(st.pcs[j] for j in chain):
        op()
        js = next(j for j in chain if st.pcs[j])
        delta = min(1 - st.y(jq1), st.y(js))
        region, st.pcs[js] = take_front(st.pcs[js], delta * st.p(js))
        st.pcs[jq1] = merge(st.pcs[jq1] + lay(_complement(region), region[0][0], delta * pq))
    # rearrange: j_{q+1} contiguous from the start of the block, then the chain
    moving = [jq1] + chain
    masses = {j: st.mass(j) for j in moving}
    early = {j: st.earliest(j) for j in moving if st.pcs[j]}
    fixed = [p for j in st.members if j not in set(moving) for p in st.pcs[j]]
    obstacles = merge(st.other + fixed)
    laid = lay(obstacles, start, masses[jq1])
    st.pcs[jq1] = laid
    cursor = laid[-1][1]
    for j in chain:
        if masses[j] > 0:
            laid = lay(obstacles, max(cursor, early[j]), masses[j])
            st.pcs[j] = laid
            cursor = laid[-1][1]
        else:
            st.pcs[j] = []


def stage1_shift(tl: FractionalTimeline, k: int) -> FractionalTimeline:
    """Move every class-k piece right by 2 * 2^k measured inside the time not
    used by other classes; raises if a release date is still violated."""
    inst = tl.inst
    members = [j for j in range(inst.n) if inst.jobs[j].klass == k]
    other = merge(p for j, ps in enumerate(tl.pieces) if inst.jobs[j].klass != k for p in ps)
    shift = F(2 << k)
    pcs = tl.to_dict()
    for j in members:
        new = []
        for a, b in tl.pieces[j]:
            s = _space_coord(other, a) + shift
            new.extend(lay(other, _from_space(other, s), b - a))
        if new:
            pcs[j] = merge(new)
    out = FractionalTimeline.from_dict(inst, pcs)
    bad = {j: v for j, v in out.release_violations().items() if inst.jobs[j].klass == k}
    if bad:
        raise FlowInvariantError(f"class {k}: release dates still violated after shifting: {bad}")
    problems = out.check()
    if problems:
        raise FlowInvariantError(f"class {k}: shifting broke the timeline: {problems[:3]}")
    return out


# ---------------------------------------------------------------------------
# Stage II and the driver


@dataclass
class StageTwoResult:
    full: frozenset  # completed in Stage I
    added: tuple  # (job, ...) in scheduling order
    pieces: dict  # job -> pieces of the integral preemptive schedule
    full_flow: Fraction
    added_flow: Fraction


def stage2_augment(tl: FractionalTimeline, class_mass: dict, candidates=None) -> StageTwoResult:
    """Drop fractional remnants, then per class (ascending) add the unfinished
    jobs with the smallest (p, id) until the class has ceil(mass) complete jobs;
    added jobs run preemptively as early as possible in the remaining free time."""
    inst = tl.inst
    full = tl.full()
    pcs = {j: list(tl.pieces[j]) for j in full}
    added = []
    pool = set(range(inst.n)) if candidates is None else set(candidates)
    for k in sorted(class_mass):
        have = sum(1 for j in full if inst.jobs[j].klass == k)
        need = math.ceil(class_mass[k]) - have
        if need <= 0:
            continue
        cands = sorted((j for j in pool if inst.jobs[j].klass == k and j not in full),
                       key=lambda j: (inst.jobs[j].proc, j))
        if len(cands) < need:
            raise FlowInfeasible(f"class {k}: {need} jobs needed, {len(cands)} available")
        for j in cands[:need]:
            occ = merge(p for ps in pcs.values() for p in ps)
            pcs[j] = lay(occ, F(inst.jobs[j].release), F(inst.jobs[j].proc))
            added.append(j)
    def flow_of(js):
        return sum((pcs[j][-1][1] - inst.jobs[j].release for j in js), F(0))
    return StageTwoResult(full, tuple(added), pcs, flow_of(full), flow_of(added))


@dataclass
class Certificate:
    kstar: int
    classes: int  # k* + 1
    flow_star: Fraction
    P_star: Fraction
    flow_prime: Fraction
    P_prime: Fraction
    full_flow: Fraction
    added_flow: Fraction
    total_flow: Fraction  # integral schedule built by Stage II
    srpt_flow: Fraction  # SRPT on the same job set (the returned schedule)
    lp_value: float
    stage_one: list
    audit: AuditReport
    selected: int
    target: int
    normalize_ok: bool

    @property
    def checks(self) -> dict:
        kc = self.classes
        P, Fs = self.P_star, self.flow_star
        counts = all(s.full >= s.target for s in self.stage_one)
        return {
            "normalize": self.normalize_ok,
            "stage1_counts": counts,
            "i_processing": self.P_prime <= 2 * P,
            "ii_fractional_flow": self.flow_prime <= 4 * Fs + 6 * kc * P,
            "iii_full_jobs": self.full_flow <= 2 * self.flow_prime + kc * self.P_prime,
            "iv_added_jobs": self.added_flow <= kc * (self.P_prime + (1 << (self.kstar + 2))),
            "v_end_to_end": self.total_flow <= 8 * Fs + 16 * kc * P + kc * (1 << (self.kstar + 2)),
            "charges": self.audit.passed,
            "profit": self.selected >= self.target,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        from .core import fraction_str
        return {"kstar": self.kstar, "flow_star": fraction_str(self.flow_star),
                "P_star": fraction_str(self.P_star), "flow_prime": fraction_str(self.flow_prime),
                "P_prime": fraction_str(self.P_prime), "full_flow": fraction_str(self.full_flow),
                "added_flow": fraction_str(self.added_flow), "total_flow": fraction_str(self.total_flow),
                "srpt_flow": fraction_str(self.srpt_flow), "lp_value": self.lp_value,
                "charge_totals": {str(k): fraction_str(v) for k, v in self.audit.class_totals.items()},
                "per_lemma_pass": self.checks, "passed": self.passed}


@dataclass
class FlowRun:
    schedule: SegmentSchedule  # SRPT on the selected set
    selected: frozenset
    certificate: Certificate
    lp: FlowLpSolution
    normalized: FractionalTimeline
    stage_one: FractionalTimeline
    stage_two: StageTwoResult
    ledger: ChargeLedger


def run_guess(inst: FlowInstance, kstar: int, method: str = "auto") -> FlowRun | None:
    """The whole pipeline for one guess; None when the LP has no solution."""
    lp = solve_flow_lp(inst, kstar, method=method)
    if lp is None:
        return None
    star = lp.timeline
    hat = normalize(star)
    norm_ok = (hat.ys() == star.ys() and hat.flow() <= star.flow()
               and all(hat.is_non_alternating(k) for k in hat.classes()) and hat.is_packed())
    class_mass: dict[int, Fraction] = {}
    for j in range(inst.n):
        if inst.jobs[j].klass <= kstar:
            class_mass[inst.jobs[j].klass] = class_mass.get(inst.jobs[j].klass, F(0)) + hat.y(j)
    ledger = ChargeLedger()
    cur = hat
    stats = []
    for k in sorted(class_mass):
        cur, ledger, s = stage1_swap(cur, k, ledger)
        stats.append(s)
        cur = stage1_shift(cur, k)
    problems = cur.check()
    if problems:
        raise FlowInvariantError(f"stage I produced an invalid timeline: {problems[:3]}")
    two = stage2_augment(cur, class_mass, [j for j in range(inst.n) if inst.jobs[j].klass <= kstar])
    selected = frozenset(two.full) | frozenset(two.added)
    res = srpt(inst, selected)
    cert = Certificate(kstar, kstar + 1, lp.flow, lp.processed, cur.flow(), cur.processed(),
                       two.full_flow, two.added_flow, two.full_flow + two.added_flow,
                       res.objective, lp.lp_value, stats, audit_charges(ledger, lp.processed),
                       len(selected), inst.profit_target, norm_ok)
    return FlowRun(res.schedule, selected, cert, lp, hat, cur, two, ledger)


@dataclass
class FlowResult:
    best: FlowRun
    runs: dict  # kstar -> FlowRun or None

    @property
    def schedule(self) -> SegmentSchedule:
        return self.best.schedule

    @property
    def certificate(self) -> Certificate:
        return self.best.certificate


def solve_flow_outliers(inst: FlowInstance, method: str = "auto") -> FlowResult:
    """Try every class present as k* (ascending) and keep the certified run with
    the smallest flow; uncertified runs are kept only if nothing certifies."""
    if inst.profit_target == 0:
        empty = FlowInstance(inst.jobs, 0)
        sched = SegmentSchedule((), ())
        cert = Certificate(0, 1, F(0), F(0), F(0), F(0), F(0), F(0), F(0), F(0), 0.0, [],
                           audit_charges(ChargeLedger(), 0), 0, 0, True)
        run = FlowRun(sched, frozenset(), cert, None, None, None, None, ChargeLedger())
        del empty
        return FlowResult(run, {})
    runs = {}
    for k in sorted({job.klass for job in inst.jobs}):
        try:
            runs[k] = run_guess(inst, k, method)
        except FlowInfeasible:
            runs[k] = None
    ok = [r for r in runs.values() if r is not None]
    if not ok:
        raise FlowInfeasible("no guess of the largest class admits a schedule")
    good = [r for r in ok if r.certificate.passed] or ok
    best = min(good, key=lambda r: (r.certificate.srpt_flow, r.certificate.kstar))
    return FlowResult(best, runs)


# ---------------------------------------------------------------------------
# integrality-gap family


@dataclass(frozen=True)
class GapConstruction:
    k: int
    M: int
    instance: FlowInstance
    blocks: tuple  # (name, start, length)
    small_jobs: tuple
    large_jobs: tuple


def gen_gap_instance(k: int) -> GapConstruction:
    """Large jobs 1..k (p = 2^(j+1)) arrive at white blocks laid out k, k-1, ..., 1
    (block j has length 2^j); a grey block of M = 2^(k+1) unit jobs, one per time
    unit; then white block k+1 where job k+1 (p = 2^(k+1)) arrives.
    The target is M + k/2 + 1.  Job ids: large job j is j - 1, small jobs follow."""
    if k < 2 or k % 2:
        raise ValueError("k must be even and at least 2")
    M = 1 << (k + 1)
    blocks = []
    t = 0
    starts = {}
    for j in range(k, 0, -1):
        starts[j] = t
        blocks.append((f"white {j}", t, 1 << j))
        t += 1 << j
    grey = t
    blocks.append(("grey", grey, M))
    t += M
    starts[k + 1] = t
    blocks.append((f"white {k + 1}", t, 1 << (k + 1)))
    jobs = [FlowJob(1 << (j + 1), starts[j]) for j in range(1, k + 1)]
    jobs.append(FlowJob(1 << (k + 1), starts[k + 1]))
    jobs += [FlowJob(1, grey + i) for i in range(M)]
    inst = FlowInstance(tuple(jobs), M + k // 2 + 1)
    return GapConstruction(k, M, inst, tuple(blocks), tuple(range(k + 1, k + 1 + M)),
                           tuple(range(k + 1)))
