"""Weighted completion time with outliers on unrelated machines.

Pipeline: time-indexed LP strengthened with knapsack-cover (KC) rows, solved
by a cutting-plane loop under a doubling guess of the optimum, snapped onto the
tick grid, then rounded by random slot marking (one uniform draw per job).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import (TICKS_PER_UNIT, SegmentSchedule, SizeError, WctInstance,
                   validate_schedule)
from .lp import EQ, GE, LE, LpBuilder, LpModel, Status, cut_loop

MAX_LP_CELLS = 400_000  # m * n * horizon


class RelaxationInfeasible(RuntimeError):
    """No Opt guess up to the trivial upper bound produced an acceptable LP solution."""


class RoundingFailure(RuntimeError):
    """Every rounding trial missed a profit target."""

    def __init__(self, trials: int, stats: list[dict]):
        super().__init__(f"no profit-feasible rounding in {trials} trials")
        self.trials = trials
        self.stats = stats


def horizon(inst: WctInstance) -> int:
    """max release plus the sum of per-job fastest processing times."""
    if not inst.jobs:
        return 0
    return max(j.release for j in inst.jobs) + sum(min(j.proc) for j in inst.jobs)


def beta_for(K: int) -> float:
    """Scaling factor with exp(-(b-1)^2 / 2b) = 1/(10K), taking the root b > 1.

    (b-1)^2 = 2 b ln(10K) is a quadratic in b, so the root is closed-form.
    """
    L = math.log(10 * K)
    return 1 + L + math.sqrt((1 + L) ** 2 - 1)


# ---------------------------------------------------------------------------
# LP


@dataclass(frozen=True)
class WctLp:
    model: LpModel
    horizon: int
    x_index: dict  # (i, j, t) -> variable
    y_index: tuple
    c_index: tuple


def build_wct_lp(inst: WctInstance, opt_guess: float | None = None, kc: bool = True,
                 cuts: Sequence = ()) -> WctLp:
    """Time-indexed relaxation over unit slots [t, t+1), t < horizon.

    Rows: completion definition, scheduled fraction, slot capacity, the budget
    sum w_j C_j <= opt_guess (when given) and, per profit target, the KC row for
    the empty set (``kc=True``) or the plain profit row ``sum pi_j y_j >= Pi``.
    ``cuts`` are extra (coeffs-over-y, sense, rhs) rows keyed by job index.
    """
    m, n = inst.machines, inst.n
    T = horizon(inst)
    if m * n * T > MAX_LP_CELLS:
        raise SizeError(f"time-indexed LP would have {m * n * T} slot variables")
    b = LpBuilder()
    x_index = {}
    for i in range(m):
        for j, job in enumerate(inst.jobs):
            for t in range(job.release, T):
                x_index[i, j, t] = b.var(("x", i, j, t))
    y_index = tuple(b.var(("y", j), 0.0, 1.0) for j in range(n))
    c_index = tuple(b.var(("C", j), 0.0, np.inf, cost=float(inst.jobs[j].weight)) for j in range(n))

    for j, job in enumerate(inst.jobs):
        comp = {c_index[j]: 1.0}
        frac = {y_index[j]: 1.0}
        for i in range(m):
            p = job.proc[i]
            for t in range(job.release, T):
                v = x_index[i, j, t]
                comp[v] = -((t + 0.5) / p + 0.5)
                frac[v] = -1.0 / p
        b.row(comp, EQ, 0.0)
        b.row(frac, EQ, 0.0)
    for i in range(m):
        for t in range(T):
            cap = {x_index[i, j, t]: 1.0 for j in range(n) if (i, j, t) in x_index}
            if cap:
                b.row(cap, LE, 1.0)
    if opt_guess is not None:
        b.row({c_index[j]: float(inst.jobs[j].weight) for j in range(n)}, LE, float(opt_guess))
    for tgt in inst.targets:
        if tgt.target <= 0:
            continue
        if kc:
            row = {y_index[j]: float(min(tgt.profits[j], tgt.target)) for j in range(n)}
        else:
            row = {y_index[j]: float(tgt.profits[j]) for j in range(n)}
        b.row(row, GE, float(tgt.target))
    for coeffs, sense, rhs in cuts:
        b.row({y_index[j]: c for j, c in coeffs.items()}, sense, rhs)
    return WctLp(b.build(), T, x_index, y_index, c_index)


@dataclass(frozen=True)
class KcCut:
    target: int
    A: frozenset
    coeffs: dict  # job -> min(pi_j, Pi - Pi(A)) for j outside A
    rhs: float

    def lp_row(self):
        return (self.coeffs, GE, self.rhs)


def kc_separate(y: Sequence, targets, threshold=Fraction(1, 2), tol: float = 1e-6) -> Optional[KcCut]:
    """KC check for the single set A* = {j : y_j >= threshold}, target by target.

    Returns the first violated row, or None.  A row counts as violated when its
    slack is below ``-tol * (1 + rhs)``.
    """
    A = frozenset(j for j, v in enumerate(y) if v >= threshold)
    for k, tgt in enumerate(targets):
        covered = sum(tgt.profits[j] for j in A)
        if covered >= tgt.target:
            continue
        rest = tgt.target - covered
        coeffs = {j: min(tgt.profits[j], rest) for j in range(len(y)) if j not in A}
        lhs = sum(c * y[j] for j, c in coeffs.items())
        if lhs < rest - tol * (1 + abs(rest)):
            return KcCut(k, A, coeffs, float(rest))
    return None


# ---------------------------------------------------------------------------
# grid snapping


def snap_machine(x: np.ndarray, totals: np.ndarray | None = None) -> np.ndarray:
    """Round slot fractions (rows: jobs, cols: slots) to integer ticks.

    Per-job totals (default: rounded to the nearest tick) are distributed by
    largest remainder; no slot ever exceeds one time unit.  A requested total
    can fall short only when every slot it touches is full.
    """
    X = np.clip(x, 0.0, None) * TICKS_PER_UNIT
    X[X < 1e-6] = 0.0
    F = np.floor(X).astype(np.int64)
    R = X - F
    # slot overflow from float noise
    for t in np.nonzero(F.sum(axis=0) > TICKS_PER_UNIT)[0]:
        over = int(F[:, t].sum()) - TICKS_PER_UNIT
        for j in np.argsort(-F[:, t], kind="stable"):
            take = min(over, int(F[j, t]))
            F[j, t] -= take
            over -= take
            if over == 0:
                break
    if totals is None:
        totals = np.rint(X.sum(axis=1)).astype(np.int64)
    want = np.asarray(totals, dtype=np.int64) - F.sum(axis=1)
    for j in np.nonzero(want < 0)[0]:  # requested less than the floors: trim from the back
        for t in np.nonzero(F[j])[0][::-1]:
            take = min(int(-want[j]), int(F[j, t]))
            F[j, t] -= take
            want[j] += take
            if want[j] == 0:
                break
    cap = TICKS_PER_UNIT - F.sum(axis=0)
    for j in range(X.shape[0]):
        if want[j] <= 0:
            continue
        for t in np.argsort(-R[j], kind="stable"):
            if want[j] == 0 or R[j, t] <= 0:
                break
            if cap[t] > 0:
                F[j, t] += 1
                cap[t] -= 1
                want[j] -= 1
    # explicit totals can ask for more than one tick per slot: fill used slots
    for j in np.nonzero(want > 0)[0]:
        for t in np.argsort(-X[j], kind="stable"):
            if want[j] == 0 or X[j, t] <= 0:
                break
            add = min(int(want[j]), int(cap[t]))
            F[j, t] += add
            cap[t] -= add
            want[j] -= add
    return F


@dataclass(frozen=True)
class TimeIndexedSolution:
    """Snapped LP point: ``x_ticks[i, j, t]`` is machine i's time on job j in slot t."""

    inst: WctInstance
    horizon: int
    x_ticks: np.ndarray
    y: tuple  # Fractions
    C: tuple  # Fractions
    opt_guess: float
    lp_value: float
    threshold: Fraction = Fraction(1, 2)
    cuts: int = 0

    @property
    def A_star(self) -> frozenset:
        return frozenset(j for j, v in enumerate(self.y) if v >= self.threshold)

    @property
    def weighted_value(self) -> Fraction:
        return sum((Fraction(job.weight) * c for job, c in zip(self.inst.jobs, self.C)), Fraction(0))

    def check_invariants(self) -> list[str]:
        """Exact re-check of the slot, release and fraction rows on the grid."""
        bad = []
        inst, X = self.inst, self.x_ticks
        if np.any(X < 0):
            bad.append("negative slot time")
        if np.any(X.sum(axis=1) > TICKS_PER_UNIT):
            bad.append("slot capacity exceeded")
        for j, job in enumerate(inst.jobs):
            if np.any(X[:, j, :job.release]):
                bad.append(f"job {j} processed before release")
            y = sum((Fraction(int(X[i, j].sum()), inst.jobs[j].proc[i] * TICKS_PER_UNIT)
                     for i in range(inst.machines)), Fraction(0))
            if y != self.y[j]:
                bad.append(f"job {j}: y does not match slot mass")
            if not 0 <= y <= 1:
                bad.append(f"job {j}: y out of [0, 1]")
        return bad


def _exact_y_c(inst: WctInstance, X: np.ndarray):
    ys, cs = [], []
    for j, job in enumerate(inst.jobs):
        y = Fraction(0)
        c = Fraction(0)
        for i in range(inst.machines):
            p = job.proc[i]
            row = X[i, j]
            tot = int(row.sum())
            if tot == 0:
                continue
            y += Fraction(tot, p * TICKS_PER_UNIT)
            # sum_t x_t (t + 1/2) / p + x_t / 2
            tw = int((row * np.arange(len(row), dtype=np.int64)).sum())
            c += Fraction(2 * tw + tot, 2 * p * TICKS_PER_UNIT) + Fraction(tot, 2 * TICKS_PER_UNIT)
        ys.append(y)
        cs.append(c)
    return ys, cs


def _trim_overfull(inst: WctInstance, X: np.ndarray):
    """Remove trailing ticks from any job whose scheduled fraction exceeds one."""
    for j, job in enumerate(inst.jobs):
        while True:
            y = sum((Fraction(int(X[i, j].sum()), job.proc[i]) for i in range(inst.machines)),
                    Fraction(0)) / TICKS_PER_UNIT
            if y <= 1:
                break
            excess = (y - 1) * TICKS_PER_UNIT
            nz = [(t, i) for i in range(inst.machines) for t in np.nonzero(X[i, j])[0]]
            t, i = max(nz)
            take = min(int(X[i, j, t]), math.ceil(excess * job.proc[i]))
            X[i, j, t] -= max(take, 1)


def snap_solution(inst: WctInstance, lp: WctLp, x: np.ndarray) -> np.ndarray:
    m, n, T = inst.machines, inst.n, lp.horizon
    dense = np.zeros((m, n, T))
    for (i, j, t), v in lp.x_index.items():
        dense[i, j, t] = x[v]
    X = np.stack([snap_machine(dense[i]) for i in range(m)]) if m else dense.astype(np.int64)
    _trim_overfull(inst, X)
    return X


def lower_bound(inst: WctInstance) -> float:
    """A valid lower bound on Opt: some positive-profit job must be scheduled."""
    vals = [job.weight * (job.release + min(job.proc))
            for j, job in enumerate(inst.jobs)
            if any(t.profits[j] > 0 for t in inst.targets)]
    return float(min(vals)) if vals else 0.0


def solve_relaxation(inst: WctInstance, threshold=Fraction(1, 2), max_cuts: int | None = None,
                     method: str = "auto", kc: bool = True) -> TimeIndexedSolution:
    """Find an LP point meeting the slot rows and the KC row for {j : y_j >= threshold}.

    Opt is guessed by doubling from :func:`lower_bound`; each guess adds the
    budget row and runs the cut loop (cap ``4n`` cuts).  A guess fails on LP
    infeasibility or on the cut cap.  The LP minimizes sum w_j C_j subject to
    valid rows only, so the accepted value never exceeds Opt.
    """
    n = inst.n
    if any(t.target > sum(t.profits) for t in inst.targets):
        raise RelaxationInfeasible("profit target exceeds total profit")
    max_cuts = 4 * max(n, 1) if max_cuts is None else max_cuts
    upper = sum(job.weight for job in inst.jobs) * horizon(inst)
    L0 = lower_bound(inst)
    guesses = [0.0] if L0 == 0 else []
    g = L0 if L0 > 0 else float(min((job.weight * (job.release + min(job.proc))
                                     for job in inst.jobs if job.weight > 0), default=1.0))
    while True:
        guesses.append(g)
        if g >= upper:
            break
        g *= 2
    cuts: list = []
    last_status = None
    for guess in guesses:
        lp = build_wct_lp(inst, guess, kc=kc, cuts=[c.lp_row() for c in cuts])
        snapped = {}

        def separator(sol, lp=lp):
            X = snap_solution(inst, lp, sol.x)
            ys, _ = _exact_y_c(inst, X)
            snapped["X"] = X
            cut = kc_separate(ys, inst.targets, threshold) if kc else None
            if cut is not None:
                cuts.append(cut)
                return (({lp.y_index[j]: c for j, c in cut.coeffs.items()}), GE, cut.rhs)
            return None

        sol = cut_loop(lp.model, separator, max_cuts, method=method)
        last_status = sol.status
        if sol.status is Status.OPTIMAL:
            X = snapped["X"]
            ys, cs = _exact_y_c(inst, X)
            return TimeIndexedSolution(inst, lp.horizon, X, tuple(ys), tuple(cs), guess,
                                       sol.objective, Fraction(threshold), sol.cuts)
        if sol.status not in (Status.INFEASIBLE, Status.CUT_LIMIT):
            raise RuntimeError(f"LP solver returned {sol.status.value}")
    raise RelaxationInfeasible(f"all Opt guesses up to {guesses[-1]} failed ({last_status})")


# ---------------------------------------------------------------------------
# rounding


@dataclass(frozen=True)
class MarkVector:
    marks: tuple  # per job: (machine, slot) or None
    draws: tuple  # the uniform draw per job
    seed: int
    trial: int
    A_star: frozenset


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, trial) so trials reproduce in any order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def marking_lengths(sol: TimeIndexedSolution):
    """Per job: (pairs, cumulative interval ends) for the [0, 1] layout.

    Pairs (i, t) are laid out in lexicographic order.  Jobs in A* get lengths
    x/(p y), which sum to one; others get factor * x / p with factor = 1/threshold.
    """
    inst, X = sol.inst, sol.x_ticks
    factor = 1 / sol.threshold
    A = sol.A_star
    out = []
    for j, job in enumerate(inst.jobs):
        pairs, lens = [], []
        for i in range(inst.machines):
            for t in np.nonzero(X[i, j])[0]:
                pairs.append((i, int(t)))
                ticks = Fraction(int(X[i, j, t]), TICKS_PER_UNIT)
                if j in A:
                    lens.append(ticks / (job.proc[i] * sol.y[j]))
                else:
                    lens.append(factor * ticks / job.proc[i])
        total = sum(lens, Fraction(0))
        if j not in A and total > 1:
            raise AssertionError(f"job {j} outside A* would be marked with probability {total}")
        out.append((pairs, np.cumsum([float(v) for v in lens]) if lens else np.zeros(0)))
    return out


def schedule_marks(inst: WctInstance, marks: Sequence) -> tuple[SegmentSchedule, dict]:
    """List-schedule marked jobs per machine in marked-slot order, ties by job id."""
    segs = []
    completion = {}
    for i in range(inst.machines):
        queue = sorted((mk[1], j) for j, mk in enumerate(marks) if mk is not None and mk[0] == i)
        clock = 0
        for _, j in queue:
            start = max(clock, inst.jobs[j].release)
            clock = start + inst.jobs[j].proc[i]
            segs.append((j, i, start, clock))
            completion[j] = clock
    return SegmentSchedule.from_times(segs, completion.keys()), completion


def randomized_round(sol: TimeIndexedSolution, seed: int, trial: int = 0,
                     _lengths=None) -> tuple[MarkVector, SegmentSchedule]:
    lengths = _lengths if _lengths is not None else marking_lengths(sol)
    rng = trial_rng(seed, trial)
    draws = rng.random(sol.inst.n)
    marks = []
    for (pairs, cum), u in zip(lengths, draws):
        k = int(np.searchsorted(cum, u, side="right"))
        marks.append(pairs[k] if k < len(pairs) else None)
    sched, _ = schedule_marks(sol.inst, marks)
    return MarkVector(tuple(marks), tuple(float(u) for u in draws), seed, trial, sol.A_star), sched


def meets_targets(inst: WctInstance, selected) -> bool:
    return all(sum(t.profits[j] for j in selected) >= t.target for t in inst.targets)


@dataclass
class RoundingResult:
    schedule: SegmentSchedule
    marks: MarkVector
    trials_used: int
    cost: Fraction
    stats: list = field(default_factory=list)


def round_until_feasible(sol: TimeIndexedSolution, seed: int, max_trials: int = 200) -> RoundingResult:
    """Return the first rounding trial meeting every profit target."""
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    lengths = marking_lengths(sol)
    stats = []
    for trial in range(max_trials):
        marks, sched = randomized_round(sol, seed, trial, lengths)
        rep = validate_schedule(sol.inst, sched)
        stats.append({"trial": trial, "selected": len(sched.selected), "cost": rep.objective,
                      "feasible": rep.feasible})
        if rep.feasible:
            return RoundingResult(sched, marks, trial + 1, rep.objective, stats)
    raise RoundingFailure(max_trials, stats)


def multi_profit_round(sol: TimeIndexedSolution, seed: int, max_trials: int = 200) -> RoundingResult:
    """Rounding for K profit targets; ``sol`` must come from threshold 1/beta_K."""
    beta = beta_for(sol.inst.K)
    if abs(float(sol.threshold) - 1 / beta) > 1e-12:
        raise ValueError("solution was not computed with threshold 1/beta_K")
    return round_until_feasible(sol, seed, max_trials)


def beta_threshold(K: int) -> Fraction:
    return Fraction(1 / beta_for(K))


@dataclass
class WctResult:
    schedule: SegmentSchedule
    relaxation: TimeIndexedSolution
    rounding: RoundingResult

    @property
    def report(self) -> dict:
        inst = self.relaxation.inst
        return {"lp_value": self.relaxation.lp_value, "opt_guess": self.relaxation.opt_guess,
                "trials_used": self.rounding.trials_used, "cost": self.rounding.cost,
                "profit": [sum(t.profits[j] for j in self.schedule.selected) for t in inst.targets]}


def solve_wct(inst: WctInstance, seed: int = 0, trials: int = 200, multi: bool | None = None,
              method: str = "auto") -> WctResult:
    """Relaxation plus rounding; ``multi`` (default: K > 1) uses the beta_K variant."""
    multi = inst.K > 1 if multi is None else multi
    threshold = beta_threshold(inst.K) if multi else Fraction(1, 2)
    sol = solve_relaxation(inst, threshold=threshold, method=method)
    res = multi_profit_round(sol, seed, trials) if multi else round_until_feasible(sol, seed, trials)
    return WctResult(res.schedule, sol, res)
