import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from outliersched.core import FlowInstance, GapInstance, GapJob, SizeError, WctInstance, validate_schedule
from outliersched.generators import random_flow, random_gap, random_wct
from outliersched.oracles import (brute_flow, brute_gap, brute_wct, exhaustive_preemptive,
                                  gap_frontier, srpt)

seeds = st.integers(0, 2 ** 31)


def test_srpt_hand_example():
    # job 0 (p=3, r=0) is preempted by job 1 (p=1, r=1)
    inst = FlowInstance.from_lists([3, 1], [0, 1], 2)
    res = srpt(inst)
    assert res.objective == 4 + 1
    assert validate_schedule(inst, res.schedule).feasible


@given(seeds)
def test_srpt_is_optimal_against_exhaustive_search(seed):
    inst = random_flow(np.random.default_rng(seed), 4, pmax=4, rmax=5)
    assert srpt(inst).objective == exhaustive_preemptive(inst)


@given(seeds)
def test_brute_flow_is_best_over_all_subsets(seed):
    inst = random_flow(np.random.default_rng(seed), 5, pmax=5, rmax=6)
    best = brute_flow(inst)
    assert len(best.selected) == inst.profit_target
    for r in range(inst.profit_target, inst.n + 1):
        for sub in itertools.combinations(range(inst.n), r):
            assert srpt(inst, sub).objective >= best.objective


def test_brute_flow_fixed_and_cap():
    inst = FlowInstance.from_lists([5, 1, 1], [0, 0, 0], 2)
    assert brute_flow(inst).selected == {1, 2}
    assert brute_flow(inst, fixed=[0]).selected >= {0}
    big = FlowInstance.from_lists([1] * 40, [0] * 40, 20)
    with pytest.raises(SizeError):
        brute_flow(big)


def _wct_exhaustive(inst):
    """Permutation search: per machine the best order is tried explicitly."""
    n, m = inst.n, inst.machines
    tgt = inst.targets
    best = None
    for assign in itertools.product(range(m + 1), repeat=n):
        sel = [j for j in range(n) if assign[j] < m]
        if any(sum(t.profits[j] for j in sel) < t.target for t in tgt):
            continue
        total = 0
        for i in range(m):
            jobs = [j for j in sel if assign[j] == i]
            cost_i = None
            for perm in itertools.permutations(jobs):
                t, c = 0, 0
                for j in perm:
                    t = max(t, inst.jobs[j].release) + inst.jobs[j].proc[i]
                    c += inst.jobs[j].weight * t
                cost_i = c if cost_i is None else min(cost_i, c)
            total += cost_i or 0
        best = total if best is None else min(best, total)
    return best


@given(seeds)
def test_brute_wct_matches_permutation_search(seed):
    rng = np.random.default_rng(seed)
    inst = random_wct(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)), rmax=3)
    res = brute_wct(inst)
    assert res.objective == _wct_exhaustive(inst)
    assert validate_schedule(inst, res.schedule).feasible


def test_brute_wct_size_cap():
    inst = WctInstance.single(1, [1] * 13, [1] * 13, [1] * 13, 3)
    with pytest.raises(SizeError):
        brute_wct(inst)


def test_brute_gap_hand_example():
    inst = GapInstance(2, (GapJob((4, 1), (0, 3), 2), GapJob((2, 2), (1, 1), 1)), 2)
    res = brute_gap(inst)
    assert res.objective == 1 and res.extra["cost"] == 3
    assert brute_gap(inst, C=0).objective == 4
    assert not brute_gap(inst, C=0, T=3).feasible


@given(seeds)
def test_frontier_points_are_attained_and_undominated(seed):
    rng = np.random.default_rng(seed)
    inst = random_gap(rng, int(rng.integers(1, 6)), int(rng.integers(1, 3)))
    front = gap_frontier(inst)
    assert front
    for C, T in front:
        r = brute_gap(inst, C, T)
        assert r.feasible and r.extra["makespan"] <= T and r.extra["cost"] <= C
        assert validate_schedule(inst, r.schedule).feasible
    for (c1, t1), (c2, t2) in itertools.combinations(front, 2):
        assert not (c1 <= c2 and t1 <= t2) and not (c2 <= c1 and t2 <= t1)
