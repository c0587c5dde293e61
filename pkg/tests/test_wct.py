import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from outliersched.core import TICKS_PER_UNIT, ProfitTarget, WctInstance, WctJob, validate_schedule
from outliersched.generators import random_wct
from outliersched.oracles import brute_wct
from outliersched.wct import (RoundingFailure, beta_for, beta_threshold, horizon, kc_separate,
                              lower_bound, marking_lengths, multi_profit_round, randomized_round,
                              round_until_feasible, snap_machine, solve_relaxation, solve_wct)

seeds = st.integers(0, 2 ** 31)


def test_horizon():
    inst = WctInstance.single(2, [(2, 3), (1, 4)], [1, 1], [1, 1], 1, releases=[5, 0])
    assert horizon(inst) == 5 + 2 + 1


@pytest.mark.parametrize("K", [1, 2, 4, 10])
def test_beta_root(K):
    b = beta_for(K)
    assert b > 1
    assert math.exp(-(b - 1) ** 2 / (2 * b)) == pytest.approx(1 / (10 * K), rel=1e-9)
    assert beta_threshold(K) == Fraction(1 / b)


def test_kc_separation():
    tgt = [ProfitTarget((1000,), 1)]
    cut = kc_separate([Fraction(1, 1000)], tgt)
    assert cut is not None and cut.coeffs == {0: 1} and cut.rhs == 1
    assert kc_separate([Fraction(1, 2)], tgt) is None
    two = [ProfitTarget((3, 3, 3), 5)]
    cut = kc_separate([Fraction(1, 2), Fraction(1, 10), Fraction(1, 10)], two)
    assert cut.A == {0} and cut.coeffs == {1: 2, 2: 2} and cut.rhs == 2


@given(st.lists(st.lists(st.floats(0, 1), min_size=4, max_size=4), min_size=1, max_size=4))
def test_snap_respects_capacity(rows):
    x = np.array(rows)
    x = x / np.maximum(1.0, x.sum(axis=0))  # feasible slot loads
    F = snap_machine(x)
    assert F.min() >= 0 and F.sum(axis=0).max() <= TICKS_PER_UNIT
    assert np.all(np.abs(F.sum(axis=1) - x.sum(axis=1) * TICKS_PER_UNIT) <= x.shape[1] + 1)


def test_snap_explicit_totals():
    x = np.array([[0.5, 0.49999], [0.5, 0.5]])
    F = snap_machine(x, np.array([TICKS_PER_UNIT, 0]))
    assert F[0].sum() == TICKS_PER_UNIT and F[1].sum() == 0


def test_kc_example_and_rounding_cost():
    inst = WctInstance.single(1, [3], [1], [1000], 1)
    plain = solve_relaxation(inst, kc=False)
    strong = solve_relaxation(inst)
    assert plain.y[0] < Fraction(1, 100)
    assert strong.y[0] == 1
    res = round_until_feasible(strong, seed=0, max_trials=1)
    assert res.cost == brute_wct(inst).objective == 3


@given(seeds)
def test_relaxation_is_a_lower_bound(seed):
    rng = np.random.default_rng(seed)
    inst = random_wct(rng, int(rng.integers(1, 6)), int(rng.integers(1, 3)), rmax=3)
    sol = solve_relaxation(inst)
    opt = brute_wct(inst).objective
    assert sol.lp_value <= float(opt) + 1e-6
    assert sol.check_invariants() == []
    assert lower_bound(inst) <= float(opt)
    # per-target KC row for A* holds on the snapped point
    assert kc_separate(sol.y, inst.targets, sol.threshold) is None


@given(seeds)
def test_marking_probabilities(seed):
    rng = np.random.default_rng(seed)
    inst = random_wct(rng, int(rng.integers(1, 6)), int(rng.integers(1, 3)), rmax=2)
    sol = solve_relaxation(inst)
    for j, (pairs, cum) in enumerate(marking_lengths(sol)):
        total = cum[-1] if len(cum) else 0.0
        if j in sol.A_star:
            assert total == pytest.approx(1.0)
        else:
            assert total == pytest.approx(min(1.0, 2 * float(sol.y[j])), abs=1e-9)
        assert all(t >= inst.jobs[j].release for _, t in pairs)


@given(seeds)
def test_rounding_reproducible_and_valid(seed):
    rng = np.random.default_rng(seed)
    inst = random_wct(rng, 5, 2, rmax=3)
    sol = solve_relaxation(inst)
    m1, s1 = randomized_round(sol, seed, 3)
    m2, s2 = randomized_round(sol, seed, 3)
    assert m1 == m2 and s1 == s2
    rep = validate_schedule(inst, s1)
    assert not [v for v in rep.violations if not v.startswith("profit")]


def test_solve_wct_end_to_end():
    inst = random_wct(np.random.default_rng(1), 6, 2, rmax=2)
    res = solve_wct(inst, seed=5)
    assert validate_schedule(inst, res.schedule).feasible
    assert set(res.report) == {"lp_value", "opt_guess", "trials_used", "cost", "profit"}


def test_multi_target_needs_matching_threshold():
    inst = random_wct(np.random.default_rng(2), 5, 1, K=3)
    half = solve_relaxation(inst)
    with pytest.raises(ValueError):
        multi_profit_round(half, 0)
    sol = solve_relaxation(inst, threshold=beta_threshold(3))
    res = multi_profit_round(sol, 0)
    assert validate_schedule(inst, res.schedule).feasible


def test_rounding_failure_reports_trials():
    inst = WctInstance(1, (WctJob((1,), 1), WctJob((1,), 1)), (ProfitTarget((1, 1), 2),))
    sol = solve_relaxation(inst)
    # both jobs are needed and both have y = 1, so one trial always succeeds
    assert round_until_feasible(sol, 0, 1).trials_used == 1
    with pytest.raises(ValueError):
        round_until_feasible(sol, 0, 0)
    assert issubclass(RoundingFailure, RuntimeError)
