import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from outliersched.core import FlowInstance, validate_schedule
from outliersched.flow import (ChargeLedger, FlowInfeasible, audit_charges, build_flow_lp,
                               gen_gap_instance, solve_flow_lp, solve_flow_outliers, stage1_shift,
                               stage1_swap, stage2_augment, work_conserving_makespan)
from outliersched.generators import random_flow
from outliersched.oracles import brute_flow
from outliersched.timeline import FractionalTimeline, from_slots, normalize

from test_timeline import fractional

seeds = st.integers(0, 2 ** 31)


def test_lp_horizon_and_shape():
    inst = FlowInstance.from_lists([2, 3, 8], [0, 5, 1], 2)
    assert work_conserving_makespan(inst.jobs) == 13
    lp = build_flow_lp(inst, kstar=2)
    assert lp.jobs == (0, 1) and lp.horizon == 8


@given(seeds)
def test_lp_is_a_lower_bound(seed):
    inst = random_flow(np.random.default_rng(seed), 5, pmax=6, rmax=6)
    lp = solve_flow_lp(inst)
    assert lp.lp_value <= float(brute_flow(inst).objective) + 1e-6
    assert lp.timeline.check() == [] and lp.timeline.release_violations() == {}
    assert sum(lp.timeline.ys()) >= inst.profit_target - F(1, 10 ** 4)


def test_gap_family_layout():
    g = gen_gap_instance(4)
    assert g.M == 32 and g.instance.profit_target == 32 + 3
    starts = {name: s for name, s, _ in g.blocks}
    assert starts["white 4"] == 0 and starts["grey"] == 30 and starts["white 5"] == 62
    assert [g.instance.jobs[j].proc for j in g.large_jobs] == [4, 8, 16, 32, 32]
    assert all(g.instance.jobs[j].proc == 1 for j in g.small_jobs)
    with pytest.raises(ValueError):
        gen_gap_instance(3)


@settings(max_examples=150)
@given(fractional())
def test_stage_one_on_arbitrary_fractional_input(tl):
    """Swapping and shifting on any normalized timeline: mass kept per class,
    enough full jobs, releases respected, charges audited."""
    tl = normalize(tl)
    ledger, cur = ChargeLedger(), tl
    for k in tl.classes():
        members = [j for j in range(tl.inst.n) if tl.inst.jobs[j].klass == k]
        before = sum(cur.y(j) for j in members)
        cur, ledger, stats = stage1_swap(cur, k, ledger)
        assert sum(cur.y(j) for j in members) == before
        assert stats.full >= stats.target
        assert stats.max_violation_space <= 2 * 2 ** k
        assert cur.check() == []
        cur = stage1_shift(cur, k)
    assert cur.release_violations() == {}
    assert cur.processed() <= 2 * tl.processed()
    report = audit_charges(ledger, tl.processed())
    assert report.passed, report.details


def test_audit_flags_double_payment_and_free_time():
    led = ChargeLedger()
    led.add(0, 1, 0, 2, 1)
    led.add(0, 2, 1, 3, 1)
    led.free_after_swap[0] = [(F(5), F(6))]
    rep = audit_charges(led, 10)
    assert not rep.single_payer and rep.free_time_never_pays
    led.add(0, 3, 5, 6, 1)
    assert not audit_charges(led, 10).free_time_never_pays
    assert not audit_charges(led, F(1, 2)).total_bounded


def test_stage_two_adds_cheapest():
    inst = FlowInstance.from_lists([2, 1, 2], [0, 0, 0], 2)
    tl = FractionalTimeline.from_dict(inst, {1: [(0, 1)], 0: [(1, 2)]})
    two = stage2_augment(tl, {0: F(1), 1: F(1, 2)})
    assert two.full == {1} and two.added == (0,)
    with pytest.raises(FlowInfeasible):
        stage2_augment(tl, {1: F(3)})


@given(seeds)
def test_end_to_end_certificate(seed):
    rng = np.random.default_rng(seed)
    inst = random_flow(rng, int(rng.integers(1, 9)), pmax=16, rmax=16)
    res = solve_flow_outliers(inst)
    assert res.certificate.passed, res.certificate.checks
    rep = validate_schedule(inst, res.schedule)
    assert rep.feasible and rep.objective == res.certificate.srpt_flow
    assert res.certificate.srpt_flow <= res.certificate.total_flow
    for run in res.runs.values():
        if run is not None:
            assert len(run.selected) >= inst.profit_target


def test_zero_target():
    inst = FlowInstance.from_lists([3], [0], 0)
    res = solve_flow_outliers(inst)
    assert res.certificate.srpt_flow == 0 and not res.schedule.selected


def test_gap_instance_runs_and_certifies():
    g = gen_gap_instance(4)
    res = solve_flow_outliers(g.instance)
    assert res.certificate.passed
    opt = brute_flow(g.instance).objective
    assert res.certificate.srpt_flow >= opt >= g.M * 4 // 2
