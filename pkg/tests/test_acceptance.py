"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line; run with
``pytest -s tests/test_acceptance.py`` to see them."""

import math
import time

import numpy as np
import pytest

from outliersched import dp, flow, gap, oracles, wct
from outliersched import lp as lpmod
from outliersched.core import FlowInstance, WctInstance, validate_schedule
from outliersched.generators import random_flow, random_gap, random_wct


def report(num: int, ok: bool, detail: str):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------


def test_criterion_1_kc_row_closes_single_job_gap():
    t0 = time.perf_counter()
    inst = WctInstance.single(1, [1], [1], [1000], 1)
    lp = wct.build_wct_lp(inst, kc=False)
    raw = lpmod.solve(lp.model)
    y_plain = raw.x[lp.y_index[0]]
    strong = wct.solve_relaxation(inst, kc=True)
    opt = oracles.brute_wct(inst).objective
    res = wct.round_until_feasible(strong, seed=0, max_trials=1)
    elapsed = time.perf_counter() - t0
    ok = (math.isclose(y_plain, 1 / 1000, rel_tol=1e-9)
          and math.isclose(raw.objective / float(opt), 1 / 1000, rel_tol=1e-9)
          and strong.y[0] == 1 and res.cost == opt and elapsed < 1)
    report(1, ok, f"y without KC = {y_plain:.6f}, LP/Opt = {raw.objective / float(opt):.6f}; "
                  f"with KC y = {strong.y[0]}, rounded cost {res.cost} vs Opt {opt}; {elapsed:.2f}s")


def _success_rate(sol, trials, seed):
    lengths = wct.marking_lengths(sol)
    hits = 0
    for t in range(trials):
        marks, sched = wct.randomized_round(sol, seed, t, lengths)
        hits += wct.meets_targets(sol.inst, sched.selected)
    return hits / trials


def test_criterion_2_single_target_success_probability():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    rates = []
    for _ in range(20):
        inst = random_wct(rng, int(rng.integers(2, 11)), int(rng.integers(1, 3)), rmax=3)
        sol = wct.solve_relaxation(inst)
        rates.append(_success_rate(sol, 500, seed=int(rng.integers(2 ** 31))))
    elapsed = time.perf_counter() - t0
    ok = min(rates) >= 0.146 and elapsed < 30
    report(2, ok, f"min success frequency {min(rates):.3f} over 20 instances (>= 0.146); {elapsed:.1f}s")


def test_criterion_3_expected_rounded_cost():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_total, worst_job = 0.0, 0.0
    for _ in range(6):
        inst = random_wct(rng, int(rng.integers(2, 8)), int(rng.integers(1, 3)), rmax=3)
        opt = float(oracles.brute_wct(inst).objective)
        sol = wct.solve_relaxation(inst)
        lengths = wct.marking_lengths(sol)
        trials = 2000
        tot = np.zeros(inst.n)
        for t in range(trials):
            _, sched = wct.randomized_round(sol, 11, t, lengths)
            for j in sched.selected:
                tot[j] += float(sched.completion(j))
        mean = tot / trials
        cost = sum(inst.jobs[j].weight * mean[j] for j in range(inst.n))
        worst_total = max(worst_total, cost / opt if opt else 0.0)
        for j in range(inst.n):
            if sol.C[j] > 0:
                worst_job = max(worst_job, mean[j] / (8 * float(sol.C[j])))
            else:
                assert mean[j] == 0
    elapsed = time.perf_counter() - t0
    ok = worst_total <= 16 and worst_job <= 1.1 and elapsed < 120
    report(3, ok, f"max E[sum w C^R]/Opt = {worst_total:.3f} (<= 16), "
                  f"max E[C_j^R]/(8 C_hat_j) = {worst_job:.3f} (<= 1.1); {elapsed:.1f}s")


def test_criterion_4_gap_bounds():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    bad, runs = [], 0
    for idx in range(100):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 9 if m < 3 else 8))
        inst = random_gap(rng, n, m)
        front = oracles.gap_frontier(inst)
        C, T = front[int(rng.integers(len(front)))]
        for eps in (1.0, 0.5):
            res = gap.solve_gap_outliers(inst, eps, C, T)
            runs += 1
            if not (res.profit >= inst.profit_target - 1e-9 and res.cost <= (1 + eps) * C + 1e-9
                    and res.makespan <= 3 * T + 1e-9):
                bad.append((idx, eps, res.cost, res.makespan, C, T))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    report(4, ok, f"{runs} runs, {len(bad)} violations of profit/cost/makespan bounds; {elapsed:.1f}s")


def test_criterion_5_dp_and_fptas():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    mism, fptas_bad, multi_mism = 0, 0, 0
    for _ in range(200):
        n = int(rng.integers(1, 11))
        inst = random_wct(rng, n, 1, pmax=8, unit_weights=True, identical=True)
        brute = oracles.brute_wct(inst).objective
        exact = dp.dp_exact(inst).value
        mism += exact != brute
        for eps in (0.1, 0.5):
            fptas_bad += dp.fptas(inst, eps).value > (1 + eps) * exact
        inst2 = random_wct(rng, int(rng.integers(1, 9)), 2, pmax=8, unit_weights=True, identical=True)
        multi_mism += dp.dp_multi_machine(inst2).value != oracles.brute_wct(inst2).objective
    elapsed = time.perf_counter() - t0
    ok = mism == 0 and fptas_bad == 0 and multi_mism == 0 and elapsed < 120
    report(5, ok, f"dp_exact mismatches {mism}/200, FPTAS over (1+eps) {fptas_bad}/400, "
                  f"two-machine DP mismatches {multi_mism}/200; {elapsed:.1f}s")


@pytest.mark.parametrize("k", [4, 6])
def test_criterion_6_integrality_gap(k):
    t0 = time.perf_counter()
    g = flow.gen_gap_instance(k)
    lp = flow.solve_flow_lp(g.instance)
    res = oracles.brute_flow(g.instance, fixed=g.small_jobs)
    enumerated = math.comb(k + 1, k // 2 + 1)
    elapsed = time.perf_counter() - t0
    lp_bound, opt_bound = g.M + 2 ** (k + 2), g.M * k / 2
    ratio = float(res.objective) / lp.lp_value
    ok = (lp.lp_value <= lp_bound and res.objective >= opt_bound and ratio >= k / 6
          and res.explored == enumerated and elapsed < 300)
    report(6, ok, f"k={k}: LP {lp.lp_value:.3f} <= {lp_bound}, Opt {res.objective} >= {opt_bound:g}, "
                  f"ratio {ratio:.3f} >= {k / 6:.3f} ({res.explored} subsets); {elapsed:.1f}s")


def _literal_checks(c):
    """The chain inequalities with k* itself, rather than the class count k*+1, in the additive terms."""
    k, P, Fs = c.kstar, c.P_star, c.flow_star
    return {"i": c.P_prime <= 2 * P,
            "ii": c.flow_prime <= 4 * Fs + 6 * k * P,
            "iii": c.full_flow <= 2 * c.flow_prime + k * c.P_prime,
            "iv": c.added_flow <= k * (c.P_prime + 2 ** (k + 2)),
            "v": c.total_flow <= 8 * Fs + 16 * k * P + k * 2 ** (k + 2)}


def test_criterion_7_flow_certificate_chain():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    runs, failures = 0, []
    for idx in range(100):
        inst = random_flow(rng, int(rng.integers(1, 13)), pmax=16, rmax=20)
        res = flow.solve_flow_outliers(inst)
        for k, run in res.runs.items():
            if run is None:
                continue
            runs += 1
            c = run.certificate
            lit = _literal_checks(c)
            if not (c.passed and all(lit.values())):
                failures.append((idx, k, {n: v for n, v in {**c.checks, **lit}.items() if not v}))
    elapsed = time.perf_counter() - t0
    ok = not failures and runs > 0 and elapsed < 300
    report(7, ok, f"{runs} runs on 100 instances, {len(failures)} with a failed inequality or "
                  f"charge audit {failures[:3]}; {elapsed:.1f}s")


def test_criterion_8_flow_against_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    bad, short, n_inst = [], 0, 60
    for idx in range(n_inst):
        inst = random_flow(rng, int(rng.integers(1, 8)), pmax=8, rmax=10)
        res = flow.solve_flow_outliers(inst)
        opt = oracles.brute_flow(inst).objective
        for run in res.runs.values():
            if run is not None and len(run.selected) < inst.profit_target:
                short += 1
        out = validate_schedule(inst, res.schedule)
        k = res.certificate.kstar
        bound = (8 + 32 * (k + 1)) * opt + k * 2 ** (k + 2)
        if not out.feasible or out.objective > bound:
            bad.append((idx, out.objective, bound))
    elapsed = time.perf_counter() - t0
    ok = not bad and short == 0 and elapsed < 120
    report(8, ok, f"{n_inst} instances, {len(bad)} above the composed bound, "
                  f"{short} runs below the target count; {elapsed:.1f}s")


def test_criterion_9_multi_target():
    t0 = time.perf_counter()
    K = 4
    beta = wct.beta_for(K)
    root_ok = math.exp(-(beta - 1) ** 2 / (2 * beta)) <= 1 / (10 * K) * (1 + 1e-12)
    rng = np.random.default_rng(9)
    floor = 0.9 - 3 * math.sqrt(0.9 * 0.1 / 500)
    rates = []
    for _ in range(10):
        inst = random_wct(rng, int(rng.integers(3, 9)), int(rng.integers(1, 3)), K=K, frac=0.4)
        sol = wct.solve_relaxation(inst, threshold=wct.beta_threshold(K))
        rates.append(_success_rate(sol, 500, seed=int(rng.integers(2 ** 31))))
    elapsed = time.perf_counter() - t0
    ok = root_ok and min(rates) >= floor and elapsed < 60
    report(9, ok, f"beta_4 = {beta:.4f}, root check {root_ok}; min all-target success "
                  f"{min(rates):.3f} (>= {floor:.3f}); {elapsed:.1f}s")
