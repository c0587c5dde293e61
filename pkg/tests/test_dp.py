import numpy as np
import pytest
from hypothesis import given, strategies as st

from outliersched.core import SizeError, WctInstance
from outliersched.dp import dp_exact, dp_multi_machine, fptas, scaling_constant
from outliersched.generators import random_wct
from outliersched.oracles import brute_wct

seeds = st.integers(0, 2 ** 31)


def unit(rng, n, m=1, pmax=8):
    return random_wct(rng, n, m, pmax=pmax, unit_weights=True, identical=True)


def test_hand_example():
    # pick the two short jobs: completion 1 + 3
    inst = WctInstance.single(1, [1, 2, 6], [1, 1, 1], [1, 1, 1], 2)
    res = dp_exact(inst)
    assert res.value == 4 and res.order == (0, 1)


def test_profit_can_force_a_long_job():
    inst = WctInstance.single(1, [1, 2, 6], [1, 1, 1], [1, 1, 5], 5)
    assert dp_exact(inst).value == 6


@given(seeds)
def test_dp_exact_matches_brute_force(seed):
    inst = unit(np.random.default_rng(seed), 7)
    assert dp_exact(inst).value == brute_wct(inst).objective


@given(seeds)
def test_two_machine_dp_matches_brute_force(seed):
    inst = unit(np.random.default_rng(seed), 6, 2)
    res = dp_multi_machine(inst)
    assert res.value == brute_wct(inst).objective
    assert sum(len(o) for o in res.orders) == len(res.selected)


@given(seeds, st.sampled_from([0.1, 0.5, 1.0]))
def test_fptas_within_factor(seed, eps):
    inst = unit(np.random.default_rng(seed), 8, pmax=40)
    assert fptas(inst, eps).value <= (1 + eps) * dp_exact(inst).value


def test_scaling_constant():
    assert scaling_constant(0.5, 100, 4) == pytest.approx(2 * 0.5 * 100 / 20)


def test_rejects_unsupported_inputs():
    weighted = WctInstance.single(1, [1, 2], [2, 1], [1, 1], 1)
    with pytest.raises(ValueError):
        dp_exact(weighted)
    with pytest.raises(ValueError):
        fptas(unit(np.random.default_rng(0), 3), 0)
    big = WctInstance.single(1, [500] * 12, [1] * 12, [1] * 12, 6)
    with pytest.raises(SizeError):
        dp_exact(big)
