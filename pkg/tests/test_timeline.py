from fractions import Fraction as F

import numpy as np
from hypothesis import given, strategies as st

from outliersched.core import FlowInstance
from outliersched.timeline import (FractionalTimeline, from_slots, gaps, lay, merge, normalize,
                                   overlap, piece_cost, take_back, take_front)


def test_interval_helpers():
    assert merge([(3, 4), (0, 1), (1, 2), (5, 5)]) == [(0, 2), (3, 4)]
    assert lay([(1, 2), (3, 5)], 0, 3) == [(0, 1), (2, 3), (5, 6)]
    assert gaps([(1, 2), (3, 5)], 0, 6) == [(0, 1), (2, 3), (5, 6)]
    assert overlap([(0, 2), (3, 5)], 1, 4) == 2
    assert take_front([(0, 2), (3, 5)], 3) == ([(0, 2), (3, 4)], [(4, 5)])
    assert take_back([(0, 2), (3, 5)], 3) == ([(1, 2), (3, 5)], [(0, 1)])


def test_piece_cost_matches_formula():
    # a contiguous run [r, r + p) of a job with p = ptilde costs exactly p
    for p in (1, 2, 4, 8):
        assert piece_cost(F(3), F(3 + p), p, 3) == p
    assert piece_cost(F(1, 2), F(1), 1, 0) == F(1, 2) * F(1, 2) + F(1, 4)


@st.composite
def fractional(draw):
    n = draw(st.integers(1, 6))
    procs = draw(st.lists(st.integers(1, 8), min_size=n, max_size=n))
    rels = draw(st.lists(st.integers(0, 6), min_size=n, max_size=n))
    inst = FlowInstance.from_lists(procs, rels, 1)
    T = sum(procs) + max(rels) + 1
    ticks = np.zeros((n, T), dtype=np.int64)
    cap = np.full(T, 4)
    for j in range(n):
        want = draw(st.integers(0, 4 * procs[j]))
        for t in range(rels[j], T):
            a = min(want, int(cap[t]), draw(st.integers(0, 4)))
            ticks[j, t] += a
            cap[t] -= a
            want -= a
    return from_slots(inst, ticks, 4)


@given(fractional())
def test_from_slots_is_valid(tl):
    assert tl.check() == []
    assert tl.release_violations() == {}


@given(fractional())
def test_normalize_keeps_mass_and_never_raises_cost(tl):
    out = normalize(tl)
    assert out.ys() == tl.ys()
    assert out.flow() <= tl.flow()
    assert out.check() == [] and out.release_violations() == {}
    assert out.is_packed()
    assert all(out.is_non_alternating(k) for k in out.classes())
    assert normalize(out).pieces == out.pieces


def test_timeline_accessors():
    inst = FlowInstance.from_lists([2, 1], [0, 1], 1)
    tl = FractionalTimeline.from_dict(inst, {0: [(0, 1), (2, 3)], 1: [(1, 2)]})
    assert tl.full() == {0, 1}
    assert tl.processed() == 3 and tl.horizon() == 3
    assert tl.suffix_volume(1, F(2)) == 1
    assert tl.free(0, 4) == [(3, 4)]
