import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from outliersched.lp import (EQ, GE, LE, LpBuilder, Status, cut_loop, dump_model,
                             feasible_within, simplex, solve)


def vertex_oracle(c, A, senses, b, box):
    """Brute force over vertices of {A x (senses) b, 0 <= x <= box}."""
    n = len(c)
    rows = [(A[i], b[i]) for i in range(len(b))]
    rows += [(np.eye(n)[k], 0.0) for k in range(n)] + [(np.eye(n)[k], box) for k in range(n)]
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[i][0] for i in combo])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, np.array([rows[i][1] for i in combo]))
        act = A @ x
        ok = np.all(x >= -1e-7) and np.all(x <= box + 1e-7)
        for s, a, r in zip(senses, act, b):
            ok &= (a <= r + 1e-7) if s == LE else (a >= r - 1e-7) if s == GE else abs(a - r) <= 1e-7
        if ok and (best is None or c @ x < best - 1e-12):
            best = float(c @ x)
    return best


def build(c, A, senses, b, box):
    lb = LpBuilder()
    xs = [lb.var(f"x{k}", 0.0, box, cost=c[k]) for k in range(len(c))]
    for row, s, r in zip(A, senses, b):
        lb.row({xs[k]: row[k] for k in range(len(c))}, s, r)
    return lb.build()


def test_single_bound():
    lb = LpBuilder()
    x = lb.var("x", cost=1.0)
    lb.row({x: 1.0}, GE, 3.0)
    sol = simplex(lb.build())
    assert sol.optimal and sol.x[x] == pytest.approx(3.0)


def test_empty_polytope():
    lb = LpBuilder()
    x = lb.var("x", cost=1.0)
    lb.row({x: 1.0}, LE, -1.0)
    assert simplex(lb.build()).status is Status.INFEASIBLE


def test_unbounded():
    lb = LpBuilder()
    x = lb.var("x", cost=-1.0)
    lb.row({x: 1.0}, GE, 1.0)
    assert simplex(lb.build()).status is Status.UNBOUNDED


def test_free_and_negative_bounds():
    lb = LpBuilder()
    x = lb.var("x", -np.inf, np.inf, cost=1.0)
    y = lb.var("y", -5.0, -1.0, cost=-1.0)
    lb.row({x: 1.0, y: 1.0}, GE, -2.0)
    sol = simplex(lb.build())
    assert sol.optimal
    assert sol.x[y] == pytest.approx(-1.0) and sol.x[x] == pytest.approx(-1.0)


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling LP
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    lb = LpBuilder()
    xs = [lb.var(cost=v) for v in c]
    for row, r in zip(A, [0, 0, 1]):
        lb.row(dict(zip(xs, row)), LE, r)
    for rule in ("dantzig", "bland"):
        sol = simplex(lb.build(), rule=rule)
        assert sol.optimal and sol.objective == pytest.approx(-0.05)


def test_auto_routes_large_models_to_highs():
    lb = LpBuilder()
    xs = [lb.var(cost=1.0) for _ in range(700)]
    for i in range(700):
        lb.row({xs[i]: 1.0}, GE, 1.0)
    sol = solve(lb.build())
    assert sol.method == "highs" and sol.objective == pytest.approx(700)


def test_cut_loop_adds_rows_until_separator_is_silent():
    lb = LpBuilder()
    x = lb.var("x", 0, 10, cost=1.0)
    model = lb.build()

    def sep(sol):
        return ({x: 1.0}, GE, sol.x[x] + 1) if sol.x[x] < 3 - 1e-9 else None

    sol = cut_loop(model, sep, max_cuts=10)
    assert sol.optimal and sol.cuts == 3 and sol.x[x] == pytest.approx(3)
    capped = cut_loop(model, sep, max_cuts=1)
    assert capped.status is Status.CUT_LIMIT


def test_dump_model(tmp_path):
    lb = LpBuilder()
    x = lb.var("x", cost=1.0)
    lb.row({x: 2.0}, EQ, 4.0)
    p = tmp_path / "m.txt"
    dump_model(lb.build(), p)
    assert "+2*v0 = 4.0" in p.read_text()


coef = st.integers(-4, 4).map(float)


@st.composite
def small_lp(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    c = np.array(draw(st.lists(coef, min_size=n, max_size=n)))
    A = np.array([draw(st.lists(coef, min_size=n, max_size=n)) for _ in range(m)])
    senses = draw(st.lists(st.sampled_from([LE, GE, EQ]), min_size=m, max_size=m))
    b = np.array(draw(st.lists(st.integers(-6, 6).map(float), min_size=m, max_size=m)))
    return c, A, senses, b, 5.0


@given(small_lp())
def test_simplex_matches_vertex_enumeration(lp):
    c, A, senses, b, box = lp
    expected = vertex_oracle(c, A, senses, b, box)
    model = build(c, A, senses, b, box)
    for method in ("simplex", "highs"):
        sol = solve(model, method=method)
        if expected is None:
            assert sol.status is Status.INFEASIBLE
        else:
            assert sol.optimal
            assert sol.objective == pytest.approx(expected, abs=1e-6)
            assert feasible_within(model, sol.x, 1e-6)


@given(small_lp())
def test_bland_and_dantzig_agree(lp):
    model = build(*lp)
    a, b = simplex(model, rule="dantzig"), simplex(model, rule="bland")
    assert a.status == b.status
    if a.optimal:
        assert a.objective == pytest.approx(b.objective, abs=1e-6)
