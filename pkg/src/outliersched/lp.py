"""Dense linear programming: a two-phase tableau simplex and a cutting-plane driver.

The simplex prices with Dantzig's rule and switches to Bland's rule as soon as
it sees a run of degenerate pivots, which rules out cycling.  ``rule="bland"``
forces Bland's rule throughout.  Models too large for a dense tableau can be
routed to HiGHS via ``method="highs"`` (``"auto"`` picks by size).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.sparse as sp

TOL = 1e-7
_PIVOT_EPS = 1e-9
_DEGENERATE_RUN = 20
AUTO_DENSE_LIMIT = 400_000  # tableau cells


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITER_LIMIT = "IterLimit"
    CUT_LIMIT = "CutLimit"


LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class LpModel:
    """minimize c.x  s.t.  A x (senses) b,  lo <= x <= hi.

    ``A`` is kept in CSR form; bounds may be +-inf.
    """

    c: np.ndarray
    A: sp.csr_matrix
    senses: tuple
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        n = len(self.c)
        if self.A.shape[1] != n and self.A.shape[0] > 0:
            raise ValueError("row coefficient count must equal variable count")
        if len(self.senses) != self.A.shape[0] or len(self.b) != self.A.shape[0]:
            raise ValueError("one sense and one rhs per row")
        if len(self.lo) != n or len(self.hi) != n:
            raise ValueError("one bound pair per variable")
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)) or np.any(self.lo > self.hi):
            raise ValueError("invalid bounds")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise ValueError(f"unknown relation {s!r}")

    @property
    def num_vars(self) -> int:
        return len(self.c)

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def with_row(self, coeffs, sense: str, rhs: float) -> "LpModel":
        """Return a copy with one extra constraint (dense vector or {index: coeff})."""
        row = np.zeros(self.num_vars)
        if isinstance(coeffs, dict):
            for k, v in coeffs.items():
                row[k] += v
        else:
            row[:] = coeffs
        A = sp.vstack([self.A, sp.csr_matrix(row)], format="csr")
        return replace(self, A=A, senses=self.senses + (sense,), b=np.append(self.b, rhs))

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of ``x``."""
        act = self.row_activity(x)
        viol = 0.0
        for s, a, r in zip(self.senses, act, self.b):
            if s == LE:
                viol = max(viol, a - r)
            elif s == GE:
                viol = max(viol, r - a)
            else:
                viol = max(viol, abs(a - r))
        viol = max(viol, float(np.max(self.lo - x, initial=0.0)), float(np.max(x - self.hi, initial=0.0)))
        return viol


class LpBuilder:
    """Incremental construction of an :class:`LpModel` from sparse rows."""

    def __init__(self):
        self._c: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._names: list = []
        self._rows: list[dict[int, float]] = []
        self._senses: list[str] = []
        self._rhs: list[float] = []

    def var(self, name=None, lo=0.0, hi=np.inf, cost=0.0) -> int:
        self._c.append(cost)
        self._lo.append(lo)
        self._hi.append(hi)
        self._names.append(name)
        return len(self._c) - 1

    def set_cost(self, var: int, cost: float):
        self._c[var] = cost

    def row(self, coeffs: dict[int, float], sense: str, rhs: float) -> int:
        self._rows.append(dict(coeffs))
        self._senses.append(sense)
        self._rhs.append(rhs)
        return len(self._rows) - 1

    @property
    def num_vars(self) -> int:
        return len(self._c)

    def build(self) -> LpModel:
        n = len(self._c)
        data, indices, indptr = [], [], [0]
        for r in self._rows:
            for k in sorted(r):
                if r[k] != 0:
                    indices.append(k)
                    data.append(r[k])
            indptr.append(len(indices))
        A = sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64),
                           np.array(indptr, dtype=np.int64)), shape=(len(self._rows), n))
        return LpModel(np.array(self._c, dtype=float), A, tuple(self._senses),
                       np.array(self._rhs, dtype=float), np.array(self._lo, dtype=float),
                       np.array(self._hi, dtype=float), tuple(self._names))


@dataclass
class LpSolution:
    status: Status
    x: Optional[np.ndarray] = None
    objective: float = float("nan")
    iterations: int = 0
    cuts: int = 0
    method: str = "simplex"
    model: Optional[LpModel] = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# dense tableau simplex


def _standardize(model: LpModel):
    """Rewrite as  min c'z,  A'z (senses) b',  z >= 0  and return a back-map."""
    n = model.num_vars
    A = model.A.toarray() if model.num_rows else np.zeros((0, n))
    cols = []  # (kind, original index); kinds: "lo" z=x-lo, "hi" z=hi-x, "free+" / "free-"
    blocks = []
    offset = np.zeros(n)
    cost = []
    const = 0.0
    extra_rows = []
    for k in range(n):
        lo, hi = model.lo[k], model.hi[k]
        if np.isfinite(lo):
            offset[k] = lo
            cols.append(("lo", k))
            blocks.append(A[:, k])
            cost.append(model.c[k])
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[k] = hi
            cols.append(("hi", k))
            blocks.append(-A[:, k])
            cost.append(-model.c[k])
        else:
            cols.append(("free+", k))
            blocks.append(A[:, k])
            cost.append(model.c[k])
            cols.append(("free-", k))
            blocks.append(-A[:, k])
            cost.append(-model.c[k])
        const += model.c[k] * offset[k]
    nz = len(cols)
    As = np.column_stack(blocks) if blocks else np.zeros((model.num_rows, 0))
    b = model.b - A @ offset
    senses = list(model.senses)
    if extra_rows:
        ub = np.zeros((len(extra_rows), nz))
        for r, (col, val) in enumerate(extra_rows):
            ub[r, col] = 1.0
        As = np.vstack([As, ub])
        b = np.concatenate([b, [v for _, v in extra_rows]])
        senses += [LE] * len(extra_rows)
    return As, np.array(senses, dtype=object), b, np.array(cost), const, cols, offset


def _pivot(T: np.ndarray, r: int, c: int):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    nzr = np.nonzero(np.abs(col) > 0)[0]
    if len(nzr):
        T[nzr] -= np.outer(col[nzr], T[r])


def _run(T, basis, ncols, limit, rule, counter):
    """Optimize the tableau in place over the first ``ncols`` columns.

    Row -1 of ``T`` holds reduced costs; column -1 holds the rhs.
    Returns "optimal", "unbounded" or "limit".
    """
    degenerate = 0
    use_bland = rule == "bland"
    m = T.shape[0] - 1
    while True:
        if counter[0] >= limit:
            return "limit"
        red = T[-1, :ncols]
        if use_bland:
            cand = np.nonzero(red < -_PIVOT_EPS)[0]
            if len(cand) == 0:
                return "optimal"
            c = int(cand[0])
        else:
            c = int(np.argmin(red))
            if red[c] >= -_PIVOT_EPS:
                return "optimal"
        colv = T[:m, c]
        pos = np.nonzero(colv > _PIVOT_EPS)[0]
        if len(pos) == 0:
            return "unbounded"
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * (1 + abs(best))]
        # Bland's leaving rule: smallest basic variable index among ties
        r = int(ties[np.argmin(basis[ties])])
        if best <= 1e-12:
            degenerate += 1
            if degenerate >= _DEGENERATE_RUN:
                use_bland = True
        else:
            degenerate = 0
            use_bland = rule == "bland"
        _pivot(T, r, c)
        basis[r] = c
        counter[0] += 1


def simplex(model: LpModel, rule: str = "dantzig", max_iter: int | None = None) -> LpSolution:
    """Solve ``model`` with the two-phase dense tableau method."""
    As, senses, b, cost, const, cols, offset = _standardize(model)
    m, nz = As.shape
    limit = max_iter if max_iter is not None else 50 * (m + nz + 1)
    # rows with negative rhs are negated
    neg = b < 0
    As[neg] *= -1
    b = np.where(neg, -b, b)
    flip = {LE: GE, GE: LE, EQ: EQ}
    senses = np.array([flip[s] if f else s for s, f in zip(senses, neg)], dtype=object)

    n_slack = int(np.sum(senses != EQ))
    n_art = int(np.sum(senses != LE))
    width = nz + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, :nz] = As
    T[:m, -1] = b
    basis = np.zeros(m, dtype=np.int64)
    s_col, a_col = nz, nz + n_slack
    art_cols = []
    for r in range(m):
        if senses[r] == LE:
            T[r, s_col] = 1.0
            basis[r] = s_col
            s_col += 1
        else:
            if senses[r] == GE:
                T[r, s_col] = -1.0
                s_col += 1
            T[r, a_col] = 1.0
            basis[r] = a_col
            art_cols.append(a_col)
            a_col += 1
    counter = [0]

    if art_cols:
        # phase 1 objective: sum of artificials, priced out against the basis
        T[-1, :] = 0.0
        T[-1, art_cols] = 1.0
        for r in range(m):
            if basis[r] >= nz + n_slack:
                T[-1] -= T[r]
        res = _run(T, basis, width, limit, rule, counter)
        if res == "limit":
            return LpSolution(Status.ITER_LIMIT, iterations=counter[0], model=model)
        if -T[-1, -1] > TOL * (1 + np.abs(b).max(initial=0.0)):
            return LpSolution(Status.INFEASIBLE, iterations=counter[0], model=model)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= nz + n_slack:
                cand = np.nonzero(np.abs(T[r, :nz + n_slack]) > _PIVOT_EPS)[0]
                if len(cand):
                    _pivot(T, r, int(cand[0]))
                    basis[r] = int(cand[0])
                else:
                    keep[r] = False
        T = np.vstack([T[:m][keep], T[-1:]])
        basis = basis[keep]
        m = len(basis)
        T = np.delete(T, np.arange(nz + n_slack, width), axis=1)
        width = nz + n_slack

    T[-1, :] = 0.0
    T[-1, :nz] = cost
    for r in range(m):
        cb = T[-1, basis[r]]
        if cb != 0.0:
            T[-1] -= cb * T[r]
    res = _run(T, basis, width, limit, rule, counter)
    if res == "limit":
        return LpSolution(Status.ITER_LIMIT, iterations=counter[0], model=model)
    if res == "unbounded":
        return LpSolution(Status.UNBOUNDED, iterations=counter[0], model=model)

    z = np.zeros(width)
    z[basis] = T[:m, -1]
    x = offset.copy()
    for idx, (kind, k) in enumerate(cols):
        if kind == "lo":
            x[k] = offset[k] + z[idx]
        elif kind == "hi":
            x[k] = offset[k] - z[idx]
        elif kind == "free+":
            x[k] = z[idx]
        else:
            x[k] -= z[idx]
    obj = float(model.c @ x)
    return LpSolution(Status.OPTIMAL, x, obj, counter[0], model=model)


def _highs(model: LpModel) -> LpSolution:
    from scipy.optimize import linprog

    A = model.A
    le = [i for i, s in enumerate(model.senses) if s == LE]
    ge = [i for i, s in enumerate(model.senses) if s == GE]
    eq = [i for i, s in enumerate(model.senses) if s == EQ]
    A_ub = sp.vstack([A[le], -A[ge]], format="csr") if le or ge else None
    b_ub = np.concatenate([model.b[le], -model.b[ge]]) if le or ge else None
    A_eq = A[eq] if eq else None
    b_eq = model.b[eq] if eq else None
    bounds = list(zip(np.where(np.isfinite(model.lo), model.lo, None),
                      np.where(np.isfinite(model.hi), model.hi, None)))
    res = linprog(model.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": 1e-9,
                                           "dual_feasibility_tolerance": 1e-9})
    status = {0: Status.OPTIMAL, 1: Status.ITER_LIMIT, 2: Status.INFEASIBLE,
              3: Status.UNBOUNDED}.get(res.status, Status.ITER_LIMIT)
    if status is not Status.OPTIMAL:
        return LpSolution(status, method="highs", model=model)
    return LpSolution(Status.OPTIMAL, res.x, float(res.fun), int(res.nit), method="highs",
                      model=model)


def solve(model: LpModel, method: str = "auto", rule: str = "dantzig") -> LpSolution:
    """Solve ``model``; ``method`` is "simplex", "highs" or "auto"."""
    if method == "auto":
        cells = (model.num_rows + 1) * (model.num_vars + model.num_rows + 1)
        method = "simplex" if cells <= AUTO_DENSE_LIMIT else "highs"
    if method == "highs":
        return _highs(model)
    if method != "simplex":
        raise ValueError(f"unknown method {method!r}")
    return simplex(model, rule=rule)


Cut = tuple  # (coeffs: dict | ndarray, sense, rhs)


def cut_loop(model: LpModel, separator: Callable[[LpSolution], Optional[Cut]],
             max_cuts: int, method: str = "auto", rule: str = "dantzig") -> LpSolution:
    """Re-solve ``model`` while ``separator`` returns violated rows.

    Returns the first solution admitting no cut, any non-optimal status from the
    solver, or status ``CutLimit`` once ``max_cuts`` cuts have been added and the
    separator still reports a violation.  The returned ``model`` carries the cuts.
    """
    cuts = 0
    while True:
        sol = solve(model, method=method, rule=rule)
        sol.cuts = cuts
        if not sol.optimal:
            return sol
        cut = separator(sol)
        if cut is None:
            return sol
        if cuts >= max_cuts:
            sol.status = Status.CUT_LIMIT
            return sol
        model = model.with_row(*cut)
        cuts += 1


def dump_model(model: LpModel, path) -> None:
    """Write a plain-text listing of ``model`` for failure triage."""
    with open(path, "w") as fh:
        fh.write(f"vars {model.num_vars} rows {model.num_rows}\n")
        for k in range(model.num_vars):
            name = model.names[k] if k < len(model.names) else None
            fh.write(f"v {k} {name} [{model.lo[k]}, {model.hi[k]}] c={model.c[k]}\n")
        for r in range(model.num_rows):
            row = model.A.getrow(r)
            terms = " ".join(f"{v:+g}*v{k}" for k, v in zip(row.indices, row.data))
            fh.write(f"r {r}: {terms} {model.senses[r]} {model.b[r]}\n")


def feasible_within(model: LpModel, x: Iterable[float], tol: float = TOL) -> bool:
    return model.max_violation(np.asarray(x, dtype=float)) <= tol
