"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves

    maximize    c.x
    subject to  A_ub x <= b_ub,   A_eq x = b_eq,   x free or x >= 0

and returns primal and dual solutions.  Infeasible programs come back with a
Farkas certificate, unbounded ones with a recession ray.  With
``exact=True`` all pivots are carried out in rational arithmetic, which is
practical for the small integer programs of the 26-dimensional correlation
polytope.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class LPError(RuntimeError):
    pass


@dataclass
class LPSolution:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: float | None = None
    x: np.ndarray | None = None
    dual_ub: np.ndarray | None = None  # multipliers u >= 0 of the <= rows
    dual_eq: np.ndarray | None = None  # multipliers v of the = rows
    dual_value: float | None = None
    gap: float | None = None
    farkas: tuple[np.ndarray, np.ndarray] | None = None
    ray: np.ndarray | None = None
    iterations: int = 0
    exact_value: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _as_2d(a, ncols):
    if a is None:
        return np.zeros((0, ncols))
    a = np.asarray(a)
    return a.reshape(-1, ncols)


class _Tableau:
    def __init__(self, table, basis, exact, tol):
        self.t = table
        self.basis = basis
        self.exact = exact
        self.tol = tol
        self.iterations = 0

    def pivot(self, r, c):
        t = self.t
        t[r] = t[r] / t[r, c]
        col = t[:, c].copy()
        col[r] = 0
        nz = np.nonzero(col != 0)[0] if self.exact else np.nonzero(np.abs(col) > 0)[0]
        for i in nz:
            t[i] = t[i] - col[i] * t[r]
        if not self.exact:
            t[np.abs(t) < 1e-14] = 0.0
        self.basis[r] = c
        self.iterations += 1

    def run(self, allowed):
        """Bland's rule on the objective row (last row). Returns 'optimal' or an unbounded column."""
        t = self.t
        m = t.shape[0] - 1
        while True:
            red = t[-1, :-1]
            entering = None
            for j in allowed:
                if red[j] < -self.tol:
                    entering = j
                    break
            if entering is None:
                return None
            col = t[:m, entering]
            best = None
            for i in range(m):
                if col[i] > self.tol:
                    ratio = t[i, -1] / col[i]
                    if (
                        best is None
                        or ratio < best[0] - (0 if self.exact else self.tol * 1e-3)
                        or (abs(ratio - best[0]) <= (0 if self.exact else self.tol * 1e-3) and self.basis[i] < self.basis[best[1]])
                    ):
                        best = (ratio, i)
            if best is None:
                return entering
            self.pivot(best[1], entering)


def lp_solve(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    nonneg=False,
    exact: bool = False,
    tol: float = 1e-10,
) -> LPSolution:
    """Maximize c.x subject to A_ub x <= b_ub and A_eq x = b_eq.

    ``nonneg`` may be a bool or a per-variable boolean array; variables
    without the sign restriction are free.
    """
    c = np.asarray(c)
    n = c.shape[0]
    A_ub = _as_2d(A_ub, n)
    A_eq = _as_2d(A_eq, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub).reshape(-1)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq).reshape(-1)
    if A_ub.shape[0] != b_ub.shape[0] or A_eq.shape[0] != b_eq.shape[0]:
        raise ValueError("constraint matrix and right-hand side sizes differ")
    nonneg = np.broadcast_to(np.asarray(nonneg, dtype=bool), (n,))
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    if exact:
        conv = np.vectorize(lambda v: Fraction(v) if not isinstance(v, Fraction) else v, otypes=[object])
        zero, one = Fraction(0), Fraction(1)
        tol = 0
    else:
        conv = lambda a: np.asarray(a, dtype=float)  # noqa: E731
        zero, one = 0.0, 1.0

    # standard form columns: x parts (split free vars), slacks, artificials
    col_of = []  # (var, sign)
    for j in range(n):
        col_of.append((j, 1))
        if not nonneg[j]:
            col_of.append((j, -1))
    nx = len(col_of)
    ncols = nx + m_ub + m

    A = np.vstack([A_ub, A_eq]) if m else np.zeros((0, n))
    b = np.concatenate([b_ub, b_eq])
    A = conv(A) if m else A
    b = conv(b) if m else b
    cc = conv(c)

    table = np.empty((m + 1, ncols + 1), dtype=object if exact else float)
    table[...] = zero
    row_sign = []
    for i in range(m):
        s = -1 if b[i] < 0 else 1
        row_sign.append(s)
        for k, (j, sg) in enumerate(col_of):
            table[i, k] = A[i, j] * sg * s
        if i < m_ub:
            table[i, nx + i] = one * s
        table[i, nx + m_ub + i] = one
        table[i, -1] = b[i] * s
    art = list(range(nx + m_ub, ncols))
    basis = list(art)

    # phase 1: minimize the sum of artificials
    for k in range(nx + m_ub):
        acc = zero
        for i in range(m):
            acc = acc - table[i, k]
        table[m, k] = acc
    acc = zero
    for i in range(m):
        acc = acc - table[i, -1]
    table[m, -1] = acc
    tab = _Tableau(table, basis, exact, tol)
    structural = list(range(nx + m_ub))
    tab.run(structural)
    phase1 = -table[m, -1]
    if phase1 > (0 if exact else max(tol, 1e-9)):
        y = np.array([one - table[m, a] for a in art], dtype=object if exact else float)
        y = y * np.array(row_sign)
        u, v = -y[:m_ub], -y[m_ub:]
        return LPSolution(
            status="infeasible",
            farkas=(_out(u, exact), _out(v, exact)),
            iterations=tab.iterations,
        )

    # drive zero-level artificials out of the basis; rows that cannot pivot are redundant
    keep_rows = []
    for r in range(m):
        if tab.basis[r] in art:
            cand = [k for k in structural if (table[r, k] != 0 if exact else abs(table[r, k]) > 1e-9)]
            if cand:
                tab.pivot(r, cand[0])
                keep_rows.append(r)
        else:
            keep_rows.append(r)
    if len(keep_rows) < m:
        table = np.vstack([table[keep_rows], table[m : m + 1]])
        tab.t = table
        tab.basis = [tab.basis[r] for r in keep_rows]
    mr = table.shape[0] - 1

    # phase 2 objective: minimize -c over the standard-form columns
    cost = [zero] * ncols
    for k, (j, sg) in enumerate(col_of):
        cost[k] = -cc[j] * sg
    for k in range(ncols):
        acc = cost[k]
        for i in range(mr):
            cb = cost[tab.basis[i]]
            if cb != 0:
                acc = acc - cb * table[i, k]
        table[mr, k] = acc
    acc = zero
    for i in range(mr):
        cb = cost[tab.basis[i]]
        if cb != 0:
            acc = acc - cb * table[i, -1]
    table[mr, -1] = acc

    unbounded_col = tab.run(structural)
    if unbounded_col is not None:
        ray = np.zeros(n, dtype=object if exact else float)
        ray[...] = zero
        k = unbounded_col
        if k < nx:
            j, sg = col_of[k]
            ray[j] += sg
        for i in range(mr):
            bk = tab.basis[i]
            if bk < nx:
                j, sg = col_of[bk]
                ray[j] -= table[i, k] * sg
        return LPSolution(status="unbounded", ray=_out(ray, exact), iterations=tab.iterations)

    z = [zero] * ncols
    for i in range(mr):
        z[tab.basis[i]] = table[i, -1]
    x = np.empty(n, dtype=object if exact else float)
    x[...] = zero
    for k, (j, sg) in enumerate(col_of):
        x[j] = x[j] + sg * z[k]
    y = np.array([-table[mr, a] for a in art], dtype=object if exact else float) * np.array(row_sign)
    u, v = -y[:m_ub], -y[m_ub:]
    value = sum((cc[j] * x[j] for j in range(n)), zero)
    dual_value = sum((b[i] * (u[i] if i < m_ub else v[i - m_ub]) for i in range(m)), zero)
    sol = LPSolution(
        status="optimal",
        value=float(value),
        x=_out(x, exact),
        dual_ub=_out(u, exact),
        dual_eq=_out(v, exact),
        dual_value=float(dual_value),
        gap=float(dual_value - value),
        iterations=tab.iterations,
        exact_value=value if exact else None,
    )
    return sol


def _out(a, exact):
    if exact:
        return np.array([Fraction(v) for v in a], dtype=object)
    return np.asarray(a, dtype=float)


def check_certificate(sol: LPSolution, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, nonneg=False, tol=1e-9) -> dict:
    """Independent residuals of a returned solution: primal/dual feasibility and complementary slackness."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    A_ub = _as_2d(A_ub, n).astype(float)
    A_eq = _as_2d(A_eq, n).astype(float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    nonneg = np.broadcast_to(np.asarray(nonneg, dtype=bool), (n,))
    if sol.status == "infeasible":
        u, v = (np.asarray(a, dtype=float) for a in sol.farkas)
        combo = A_ub.T @ u + A_eq.T @ v
        lhs = np.where(nonneg, np.minimum(combo, 0), np.abs(combo))
        return {
            "u_nonneg": float(min(u.min(initial=0.0), 0.0)),
            "combo_residual": float(np.max(np.abs(lhs), initial=0.0)),
            "rhs": float(b_ub @ u + b_eq @ v),
        }
    x = np.asarray(sol.x, dtype=float)
    u = np.asarray(sol.dual_ub, dtype=float)
    v = np.asarray(sol.dual_eq, dtype=float)
    slack = b_ub - A_ub @ x
    reduced = A_ub.T @ u + A_eq.T @ v - c
    return {
        "primal_ub": float(max(-slack.min(initial=0.0), 0.0)),
        "primal_eq": float(np.max(np.abs(A_eq @ x - b_eq), initial=0.0)),
        "dual_sign": float(max(-u.min(initial=0.0), 0.0)),
        "dual_eq": float(np.max(np.abs(np.where(nonneg, np.minimum(reduced, 0), reduced)), initial=0.0)),
        "complementarity": float(np.max(np.abs(u * slack), initial=0.0)),
        "gap": float(b_ub @ u + b_eq @ v - c @ x),
    }
