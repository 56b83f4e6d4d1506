"""Correlation-space geometry of the (3, 2, 2) scenario.

Deterministic vertices, LP membership with separating certificates, the
functional exposing the Hardy point, its dual weights, the Bell operator, and
the search for a relabeling onto the Mermin functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

import numpy as np

from .lp import LPError, LPSolution, lp_solve
from .quantum import CORRELATOR_LABELS, CORRELATOR_TERMS, Realization, tensor

TERM_INDEX = {t: k for k, t in enumerate(CORRELATOR_TERMS)}


@dataclass(frozen=True)
class DeterministicBehavior:
    index: int
    assignment: tuple[tuple[int, int], tuple[int, int], tuple[int, int]]  # outcome per party per setting

    @property
    def vertex(self) -> np.ndarray:
        return np.array([_term_value(self.assignment, t) for t in CORRELATOR_TERMS], dtype=float)


def _term_value(assignment, term) -> int:
    v = 1
    for p, s in enumerate(term):
        if s is not None:
            v *= assignment[p][s]
    return v


def deterministic_behaviors() -> list[DeterministicBehavior]:
    """The 64 local deterministic strategies.

    Index k holds the bits (A0, A1, B0, B1, C0, C1) with A0 the most
    significant; bit 0 means outcome +1.
    """
    out = []
    for k in range(64):
        bits = [(k >> (5 - j)) & 1 for j in range(6)]
        signs = [1 - 2 * b for b in bits]
        out.append(DeterministicBehavior(k, ((signs[0], signs[1]), (signs[2], signs[3]), (signs[4], signs[5]))))
    return out


def vertex_matrix() -> np.ndarray:
    """64 x 26 matrix of vertex correlator vectors."""
    return np.array([d.vertex for d in deterministic_behaviors()])


def hardy_point() -> np.ndarray:
    """Correlator vector of the maximal Hardy behavior."""
    v = np.zeros(26)
    v[TERM_INDEX[(0, 1, 0)]] = -1
    v[TERM_INDEX[(1, 0, 0)]] = -1
    v[TERM_INDEX[(0, 0, 1)]] = -1
    v[TERM_INDEX[(1, 1, 1)]] = 1
    return v


@dataclass(frozen=True)
class BellFunctional:
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape != (26,) or not np.isfinite(b).all():
            raise ValueError("a Bell functional is a finite 26-vector")
        object.__setattr__(self, "b", b)

    def __call__(self, correlators) -> float:
        return float(self.b @ np.asarray(correlators, dtype=float))

    def classical_bound(self) -> float:
        return float((vertex_matrix() @ self.b).max())

    def support(self, tol: float = 1e-12) -> dict[str, float]:
        return {CORRELATOR_LABELS[k]: float(self.b[k]) for k in np.nonzero(np.abs(self.b) > tol)[0]}

    @classmethod
    def from_terms(cls, coeffs: dict) -> "BellFunctional":
        """Build from {label or term tuple: coefficient}."""
        b = np.zeros(26)
        for key, c in coeffs.items():
            k = CORRELATOR_LABELS.index(key) if isinstance(key, str) else TERM_INDEX[tuple(key)]
            b[k] += c
        return cls(b)


# Exposing functional of the ideal Hardy point with classical bound 1
HARDY_FUNCTIONAL = BellFunctional.from_terms({"A0B1C0": -0.5, "A1B0C0": -0.5, "A0B0C1": -0.5, "A1B1C1": 0.5})
MERMIN_FUNCTIONAL = BellFunctional.from_terms({"A1B0C0": 0.5, "A0B1C0": 0.5, "A0B0C1": 0.5, "A1B1C1": -0.5})


def _check_target(target) -> np.ndarray:
    t = np.asarray(target, dtype=float).reshape(-1)
    if t.shape != (26,):
        raise ValueError("target must be a 26-vector of correlators")
    if np.abs(t).max() > 1 + 1e-12:
        raise ValueError("correlators must lie in [-1, 1]")
    return t


def _exact_target(target):
    return np.array([Fraction(x).limit_denominator(1 << 20) for x in target], dtype=object)


@dataclass
class ExposingResult:
    functional: BellFunctional
    lp: LPSolution
    weights: np.ndarray  # dual multipliers over the 64 vertices

    @property
    def value(self) -> float:
        return self.lp.value


def exposing_functional(target, exact: bool = True) -> ExposingResult:
    """max b.target s.t. b.P_j <= 1 for all 64 vertices (b free).

    The LP multipliers of the vertex rows form a feasible point of the dual
    program; they are returned as ``weights``.
    """
    t = _check_target(target)
    V = vertex_matrix()
    c = _exact_target(t) if exact else t
    sol = lp_solve(c, A_ub=V.astype(int) if exact else V, b_ub=np.ones(64, dtype=int), nonneg=False, exact=exact)
    if not sol.optimal:
        raise LPError(f"exposing LP is {sol.status}")
    return ExposingResult(BellFunctional(np.asarray(sol.x, dtype=float)), sol, np.asarray(sol.dual_ub, dtype=float))


@dataclass
class DualCertificate:
    value: float
    weights: np.ndarray
    lp: LPSolution
    reconstruction_error: float
    exact_value: Fraction | None = None

    @property
    def support(self) -> list[int]:
        return [int(k) for k in np.nonzero(self.weights > 1e-12)[0]]

    @property
    def gap(self) -> float | None:
        return self.lp.gap


def dual_certificate(target, exact: bool = True) -> DualCertificate:
    """min sum_k y_k s.t. sum_k y_k P_k = target, y >= 0.

    The optimal face need not be a single point; the returned weights are the
    basic optimum reached by Bland pivoting from the all-artificial basis,
    which is deterministic.
    """
    t = _check_target(target)
    V = vertex_matrix()
    sol = _dual_lp(V, t, exact)
    if sol.status == "infeasible":
        raise LPError("target is outside the cone of deterministic vertices")
    if not sol.optimal:
        raise LPError(f"dual LP is {sol.status}")
    y = np.asarray(sol.x, dtype=float)
    err = float(np.abs(V.T @ y - t).max())
    return DualCertificate(float(y.sum()), y, sol, err, sol.exact_value)


def _dual_lp(V, t, exact, cols=None):
    idx = np.arange(V.shape[0]) if cols is None else np.asarray(cols)
    A = V[idx].T
    if exact:
        c = np.array([Fraction(-1)] * len(idx), dtype=object)
        sol = lp_solve(c, A_eq=A.astype(int), b_eq=_exact_target(t), nonneg=True, exact=True)
    else:
        sol = lp_solve(-np.ones(len(idx)), A_eq=A, b_eq=t, nonneg=True)
    if sol.optimal:
        full = np.zeros(V.shape[0], dtype=object if exact else float)
        if exact:
            full[...] = Fraction(0)
        full[idx] = sol.x
        sol.x = full
        sol.value = -sol.value
        sol.dual_value = -sol.dual_value
        sol.gap = -sol.gap
        if exact:
            sol.exact_value = -sol.exact_value
    return sol


@dataclass
class MembershipResult:
    local: bool
    weights: np.ndarray | None  # convex weights over vertices when local
    separating: BellFunctional | None  # beta with beta.P_j <= bound < beta.target when nonlocal
    bound: float | None
    violation: float | None
    lp: LPSolution


def membership(target, exact: bool = False) -> MembershipResult:
    """Decide whether the correlator vector is a convex mixture of the 64 vertices.

    An infeasible LP yields a Farkas certificate, which is converted to a Bell
    inequality beta.P <= bound that the target violates.
    """
    t = _check_target(target)
    V = vertex_matrix()
    A = np.vstack([V.T, np.ones(64)])
    if exact:
        b = np.concatenate([_exact_target(t), [Fraction(1)]])
        sol = lp_solve(np.array([Fraction(0)] * 64, dtype=object), A_eq=A.astype(int), b_eq=b, nonneg=True, exact=True)
    else:
        sol = lp_solve(np.zeros(64), A_eq=A, b_eq=np.concatenate([t, [1.0]]), nonneg=True)
    if sol.optimal:
        return MembershipResult(True, np.asarray(sol.x, dtype=float), None, None, None, sol)
    if sol.status != "infeasible":
        raise LPError(f"membership LP is {sol.status}")
    _, v = sol.farkas
    v = np.asarray(v, dtype=float)
    # V v_corr + v0 >= 0 on every vertex while t.v_corr + v0 < 0
    beta = BellFunctional(-v[:26])
    bound = float(v[26])
    return MembershipResult(False, None, beta, bound, beta(t) - bound, sol)


def is_local(target, exact: bool = False) -> bool:
    return membership(target, exact).local


def bell_operator(f: BellFunctional, r: Realization) -> np.ndarray:
    """W = sum_j b_j G_j with G_j the products listed in CORRELATOR_TERMS."""
    if r.parties != 3:
        raise ValueError("the Bell operator is defined for three parties")
    dim = int(np.prod(r.dims))
    W = np.zeros((dim, dim), dtype=complex)
    for bj, term in zip(f.b, CORRELATOR_TERMS):
        if bj == 0:
            continue
        factors = [np.eye(d) if s is None else r.observables[p][s] for p, (s, d) in enumerate(zip(term, r.dims))]
        W += bj * tensor(factors)
    return W


@dataclass(frozen=True)
class Relabeling:
    perm: tuple[int, int, int]  # new party q takes old party perm[q]
    swaps: tuple[int, int, int]  # setting exchange per (old) party
    flips: tuple[tuple[int, int], ...]  # outcome flip per (old) party per (old) setting

    def apply(self, f: BellFunctional) -> BellFunctional:
        g = np.zeros(26)
        for k, term in enumerate(CORRELATOR_TERMS):
            if f.b[k] == 0:
                continue
            sign = 1
            for p, s in enumerate(term):
                if s is not None and self.flips[p][s]:
                    sign = -sign
            moved = [None] * 3
            for q in range(3):
                s = term[self.perm[q]]
                moved[q] = None if s is None else s ^ self.swaps[self.perm[q]]
            g[TERM_INDEX[tuple(moved)]] += sign * f.b[k]
        return BellFunctional(g)

    def to_dict(self) -> dict:
        return {"perm": list(self.perm), "swaps": list(self.swaps), "flips": [list(x) for x in self.flips]}


def relabelings():
    """All 6 * 8 * 64 relabelings, identity first."""
    for perm in permutations(range(3)):
        for swaps in product((0, 1), repeat=3):
            for bits in product((0, 1), repeat=6):
                yield Relabeling(perm, swaps, ((bits[0], bits[1]), (bits[2], bits[3]), (bits[4], bits[5])))


def mermin_equivalence(f: BellFunctional, tol: float = 1e-12) -> tuple[bool, Relabeling | None]:
    target = MERMIN_FUNCTIONAL.b
    for rl in relabelings():
        if np.abs(rl.apply(f).b - target).max() <= tol:
            return True, rl
    return False, None
