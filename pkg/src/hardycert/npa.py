"""NPA moment relaxations for the tripartite Hardy scenario and the robustness sweeps.

Moments are real: Gamma[u, v] = Re <u^dagger v>, so a word and its adjoint
share one variable.  Objective or constraint words that the moment matrix
of the chosen level does not contain become extra scalar variables with
the bound |m| <= 1 (every word is a product of unitaries).  This keeps the
relaxation sound and nested in the level; such words are listed in the
result as ``uncovered``.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from . import words as W
from .quantum import Realization
from .sdp import SDPProblem, SDPSolution, SparseBlock, sdp_solve

MAX_LEVEL = 4
PARTIES = 3
P_MAX = 1 / 8
CSV_HEADER = ("eps1", "eps2", "level", "value", "status", "gap", "iterations", "runtime_ms")


@dataclass(frozen=True)
class WordIndex:
    level: int
    words: tuple[W.Word, ...]

    @property
    def lookup(self) -> dict[W.Word, int]:
        return {w: k for k, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)


def build_words(level: int, parties: int = PARTIES) -> WordIndex:
    if not 1 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 1..{MAX_LEVEL}, got {level}")
    return WordIndex(level, tuple(W.words_up_to(parties, level)))


@dataclass
class HardyConstraints:
    eps1: float
    eps2: float
    equality: W.Poly  # P(+++|ZZZ), fixed to 1/8 - eps1
    zeros: tuple[W.Poly, ...]  # each <= eps2

    @property
    def target(self) -> float:
        return P_MAX - self.eps1


def hardy_constraints(eps1: float, eps2: float) -> HardyConstraints:
    if not 0 <= eps1 <= P_MAX:
        raise ValueError("eps1 must lie in [0, 1/8]")
    if eps2 < 0:
        raise ValueError("eps2 must be nonnegative")
    P = W.product_projector
    zeros = (
        P("XZZ", (1, 1, 1)),
        P("ZXZ", (1, 1, 1)),
        P("ZZX", (1, 1, 1)),
        P("XXX", (-1, -1, -1)),
    )
    return HardyConstraints(float(eps1), float(eps2), P("ZZZ", (1, 1, 1)), zeros)


@dataclass
class MomentProblem:
    index: WordIndex
    keys: list[W.Word]  # variable k <-> moment of keys[k]
    key_pos: dict[W.Word, int]
    uncovered: list[W.Word]
    sdp: SDPProblem
    full: SparseBlock  # the whole moment matrix; sdp.blocks[0] may be a principal submatrix of it
    kept: np.ndarray  # word indices of sdp.blocks[0]
    kernel: np.ndarray | None = None  # vectors every feasible Gamma annihilates

    def moment_vector(self, r: Realization) -> np.ndarray:
        """Real moments of a realization in variable order."""
        ops = r.box_operators()
        rho = r.rho
        return np.array([W.expectation({k: 1.0}, ops, rho).real for k in self.keys])

    def gamma(self, x: np.ndarray) -> np.ndarray:
        blk = self.full
        out = blk.F0.copy()
        np.add.at(out, (blk.rows, blk.cols), blk.vals * x[blk.var])
        return out

    def slack(self, x: np.ndarray) -> np.ndarray:
        return self.sdp.lin_f0 + self.sdp.lin_F @ x

    def equality_residual(self, x: np.ndarray) -> np.ndarray:
        return self.sdp.A @ x - self.sdp.b


def _linear(p: Mapping[W.Word, complex], key_pos, new_keys) -> tuple[float, dict[int, float]]:
    const = 0.0
    coeffs: dict[int, float] = {}
    for w, c in W.canonicalize(p).items():
        if abs(np.imag(c)) > 1e-12:
            raise ValueError(f"polynomial is not Hermitian at {w}")
        c = float(np.real(c))
        if w == W.identity(len(w)):
            const += c
            continue
        if w not in key_pos:
            key_pos[w] = len(key_pos)
            new_keys.append(w)
        coeffs[key_pos[w]] = coeffs.get(key_pos[w], 0.0) + c
    return const, coeffs


def _row(coeffs: Mapping[int, float], m: int) -> np.ndarray:
    row = np.zeros(m)
    for k, v in coeffs.items():
        row[k] = v
    return row


def zero_kernel(index: WordIndex, cons: HardyConstraints) -> np.ndarray:
    """Coefficient vectors of u * Pi_i for the zero projectors Pi_i.

    When <Pi_i> = 0, <(u Pi_i)^dagger (u Pi_i)> = <Pi_i> = 0 for every word
    u, so Gamma v = 0 for the coefficient vector v of u Pi_i whenever all of
    its words are in the index.  Returns an (n, k) matrix, possibly k = 0.
    """
    lk = index.lookup
    vecs = []
    for z in cons.zeros:
        for u in index.words:
            p = W.poly_mul({u: 1.0}, z)
            if all(w in lk for w in p):
                v = np.zeros(len(index))
                for w, c in p.items():
                    v[lk[w]] += float(np.real(c))
                vecs.append(v)
    return np.array(vecs).T if vecs else np.zeros((len(index), 0))


def _range(K: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the column span."""
    if K.shape[1] == 0:
        return K
    U, s, _ = np.linalg.svd(K, full_matrices=False)
    return U[:, s > tol * max(1.0, s[0])]


def _independent_rows(E: np.ndarray, e: np.ndarray, tol: float = 1e-9):
    if E.shape[0] == 0:
        return E, e
    _, R, piv = sla.qr(E.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int((d > tol * max(1.0, d[0])).sum())
    keep = np.sort(piv[:rank])
    return E[keep], e[keep]


def _moment_block(level: int):
    """Word index, moment keys and the sparse moment-matrix block of a level."""
    idx = build_words(level)
    n = len(idx)
    key_pos: dict[W.Word, int] = {}
    keys: list[W.Word] = []
    ident = W.identity(PARTIES)
    F0 = np.zeros((n, n))
    var, rows, cols = [], [], []
    for i, u in enumerate(idx.words):
        ud = W.adjoint(u)
        for j, v in enumerate(idx.words):
            key = W.canonical(W.multiply(ud, v))
            if key == ident:
                F0[i, j] = 1.0
                continue
            if key not in key_pos:
                key_pos[key] = len(keys)
                keys.append(key)
            var.append(key_pos[key])
            rows.append(i)
            cols.append(j)
    full = SparseBlock(F0, np.array(var), np.array(rows), np.array(cols), np.ones(len(var)))
    return idx, keys, key_pos, full


def moment_problem(
    level: int,
    objective: W.Poly,
    cons: HardyConstraints,
    kernel: np.ndarray | None | str = "auto",
    fix_p: bool = True,
) -> MomentProblem:
    """min objective over the level-l relaxation subject to the Hardy constraints.

    ``kernel`` lists vectors known to lie in the kernel of every feasible
    moment matrix ("auto" picks them from the constraints, see
    ``face_kernel``).  The problem is then restricted to that face: Gamma K
    = 0 becomes a set of linear equalities and the PSD constraint acts on a
    principal submatrix complementary to K, which keeps the reduced problem
    strictly feasible where the full one is not.
    """
    idx, keys, key_pos, full = _moment_block(level)
    n = len(idx)
    n_matrix = len(keys)
    F0 = full.F0

    c0, cobj = _linear(objective, key_pos, keys)
    e0, ceq = _linear(cons.equality, key_pos, keys)
    zero_lin = [_linear(z, key_pos, keys) for z in cons.zeros]
    m = len(keys)
    uncovered = keys[n_matrix:]

    if isinstance(kernel, str):
        kernel = face_kernel(level, cons) if kernel == "auto" else None
    if kernel is not None and kernel.shape[1] == 0:
        kernel = None

    eq_rows = [_row(ceq, m)] if fix_p else []
    eq_rhs = [cons.target - e0] if fix_p else []
    lin_rows, f0 = [], []
    for z0, zc in zero_lin:
        if kernel is None:
            # eps2 - p_i >= 0
            lin_rows.append(-_row(zc, m))
            f0.append(cons.eps2 - z0)
        else:
            # eps2 = 0 here; p_i = 0 is implied by Gamma K = 0 and kept as a redundant equality
            eq_rows.append(_row(zc, m))
            eq_rhs.append(-z0)
    # 1 -+ m_u >= 0 for uncovered words
    for k in range(n_matrix, m):
        for sign in (1.0, -1.0):
            row = np.zeros(m)
            row[k] = -sign
            lin_rows.append(row)
            f0.append(1.0)

    kept = np.arange(n)
    block = full
    if kernel is not None:
        E, e = _face_equalities(full, kernel, m)
        eq_rows.extend(E)
        eq_rhs.extend(e)
        # drop the words pivoting K; the remaining principal submatrix is congruent to the face block
        _, _, piv = sla.qr(kernel.T, mode="economic", pivoting=True)
        drop = piv[: np.linalg.matrix_rank(kernel)]
        kept = np.setdiff1d(np.arange(n), drop)
        pos = -np.ones(n, dtype=int)
        pos[kept] = np.arange(len(kept))
        sel = (pos[full.rows] >= 0) & (pos[full.cols] >= 0)
        block = SparseBlock(F0[np.ix_(kept, kept)], full.var[sel], pos[full.rows[sel]], pos[full.cols[sel]], full.vals[sel])

    A, b = _independent_rows(np.array(eq_rows).reshape(-1, m), np.array(eq_rhs, dtype=float))
    lin_F = np.array(lin_rows).reshape(-1, m)
    sdp = SDPProblem(c=_row(cobj, m), c0=c0, blocks=[block], lin_f0=np.array(f0, dtype=float), lin_F=lin_F, A=A, b=b)
    return MomentProblem(idx, keys, key_pos, uncovered, sdp, full, kept, kernel)


def _face_equalities(full: SparseBlock, K: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows of Gamma(x) K = 0 as E x = e."""
    n, k = K.shape
    E = np.zeros((n, k, m))
    np.add.at(E, (full.rows, slice(None), full.var), full.vals[:, None] * K[full.cols])
    e = -(full.F0 @ K)
    return E.reshape(n * k, m), e.reshape(n * k)


@lru_cache(maxsize=None)
def ideal_face(level: int) -> np.ndarray | None:
    """Kernel of the ideal moment matrix, when it is forced at eps = 0.

    At eps = 0 the relaxation may already pin p = 1/8 to its boundary.  The
    optimal dual matrix Z of  max p  subject to the zero conditions then
    exposes the face: every feasible Gamma with p = 1/8 annihilates its range.
    If the exposed kernel together with the zero-projector kernel spans the
    whole kernel of the ideal moment matrix, that kernel is returned (it is
    exact, unlike the numerical range of Z).  Otherwise None.
    """
    from .hardy import psi_star_realization

    cons = hardy_constraints(0.0, 0.0)
    idx = build_words(level)
    N = zero_kernel(idx, cons)
    if N.shape[1] == 0:
        return None
    prob = moment_problem(level, W.poly_scale(cons.equality, -1), cons, kernel=N, fix_p=False)
    sol = sdp_solve(prob.sdp)
    if not sol.optimal or abs(-sol.value - P_MAX) > 1e-7:
        return None
    lam, V = np.linalg.eigh(sol.Z[0])
    big = lam > 1e-6 * max(lam.max(), 1e-300)
    exposed = np.zeros((len(idx), int(big.sum())))
    exposed[prob.kept] = V[:, big]
    G = prob.gamma(prob.moment_vector(psi_star_realization()))
    lam_g, V_g = np.linalg.eigh(G)
    null = V_g[:, lam_g < 1e-9]
    found = _range(np.hstack([N, exposed]), tol=1e-6)
    # the exposed range is only as accurate as the dual solution, so compare subspaces loosely
    if found.shape[1] != null.shape[1] or np.linalg.norm(found - null @ (null.T @ found), 2) > 1e-3:
        return None
    return null


def face_kernel(level: int, cons: HardyConstraints) -> np.ndarray | None:
    """Kernel vectors implied by the constraints; None when the problem has no such face."""
    if cons.eps2 > 0:
        return None
    N = zero_kernel(build_words(level), cons)
    if N.shape[1] == 0:
        return None
    if cons.eps1 == 0:
        K = ideal_face(level)
        if K is not None:
            return K
    return N


def fidelity_objective() -> W.Poly:
    from .swap import calibrate, fidelity_polynomial

    return fidelity_polynomial(calibrate().vector)


def measurement_objective(party: int = 0) -> W.Poly:
    from .swap import merit_objective

    return merit_objective(party, PARTIES)


def objective_words(p: W.Poly) -> list[W.Word]:
    return sorted({W.canonical(w) for w in p if w != W.identity(PARTIES)}, key=W.sort_key)


def minimal_viable_level(p: W.Poly) -> int | None:
    """Smallest level whose moment matrix holds every word of ``p``; None if above the cap."""
    need = max((W.word_length(w) for w in objective_words(p)), default=0)
    level = max(1, (need + 1) // 2)
    return level if level <= MAX_LEVEL else None


@dataclass
class NPAResult:
    which: str
    level: int
    eps1: float
    eps2: float
    solution: SDPSolution
    uncovered: list[str] = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.solution.value

    def row(self, timing: bool = False) -> dict:
        s = self.solution
        return {
            "eps1": self.eps1,
            "eps2": self.eps2,
            "level": self.level,
            "value": s.value,
            "status": s.status,
            "gap": s.gap,
            "iterations": s.iterations,
            "runtime_ms": s.runtime_ms if timing else None,
        }


def _robust(which: str, eps1: float, eps2: float, level: int, **solver) -> NPAResult:
    obj = fidelity_objective() if which == "state" else measurement_objective()
    prob = moment_problem(level, obj, hardy_constraints(eps1, eps2))
    sol = sdp_solve(prob.sdp, **solver)
    return NPAResult(which, level, float(eps1), float(eps2), sol, [W.format_word(w) for w in prob.uncovered])


def robust_fidelity(eps1: float, eps2: float, level: int, **solver) -> NPAResult:
    """Lower bound on the worst-case SWAP fidelity compatible with the relaxed Hardy data."""
    return _robust("state", eps1, eps2, level, **solver)


def robust_measurement(eps1: float, eps2: float, level: int, **solver) -> NPAResult:
    """Lower bound on the worst-case measurement merit T of party 1."""
    return _robust("measurement", eps1, eps2, level, **solver)


def correlator_poly(f) -> W.Poly:
    """The Bell operator sum_j b_j G_j as a word polynomial (setting 0 -> Z, setting 1 -> X)."""
    from .quantum import CORRELATOR_TERMS

    out: W.Poly = {}
    for bj, term in zip(np.asarray(f.b if hasattr(f, "b") else f, dtype=float), CORRELATOR_TERMS):
        if bj != 0:
            w = tuple("" if s is None else W.LETTERS[s] for s in term)
            out[w] = out.get(w, 0.0) + bj
    return out


def bell_relaxation(f, level: int, **solver) -> SDPSolution:
    """Upper bound on max <sum_j b_j G_j> over the level-l relaxation (no Hardy constraints).

    The returned solution is for the minimization of the negated functional;
    its ``value`` is negated back, so it is the maximum.
    """
    idx, keys, key_pos, full = _moment_block(level)
    n_matrix = len(keys)
    c0, cobj = _linear(W.poly_scale(correlator_poly(f), -1), key_pos, keys)
    m = len(keys)
    lin = [sign * np.eye(m)[k] for k in range(n_matrix, m) for sign in (-1.0, 1.0)]
    sdp = SDPProblem(
        c=_row(cobj, m), c0=c0, blocks=[full],
        lin_f0=np.ones(len(lin)), lin_F=np.array(lin).reshape(-1, m),
    )
    sol = sdp_solve(sdp, **solver)
    sol.value, sol.dual_value = -sol.value, -sol.dual_value
    return sol


# -- sweeps -------------------------------------------------------------------------------


def parse_grid(spec: str) -> list[float]:
    """'a:b:n' -> n evenly spaced values from a to b; a single number is a one-point grid."""
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"grid spec {spec!r} is not a:b:n")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError("grid needs at least one point")
    return [float(v) for v in np.linspace(a, b, n)]


def worker_count() -> int:
    env = os.environ.get("HARDYCERT_THREADS")
    if env:
        return max(1, int(env))
    return 1


def _point(args) -> NPAResult:
    which, e1, e2, level, solver = args
    try:
        return _robust(which, e1, e2, level, **solver)
    except Exception as exc:  # recorded per point; the sweep continues
        empty = SDPSolution(f"error: {exc}", float("nan"), float("nan"), float("nan"), np.zeros(0), [], [], np.zeros(0), np.zeros(0), np.zeros(0), 0, float("nan"), float("nan"), 0.0)
        return NPAResult(which, level, e1, e2, empty)


def sweep(
    eps1: Iterable[float],
    eps2: Iterable[float],
    level: int,
    which: str = "state",
    workers: int | None = None,
    **solver,
) -> list[NPAResult]:
    """Solve every grid point; results sorted by (eps2, eps1).

    Points are independent; with more than one worker they run in a process
    pool.  A failing point is recorded in its status and the sweep continues.
    """
    if which not in ("state", "measurement"):
        raise ValueError("which must be 'state' or 'measurement'")
    pts = sorted(((float(a), float(b)) for a in eps1 for b in eps2), key=lambda t: (t[1], t[0]))
    jobs = [(which, a, b, level, solver) for a, b in pts]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_point, jobs))
    return [_point(j) for j in jobs]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".12g")


def sweep_csv(results: Sequence[NPAResult], timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        row = r.row(timing)
        w.writerow([fmt(row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError("unexpected sweep header")
    rows = []
    for r in reader:
        rows.append({
            "eps1": float(r["eps1"]),
            "eps2": float(r["eps2"]),
            "level": int(r["level"]),
            "value": float(r["value"]),
            "status": r["status"],
        })
    return rows
