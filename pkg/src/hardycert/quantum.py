"""Small-dimension operator algebra: states, observables, behaviors, correlators.

Outcome index 0 stands for the outcome +1 and index 1 for -1 throughout.
A behavior table is an array ``P[x_1, ..., x_N, i_1, ..., i_N]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np

DIM_CAP = 256

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITIAN_TOL = 1e-12
INVOLUTION_TOL = 1e-10
SNAP_TOL = 1e-8

# Coordinates of the 26-dimensional correlator vector, in the order of the
# Bell-operator basis G_1..G_26.  Each entry gives the setting used by each
# party, None when the party does not appear.
CORRELATOR_TERMS: tuple[tuple[int | None, int | None, int | None], ...] = (
    (0, None, None), (1, None, None),
    (None, 0, None), (None, 1, None),
    (None, None, 0), (None, None, 1),
    (0, 0, None), (0, 1, None), (1, 0, None), (1, 1, None),
    (None, 0, 0), (None, 0, 1), (None, 1, 0), (None, 1, 1),
    (0, None, 0), (0, None, 1), (1, None, 0), (1, None, 1),
    (0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0),
    (0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1),
)


def term_label(term) -> str:
    return "".join(f"{p}{s}" for p, s in zip("ABC", term) if s is not None)


CORRELATOR_LABELS = tuple(term_label(t) for t in CORRELATOR_TERMS)


class DimensionError(ValueError):
    pass


class NotProjectiveError(ValueError):
    pass


def tensor(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product in listed order."""
    if len(factors) == 0:
        raise ValueError("tensor of an empty list")
    dim = 1
    for f in factors:
        f = np.asarray(f)
        if f.ndim == 2 and f.shape[0] != f.shape[1]:
            raise DimensionError(f"non-square factor of shape {f.shape}")
        dim *= f.shape[0]
    if dim > DIM_CAP:
        raise DimensionError(f"composite dimension {dim} exceeds cap {DIM_CAP}")
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol)


def projectors(obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral projectors (P_plus, P_minus) of a dichotomic observable.

    Eigenvalues within SNAP_TOL of +-1 are snapped; anything else means the
    observable is not a projective two-outcome measurement.
    """
    obs = np.asarray(obs, dtype=complex)
    if not is_hermitian(obs, 1e-10):
        raise NotProjectiveError("observable is not Hermitian")
    vals, vecs = np.linalg.eigh((obs + obs.conj().T) / 2)
    plus = np.abs(vals - 1) <= SNAP_TOL
    minus = np.abs(vals + 1) <= SNAP_TOL
    if not np.all(plus | minus):
        raise NotProjectiveError(f"eigenvalues {vals} are not all +-1")
    vp, vm = vecs[:, plus], vecs[:, minus]
    return vp @ vp.conj().T, vm @ vm.conj().T


def check_observable(obs: np.ndarray) -> None:
    obs = np.asarray(obs)
    if not is_hermitian(obs, 1e-10):
        raise NotProjectiveError("observable is not Hermitian")
    if np.max(np.abs(obs @ obs - np.eye(obs.shape[0]))) > INVOLUTION_TOL:
        raise NotProjectiveError("observable does not square to the identity")


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def ghz(parties: int = 3) -> np.ndarray:
    return (ket("0" * parties) + ket("1" * parties)) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class Realization:
    """A state (pure vector or density matrix) and per-party [A0, A1] observables."""

    state: np.ndarray
    observables: tuple[tuple[np.ndarray, np.ndarray], ...]
    dims: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        obs = tuple((np.asarray(a0, dtype=complex), np.asarray(a1, dtype=complex)) for a0, a1 in self.observables)
        object.__setattr__(self, "observables", obs)
        dims = []
        for a0, a1 in obs:
            if a0.shape != a1.shape:
                raise DimensionError("observables of one party must share a dimension")
            check_observable(a0)
            check_observable(a1)
            dims.append(a0.shape[0])
        object.__setattr__(self, "dims", tuple(dims))
        total = int(np.prod(dims))
        if total > DIM_CAP:
            raise DimensionError(f"dimension {total} exceeds cap {DIM_CAP}")
        state = np.asarray(self.state, dtype=complex)
        if state.ndim == 1:
            if state.shape[0] != total:
                raise DimensionError(f"state has length {state.shape[0]}, expected {total}")
            if abs(np.linalg.norm(state) - 1) > 1e-12:
                raise ValueError("pure state is not normalized")
        elif state.ndim == 2:
            if state.shape != (total, total):
                raise DimensionError(f"density matrix has shape {state.shape}, expected {(total, total)}")
            if abs(np.trace(state) - 1) > 1e-12 or not is_hermitian(state, 1e-10):
                raise ValueError("density matrix must be Hermitian with unit trace")
            if np.linalg.eigvalsh((state + state.conj().T) / 2).min() < -1e-10:
                raise ValueError("density matrix is not positive semidefinite")
        else:
            raise DimensionError("state must be a vector or a square matrix")
        object.__setattr__(self, "state", state)

    @property
    def parties(self) -> int:
        return len(self.observables)

    @property
    def is_pure(self) -> bool:
        return self.state.ndim == 1

    @property
    def rho(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.state, self.state.conj())
        return self.state

    def box_operators(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per-party (Z, X) = (A0, A1) pairs."""
        return [(a0, a1) for a0, a1 in self.observables]


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional outcome probabilities P[x..., i...] of an N-party, 2-setting, 2-outcome experiment."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim % 2 or any(s != 2 for s in t.shape):
            raise ValueError(f"malformed behavior table of shape {t.shape}")
        object.__setattr__(self, "table", t)

    @property
    def parties(self) -> int:
        return self.table.ndim // 2

    def prob(self, outcomes: Sequence[int], settings: Sequence[int]) -> float:
        """P(a|x) with outcomes given as +1/-1."""
        idx = tuple(settings) + tuple(0 if a == 1 else 1 for a in outcomes)
        return float(self.table[idx])

    def normalization_error(self) -> float:
        n = self.parties
        sums = self.table.sum(axis=tuple(range(n, 2 * n)))
        return float(np.max(np.abs(sums - 1)))

    def signaling_error(self) -> float:
        """Largest dependence of any marginal on the settings of the other parties."""
        n = self.parties
        worst = 0.0
        for keep in range(1, n):
            for subset in _subsets(n, keep):
                marg = self.table.sum(axis=tuple(n + p for p in range(n) if p not in subset))
                # marg axes: n setting axes then the kept outcome axes
                for p in range(n):
                    if p in subset:
                        continue
                    worst = max(worst, float(np.max(np.abs(np.diff(marg, axis=p)))))
        return worst

    def validate(self, tol: float = 1e-10) -> None:
        if self.table.min() < -tol or self.table.max() > 1 + tol:
            raise ValueError("probabilities outside [0, 1]")
        if self.normalization_error() > tol:
            raise ValueError("conditional distributions are not normalized")
        if self.signaling_error() > tol:
            raise ValueError("behavior is signaling")

    def correlator(self, term: Sequence[int | None]) -> float:
        """<prod_p A_p^{x_p}> over the parties present in ``term``."""
        n = self.parties
        settings = tuple(0 if s is None else s for s in term)
        signs = np.ones((2,) * n)
        for p, s in enumerate(term):
            if s is not None:
                shape = [1] * n
                shape[p] = 2
                signs = signs * np.array([1.0, -1.0]).reshape(shape)
        return float(np.sum(signs * self.table[settings]))

    @property
    def correlators(self) -> np.ndarray:
        return correlators(self)


def _subsets(n: int, k: int):
    from itertools import combinations

    return [set(c) for c in combinations(range(n), k)]


def behavior_from_realization(r: Realization) -> Behavior:
    """P(a|x) = tr[rho (Pi_{a1|x1} x ... x Pi_{aN|xN})]."""
    n = r.parties
    proj = [[projectors(a) for a in pair] for pair in r.observables]
    rho = r.rho
    table = np.zeros((2,) * (2 * n))
    for x in product((0, 1), repeat=n):
        for i in product((0, 1), repeat=n):
            op = tensor([proj[p][x[p]][i[p]] for p in range(n)])
            table[x + i] = np.real(np.trace(rho @ op))
    return Behavior(table)


def correlators(b: Behavior) -> np.ndarray:
    """The 26 tripartite correlators in G_1..G_26 order."""
    if b.parties != 3:
        raise ValueError(f"correlator vector is defined for 3 parties, got {b.parties}")
    return np.array([b.correlator(t) for t in CORRELATOR_TERMS])


def behavior_from_correlators(vec: Sequence[float]) -> Behavior:
    """Inverse of ``correlators``: P(a|x) = (1/8)[1 + sum of a-signed correlators]."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (26,):
        raise ValueError("expected 26 correlators")
    table = np.zeros((2,) * 6)
    for x in product((0, 1), repeat=3):
        for i in product((0, 1), repeat=3):
            a = [1 - 2 * k for k in i]
            total = 1.0
            for value, term in zip(vec, CORRELATOR_TERMS):
                if all(s is None or s == x[p] for p, s in enumerate(term)):
                    sign = np.prod([a[p] for p, s in enumerate(term) if s is not None])
                    total += sign * value
            table[x + i] = total / 8
    return Behavior(table)


def conjugate_realization(r: Realization, unitaries: Sequence[np.ndarray]) -> Realization:
    """Apply a local unitary per party: |psi> -> (x u)|psi>, A -> u A u^dagger."""
    if len(unitaries) != r.parties:
        raise ValueError("need one unitary per party")
    for u in unitaries:
        if not is_unitary(u):
            raise ValueError("non-unitary local transformation")
    big = tensor(unitaries)
    state = big @ r.state if r.is_pure else big @ r.state @ big.conj().T
    obs = tuple((u @ a0 @ u.conj().T, u @ a1 @ u.conj().T) for u, (a0, a1) in zip(unitaries, r.observables))
    return Realization(state, obs)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    t = rho.reshape(tuple(dims) + tuple(dims))
    letters = "abcdefghijklmnop"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for p in range(n):
        if p not in keep:
            col[p] = row[p]
    out_row = "".join(row[p] for p in keep)
    out_col = "".join(col[p] for p in keep)
    spec = "".join(row) + "".join(col) + "->" + out_row + out_col
    d = int(np.prod([dims[p] for p in keep]))
    return np.einsum(spec, t).reshape(d, d)


# -- JSON formats -------------------------------------------------------------


def _outcome_key(i: Sequence[int]) -> str:
    return "".join("+" if k == 0 else "-" for k in i)


def behavior_to_dict(b: Behavior) -> dict:
    n = b.parties
    table = {}
    for x in product((0, 1), repeat=n):
        table["".join(map(str, x))] = {
            _outcome_key(i): float(f"{b.table[x + i]:.12g}") for i in product((0, 1), repeat=n)
        }
    out = {"parties": n, "table": table}
    if n == 3:
        out["correlators"] = [float(f"{c:.12g}") for c in b.correlators]
        out["correlator_labels"] = list(CORRELATOR_LABELS)
    return out


def behavior_from_dict(d: dict) -> Behavior:
    n = int(d["parties"])
    table = np.zeros((2,) * (2 * n))
    for xs, dist in d["table"].items():
        x = tuple(int(c) for c in xs)
        if len(x) != n:
            raise ValueError(f"setting key {xs!r} does not match {n} parties")
        for key, p in dist.items():
            i = tuple(0 if c == "+" else 1 for c in key)
            if len(i) != n or any(c not in "+-" for c in key):
                raise ValueError(f"bad outcome key {key!r}")
            table[x + i] = float(p)
    return Behavior(table)


def _cmat(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": np.round(m.real, 15).tolist(), "im": np.round(m.imag, 15).tolist()}


def _from_cmat(d) -> np.ndarray:
    if isinstance(d, dict):
        return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d.get("im", np.zeros_like(d["re"])), dtype=float)
    return np.asarray(d, dtype=complex)


def realization_to_dict(r: Realization) -> dict:
    key = "state" if r.is_pure else "rho"
    return {
        "dims": list(r.dims),
        key: _cmat(r.state),
        "observables": [{"A0": _cmat(a0), "A1": _cmat(a1)} for a0, a1 in r.observables],
    }


def realization_from_dict(d: dict) -> Realization:
    if "state" in d:
        state = _from_cmat(d["state"])
    elif "rho" in d:
        state = _from_cmat(d["rho"])
    else:
        raise ValueError("realization needs a 'state' or 'rho' entry")
    # serialized numbers carry 12 significant digits; undo the rounding drift in the norm
    if state.ndim == 1 and abs(np.linalg.norm(state) - 1) <= 1e-9:
        state = state / np.linalg.norm(state)
    elif state.ndim == 2 and abs(np.trace(state).real - 1) <= 1e-9:
        state = (state + state.conj().T) / 2
        state = state / np.trace(state).real
    obs = tuple((_from_cmat(o["A0"]), _from_cmat(o["A1"])) for o in d["observables"])
    r = Realization(state, obs)
    if "dims" in d and tuple(d["dims"]) != r.dims:
        raise DimensionError(f"declared dims {d['dims']} do not match observables {r.dims}")
    return r


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
