"""Hardy-type conditions, the constrained qubit families, and the block isometry demo."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .quantum import (
    SX,
    SZ,
    Behavior,
    Realization,
    behavior_from_realization,
    conjugate_realization,
    ghz,
)

BIPARTITE_MAX = (5 * np.sqrt(5) - 11) / 2
TRIPARTITE_MAX = 1 / 8
POLE_MARGIN = 1e-6


class FamilyValidationError(ValueError):
    """The a_111 substitution failed to produce the vanishing (-,-,-) probability."""


@dataclass(frozen=True)
class HardyReport:
    p: float
    zero_residuals: tuple[float, ...]
    satisfied: bool
    eps_zero: float

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "zero_residuals": list(self.zero_residuals),
            "satisfied": self.satisfied,
            "eps_zero": self.eps_zero,
        }


def hardy_check(b: Behavior, eps_zero: float = 1e-9) -> HardyReport:
    """Success probability P(+...+|0...0) and the N+1 probabilities that should vanish.

    Residual order: the N single-flip conditions P(+...+|..1..) with the flip
    on party 1, 2, ..., N, then P(-...-|1...1).
    """
    if not isinstance(b, Behavior):
        raise TypeError("hardy_check expects a Behavior")
    n = b.parties
    if n < 2:
        raise ValueError("Hardy conditions need at least two parties")
    t = b.table
    plus = (0,) * n
    p = float(t[(0,) * n + plus])
    res = []
    for k in range(n):
        x = tuple(1 if j == k else 0 for j in range(n))
        res.append(float(t[x + plus]))
    res.append(float(t[(1,) * n + (1,) * n]))
    return HardyReport(p=p, zero_residuals=tuple(res), satisfied=max(res) <= eps_zero, eps_zero=eps_zero)


# -- constrained families -----------------------------------------------------


def setting_one_observable(alpha: float) -> np.ndarray:
    """A^1 with +1 eigenvector cos(a/2)|0> + sin(a/2)|1>, i.e. cos(a) Z + sin(a) X."""
    return np.cos(alpha) * SZ + np.sin(alpha) * SX


def _check_alpha(alpha: float) -> None:
    # tan(a/2) has poles at odd multiples of pi, cot(a/2) at even multiples
    r = alpha / np.pi
    if abs(r - round(r)) * np.pi < POLE_MARGIN:
        raise ValueError(f"angle {alpha} is within {POLE_MARGIN} of a pole of tan/cot(alpha/2)")


@dataclass(frozen=True)
class FamilyParams:
    alphas: tuple[float, float, float]
    a000: float
    a011: float = 0.0
    a101: float = 0.0
    a110: float = 0.0

    def __post_init__(self):
        if len(self.alphas) != 3:
            raise ValueError("need three angles")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        for a in self.alphas:
            _check_alpha(a)

    def to_dict(self) -> dict:
        return {"alphas": list(self.alphas), "a000": self.a000, "a011": self.a011, "a101": self.a101, "a110": self.a110}


def family_amplitudes(fp: FamilyParams, substitution: str = "class") -> np.ndarray:
    """Unnormalized amplitudes a_ijk (index 4i + 2j + k) after imposing the zero conditions.

    ``substitution="class"`` uses the closed form of the state family in which
    a_100, a_010, a_001 are already eliminated.  ``"raw"`` applies the
    intermediate a_111 relation with the singly-excited amplitudes inserted
    as they stand, which is kept to document that it does not reproduce the
    fourth zero.
    """
    t = [np.tan(a / 2) for a in fp.alphas]
    ct = [1 / x for x in t]
    a = np.zeros(8)
    a[0b000] = fp.a000
    a[0b100] = -ct[0] * fp.a000
    a[0b010] = -ct[1] * fp.a000
    a[0b001] = -ct[2] * fp.a000
    a[0b011] = fp.a011
    a[0b101] = fp.a101
    a[0b110] = fp.a110
    tail = fp.a110 * t[2] + fp.a101 * t[1] + fp.a011 * t[0]
    if substitution == "class":
        a[0b111] = (
            fp.a000 * (t[0] * t[1] * t[2] + ct[0] * t[1] * t[2] + t[0] * ct[1] * t[2] + t[0] * t[1] * ct[2]) + tail
        )
    elif substitution == "raw":
        a[0b111] = (
            fp.a000 * t[0] * t[1] * t[2]
            + a[0b100] * t[1] * t[2]
            + a[0b010] * t[0] * t[2]
            + a[0b001] * t[0] * t[1]
            + tail
        )
    else:
        raise ValueError(f"unknown substitution {substitution!r}")
    return a


def family_state(fp: FamilyParams, substitution: str = "class", tol: float = 1e-10) -> Realization:
    """Normalized family member paired with A^0 = sigma_z and A^1(alpha_i)."""
    amps = family_amplitudes(fp, substitution)
    norm = np.linalg.norm(amps)
    if not np.isfinite(norm) or norm < 1e-300:
        raise ValueError("family amplitudes have zero norm")
    r = Realization(amps / norm, tuple((SZ, setting_one_observable(a)) for a in fp.alphas))
    rep = hardy_check(behavior_from_realization(r), eps_zero=tol)
    if not rep.satisfied:
        raise FamilyValidationError(
            "zero conditions violated by the a_111 substitution: residuals "
            + ", ".join(f"{x:.3e}" for x in rep.zero_residuals)
        )
    return r


def bipartite_amplitudes(alphas: Sequence[float], a00: float = 1.0) -> np.ndarray:
    """Two-qubit analogue: a10 = -cot1 a00, a01 = -cot2 a00, a11 fixed by P(--|11) = 0."""
    for a in alphas:
        _check_alpha(a)
    t1, t2 = (np.tan(a / 2) for a in alphas)
    return np.array([a00, -a00 / t2, -a00 / t1, a00 * (-t1 * t2 - t1 / t2 - t2 / t1)])


def bipartite_state(alphas: Sequence[float]) -> Realization:
    amps = bipartite_amplitudes(alphas)
    return Realization(amps / np.linalg.norm(amps), tuple((SZ, setting_one_observable(a)) for a in alphas))


def _hardy_p_from_amps(amps: np.ndarray) -> float:
    n2 = float(amps @ amps)
    if not np.isfinite(n2) or n2 <= 0:
        return 0.0
    return float(amps[0] ** 2 / n2)


@dataclass
class MaximizeResult:
    parties: int
    p: float
    params: dict
    realization: Realization
    report: HardyReport
    restarts: int
    seed: int
    branch: str = ""

    def to_dict(self) -> dict:
        return {
            "parties": self.parties,
            "p": self.p,
            "params": self.params,
            "residuals": list(self.report.zero_residuals),
            "satisfied": self.report.satisfied,
            "restarts": self.restarts,
            "seed": self.seed,
            "alpha_branch": self.branch,
        }


def _alpha_bounds():
    return (POLE_MARGIN, 2 * np.pi - POLE_MARGIN)


def _objective(parties):
    if parties == 3:

        def f(x):
            try:
                fp = FamilyParams(tuple(x[:3]), *x[3:])
            except ValueError:
                return 0.0
            with np.errstate(all="ignore"):
                return -_hardy_p_from_amps(family_amplitudes(fp))

    else:

        def f(x):
            try:
                with np.errstate(all="ignore"):
                    return -_hardy_p_from_amps(bipartite_amplitudes(x))
            except ValueError:
                return 0.0

    return f


def maximize_hardy(parties: int, restarts: int = 16, seed: int = 0) -> MaximizeResult:
    """Multi-start L-BFGS-B over the constrained family; returns the best p found.

    Angles range over (0, 2 pi) and free amplitudes over [-1, 1].  The
    returned state is rebuilt and re-checked against every zero condition.
    """
    if parties not in (2, 3):
        raise ValueError("maximization is implemented for 2 or 3 parties")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    rng = np.random.default_rng(seed)
    f = _objective(parties)
    lo, hi = _alpha_bounds()
    if parties == 3:
        bounds = [(lo, hi)] * 3 + [(-1.0, 1.0)] * 4
    else:
        bounds = [(lo, hi)] * 2
    best_x, best_val = None, np.inf
    for _ in range(restarts):
        x0 = np.array([rng.uniform(b0, b1) for b0, b1 in bounds])
        res = minimize(f, x0, method="L-BFGS-B", bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000})
        if res.fun < best_val:
            best_x, best_val = res.x, res.fun
    if parties == 3:
        fp = FamilyParams(tuple(best_x[:3]), *best_x[3:])
        r = family_state(fp, tol=1e-9)
        params = fp.to_dict()
        alphas = fp.alphas
    else:
        r = bipartite_state(best_x)
        alphas = tuple(float(a) for a in best_x)
        params = {"alphas": list(alphas)}
    report = hardy_check(behavior_from_realization(r))
    branch = "(pi, 2pi)" if all(a > np.pi for a in alphas) else ("(0, pi)" if all(a < np.pi for a in alphas) else "mixed")
    return MaximizeResult(parties, report.p, params, r, report, restarts, seed, branch)


# -- ideal realizations ----------------------------------------------------------


def psi_star() -> np.ndarray:
    s = np.array([1, 1, 1, -1, 1, -1, -1, -1], dtype=complex)
    return s / (2 * np.sqrt(2))


def psi_star_params() -> FamilyParams:
    h = 1 / (2 * np.sqrt(2))
    return FamilyParams((1.5 * np.pi,) * 3, h, -h, -h, -h)


def psi_star_realization(x_sign: int = -1) -> Realization:
    """psi* with A^0 = sigma_z and A^1 = x_sign * sigma_x on every party."""
    return Realization(psi_star(), tuple((SZ, x_sign * SX) for _ in range(3)))


def ghz_observables() -> tuple[np.ndarray, np.ndarray]:
    a0 = np.array([[0, np.exp(-1j * np.pi / 6)], [np.exp(1j * np.pi / 6), 0]])
    a1 = np.array([[0, np.exp(-2j * np.pi / 3)], [np.exp(2j * np.pi / 3), 0]])
    return a0, a1


def ghz_complex_realization() -> Realization:
    return Realization(ghz(3), tuple(ghz_observables() for _ in range(3)))


def hardy_unitary() -> np.ndarray:
    """Per-party unitary carrying GHZ with the complex observables onto the real optimum.

    Its adjoint maps psi* (A0 = sigma_z, A1 = -sigma_x) onto the GHZ realization.
    """
    return np.exp(1j * np.pi / 4) / np.sqrt(2) * np.array(
        [[np.exp(-1j * np.pi / 6), np.exp(-1j * np.pi / 3)], [-np.exp(1j * np.pi / 3), np.exp(1j * np.pi / 6)]]
    )


def global_phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over phases of ||a - e^{i phi} b||."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def unitary_equivalence() -> dict:
    """Distances between psi* conjugated by the adjoint of ``hardy_unitary`` and the GHZ realization."""
    u = hardy_unitary().conj().T
    r = conjugate_realization(psi_star_realization(), [u] * 3)
    target = ghz_complex_realization()
    obs_err = max(
        float(np.abs(a - b).max())
        for pa, pb in zip(r.observables, target.observables)
        for a, b in zip(pa, pb)
    )
    return {"state_distance": global_phase_distance(r.state, target.state), "observable_error": obs_err}


# -- block isometry -------------------------------------------------------------------


@dataclass(frozen=True)
class BlockState:
    """Direct sum of three-qubit blocks; block (l, m, n) lives on levels {2l, 2l+1} x {2m, 2m+1} x {2n, 2n+1}.

    ``vectors`` optionally replaces the GHZ content of individual blocks.
    """

    blocks: tuple[tuple[float, tuple[int, int, int]], ...]
    local_dims: tuple[int, int, int]
    vectors: tuple[np.ndarray | None, ...] = field(default=())

    def __post_init__(self):
        if any(d % 2 for d in self.local_dims):
            raise ValueError(f"local dimensions must be even, got {self.local_dims}")
        if any(d > 8 for d in self.local_dims):
            raise ValueError("local dimensions above 8 are not supported")
        w = np.array([b[0] for b in self.blocks], dtype=float)
        if (w < 0).any() or abs(w.sum() - 1) > 1e-12:
            raise ValueError("block weights must be nonnegative and sum to 1")
        for _, lmn in self.blocks:
            if any(not 0 <= t < d // 2 for t, d in zip(lmn, self.local_dims)):
                raise ValueError(f"block label {lmn} out of range")
        if self.vectors and len(self.vectors) != len(self.blocks):
            raise ValueError("one override vector per block")

    def state(self) -> np.ndarray:
        d1, d2, d3 = self.local_dims
        out = np.zeros((d1, d2, d3), dtype=complex)
        for k, (lam, (l, m, n)) in enumerate(self.blocks):
            v = self.vectors[k] if self.vectors and self.vectors[k] is not None else ghz(3)
            v = np.asarray(v, dtype=complex).reshape(2, 2, 2)
            out[2 * l : 2 * l + 2, 2 * m : 2 * m + 2, 2 * n : 2 * n + 2] += np.sqrt(lam) * v
        return out.reshape(-1)


def block_isometry(d: int) -> np.ndarray:
    """Phi: |2t> -> |2t>|0>, |2t+1> -> |2t>|1>, as a (2d x d) matrix."""
    if d % 2:
        raise ValueError("odd local dimension")
    v = np.zeros((2 * d, d))
    for t in range(d // 2):
        v[(2 * t) * 2 + 0, 2 * t] = 1
        v[(2 * t) * 2 + 1, 2 * t + 1] = 1
    return v


@dataclass
class BlockIsometryResult:
    junk: np.ndarray  # amplitudes over block labels (l, m, n), flattened
    extracted: np.ndarray  # 8x8 reduced state of the three ancilla qubits
    fidelity: float
    product_residual: float
    self_tested: bool


def block_isometry_demo(bs: BlockState, tol: float = 1e-10) -> BlockIsometryResult:
    d = bs.local_dims
    psi = bs.state()
    big = block_isometry(d[0])
    for k in d[1:]:
        big = np.kron(big, block_isometry(k))
    # output ordering is (s1, a1, s2, a2, s3, a3); gather systems first
    out = (big @ psi).reshape(d[0], 2, d[1], 2, d[2], 2).transpose(0, 2, 4, 1, 3, 5)
    mat = out.reshape(int(np.prod(d)), 8)
    rho = mat.T @ mat.conj()
    g = ghz(3)
    fid = float(np.real(np.vdot(g, rho @ g)))
    junk_full = mat @ g.conj()
    residual = float(np.linalg.norm(mat - np.outer(junk_full, g)))
    # junk only occupies even levels; index by block label
    labels = [tuple(2 * x for x in lmn) for lmn in product(*(range(k // 2) for k in d))]
    junk = np.array([junk_full.reshape(d)[lab] for lab in labels])
    return BlockIsometryResult(junk, rho, fid, residual, residual <= tol and abs(fid - 1) <= tol)
