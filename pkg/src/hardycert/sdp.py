"""Dense primal-dual interior-point solver for small block SDPs.

Problem form (``x`` free):

    minimize    c.x + c0
    subject to  S(x) = F0 + sum_k x_k F_k  is PSD blockwise,
                s(x) = f0 + sum_k x_k f_k >= 0   (linear block),
                A x = b.

The dual is  maximize  c0 - <F0, Z> - f0.z + b.y  subject to
<F_k, Z> + f_k.z + (A^T y)_k = c_k,  Z PSD,  z >= 0.

Newton directions use the HKM scaling with a Mehrotra predictor-corrector
and an infeasible start at S = Z = I.  Matrices F_k are stored sparsely as
symmetric COO entries, which keeps the Schur complement assembly cheap for
moment matrices where each variable touches a few dozen entries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


@dataclass
class SparseBlock:
    """F0 (dense n x n) and the entries of every F_k: F_k[rows, cols] += vals."""

    F0: np.ndarray
    var: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @property
    def n(self) -> int:
        return self.F0.shape[0]


@dataclass
class SDPProblem:
    c: np.ndarray
    blocks: list[SparseBlock]
    c0: float = 0.0
    lin_f0: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lin_F: np.ndarray | None = None  # (n_lin, m)
    A: np.ndarray | None = None  # (p, m)
    b: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.c.shape[0]


@dataclass
class SDPSolution:
    status: str
    value: float  # primal objective c.x + c0
    dual_value: float
    gap: float  # relative duality gap
    x: np.ndarray
    S: list[np.ndarray]
    Z: list[np.ndarray]
    s_lin: np.ndarray
    z_lin: np.ndarray
    y: np.ndarray
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float
    runtime_ms: float

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(s).min()) for s in self.S) if self.S else 0.0


def _apply(block: SparseBlock, x: np.ndarray) -> np.ndarray:
    out = block.F0.copy()
    np.add.at(out, (block.rows, block.cols), block.vals * x[block.var])
    return out


def _adjoint(block: SparseBlock, Z: np.ndarray, m: int) -> np.ndarray:
    return np.bincount(block.var, weights=block.vals * Z[block.rows, block.cols], minlength=m)


def _max_step(S: np.ndarray, dS: np.ndarray) -> float:
    """Largest a with S + a dS PSD; 0 when S has already lost definiteness."""
    lam, Q = np.linalg.eigh(S)
    if lam.min() <= 0:
        return 0.0
    H = Q / np.sqrt(lam)
    lo = np.linalg.eigvalsh(H.T @ dS @ H).min()
    return np.inf if lo >= 0 else -1.0 / lo


def _max_step_lin(s: np.ndarray, ds: np.ndarray) -> float:
    neg = ds < 0
    if not neg.any():
        return np.inf
    return float(np.min(-s[neg] / ds[neg]))


class _Structure:
    """Per-variable views of the sparse data, grouped for the Schur complement."""

    def __init__(self, prob: SDPProblem):
        self.groups = []
        for blk in prob.blocks:
            order = np.argsort(blk.var, kind="stable")
            var, rows, cols, vals = blk.var[order], blk.rows[order], blk.cols[order], blk.vals[order]
            bounds = np.searchsorted(var, np.arange(prob.m + 1))
            self.groups.append((var, rows, cols, vals, bounds))


def _schur(prob: SDPProblem, st: _Structure, Zs, Sinvs, z_lin, s_lin) -> np.ndarray:
    m = prob.m
    M = np.zeros((m, m))
    for blk, Z, Si, (var, rows, cols, vals, bounds) in zip(prob.blocks, Zs, Sinvs, st.groups):
        for l in range(m):
            a, b = bounds[l], bounds[l + 1]
            if a == b:
                continue
            # Y = Z F_l S^{-1};  M[k, l] = <F_k, Y>
            Y = (Z[:, rows[a:b]] * vals[a:b]) @ Si[cols[a:b], :]
            M[:, l] += np.bincount(var, weights=vals * Y[rows, cols], minlength=m)
    if prob.lin_F is not None and prob.lin_F.size:
        M += prob.lin_F.T @ ((z_lin / s_lin)[:, None] * prob.lin_F)
    return (M + M.T) / 2


def _factor(M: np.ndarray, reg: float):
    """Cholesky with escalating diagonal shifts for nearly singular Schur complements."""
    scale = 1 + np.abs(np.diag(M)).max()
    for shift in (0.0, reg, 1e2 * reg, 1e4 * reg):
        try:
            return sla.cho_factor(M + shift * scale * np.eye(M.shape[0]))
        except np.linalg.LinAlgError:
            continue
    return None


class _Newton:
    """Solver for  M dx - A^T dy = r,  A dx = rb.

    With equality rows the system is solved in KKT form after adding
    rho A^T A to M, which leaves the solution unchanged but keeps the block
    definite along variables fixed only by the equalities.
    """

    def __init__(self, M: np.ndarray, A: np.ndarray, reg: float):
        self.M, self.A = M, A
        self.p = A.shape[0]
        if self.p == 0:
            self.cho = _factor(M, reg)
            self.ok = self.cho is not None
            return
        AtA = A.T @ A
        self.rho = (1 + np.abs(np.diag(M)).max()) / (1 + np.abs(np.diag(AtA)).max())
        Mr = M + self.rho * AtA
        m = M.shape[0]
        self.K = np.block([[Mr, A.T], [A, np.zeros((self.p, self.p))]])
        scale = 1 + np.abs(np.diag(Mr)).max()
        self.ok = False
        for shift in (0.0, reg, 1e2 * reg, 1e4 * reg):
            K = self.K.copy()
            K[:m, :m] += shift * scale * np.eye(m)
            K[m:, m:] -= shift * np.eye(self.p)
            lu = sla.lu_factor(K, check_finite=False)
            if np.isfinite(lu[0]).all() and np.abs(np.diag(lu[0])).min() > 0:
                self.lu, self.ok = lu, True
                break

    def solve(self, r: np.ndarray, rb: np.ndarray):
        if self.p == 0:
            dx = sla.cho_solve(self.cho, r)
            dx = dx + sla.cho_solve(self.cho, r - self.M @ dx)
            return dx, np.zeros(0)
        m = self.M.shape[0]
        rhs = np.concatenate([r + self.rho * self.A.T @ rb, rb])
        u = sla.lu_solve(self.lu, rhs)
        u = u + sla.lu_solve(self.lu, rhs - self.K @ u)
        return u[:m], -u[m:]


def sdp_solve(
    prob: SDPProblem,
    tol: float = 1e-9,
    accept_tol: float = 1e-6,
    max_iter: int = 200,
    reg: float = 1e-10,
    verbose: bool = False,
) -> SDPSolution:
    """Primal-dual interior-point solve.

    Iterates until the relative gap and both scaled residuals are <= ``tol``
    or progress stops.  The best iterate seen (by the largest of the three
    measures) is returned; it is reported "optimal" when that measure is
    <= ``accept_tol``, otherwise the failure status is kept.
    """
    t0 = time.perf_counter()
    m = prob.m
    c = np.asarray(prob.c, dtype=float)
    A = np.zeros((0, m)) if prob.A is None else np.asarray(prob.A, dtype=float)
    b = np.zeros(0) if prob.b is None else np.asarray(prob.b, dtype=float)
    linF = np.zeros((0, m)) if prob.lin_F is None else np.asarray(prob.lin_F, dtype=float)
    f0 = np.asarray(prob.lin_f0, dtype=float)
    st = _Structure(prob)
    nu = sum(blk.n for blk in prob.blocks) + f0.shape[0]

    x = np.zeros(m)
    S = [np.eye(blk.n) for blk in prob.blocks]
    Z = [np.eye(blk.n) for blk in prob.blocks]
    s_lin = np.ones(f0.shape[0])
    z_lin = np.ones(f0.shape[0])
    y = np.zeros(A.shape[0])

    scale_p = 1 + max([np.abs(blk.F0).max() for blk in prob.blocks] + [np.abs(f0).max(initial=0), np.abs(b).max(initial=0)])
    scale_d = 1 + np.abs(c).max(initial=0)
    status = "maxiter"
    it = 0
    best = None
    since_best = 0
    for it in range(1, max_iter + 1):
        Fx = [_apply(blk, x) for blk in prob.blocks]
        rp = [s - fx for s, fx in zip(S, Fx)]  # S - F(x)
        rp_lin = s_lin - (f0 + linF @ x)
        rb = b - A @ x
        adj = sum((_adjoint(blk, Zb, m) for blk, Zb in zip(prob.blocks, Z)), np.zeros(m)) + linF.T @ z_lin
        rd = c - adj - A.T @ y

        pobj = float(c @ x + prob.c0)
        dobj = float(prob.c0 - sum(np.sum(blk.F0 * Zb) for blk, Zb in zip(prob.blocks, Z)) - f0 @ z_lin + b @ y)
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pinf = max([np.abs(r).max() for r in rp] + [np.abs(rp_lin).max(initial=0), np.abs(rb).max(initial=0)]) / scale_p
        dinf = np.abs(rd).max(initial=0) / scale_d
        score = max(gap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, it, pobj, dobj, gap, pinf, dinf, x, S, Z, s_lin, z_lin, y)
            since_best = 0
        else:
            since_best += 1
        if verbose:
            print(f"{it:4d} pobj {pobj:+.10e} dobj {dobj:+.10e} gap {gap:.1e} pinf {pinf:.1e} dinf {dinf:.1e}")
        if score <= tol:
            status = "optimal"
            break
        # primal infeasibility shows up as an unbounded dual ray
        if dobj > 1e8 * (1 + abs(pobj)) and dinf <= 1e-6:
            status = "infeasible"
            break
        if since_best >= 10 and best[0] <= accept_tol:
            status = "stalled"
            break

        mu = (sum(np.sum(Sb * Zb) for Sb, Zb in zip(S, Z)) + s_lin @ z_lin) / nu
        Sinv = [np.linalg.inv(Sb) for Sb in S]
        Sinv = [(Si + Si.T) / 2 for Si in Sinv]
        M = _schur(prob, st, Z, Sinv, z_lin, s_lin)
        newton = _Newton(M, A, reg)
        if not newton.ok:
            status = "numerical_error"
            break

        def direction(sigma, corr=None):
            # R = sigma mu S^-1 - Z + sym(Z rp S^-1) [- sym(dZa dSa S^-1)]
            R = []
            for k, (Zb, Si, r) in enumerate(zip(Z, Sinv, rp)):
                T = Zb @ r @ Si
                Rk = sigma * mu * Si - Zb + (T + T.T) / 2
                if corr is not None:
                    C = corr[0][k] @ corr[1][k] @ Si
                    Rk -= (C + C.T) / 2
                R.append(Rk)
            # linear block: ds = F dx - rp_lin, dz = (sigma mu - s z - z ds [- dza dsa]) / s
            rl = sigma * mu - s_lin * z_lin + z_lin * rp_lin
            if corr is not None:
                rl = rl - corr[2] * corr[3]
            rhs = sum((_adjoint(blk, Rk, m) for blk, Rk in zip(prob.blocks, R)), np.zeros(m))
            rhs += linF.T @ (rl / s_lin) - rd
            dx, dy = newton.solve(rhs, rb)
            dS = [_apply(SparseBlock(np.zeros_like(blk.F0), blk.var, blk.rows, blk.cols, blk.vals), dx) - r for blk, r in zip(prob.blocks, rp)]
            dZ = []
            for k, (Zb, Si, d) in enumerate(zip(Z, Sinv, dS)):
                T = Zb @ d @ Si
                dz = sigma * mu * Si - Zb - (T + T.T) / 2
                if corr is not None:
                    C = corr[0][k] @ corr[1][k] @ Si
                    dz -= (C + C.T) / 2
                dZ.append((dz + dz.T) / 2)
            ds_lin = linF @ dx - rp_lin
            dz_lin = (sigma * mu - s_lin * z_lin - z_lin * ds_lin) / s_lin
            if corr is not None:
                dz_lin -= corr[2] * corr[3] / s_lin
            return dx, dy, dS, dZ, ds_lin, dz_lin

        def steps(dS, dZ, ds_lin, dz_lin):
            ap = min([_max_step(Sb, d) for Sb, d in zip(S, dS)] + [_max_step_lin(s_lin, ds_lin)])
            ad = min([_max_step(Zb, d) for Zb, d in zip(Z, dZ)] + [_max_step_lin(z_lin, dz_lin)])
            return ap, ad

        try:
            dxa, dya, dSa, dZa, dsa, dza = direction(0.0)
            ap, ad = steps(dSa, dZa, dsa, dza)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = (
                sum(np.sum((Sb + ap * d1) * (Zb + ad * d2)) for Sb, Zb, d1, d2 in zip(S, Z, dSa, dZa))
                + (s_lin + ap * dsa) @ (z_lin + ad * dza)
            ) / nu
            sigma = min(1.0, (max(mu_aff, 0.0) / mu) ** 3)
            dx, dy, dS, dZ, ds_lin, dz_lin = direction(sigma, (dZa, dSa, dza, dsa))
            ap, ad = steps(dS, dZ, ds_lin, dz_lin)
        except np.linalg.LinAlgError:
            status = "numerical_error"
            break
        ap = min(1.0, 0.95 * ap)
        ad = min(1.0, 0.95 * ad)
        if verbose:
            print(f"     mu {mu:.1e} sigma {sigma:.1e} ap {ap:.2e} ad {ad:.2e}")
        if max(ap, ad) < 1e-12:
            status = "stalled"
            break
        x = x + ap * dx
        S = [Sb + ap * d for Sb, d in zip(S, dS)]
        s_lin = s_lin + ap * ds_lin
        y = y + ad * dy
        Z = [Zb + ad * d for Zb, d in zip(Z, dZ)]
        z_lin = z_lin + ad * dz_lin
        S = [(Sb + Sb.T) / 2 for Sb in S]
        Z = [(Zb + Zb.T) / 2 for Zb in Z]
    score, it_best, pobj, dobj, gap, pinf, dinf, x, S, Z, s_lin, z_lin, y = best
    if status not in ("optimal", "infeasible") and score <= accept_tol:
        status = "optimal"
    return SDPSolution(
        status=status,
        value=pobj,
        dual_value=dobj,
        gap=float(gap),
        x=x,
        S=S,
        Z=Z,
        s_lin=s_lin,
        z_lin=z_lin,
        y=y,
        iterations=it,
        primal_infeasibility=float(pinf),
        dual_infeasibility=float(dinf),
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )
