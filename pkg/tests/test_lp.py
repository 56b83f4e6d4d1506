from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from hardycert.lp import check_certificate, lp_solve


def scipy_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, nonneg=False):
    bounds = [(0, None) if nonneg else (None, None)] * len(c)
    res = linprog(-np.asarray(c, float), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res


class TestBasics:
    def test_single_bound(self):
        sol = lp_solve([1.0], A_ub=[[1.0]], b_ub=[1.0])
        assert sol.optimal
        assert sol.value == pytest.approx(1.0)

    def test_infeasible_has_farkas(self):
        # x <= -1 and x >= 0
        sol = lp_solve([1.0], A_ub=[[1.0]], b_ub=[-1.0], nonneg=True)
        assert sol.status == "infeasible"
        cert = check_certificate(sol, [1.0], A_ub=[[1.0]], b_ub=[-1.0], nonneg=True)
        assert cert["u_nonneg"] >= 0
        assert cert["combo_residual"] <= 1e-12
        assert cert["rhs"] < 0

    def test_unbounded_has_ray(self):
        sol = lp_solve([1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0])
        assert sol.status == "unbounded"
        ray = np.asarray(sol.ray, float)
        assert ray[0] > 0 and ray[1] <= 1e-12

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            lp_solve([1.0], A_ub=[[1.0]], b_ub=[1.0, 2.0])

    def test_exact_arithmetic(self):
        sol = lp_solve(
            np.array([Fraction(1), Fraction(1)], dtype=object),
            A_ub=np.array([[3, 1], [1, 3]]),
            b_ub=np.array([1, 1]),
            nonneg=True,
            exact=True,
        )
        assert sol.exact_value == Fraction(1, 2)
        assert list(sol.x) == [Fraction(1, 4), Fraction(1, 4)]


class TestAgainstScipy:
    @pytest.mark.parametrize("seed", range(30))
    def test_random_bounded(self, seed):
        rng = np.random.default_rng(seed)
        m, n = 12, 5
        A = rng.normal(size=(m, n))
        # a box keeps the program bounded; b > 0 keeps it feasible
        A = np.vstack([A, np.eye(n), -np.eye(n)])
        b = np.concatenate([rng.uniform(0.5, 2, m), np.full(2 * n, 3.0)])
        c = rng.normal(size=n)
        sol = lp_solve(c, A_ub=A, b_ub=b)
        ref = scipy_max(c, A, b)
        assert sol.optimal and ref.status == 0
        assert sol.value == pytest.approx(-ref.fun, abs=1e-9)
        cert = check_certificate(sol, c, A_ub=A, b_ub=b)
        assert max(cert.values()) <= 1e-9
        assert sol.dual_value == pytest.approx(sol.value, abs=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_equality_nonneg(self, seed):
        rng = np.random.default_rng(100 + seed)
        m, n = 4, 9
        A = rng.uniform(0, 1, size=(m, n))
        x0 = rng.uniform(0, 1, n)
        b = A @ x0
        c = -rng.uniform(0.1, 1, n)
        sol = lp_solve(c, A_eq=A, b_eq=b, nonneg=True)
        ref = scipy_max(c, A_eq=A, b_eq=b, nonneg=True)
        assert sol.value == pytest.approx(-ref.fun, abs=1e-9)
        cert = check_certificate(sol, c, A_eq=A, b_eq=b, nonneg=True)
        assert max(cert.values()) <= 1e-9
