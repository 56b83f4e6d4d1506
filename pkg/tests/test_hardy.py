from itertools import product

import numpy as np
import pytest

from hardycert.geometry import deterministic_behaviors
from hardycert.hardy import (
    BIPARTITE_MAX,
    BlockState,
    FamilyParams,
    FamilyValidationError,
    block_isometry,
    block_isometry_demo,
    family_amplitudes,
    family_state,
    ghz_complex_realization,
    hardy_check,
    maximize_hardy,
    psi_star,
    psi_star_params,
    psi_star_realization,
    unitary_equivalence,
)
from hardycert.quantum import Behavior, behavior_from_correlators, behavior_from_realization, ghz, ket


def deterministic_table(assignment):
    """Behavior table of a local deterministic strategy (outcome per party per setting)."""
    t = np.zeros((2,) * 6)
    for x in product((0, 1), repeat=3):
        i = tuple(0 if assignment[p][x[p]] == 1 else 1 for p in range(3))
        t[x + i] = 1
    return t


def random_params(rng):
    while True:
        alphas = tuple(rng.uniform(0.1, 2 * np.pi - 0.1, 3))
        if all(abs(a - np.pi) > 0.1 for a in alphas):
            return FamilyParams(alphas, *rng.uniform(-1, 1, 4))


class TestHardyCheck:
    def test_ghz_complex(self):
        rep = hardy_check(behavior_from_realization(ghz_complex_realization()))
        assert rep.p == pytest.approx(1 / 8, abs=1e-12)
        assert max(rep.zero_residuals) <= 1e-12
        assert rep.satisfied

    def test_uniform(self):
        rep = hardy_check(Behavior(np.full((2,) * 6, 1 / 8)))
        assert rep.p == pytest.approx(1 / 8)
        np.testing.assert_allclose(rep.zero_residuals, 1 / 8)
        assert not rep.satisfied

    def test_all_plus(self):
        rep = hardy_check(Behavior(deterministic_table(((1, 1),) * 3)))
        assert rep.p == 1
        assert rep.zero_residuals[1] == 1
        assert not rep.satisfied

    def test_local_behaviors_with_zero_residuals_have_zero_p(self, rng):
        tables = [deterministic_table(d.assignment) for d in deterministic_behaviors()]
        for t in tables:
            rep = hardy_check(Behavior(t))
            if max(rep.zero_residuals) == 0:
                assert rep.p == 0
        # mixtures of the strategies that satisfy every zero condition
        zero_ok = [t for t in tables if max(hardy_check(Behavior(t)).zero_residuals) == 0]
        for _ in range(200):
            w = rng.dirichlet(np.ones(len(zero_ok)))
            rep = hardy_check(Behavior(np.tensordot(w, np.array(zero_ok), axes=1)))
            assert rep.p <= 1e-15

    def test_rejects_non_behavior(self):
        with pytest.raises(TypeError):
            hardy_check(np.zeros((2,) * 6))

    def test_bipartite_residual_count(self):
        rep = hardy_check(Behavior(np.full((2,) * 4, 1 / 4)))
        assert len(rep.zero_residuals) == 3


class TestFamily:
    def test_psi_star(self):
        r = family_state(psi_star_params())
        np.testing.assert_allclose(r.state, psi_star(), atol=1e-12)
        expected = np.array([1, 1, 1, -1, 1, -1, -1, -1]) / (2 * np.sqrt(2))
        np.testing.assert_allclose(psi_star(), expected)

    def test_constraints_hold_for_random_params(self, rng):
        for _ in range(200):
            fp = random_params(rng)
            rep = hardy_check(behavior_from_realization(family_state(fp)))
            assert max(rep.zero_residuals) <= 1e-10

    def test_p_is_a000_squared_over_norm(self, rng):
        for _ in range(200):
            fp = random_params(rng)
            amps = family_amplitudes(fp)
            rep = hardy_check(behavior_from_realization(family_state(fp)))
            assert rep.p == pytest.approx(fp.a000**2 / (amps @ amps), abs=1e-12)

    def test_quarter_angles(self):
        fp = FamilyParams((np.pi / 2,) * 3, 1.0)
        amps = family_amplitudes(fp)
        np.testing.assert_allclose(np.abs(amps[[0, 4, 2, 1]]), 1.0)
        # the fourth zero forces a_111 = 4 a_000, so a_000 normalizes to 1/sqrt(20), not 1/2
        assert amps[7] == pytest.approx(4.0)
        r = family_state(fp)
        assert abs(r.state[0]) == pytest.approx(1 / np.sqrt(20), abs=1e-12)
        # with the four equal-magnitude terms alone a_000 would be 1/2, and the fourth zero fails
        trunc = amps.copy()
        trunc[7] = 0
        assert trunc[0] / np.linalg.norm(trunc) == pytest.approx(0.5)

    def test_raw_substitution_breaks_fourth_zero(self, rng):
        fp = random_params(rng)
        with pytest.raises(FamilyValidationError):
            family_state(fp, substitution="raw")

    def test_zero_norm(self):
        with pytest.raises(ValueError):
            family_state(FamilyParams((1.0, 2.0, 4.0), 0.0))

    def test_pole(self):
        with pytest.raises(ValueError):
            FamilyParams((np.pi, 1.0, 1.0), 1.0)


class TestMaximize:
    def test_tripartite(self):
        res = maximize_hardy(3, restarts=16, seed=0)
        assert res.p == pytest.approx(1 / 8, abs=1e-6)
        assert res.report.satisfied

    def test_bipartite(self):
        res = maximize_hardy(2, restarts=16, seed=0)
        assert res.p == pytest.approx((5 * np.sqrt(5) - 11) / 2, abs=1e-6)
        assert BIPARTITE_MAX == pytest.approx(0.090169943749, abs=1e-12)

    def test_reproducible(self):
        a = maximize_hardy(3, restarts=1, seed=7)
        b = maximize_hardy(3, restarts=1, seed=7)
        assert a.to_dict() == b.to_dict()

    @pytest.mark.slow
    def test_never_exceeds_one_eighth(self):
        res = maximize_hardy(3, restarts=10_000, seed=1)
        assert res.p <= 1 / 8 + 1e-6

    def test_bad_parties(self):
        with pytest.raises(ValueError):
            maximize_hardy(4)


class TestUnitary:
    def test_equivalence(self):
        eq = unitary_equivalence()
        assert eq["state_distance"] <= 1e-12
        assert eq["observable_error"] <= 1e-12

    def test_same_behavior(self):
        a = behavior_from_realization(psi_star_realization()).table
        b = behavior_from_realization(ghz_complex_realization()).table
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestBlockIsometry:
    def test_qubit_block(self):
        res = block_isometry_demo(BlockState(((1.0, (0, 0, 0)),), (2, 2, 2)))
        assert res.fidelity == pytest.approx(1, abs=1e-12)
        assert res.self_tested

    def test_two_blocks(self):
        bs = BlockState(((0.3, (0, 0, 0)), (0.7, (1, 1, 1))), (4, 4, 4))
        res = block_isometry_demo(bs)
        assert res.fidelity == pytest.approx(1, abs=1e-12)
        nz = res.junk[np.abs(res.junk) > 1e-12]
        np.testing.assert_allclose(nz, [np.sqrt(0.3), np.sqrt(0.7)], atol=1e-12)

    def test_perturbed(self):
        bs = BlockState(((0.3, (0, 0, 0)), (0.7, (1, 1, 1))), (4, 4, 4), vectors=(None, ket("000")))
        res = block_isometry_demo(bs)
        # exact overlap: the GHZ block contributes 0.3, the |000> block 0.7 * |<GHZ|000>|^2
        assert res.fidelity == pytest.approx(0.3 + 0.7 * abs(ghz(3)[0]) ** 2, abs=1e-12)
        assert not res.self_tested

    def test_odd_dimension(self):
        with pytest.raises(ValueError):
            block_isometry(3)
        with pytest.raises(ValueError):
            BlockState(((1.0, (0, 0, 0)),), (3, 2, 2))

    def test_isometry(self):
        v = block_isometry(4)
        np.testing.assert_allclose(v.T @ v, np.eye(4))


class TestCorrelatorInverse:
    def test_hardy_table_from_correlators(self):
        from hardycert.geometry import hardy_point

        rep = hardy_check(behavior_from_correlators(hardy_point()))
        assert rep.p == pytest.approx(1 / 8, abs=1e-15)
        assert max(rep.zero_residuals) <= 1e-15
