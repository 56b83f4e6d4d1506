import numpy as np
import pytest

from conftest import random_density, random_involution, random_realization
from hardycert import words as W
from hardycert.hardy import psi_star, psi_star_realization
from hardycert.quantum import SX, SZ, NotProjectiveError, Realization, ghz, ket
from hardycert.swap import (
    PRINTED_FIDELITY_TERMS,
    SWAP_2Q,
    ZZZ,
    build_swap,
    calibrate,
    derived_merit_polynomials,
    fidelity,
    fidelity_polynomial,
    measurement_merit,
    polynomial_value,
    printed_fidelity_polynomial,
    printed_merit_polynomials,
    reference_realization,
    swapped_state,
    swapped_state_coefficients,
)


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


class TestGadget:
    def test_textbook_swap(self):
        np.testing.assert_allclose(build_swap(SZ, SX).S, SWAP_2Q, atol=1e-15)

    def test_negative_x(self):
        S = build_swap(SZ, -SX).S
        assert np.abs(S - SWAP_2Q).max() > 0.5
        # |0,0> -> |0,0> and |1,0> -> -|0,1>: the ancilla picks up sigma_z
        np.testing.assert_allclose(S @ np.kron(ket("0"), ket("0")), ket("00"))
        np.testing.assert_allclose(S @ np.kron(ket("1"), ket("0")), -ket("01"))

    def test_unitary(self, rng):
        for d in (2, 4):
            g = build_swap(random_involution(d, rng), random_involution(d, rng))
            np.testing.assert_allclose(g.S @ g.S.conj().T, np.eye(2 * d), atol=1e-12)

    def test_block_diagonal_qudit(self):
        Z = np.kron(np.eye(2), SZ)
        X = np.kron(np.eye(2), SX)
        S = build_swap(Z, X).S.reshape(2, 2, 2, 2, 2, 2)  # (block, qubit, ancilla) x 2
        off = (S[0, :, :, 1], S[1, :, :, 0])
        assert all(np.abs(o).max() == 0 for o in off)
        np.testing.assert_allclose(S[0, :, :, 0].reshape(4, 4), SWAP_2Q, atol=1e-15)

    def test_rejects_non_involution(self):
        with pytest.raises(NotProjectiveError):
            build_swap(np.diag([1.0, 0.5]), SX)


class TestSwappedState:
    def test_ideal(self):
        cal = calibrate()
        rs = swapped_state(psi_star_realization())
        ref = cal.vector
        assert trace_distance(rs, np.outer(ref, ref.conj())) <= 1e-10

    def test_maximally_mixed(self):
        rs = swapped_state(reference_realization(np.eye(8) / 8))
        np.testing.assert_allclose(rs, np.eye(8) / 8, atol=1e-15)

    def test_product(self):
        rs = swapped_state(reference_realization(ket("000")))
        np.testing.assert_allclose(rs, np.outer(ket("000"), ket("000")), atol=1e-15)

    def test_valid_density_matrix(self, rng):
        for k in range(50):
            r = random_realization(rng, (2, 4, 2) if k % 2 else (2, 2, 2))
            rs = swapped_state(r)
            assert np.trace(rs).real == pytest.approx(1, abs=1e-12)
            np.testing.assert_allclose(rs, rs.conj().T, atol=1e-13)
            assert np.linalg.eigvalsh(rs).min() >= -1e-12

    def test_coefficient_route(self, rng):
        for _ in range(10):
            r = random_realization(rng)
            np.testing.assert_allclose(swapped_state_coefficients(r), swapped_state(r), atol=1e-12)


class TestCalibration:
    def test_unique(self):
        cal = calibrate()
        assert (cal.reference, cal.x_sign) == ("psistar", -1)
        passing = [row for row in cal.table if abs(row[2] - 1) <= 1e-9]
        assert len(passing) == 1

    def test_ancilla_reference(self):
        np.testing.assert_allclose(calibrate().vector, ZZZ @ psi_star())


class TestFidelity:
    def test_ideal(self):
        rep = fidelity(psi_star_realization())
        assert rep.F_direct == pytest.approx(1, abs=1e-9)
        assert rep.F_poly == pytest.approx(1, abs=1e-9)

    def test_maximally_mixed(self, rng):
        r = random_realization(rng)
        rep = fidelity(Realization(np.eye(8) / 8, r.observables))
        assert abs(rep.F_direct - 1 / 8) <= 1e-12
        assert abs(rep.F_poly - 1 / 8) <= 1e-12

    def test_white_noise_line(self):
        ideal = psi_star_realization()
        for v in np.linspace(0, 1, 6):
            rho = (1 - v) * ideal.rho + v * np.eye(8) / 8
            rep = fidelity(Realization(rho, ideal.observables))
            assert rep.F_poly == pytest.approx(1 - 7 * v / 8, abs=1e-12)

    def test_direct_equals_polynomial(self, rng):
        worst = 0.0
        for k in range(500):
            dims = ((2, 2, 2), (4, 2, 2), (2, 4, 4))[k % 3]
            rep = fidelity(random_realization(rng, dims, pure=bool(k % 2)))
            worst = max(worst, abs(rep.F_direct - rep.F_poly))
        assert worst <= 1e-9

    def test_affine_in_state(self, rng):
        r = random_realization(rng)
        rho1, rho2 = random_density(8, rng), random_density(8, rng)
        p = 0.3
        f = lambda rho: fidelity(Realization(rho, r.observables)).F_poly
        assert f(p * rho1 + (1 - p) * rho2) == pytest.approx(p * f(rho1) + (1 - p) * f(rho2), abs=1e-10)

    def test_overlap_with_reference_operators(self, rng):
        ref = psi_star()
        for _ in range(20):
            v = rng.normal(size=8) + 1j * rng.normal(size=8)
            v /= np.linalg.norm(v)
            rep = fidelity(reference_realization(v))
            assert rep.F_direct == pytest.approx(abs(np.vdot(ref, v)) ** 2, abs=1e-10)

    def test_named_references(self):
        assert fidelity(psi_star_realization(), "psistar").F_poly == pytest.approx(1)
        assert fidelity(psi_star_realization(), "ghz").F_poly < 0.5
        with pytest.raises(ValueError):
            fidelity(psi_star_realization(), "w")
        with pytest.raises(ValueError):
            fidelity(psi_star_realization(), 2 * ghz(3))


class TestTranscription:
    def test_printed_terms(self):
        coeffs = sorted(c for c, _ in PRINTED_FIDELITY_TERMS)
        assert len(PRINTED_FIDELITY_TERMS) == 27
        assert coeffs.count(1 / 8) == 1
        assert sum(1 for c in coeffs if abs(c) == 1 / 16) == 6
        assert sum(1 for c in coeffs if abs(c) == 1 / 32) == 13
        assert sum(1 for c in coeffs if abs(c) == 1 / 64) == 7
        assert printed_fidelity_polynomial()[("X", "X", "X")] == 1 / 32

    def test_derived_differs_only_in_xxx(self):
        derived = W.canonicalize(fidelity_polynomial(calibrate().vector))
        printed = W.canonicalize(printed_fidelity_polynomial())
        assert set(derived) == set(printed)
        diff = {w: derived[w] - printed[w] for w in derived if abs(derived[w] - printed[w]) > 1e-15}
        assert list(diff) == [("X", "X", "X")]
        assert derived[("X", "X", "X")] == pytest.approx(1 / 64)

    def test_printed_exceeds_one_at_ideal(self):
        assert polynomial_value(printed_fidelity_polynomial(), psi_star_realization()).real == pytest.approx(65 / 64)


class TestMeasurementMerit:
    def test_ideal(self):
        for party in range(3):
            assert measurement_merit(psi_star_realization(), party).T == pytest.approx(1, abs=1e-9)

    def test_trivial(self):
        assert measurement_merit(psi_star_realization(), 0, "trivial").T == pytest.approx(0, abs=1e-12)

    def test_mixed_state_reference_operators(self):
        # regression: the reference gadget is exact whatever the state, so T = 1
        m = measurement_merit(reference_realization(np.eye(8) / 8))
        np.testing.assert_allclose(m.probabilities, 1.0, atol=1e-12)
        assert m.T == pytest.approx(1.0, abs=1e-12)

    def test_derived_matches_direct(self, rng):
        for k in range(100):
            r = random_realization(rng, (2, 4, 2) if k % 2 else (2, 2, 2))
            for party in range(3):
                a = measurement_merit(r, party, "direct").probabilities
                b = measurement_merit(r, party, "derived").probabilities
                np.testing.assert_allclose(a, b, atol=1e-12)

    def test_printed_first_three_match(self, rng):
        worst4 = 0.0
        for _ in range(50):
            r = random_realization(rng)
            a = measurement_merit(r, 0, "direct").probabilities
            b = measurement_merit(r, 0, "printed").probabilities
            np.testing.assert_allclose(a[:3], b[:3], atol=1e-12)
            worst4 = max(worst4, abs(a[3] - b[3]))
        # the printed fourth expansion is not the gadget probability away from the ideal operators
        assert worst4 > 1e-3

    def test_printed_fourth_agrees_for_anticommuting(self, rng):
        from scipy.stats import unitary_group

        for _ in range(10):
            u = unitary_group.rvs(2, random_state=rng)
            z, x = u @ SZ @ u.conj().T, u @ SX @ u.conj().T
            r = Realization(random_density(8, rng), ((z, x), (SZ, SX), (SZ, SX)))
            a = measurement_merit(r, 0, "direct").probabilities
            b = measurement_merit(r, 0, "printed").probabilities
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_polynomial_count(self):
        assert len(derived_merit_polynomials()) == len(printed_merit_polynomials()) == 4

    def test_bad_party(self):
        with pytest.raises(ValueError):
            measurement_merit(psi_star_realization(), 3)
