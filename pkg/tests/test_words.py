import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardycert import words as W
from hardycert.npa import build_words

strings = st.text(alphabet="ZX", max_size=8)
words3 = st.tuples(strings, strings, strings)


def brute_force_count(level, parties=3):
    """Reduce every raw letter string (all parties interleaved) and count distinct results."""
    letters = [(p, c) for p in range(parties) for c in "ZX"]
    seen = set()
    for n in range(level + 1):
        for seq in itertools.product(letters, repeat=n):
            per = [""] * parties
            for p, c in seq:
                per[p] += c
            # reduce by repeated cancellation of adjacent equal letters
            red = []
            for s in per:
                while True:
                    t = s.replace("ZZ", "").replace("XX", "")
                    if t == s:
                        break
                    s = t
                red.append(s)
            seen.add(tuple(red))
    return len(seen)


class TestReduction:
    def test_cancels_squares(self):
        assert W.reduce_string("ZZ") == ""
        assert W.reduce_string("ZXXZ") == ""
        assert W.reduce_string("ZXZ") == "ZXZ"

    def test_unknown_letter(self):
        with pytest.raises(ValueError):
            W.reduce_string("ZY")

    @given(words3)
    def test_idempotent(self, w):
        r = W.reduce_word(w)
        assert W.reduce_word(r) == r

    @given(words3)
    def test_reduced_strings_alternate(self, w):
        for s in W.reduce_word(w):
            assert "ZZ" not in s and "XX" not in s

    @given(words3, words3)
    @settings(max_examples=50)
    def test_commuting_parties_reorder_identically(self, a, b):
        # party letters commute, so interleaving order across parties is irrelevant
        assert W.multiply(a, b) == W.reduce_word(tuple(x + y for x, y in zip(a, b)))

    @given(words3)
    def test_adjoint_involution(self, w):
        assert W.adjoint(W.adjoint(w)) == w

    @given(words3)
    def test_canonical_is_invariant_under_adjoint(self, w):
        assert W.canonical(w) == W.canonical(W.adjoint(w))


class TestEnumeration:
    @pytest.mark.parametrize("level,count", [(1, 7), (2, 25), (3, 63)])
    def test_counts(self, level, count):
        assert len(build_words(level)) == count

    @pytest.mark.parametrize("level", [1, 2, 3, 4])
    def test_counts_match_brute_force(self, level):
        assert len(build_words(level)) == brute_force_count(level)

    def test_level_prefix(self):
        for lo in (1, 2, 3):
            a, b = build_words(lo).words, build_words(lo + 1).words
            assert b[: len(a)] == a

    def test_identity_first(self):
        assert build_words(2).words[0] == ("", "", "")

    def test_level_cap(self):
        with pytest.raises(ValueError):
            build_words(5)
        with pytest.raises(ValueError):
            build_words(0)


class TestPolynomials:
    def test_projector_square(self):
        p = W.projector(3, 1, "X", -1)
        np.testing.assert_equal(W.poly_mul(p, p), p)

    def test_product_projector_terms(self):
        p = W.product_projector("ZZZ", (1, 1, 1))
        assert len(p) == 8
        assert all(abs(c - 1 / 8) < 1e-15 for c in p.values())

    def test_operator_evaluation(self, rng):
        from conftest import random_involution

        ops = [(random_involution(2, rng), random_involution(2, rng)) for _ in range(3)]
        w = ("ZX", "X", "")
        direct = np.kron(np.kron(ops[0][0] @ ops[0][1], ops[1][1]), np.eye(2))
        np.testing.assert_allclose(W.word_operator(w, ops), direct, atol=1e-14)

    def test_hermitian_check(self):
        assert W.is_hermitian(W.poly([(1.0, ("ZX", "", "")), (1.0, ("XZ", "", ""))]))
        assert not W.is_hermitian(W.poly([(1.0, ("ZX", "", ""))]))

    def test_format(self):
        assert W.format_word(("ZX", "", "X")) == "Z_A X_A X_C"
        assert W.format_word(("", "", "")) == "1"
