"""Operator words over per-party dichotomic observables.

A word is a tuple with one string per party.  Each string is a product of
the letters ``"Z"`` (the party's setting-0 observable) and ``"X"`` (setting
1).  Both letters are involutions, so a reduced string alternates; letters of
different parties commute, which the per-party tuple encodes directly.

Polynomials are plain dicts ``{word: coefficient}``.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

LETTERS = ("Z", "X")

Word = tuple[str, ...]
Poly = dict[Word, complex]


def reduce_string(s: str) -> str:
    out: list[str] = []
    for letter in s:
        if letter not in LETTERS:
            raise ValueError(f"unknown letter {letter!r}")
        if out and out[-1] == letter:
            out.pop()
        else:
            out.append(letter)
    return "".join(out)


def reduce_word(w: Sequence[str]) -> Word:
    return tuple(reduce_string(s) for s in w)


def adjoint(w: Word) -> Word:
    # letters are Hermitian: the adjoint reverses each party's product
    return tuple(s[::-1] for s in w)


def canonical(w: Word) -> Word:
    """Moment key for real realizations, where <w> = <w^dagger>."""
    w = reduce_word(w)
    return min(w, adjoint(w))


def word_length(w: Word) -> int:
    return sum(len(s) for s in w)


def identity(parties: int) -> Word:
    return ("",) * parties


def alternating_strings(length: int) -> list[str]:
    if length == 0:
        return [""]
    return ["".join(LETTERS[(i + start) % 2] for i in range(length)) for start in (0, 1)]


def words_up_to(parties: int, max_length: int) -> list[Word]:
    """All reduced words of total length <= max_length, in canonical order.

    Order is (total length, then lexicographic on the per-party strings with
    'Z' < 'X' < longer strings), which makes level-l indices a prefix of
    level-(l+1) indices.
    """
    found = []
    for lengths in product(range(max_length + 1), repeat=parties):
        if sum(lengths) > max_length:
            continue
        for w in product(*(alternating_strings(n) for n in lengths)):
            found.append(tuple(w))
    return sorted(found, key=sort_key)


def sort_key(w: Word):
    rank = {"Z": 0, "X": 1}
    return (word_length(w), tuple((len(s), [rank[c] for c in s]) for s in w))


def multiply(a: Word, b: Word) -> Word:
    return tuple(reduce_string(x + y) for x, y in zip(a, b))


# -- polynomials ------------------------------------------------------------


def poly(terms: Iterable[tuple[complex, Sequence[str]]]) -> Poly:
    out: Poly = defaultdict(complex)
    for c, w in terms:
        out[reduce_word(w)] += c
    return _clean(out)


def _clean(p: Mapping[Word, complex], tol: float = 0.0) -> Poly:
    return {w: c for w, c in p.items() if abs(c) > tol}


def poly_add(*ps: Mapping[Word, complex]) -> Poly:
    out: Poly = defaultdict(complex)
    for p in ps:
        for w, c in p.items():
            out[w] += c
    return _clean(out)


def poly_scale(p: Mapping[Word, complex], s: complex) -> Poly:
    return _clean({w: c * s for w, c in p.items()})


def poly_mul(a: Mapping[Word, complex], b: Mapping[Word, complex]) -> Poly:
    out: Poly = defaultdict(complex)
    for wa, ca in a.items():
        for wb, cb in b.items():
            out[multiply(wa, wb)] += ca * cb
    return _clean(out)


def letter(parties: int, party: int, name: str) -> Poly:
    w = [""] * parties
    w[party] = name
    return {tuple(w): 1.0}


def projector(parties: int, party: int, name: str, sign: int) -> Poly:
    """(1 + sign * letter) / 2 acting on one party."""
    w = [""] * parties
    w[party] = name
    return poly([(0.5, identity(parties)), (0.5 * sign, w)])


def product_projector(names: Sequence[str], signs: Sequence[int]) -> Poly:
    """Tensor product of one projector per party, e.g. P(+++|Z X Z)."""
    n = len(names)
    out: Poly = {identity(n): 1.0}
    for party, (name, sign) in enumerate(zip(names, signs)):
        out = poly_mul(out, projector(n, party, name, sign))
    return out


def canonicalize(p: Mapping[Word, complex]) -> Poly:
    """Merge words that share a real-moment key."""
    out: Poly = defaultdict(complex)
    for w, c in p.items():
        out[canonical(w)] += c
    return _clean(out, 1e-15)


def is_hermitian(p: Mapping[Word, complex], tol: float = 1e-12) -> bool:
    return all(abs(np.conj(c) - p.get(adjoint(w), 0.0)) <= tol for w, c in p.items())


# -- numerical evaluation ---------------------------------------------------


def word_operator(w: Word, ops: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Matrix of a word given per-party (Z, X) operators."""
    from .quantum import tensor

    factors = []
    for s, (z, x) in zip(w, ops):
        m = np.eye(z.shape[0], dtype=complex)
        for c in s:
            m = m @ (z if c == "Z" else x)
        factors.append(m)
    return tensor(factors)


def poly_operator(p: Mapping[Word, complex], ops) -> np.ndarray:
    dim = int(np.prod([z.shape[0] for z, _ in ops]))
    out = np.zeros((dim, dim), dtype=complex)
    for w, c in p.items():
        out += c * word_operator(w, ops)
    return out


def expectation(p: Mapping[Word, complex], ops, rho: np.ndarray) -> complex:
    """tr(p(ops) rho), each word evaluated as written."""
    return complex(np.trace(poly_operator(p, ops) @ rho))


def format_word(w: Word, party_names: str = "ABC") -> str:
    parts = []
    for name, s in zip(party_names, w):
        parts.extend(f"{c}_{name}" for c in s)
    return " ".join(parts) or "1"
