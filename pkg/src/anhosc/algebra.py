"""Shuffle algebra of ordered nested integrals as symbolic combinators.

Words are tuples of letters 0..4; a combination is a finite rational-weighted
sum of words.  The rewrite rules encode the displayed product identities that
reduce placement sums against towers of a-letters, e.g.

    I_{x,a} I_{a..a} (n-2 letters)  =  sum_j (n-j) I_{a..a x_j a..a}

Each rule is kept as its own citable pattern rather than re-derived from a
general shuffle engine; numerical validation goes through
correction.nested_integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_POLICY, ModelParams, TruncationPolicy
from .correction import nested_integral

__all__ = [
    "IndexWord",
    "IntegralCombination",
    "shuffle_pair",
    "reduce_against_zeros",
    "repeated_word_identity",
    "evaluate_combination",
    "PATTERNS",
]


@dataclass(frozen=True)
class IndexWord:
    """Ordered letters of a nested integral, each in 0..4."""

    letters: tuple[int, ...]

    def __post_init__(self):
        if any(not 0 <= m <= 4 for m in self.letters):
            raise ValueError(f"letters must lie in 0..4: {self.letters}")

    def __len__(self):
        return len(self.letters)


class IntegralCombination:
    """Exact rational combination of index words, kept in canonical form."""

    def __init__(self, terms=None):
        self._terms: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for coeff, word in terms:
                self.add(coeff, word)

    def add(self, coeff, word) -> "IntegralCombination":
        key = word.letters if isinstance(word, IndexWord) else tuple(word)
        new = self._terms.get(key, Fraction(0)) + Fraction(coeff)
        if new == 0:
            self._terms.pop(key, None)
        else:
            self._terms[key] = new
        return self

    @property
    def terms(self) -> list[tuple[Fraction, tuple[int, ...]]]:
        return [(self._terms[w], w) for w in sorted(self._terms)]

    def __add__(self, other: "IntegralCombination") -> "IntegralCombination":
        out = IntegralCombination(self.terms)
        for coeff, word in other.terms:
            out.add(coeff, word)
        return out

    def __sub__(self, other: "IntegralCombination") -> "IntegralCombination":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "IntegralCombination":
        return IntegralCombination([(Fraction(factor) * c, w) for c, w in self.terms])

    def __eq__(self, other) -> bool:
        return isinstance(other, IntegralCombination) and self._terms == other._terms

    def __repr__(self):
        if not self._terms:
            return "IntegralCombination(0)"
        body = " + ".join(f"{c}*I{list(w)}" for c, w in self.terms)
        return f"IntegralCombination({body})"


def shuffle_pair(a_word, b_word) -> IntegralCombination:
    """Expand I_m * I_{word} as the sum over all insertions of the letter m.

    The first argument must be a single letter; the letters of b_word keep
    their relative order.  Duplicate insertions (identical letters) merge
    with integer multiplicity.
    """
    a = a_word.letters if isinstance(a_word, IndexWord) else tuple(a_word)
    b = b_word.letters if isinstance(b_word, IndexWord) else tuple(b_word)
    if len(a) != 1:
        raise ValueError("shuffle_pair inserts a single letter")
    m = a[0]
    out = IntegralCombination()
    for pos in range(len(b) + 1):
        out.add(1, b[:pos] + (m,) + b[pos:])
    return out


def _placed(n: int, filler: int, positions_letters) -> tuple[int, ...]:
    word = [filler] * n
    for pos, letter in positions_letters:
        word[pos - 1] = letter
    return tuple(word)


# The six displayed reductions; n is the total word length on the right.
PATTERNS = ("xa", "xaa", "xay", "xya", "xaya", "xyaa")


def reduce_against_zeros(pattern: str, n: int, letters=(1,), filler: int = 0) -> IntegralCombination:
    """Right-hand side of a displayed product reduction.

    pattern  lhs product                              weights
    "xa"     I_{x,a}      * I_{a^(n-2)}               (n-j)
    "xaa"    I_{x,a,a}    * I_{a^(n-3)}               C(n-j, 2)
    "xay"    I_{x,a,y}    * I_{a^(n-3)}               (l-1-j)
    "xya"    I_{x,y,a}    * I_{a^(n-3)}               (n-k)
    "xaya"   I_{x,a,y,a}  * I_{a^(n-4)}               (n-k)(n-i-2) - (n-k)(n-k-1)
    "xyaa"   I_{x,y,a,a}  * I_{a^(n-4)}               C(n-k, 2)

    `letters` supplies the non-filler letters in order (x, then y).
    """
    out = IntegralCombination()
    if pattern == "xa":
        (x,) = letters
        for j in range(1, n + 1):
            out.add(n - j, _placed(n, filler, [(j, x)]))
    elif pattern == "xaa":
        (x,) = letters
        for j in range(1, n + 1):
            out.add(math.comb(n - j, 2), _placed(n, filler, [(j, x)]))
    elif pattern == "xay":
        x, y = letters
        for j in range(1, n):
            for l in range(j + 1, n + 1):
                out.add(l - 1 - j, _placed(n, filler, [(j, x), (l, y)]))
    elif pattern == "xya":
        x, y = letters
        for j in range(1, n):
            for k in range(j + 1, n + 1):
                out.add(n - k, _placed(n, filler, [(j, x), (k, y)]))
    elif pattern == "xaya":
        x, y = letters
        for i in range(1, n):
            for k in range(i + 1, n + 1):
                w = (n - k) * (n - i - 2) - (n - k) * (n - k - 1)
                out.add(w, _placed(n, filler, [(i, x), (k, y)]))
    elif pattern == "xyaa":
        x, y = letters
        for i in range(1, n):
            for k in range(i + 1, n + 1):
                out.add(math.comb(n - k, 2), _placed(n, filler, [(i, x), (k, y)]))
    else:
        raise ValueError(f"unknown pattern {pattern!r}; expected one of {PATTERNS}")
    return out


def repeated_word_identity(n: int, letter: int = 0) -> tuple[IntegralCombination, Fraction]:
    """I_{a^n} as (combination, coefficient): the single word with weight 1
    against I_a^n times 1/n!."""
    comb = IntegralCombination([(1, (letter,) * n)])
    return comb, Fraction(1, math.factorial(n))


def evaluate_combination(comb: IntegralCombination, tau: float, params: ModelParams,
                         policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Numeric value sum coeff * I_word(tau); floating error enters only here."""
    return math.fsum(float(c) * nested_integral(w, tau, params, policy)
                     for c, w in comb.terms)
