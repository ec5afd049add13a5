"""Signed subset sums of staircase frequencies: enumeration, gaps, window counts.

Word values are held as fixed-point integers ``round(omega * 2^bits)`` so the
sums are exact; only the rounding of each ``omega_n(j)`` (at most
``2^-bits`` each) separates them from the true values.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .phase import PhaseTable, context
from .staircase import StaircaseParams, omegas

WORD_LIMIT = 10**7
GAP_THRESHOLD_EXP = 30


class CombinatorialOverflow(ValueError):
    pass


class DistinctnessError(ArithmeticError):
    """Two words stayed closer than the threshold even at doubled precision."""


def _bits(digits: int) -> int:
    return int(math.ceil(digits * math.log2(10))) + 16


def word_count(p: int, max_length: int) -> int:
    return sum(math.comb(p, r) * 2**r for r in range(1, max_length + 1))


@dataclass(frozen=True)
class FrequencyWord:
    support: tuple
    signs: tuple
    value: object

    @property
    def length(self) -> int:
        return len(self.support)

    @property
    def sign_sum(self) -> int:
        return sum(self.signs)


class WordSet:
    """All words of length ``<= max_length`` for stage ``n``; a sequence of :class:`FrequencyWord`."""

    def __init__(self, params: StaircaseParams, n: int, max_length: int, digits: int | None = None):
        p = params.p[n]
        max_length = min(max_length, p)
        total = word_count(p, max_length)
        if total > WORD_LIMIT:
            raise CombinatorialOverflow(f"{total} words exceed the limit {WORD_LIMIT}")
        self.params, self.n, self.max_length = params, n, max_length
        self.digits = params.precision_digits if digits is None else digits
        self.bits = _bits(self.digits)
        ctx = context(self.digits)
        if self.digits != params.precision_digits:
            params = StaircaseParams(params.m, params.p, params.eps, params.variant, self.digits)
        w = omegas(params, n)
        scale = ctx.ldexp(1, self.bits)
        fixed = [int(ctx.nint(v * scale)) for v in w]
        self.omega_fixed = fixed
        supports, signs, values = [], [], []
        for r in range(1, max_length + 1):
            for sup in itertools.combinations(range(p), r):
                parts = [fixed[j] for j in sup]
                for eta in itertools.product((1, -1), repeat=r):
                    supports.append(sup)
                    signs.append(eta)
                    values.append(sum(e * v for e, v in zip(eta, parts)))
        self.supports, self.signs, self.values = supports, signs, values
        self.lengths = np.array([len(s) for s in supports], dtype=np.int64)
        self.sign_sums = np.array([sum(e) for e in signs], dtype=np.int64)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i) -> FrequencyWord:
        ctx = context(self.digits)
        return FrequencyWord(self.supports[i], self.signs[i], ctx.ldexp(ctx.mpf(self.values[i]), -self.bits))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def abs_floats(self) -> np.ndarray:
        return np.array([abs(v) for v in self.values], dtype=float) * 2.0 ** -self.bits

    def count_by_length(self) -> dict:
        return {int(r): int(c) for r, c in zip(*np.unique(self.lengths, return_counts=True))}


def enumerate_words(params: StaircaseParams, n: int, max_length: int) -> WordSet:
    """Words ``sum_{j in I} eta_j omega_n(j)`` with ``1 <= |I| <= max_length``."""
    return WordSet(params, n, max_length)


def min_gap(words) -> float:
    """Smallest pairwise distance between word values (signed, not absolute)."""
    if isinstance(words, WordSet):
        vals = sorted(words.values)
        if len(vals) < 2:
            raise ValueError("need at least two words")
        gap = min(b - a for a, b in zip(vals, vals[1:]))
        return math.ldexp(float(gap), -words.bits) if gap < 2**1000 else math.inf
    vals = sorted(w.value if isinstance(w, FrequencyWord) else w for w in words)
    if len(vals) < 2:
        raise ValueError("need at least two words")
    return float(min(b - a for a, b in zip(vals, vals[1:])))


def certify_distinct(params: StaircaseParams, n: int, max_length: int | None = None) -> dict:
    """Check ``min_gap > 1e-30``; retry once at doubled precision, then fail hard."""
    max_length = params.p[n] if max_length is None else max_length
    threshold = 10.0 ** -GAP_THRESHOLD_EXP
    digits = params.precision_digits
    for attempt in range(2):
        ws = WordSet(params, n, max_length, digits)
        gap = min_gap(ws)
        if gap > threshold:
            return {"n": n, "p_n": params.p[n], "words": len(ws), "min_gap": gap,
                    "digits": digits, "distinct": True}
        digits *= 2
    raise DistinctnessError(f"stage {n}: min gap {gap:.3g} <= 1e-{GAP_THRESHOLD_EXP} at {digits // 2} digits")


def count_in_window(words: WordSet, omega_cut: float, length: int | None = None) -> int:
    """``#{w : |w| <= Omega}``, optionally restricted to one word length."""
    if omega_cut <= 0:
        raise ValueError("window half-width must be positive")
    a = words.abs_floats()
    mask = a <= omega_cut
    if length is not None:
        mask &= words.lengths == length
    return int(mask.sum())


def bound_window(params: StaircaseParams, n: int, r: int, omega_cut: float) -> float:
    """Window-count bound for words of even length ``r >= 4``.

    With ``k = floor(log2 r)``:
    ``Omega p^k (log p)^(k-1) / (m eps^(k-2))``; ``r = 4`` gives
    ``Omega p^2 log p / m`` and ``r = 8`` gives ``Omega p^3 (log p)^2 / (m eps)``.
    """
    if r % 2:
        raise ValueError(f"odd length r={r}: those words leave every window, no bound applies")
    if r < 4:
        raise ValueError("bound defined for even r >= 4")
    k = int(math.floor(math.log2(r)))
    p, m, eps = params.p[n], params.m[n], float(params.eps[n])
    return omega_cut * p**k * math.log(p) ** (k - 1) / (m * eps ** (k - 2))


def excluded_class_minima(words: WordSet) -> dict:
    """Smallest ``|w|`` over odd-length words and over words with ``sum eta != 0``."""
    a = words.abs_floats()
    odd = words.lengths % 2 == 1
    unbalanced = words.sign_sums != 0
    return {"odd_length": float(a[odd].min()) if odd.any() else None,
            "nonzero_sign_sum": float(a[unbalanced].min()) if unbalanced.any() else None,
            "balanced_even": float(a[~odd & ~unbalanced].min()) if (~odd & ~unbalanced).any() else None}


def word_table(params: StaircaseParams, n: int, patterns) -> PhaseTable:
    """Phase table of words given as ``(support, signs)`` pairs."""
    w = omegas(params, n)
    vals = [sum((e * w[j] for j, e in zip(sup, sg)), 0 * w[0]) for sup, sg in patterns]
    return PhaseTable(vals, params.precision_digits)
