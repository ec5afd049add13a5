"""Extended-precision contexts and exact phase reduction for large frequencies.

Frequencies reach ~1e12 while sample points can sit far out in the tails of
the reference measure, so ``theta * freq`` overflows the 53-bit mantissa long
before it is reduced mod 2*pi.  :class:`PhaseTable` stores each frequency in
turns (``freq / 2pi``) as a sum of 26-bit float pieces.  A float64 ``theta``
split Veltkamp-style into two 26-bit halves multiplies every piece exactly,
so each partial product can be reduced mod 1 without error.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

DEFAULT_DIGITS = 60
# extra working digits carried internally on top of the requested precision
GUARD_DIGITS = 15

_PIECE_BITS = 26
_N_PIECES = 5
_SPLITTER = float(2**27 + 1)


@lru_cache(maxsize=None)
def context(digits: int = DEFAULT_DIGITS) -> mpmath.MPContext:
    """Return a shared mpmath context working at ``digits`` + guard digits.

    Contexts are never mutated after creation, so they are safe to share
    between threads.
    """
    if digits < 15:
        raise ValueError(f"precision_digits must be >= 15, got {digits}")
    ctx = mpmath.MPContext()
    ctx.dps = digits + GUARD_DIGITS
    return ctx


def to_mp(value, ctx: mpmath.MPContext):
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    return ctx.mpf(value)


def parse_real(value, ctx: mpmath.MPContext | None = None):
    """Parse ints, Fractions, ``"a/b"`` strings, decimal strings or floats.

    Returns a Fraction when the input is exactly rational in a finite
    notation (ints, ``"a/b"``, Fraction), otherwise an mpf in ``ctx``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not reals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            return Fraction(text)
        try:
            return Fraction(int(text))
        except ValueError:
            pass
        if ctx is None:
            return Fraction(text)
        return ctx.mpf(text)
    if isinstance(value, float):
        if ctx is None:
            return Fraction(value)
        return ctx.mpf(value)
    if hasattr(value, "_mpf_"):
        return value if ctx is None else ctx.mpf(value)
    raise TypeError(f"cannot interpret {value!r} as a real number")


def _split26(x: float) -> float:
    """Round ``x`` to 26 significant bits (result is an exact float)."""
    if x == 0.0:
        return 0.0
    m, e = math.frexp(x)
    return math.ldexp(round(m * 2**_PIECE_BITS), e - _PIECE_BITS)


class PhaseTable:
    """Frequencies prepared for exact phase reduction of ``exp(i*theta*f)``.

    Parameters
    ----------
    freqs : sequence of mpf or Fraction
        Frequencies at extended precision.
    digits : int
        Working precision used to form ``f / 2pi``.
    """

    def __init__(self, freqs, digits: int = DEFAULT_DIGITS):
        ctx = context(digits)
        two_pi = 2 * ctx.pi
        pieces = np.zeros((_N_PIECES, len(freqs)))
        for j, f in enumerate(freqs):
            g = to_mp(f, ctx) / two_pi
            for b in range(_N_PIECES):
                hi = _split26(float(g))
                pieces[b, j] = hi
                g = g - hi
        self.pieces = pieces
        self.size = len(freqs)
        self.approx = np.array([float(to_mp(f, ctx)) for f in freqs])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.approx))) if self.size else 0.0

    def turns(self, theta) -> np.ndarray:
        """Fractional part of ``theta * f / 2pi``, shape ``(len(theta), size)``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        c = theta * _SPLITTER
        th_hi = c - (c - theta)
        th_lo = theta - th_hi
        acc = np.zeros((theta.size, self.size))
        for part in (th_hi, th_lo):
            for b in range(_N_PIECES):
                prod = part[:, None] * self.pieces[b][None, :]
                acc += prod - np.floor(prod)
        return acc - np.floor(acc)

    def exp_sum(self, theta, weights=None, chunk: int = 4096) -> np.ndarray:
        """``sum_j w_j exp(i*theta*f_j)`` for each theta (complex array)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.empty(theta.size, dtype=complex)
        rows = max(1, chunk * 256 // max(self.size, 1))
        for start in range(0, theta.size, rows):
            ph = 2 * np.pi * self.turns(theta[start:start + rows])
            z = np.exp(1j * ph)
            out[start:start + rows] = z.sum(axis=1) if weights is None else z @ weights
        return out

    def cos_sum(self, theta, chunk: int = 4096) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.empty(theta.size)
        rows = max(1, chunk * 256 // max(self.size, 1))
        for start in range(0, theta.size, rows):
            ph = 2 * np.pi * self.turns(theta[start:start + rows])
            out[start:start + rows] = np.cos(ph).sum(axis=1)
        return out


def reduced_phase_mp(theta, freq, ctx: mpmath.MPContext):
    """``theta * freq mod 2pi`` evaluated entirely in ``ctx``."""
    x = ctx.mpf(theta) * to_mp(freq, ctx)
    two_pi = 2 * ctx.pi
    return x - two_pi * ctx.floor(x / two_pi)
