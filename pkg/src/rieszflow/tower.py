"""Finite-stage tower model and the autocorrelation oracle for ``sigma-hat``.

At stage ``N`` the base block reappears at the occurrence heights ``O_N``;
the block of height ``s`` sitting on each occurrence carries the indicator
whose spectral measure the Riesz product describes.  The autocorrelation
of that indicator under the upward flow is a plain interval-overlap count,
independent of any Fourier computation.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .flowspec import RankOneSpec, StageError, cumulative_spacers
from .kernel import FejerKernel
from .phase import context
from .riesz import PartialProduct, ft_exact

OCCURRENCE_LIMIT = 10**6


@dataclass(frozen=True)
class TowerStage:
    occ: tuple
    height: object
    base_height: object
    exact: bool
    precision_digits: int

    @property
    def width(self):
        return 1 / self.height

    def __len__(self):
        return len(self.occ)


def occurrence_heights(spec: RankOneSpec, N: int, limit: int = OCCURRENCE_LIMIT) -> TowerStage:
    """``O_{k+1} = {j h_k + sbar_k(j) + o : j < p_k, o in O_k}``, ``O_0 = {0}``."""
    if not 0 <= N <= spec.stages:
        raise StageError(f"stage {N} outside 0..{spec.stages}")
    size = math.prod(spec.cuts[:N])
    if size > limit:
        raise ValueError(f"|O_{N}| = {size} exceeds limit {limit}")
    occ = [0 * spec.base_height]
    for k in range(N):
        sb = cumulative_spacers(spec, k)
        h = spec.heights[k]
        occ = [j * h + sb[j] + o for j in range(spec.cuts[k]) for o in occ]
    occ.sort()
    return TowerStage(tuple(occ), spec.heights[N], spec.base_height, spec.exact,
                      spec.precision_digits)


def _overlap(a0, a1, b0, b1):
    lo = a0 if a0 > b0 else b0
    hi = a1 if a1 < b1 else b1
    return hi - lo if hi > lo else 0


def autocorrelation(ts: TowerStage, s, t, exact: bool = False):
    """``w_N sum_{o,o'} |[o+t, o+s+t) cap [o', o'+s) cap [0, h_N)|``.

    Mass carried above the stage-N top is dropped (no wraparound).
    """
    if ts.exact:
        s, t, zero = Fraction(s), Fraction(t), Fraction(0)
    else:
        ctx = context(ts.precision_digits)
        s, t, zero = ctx.mpf(s), ctx.mpf(t), ctx.mpf(0)
    if not 0 < s <= ts.base_height:
        raise ValueError("block height s must satisfy 0 < s <= h_0")
    if t < 0:
        raise ValueError("t must be nonnegative")
    occ = ts.occ
    approx = [float(o) for o in occ]
    margin = 1e-9 * (1.0 + abs(approx[-1]) + float(t))
    top = ts.height
    total = zero
    for o in occ:
        a0, a1 = o + t, o + s + t
        if a0 >= top:
            continue
        a1 = a1 if a1 < top else top
        lo = bisect_left(approx, float(a0 - s) - margin)
        hi = bisect_right(approx, float(a1) + margin)
        for i in range(lo, hi):
            b0 = occ[i]
            total += _overlap(a0, a1, b0, b0 + s)
    val = total / ts.height
    return val if exact else float(val)


@dataclass
class Comparison:
    t: float
    autocorr: float
    autocorr0: float
    ft: float
    residual: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.bound + 1e-9

    def to_dict(self) -> dict:
        return {"t": self.t, "autocorr": self.autocorr, "autocorr0": self.autocorr0,
                "ft": self.ft, "residual": self.residual, "bound": self.bound, "ok": self.ok}


def compare_ft(spec: RankOneSpec, N: int, s: float, t: float, tower: TowerStage | None = None) -> Comparison:
    """Normalised autocorrelation against ``ft_exact`` over stages ``0..N-1``."""
    ts = occurrence_heights(spec, N) if tower is None else tower
    a_t = autocorrelation(ts, s, t, exact=True)
    a_0 = autocorrelation(ts, s, 0, exact=True)
    ft = ft_exact(PartialProduct(spec, tuple(range(N)), FejerKernel(s)), float(t), exact=True)
    residual = abs(a_t / a_0 - ft)
    bound = (float(t) + float(s)) / float(ts.height)
    return Comparison(float(t), float(a_t), float(a_0), float(ft), float(residual), bound)
