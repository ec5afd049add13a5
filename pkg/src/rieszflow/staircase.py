"""Exponential staircase frequencies, the spacers they induce, and presets."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .flowspec import Check, RankOneSpec, SpecError, ValidityReport, check_typeI_conditions
from .phase import DEFAULT_DIGITS, context, to_mp


class Variant(str, enum.Enum):
    """Whether ``omega_n(p)`` carries the ``-1`` inside the parenthesis."""

    TYPE_I_MINUS_ONE = "type_i_minus_one"
    THEOREM = "theorem"


class ConditionError(SpecError):
    """A derived spacer came out negative: condition (1) is violated."""


@dataclass(frozen=True)
class StaircaseParams:
    m: tuple
    p: tuple
    eps: tuple
    variant: Variant = Variant.THEOREM
    precision_digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        p = tuple(int(v) for v in self.p)
        eps = tuple(Fraction(v) for v in self.eps)
        if not len(m) == len(p) == len(eps):
            raise SpecError(f"m, p, eps lengths differ: {len(m)}, {len(p)}, {len(eps)}")
        if any(v <= 0 for v in m):
            raise SpecError("every m_n must be a positive integer")
        if any(v < 1 for v in p):
            raise SpecError("every p_n must be a positive integer")
        if any(e <= 0 for e in eps):
            raise SpecError("every eps_n must be a positive rational")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def stages(self) -> int:
        return len(self.p)

    def monotone_warnings(self) -> list:
        out = []
        if any(b > a for a, b in zip(self.eps, self.eps[1:])):
            out.append("eps_n is not nonincreasing over the range")
        if any(b < a for a, b in zip(self.p, self.p[1:])):
            out.append("p_n decreases somewhere over the range")
        if any(b < a for a, b in zip(self.m, self.m[1:])):
            out.append("m_n decreases somewhere over the range")
        return out


def omega(params: StaircaseParams, n: int, p: int):
    """``(m_n / eps_n^2) p_n (exp(eps_n p / p_n) [- 1])`` at working precision.

    ``p`` may equal ``p_n``: the closed form is extended one step so the last
    spacer of the row is defined.
    """
    pn = params.p[n]
    if not 0 <= p <= pn:
        raise ValueError(f"p={p} outside 0..{pn}")
    ctx = context(params.precision_digits)
    eps = to_mp(params.eps[n], ctx)
    scale = ctx.mpf(params.m[n]) * pn / (eps * eps)
    arg = eps * p / pn
    if params.variant is Variant.TYPE_I_MINUS_ONE:
        return scale * ctx.expm1(arg)
    return scale * ctx.exp(arg)


def omegas(params: StaircaseParams, n: int, upto: int | None = None) -> tuple:
    """``omega_n(0), ..., omega_n(upto)`` (default ``upto = p_n - 1``)."""
    upto = params.p[n] - 1 if upto is None else upto
    return tuple(omega(params, n, j) for j in range(upto + 1))


def spacers_from_omega(params: StaircaseParams, n: int, h_n) -> tuple:
    """Spacer row ``s_{n+1,p+1} = omega_n(p+1) - omega_n(p) - h_n``."""
    ctx = context(params.precision_digits)
    h = to_mp(h_n, ctx)
    if not h > 0:
        raise ValueError("h_n must be positive")
    w = omegas(params, n, params.p[n])
    row = tuple(w[j + 1] - w[j] - h for j in range(params.p[n]))
    for j, s in enumerate(row):
        if s < 0:
            raise ConditionError(
                f"stage {n}: spacer s[{n + 1},{j + 1}] = {ctx.nstr(s, 10)} < 0; "
                f"condition (1) m_n >= eps_n*h_n fails "
                f"(m_n={params.m[n]}, eps_n*h_n={ctx.nstr(to_mp(params.eps[n], ctx) * h, 10)})")
    return row


def frequencies(params: StaircaseParams, n: int, h_n) -> tuple:
    """``j*h_n + sbar_n(j)`` for ``j = 0 .. p_n - 1`` built from the spacer row."""
    ctx = context(params.precision_digits)
    h = to_mp(h_n, ctx)
    row = spacers_from_omega(params, n, h)
    out, acc = [], ctx.mpf(0)
    for j in range(params.p[n]):
        out.append(j * h + acc)
        acc += row[j]
    return tuple(out)


def telescoping_residual(params: StaircaseParams, n: int, h_n) -> float:
    """``max_j |(j h_n + sbar_n(j)) - (omega_n(j) - omega_n(0))|``."""
    f = frequencies(params, n, h_n)
    w = omegas(params, n)
    return float(max(abs(f[j] - (w[j] - w[0])) for j in range(len(f))))


def to_spec(params: StaircaseParams, base_height=1) -> RankOneSpec:
    """Rank-one spec whose spacer rows come from ``params`` stage by stage."""
    ctx = context(params.precision_digits)
    h = to_mp(base_height, ctx)
    rows = []
    for n in range(params.stages):
        row = spacers_from_omega(params, n, h)
        rows.append(row)
        h = params.p[n] * h + sum(row, ctx.mpf(0))
    return RankOneSpec(cuts=params.p, spacers=tuple(rows), base_height=to_mp(base_height, ctx),
                       precision_digits=params.precision_digits)


def build_adaptive(p: Sequence[int], eps: Sequence, m_rule: Callable, *,
                   variant=Variant.THEOREM, base_height=1,
                   precision_digits: int = DEFAULT_DIGITS) -> tuple:
    """Build params whose ``m_n`` depends on the height reached so far.

    ``m_rule(n, h_n, eps_n)`` returns the integer ``m_n``.  Returns
    ``(params, spec)``.
    """
    ctx = context(precision_digits)
    h = to_mp(base_height, ctx)
    ms, rows = [], []
    for n, (pn, en) in enumerate(zip(p, eps)):
        mn = int(m_rule(n, h, Fraction(en)))
        ms.append(mn)
        partial = StaircaseParams(m=(mn,), p=(pn,), eps=(en,), variant=variant,
                                  precision_digits=precision_digits)
        row = spacers_from_omega(partial, 0, h)
        rows.append(row)
        h = pn * h + sum(row, ctx.mpf(0))
    params = StaircaseParams(m=tuple(ms), p=tuple(p), eps=tuple(eps), variant=variant,
                             precision_digits=precision_digits)
    spec = RankOneSpec(cuts=tuple(p), spacers=tuple(rows), base_height=to_mp(base_height, ctx),
                       precision_digits=precision_digits)
    return params, spec


def _ceil_eps_h(n, h, eps):
    return int(mpmath.ceil(h * eps.numerator / eps.denominator))


def _remark(n_first=3, n_last=12):
    ns = range(n_first, n_last + 1)
    p = [n for n in ns]
    eps = [Fraction(1, n * n) for n in ns]

    def m_rule(k, h, e):
        n = n_first + k
        return int(mpmath.ceil(h / (n * n)))
    return p, eps, m_rule


PRESETS = {
    "paper-main": ((4, 8, 16, 32),
                   (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 5)),
                   _ceil_eps_h),
    "remark": _remark(),
    "desk": ((16, 64, 256, 1024),
             (Fraction(1, 2), Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)),
             _ceil_eps_h),
    "desk-deep": ((16,) * 6,
                  (Fraction(1, 3), Fraction(1, 3), Fraction(1, 4), Fraction(1, 4), Fraction(1, 5), Fraction(1, 5)),
                  _ceil_eps_h),
    "desk-words": ((4, 6, 8, 10, 12),
                   (Fraction(1, 2), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 4)),
                   _ceil_eps_h),
}

PRESET_VARIANTS = {"paper-main": Variant.THEOREM}


def preset(name: str, *, variant=None, precision_digits: int = DEFAULT_DIGITS,
           base_height=1) -> tuple:
    """Return ``(params, spec)`` for a shipped preset.

    paper-main   variant THEOREM, p_n = 4, 8, 16, 32 with minimal m_n.
    remark       p_n = n, eps_n = 1/n^2, m_n = ceil(h_n/n^2) for n = 3..12.
    desk         warm-up stage p_0 = 16, then p_n = 64, 256, 1024; m_n = ceil(eps_n h_n),
                 omega below 1e12.
    desk-deep    six stages of p_n = 16 for nested-product experiments.
    desk-words   p_n <= 12 for exhaustive word enumeration.
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    p, eps, rule = PRESETS[name]
    variant = Variant(variant) if variant is not None else PRESET_VARIANTS.get(name, Variant.THEOREM)
    return build_adaptive(p, eps, rule, variant=variant, base_height=base_height,
                          precision_digits=precision_digits)


def prikhodko_subclass_check(params: StaircaseParams, heights: Sequence, alpha, beta) -> ValidityReport:
    """Check ``h_n^beta >= p_n >= h_n^(1+alpha)`` stage by stage.

    ``beta`` may be a number or a callable ``beta(n, h_n, eps_n)``; margins
    are reported in log space.
    """
    alpha = Fraction(alpha)
    report = ValidityReport()
    if not 0 < alpha < Fraction(1, 4):
        report.checks.append(Check("alpha_range", None, False, None, "alpha must lie in (0, 1/4)"))
    for n in range(params.stages):
        h = float(heights[n])
        b = float(beta(n, heights[n], params.eps[n])) if callable(beta) else float(beta)
        if not callable(beta) and b < 2:
            report.checks.append(Check("beta_range", n, False, b - 2, "beta must be >= 2"))
        lp, lh = math.log(params.p[n]), math.log(h)
        upper = b * lh - lp
        lower = lp - (1 + float(alpha)) * lh
        report.checks.append(Check("upper", n, upper >= -1e-12, upper, f"h_n^beta >= p_n (beta={b:.6g})"))
        report.checks.append(Check("lower", n, lower >= -1e-12, lower, "p_n >= h_n^(1+alpha)"))
    report.verdict = "in subclass over range" if report.passed else "outside subclass"
    return report


def sqrt_floor_beta(delta=Fraction(1, 2)):
    """``beta_n = eps_n (floor(h_n^delta) + 1)``."""
    def beta(n, h, eps):
        return float(eps) * (math.floor(float(h) ** float(delta)) + 1)
    return beta


def admissibility(params: StaircaseParams, spec: RankOneSpec) -> ValidityReport:
    return check_typeI_conditions(params, spec.heights, params.stages)
