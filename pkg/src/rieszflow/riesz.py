"""Factors ``P_k``, partial Riesz-product densities and their exact transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .flowspec import RankOneSpec, StageError
from .kernel import FejerKernel
from .phase import context, to_mp

EXPANSION_LIMIT = 10**6


class ExpansionError(ValueError):
    """The product expansion exceeds the configured size limit."""


def _scalar_or_array(theta, values):
    return values[0] if np.ndim(theta) == 0 else values


def pk_eval(spec: RankOneSpec, k: int, theta):
    """``P_k(theta) = p_k^{-1/2} sum_j exp(i theta (j h_k + sbar_k(j)))``."""
    if not 0 <= k < spec.stages:
        raise StageError(f"stage {k} not defined (spec has {spec.stages} stages)")
    vals = spec.phase_table(k).exp_sum(theta) / math.sqrt(spec.cuts[k])
    return _scalar_or_array(theta, vals)


def rn_density(amplitudes, times, xi):
    """``|sum_k a_k exp(i t_k xi)|^2`` for the combination ``sum a_k f o T_{t_k}``."""
    a = np.asarray(amplitudes, dtype=complex)
    t = np.asarray(times, dtype=float)
    if a.size < 1 or a.shape != t.shape:
        raise ValueError("need matching, nonempty amplitudes and times")
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    z = np.exp(1j * np.outer(x, t)) @ a
    return _scalar_or_array(xi, np.abs(z) ** 2)


def product_frequencies(spec: RankOneSpec, stages, limit: int = EXPANSION_LIMIT) -> list:
    """All sums ``sum_l f_{n_l}(j_l)`` over the product expansion, sorted."""
    size = math.prod(spec.cuts[k] for k in stages)
    if size > limit:
        raise ExpansionError(f"product expansion has {size} terms, limit {limit}")
    out = [0 * spec.base_height]
    for k in stages:
        fk = spec.frequencies(k)
        out = [a + b for a in out for b in fk]
    out.sort()
    return out


@dataclass
class PartialProduct:
    """``prod_l |P_{n_l}|^2 K_s`` over distinct stages ``n_1 < ... < n_L``."""

    spec: RankOneSpec
    stages: tuple
    kernel: FejerKernel = field(default_factory=FejerKernel)

    def __post_init__(self):
        stages = tuple(sorted(int(k) for k in self.stages))
        if len(set(stages)) != len(stages):
            raise ValueError(f"stages must be distinct: {self.stages}")
        for k in stages:
            if not 0 <= k < self.spec.stages:
                raise StageError(f"stage {k} outside spec range 0..{self.spec.stages - 1}")
        self.stages = stages

    @property
    def expansion_size(self) -> int:
        return math.prod(self.spec.cuts[k] for k in self.stages)

    @property
    def max_frequency(self) -> float:
        """Largest frequency difference present in ``prod |P|^2``."""
        return float(sum(self.spec.phase_table(k).approx[-1] for k in self.stages))

    def factor_abs(self, theta) -> np.ndarray:
        """``|P_{n_l}(theta)|`` per stage, shape ``(L, len(theta))``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if not self.stages:
            return np.ones((0, theta.size))
        return np.vstack([np.abs(pk_eval(self.spec, k, theta)) for k in self.stages])

    def abs_eval(self, theta):
        vals = np.prod(self.factor_abs(theta), axis=0)
        return _scalar_or_array(theta, vals)

    def density_eval(self, theta):
        vals = np.atleast_1d(self.abs_eval(theta)) ** 2 * self.kernel.density(np.atleast_1d(theta))
        return _scalar_or_array(theta, vals)

    def frequency_gap(self, limit: int = EXPANSION_LIMIT):
        f = product_frequencies(self.spec, self.stages, limit)
        return min((b - a for a, b in zip(f, f[1:])), default=None)

    def ft_exact(self, t, limit: int = EXPANSION_LIMIT):
        return ft_exact(self, t, limit)


def _pair_candidates(approx: np.ndarray, t: float, s: float):
    span = float(np.max(np.abs(approx))) if approx.size else 0.0
    margin = 1e-9 * (1.0 + span + abs(t))
    lo = np.searchsorted(approx, approx - t - s - margin, side="left")
    hi = np.searchsorted(approx, approx - t + s + margin, side="right")
    return lo, hi


def ft_exact(pp: PartialProduct, t, limit: int = EXPANSION_LIMIT, exact: bool = False):
    """``int exp(-i t theta) prod |P|^2 d mu_s`` as a finite triangle sum.

    The product expands to ``N^{-1} sum_{a,b} exp(i theta (F_a - F_b))`` so
    the transform is ``N^{-1} sum_{a,b} tri_s(t - (F_a - F_b))``.  Pairs
    outside the triangle support are pruned on sorted float copies, the
    surviving ones are evaluated in the flow's exact or extended arithmetic.
    With ``exact=True`` the unrounded Fraction/mpf value is returned.
    """
    spec = pp.spec
    freqs = product_frequencies(spec, pp.stages, limit)
    n = len(freqs)
    ctx = context(spec.precision_digits)
    if spec.exact:
        s = Fraction(pp.kernel.s)
        conv = Fraction
        total_zero = Fraction(0)
    else:
        s = ctx.mpf(pp.kernel.s)
        conv = ctx.mpf
        total_zero = None
    approx = np.array([float(f) for f in freqs])
    ts = [t] if np.ndim(t) == 0 else list(np.asarray(t, dtype=object).ravel())
    results = []
    for tv in ts:
        if isinstance(tv, (int, Fraction)) and not isinstance(tv, bool):
            tq = Fraction(tv) if spec.exact else to_mp(Fraction(tv), ctx)
        else:
            tq = conv(float(tv))
        lo, hi = _pair_candidates(approx, float(tv), float(pp.kernel.s))
        terms = []
        for a in range(n):
            fa = freqs[a]
            for b in range(lo[a], hi[a]):
                u = abs(tq - (fa - freqs[b]))
                if u < s:
                    terms.append(1 - u / s)
        if spec.exact:
            val = sum(terms, total_zero) / n
        else:
            val = ctx.fsum(terms) / n
        results.append(val if exact else float(val))
    if np.ndim(t) == 0:
        return results[0]
    return results if exact else np.array(results)


def mass_residual(pp: PartialProduct, limit: int = EXPANSION_LIMIT) -> float:
    """``ft_exact(0) - 1``; vanishes whenever the product frequency gap exceeds ``s``."""
    return float(ft_exact(pp, 0.0, limit, exact=True) - 1)


def quadrature_work(pp: PartialProduct, budget: int = 4096, cutoff: float | None = None) -> int:
    """Rough count of complex exponentials :func:`quadrature_mass` would evaluate."""
    cutoff = 4.0 / pp.kernel.s if cutoff is None else cutoff
    width = math.pi / (5.0 * (2 * pp.max_frequency + pp.kernel.s))
    nodes = 8 * max(math.ceil(2 * cutoff / width), math.ceil(budget / 8))
    return nodes * sum(pp.spec.cuts[k] for k in pp.stages)


def quadrature_mass(pp: PartialProduct, budget: int = 4096, cutoff: float | None = None,
                    pair_limit: int = 4096) -> float:
    """Total mass of ``prod |P|^2 mu_s`` by panel quadrature.

    Inside ``[-cutoff, cutoff]`` the integrand is evaluated with exact phase
    reduction; beyond it the trigonometric expansion is integrated in
    closed form, which is only done when ``N <= pair_limit``.
    """
    kernel = pp.kernel
    cutoff = 4.0 / kernel.s if cutoff is None else cutoff
    rule = kernel.quadrature(budget, cutoff, max_freq=2 * pp.max_frequency)
    inner = rule.integrate(lambda x: np.atleast_1d(pp.abs_eval(x)) ** 2)
    n = pp.expansion_size
    if n > pair_limit:
        raise ExpansionError(f"{n} expansion terms exceed the tail pair limit {pair_limit}")
    f = np.array([float(v) for v in product_frequencies(pp.spec, pp.stages)])
    diffs = (f[:, None] - f[None, :]).ravel()
    tail = float(np.sum(kernel.tail_cos(diffs, cutoff))) / n
    return inner + tail
