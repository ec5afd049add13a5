"""Central limit experiment for cosine sums with exponential-staircase frequencies."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .kernel import FejerKernel
from .phase import PhaseTable
from .staircase import StaircaseParams, omegas

EXPAND_LIMIT = 10


def omega_table(params: StaircaseParams, n: int) -> PhaseTable:
    return PhaseTable(omegas(params, n), params.precision_digits)


def clt_statistic(params: StaircaseParams, n: int, t, table: PhaseTable | None = None):
    """``S_n(t) = sqrt(2/p_n) sum_j cos(omega_n(j) t)`` with exact phase reduction."""
    table = omega_table(params, n) if table is None else table
    vals = math.sqrt(2.0 / params.p[n]) * table.cos_sum(t)
    return vals[0] if np.ndim(t) == 0 else vals


@dataclass
class EmpiricalDistribution:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=float))

    @property
    def count(self) -> int:
        return self.values.size

    def cdf(self, x):
        return np.searchsorted(self.values, x, side="right") / self.count

    def histogram(self, bins: int = 50, value_range=(-4.0, 4.0)):
        counts, edges = np.histogram(self.values, bins=bins, range=value_range)
        return counts, edges


def ks_normal(ed: EmpiricalDistribution) -> float:
    """``sup_x |F_emp(x) - Phi(x)|`` (``Phi`` via ``scipy.special.ndtr``)."""
    n = ed.count
    if n < 1:
        raise ValueError("empty sample")
    phi = ndtr(ed.values)
    upper = np.arange(1, n + 1) / n - phi
    lower = phi - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


@dataclass
class CLTResult:
    distribution: EmpiricalDistribution
    ks: float
    second_moment: float
    mean: float
    interval: tuple
    mass: float
    n: int
    p_n: int
    variant: str
    samples: np.ndarray = field(repr=False, default=None)
    statistic: np.ndarray = field(repr=False, default=None)

    def summary(self) -> dict:
        return {"n": self.n, "p_n": self.p_n, "variant": self.variant, "A": list(self.interval),
                "mu_s_A": self.mass, "count": self.distribution.count, "ks": self.ks,
                "mean": self.mean, "second_moment": self.second_moment}


def clt_experiment(params: StaircaseParams, n: int, kernel: FejerKernel, interval=(1.0, 2.0),
                   sample_count: int = 20000, seed: int = 0) -> CLTResult:
    """Law of ``S_n(t)`` for ``t ~ mu_s`` conditioned on ``A = [a, b]``."""
    t = kernel.sample_restricted(interval, sample_count, seed)
    s_n = clt_statistic(params, n, t)
    ed = EmpiricalDistribution(s_n)
    return CLTResult(ed, ks_normal(ed), float(np.mean(s_n ** 2)), float(np.mean(s_n)),
                     (float(interval[0]), float(interval[1])), kernel.mass(*interval), n,
                     params.p[n], params.variant.value, t, s_n)


def theta_eval(params: StaircaseParams, n: int, x, t, table: PhaseTable | None = None):
    """``prod_j (1 - i x sqrt(2/p_n) cos(omega_n(j) t))`` on the broadcast of ``x`` and ``t``."""
    table = omega_table(params, n) if table is None else table
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    xb, tb = np.broadcast_arrays(x, t)
    tt = tb.ravel()
    cos = np.cos(2 * np.pi * table.turns(tt))
    c = math.sqrt(2.0 / params.p[n])
    vals = np.prod(1.0 - 1j * c * xb.ravel()[:, None] * cos, axis=1)
    return vals.reshape(xb.shape) if xb.ndim else complex(vals[0])


@dataclass(frozen=True)
class ThetaTerm:
    support: tuple
    signs: tuple
    coefficient: complex

    @property
    def length(self) -> int:
        return len(self.support)


def theta_expand(params: StaircaseParams, n: int, x: float) -> list:
    """Cosine expansion ``Theta_n = 1 + sum_w rho_w cos(w t)``.

    ``prod_{j in I} cos(a_j) = 2^{1-r} sum_eta cos(sum eta_j a_j)`` with the
    first sign fixed to ``+1`` (``cos`` is even), so each word of length ``r``
    carries ``rho_w = (-i x sqrt(2/p_n))^r 2^{1-r}``.
    """
    p = params.p[n]
    if p > EXPAND_LIMIT:
        raise ValueError(f"p_n = {p} too large to expand (limit {EXPAND_LIMIT})")
    c = -1j * x * math.sqrt(2.0 / p)
    terms = []
    for r in range(1, p + 1):
        coeff = c ** r * 2.0 ** (1 - r)
        for support in itertools.combinations(range(p), r):
            for tail in itertools.product((1, -1), repeat=r - 1):
                terms.append(ThetaTerm(support, (1,) + tail, coeff))
    return terms


def theta_from_terms(params: StaircaseParams, n: int, terms: list, t) -> np.ndarray:
    """Evaluate ``1 + sum rho_w cos(w t)`` from an expansion (phases reduced exactly)."""
    from .words import word_table
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not terms:
        return np.ones(t.size, dtype=complex)
    table = word_table(params, n, [(tm.support, tm.signs) for tm in terms])
    coeffs = np.array([tm.coefficient for tm in terms])
    cos = np.cos(2 * np.pi * table.turns(t))
    return 1.0 + cos @ coeffs


def rho_bound(r: int, x: float, p: int) -> float:
    """``2^{1-r} |x|^r / p^{r/2}``, the bound as printed for the cosine coefficients."""
    return 2.0 ** (1 - r) * abs(x) ** r / p ** (r / 2)


def rho_bound_scaled(r: int, x: float, p: int) -> float:
    """Same bound with the ``sqrt 2`` of the normalisation kept: ``x -> sqrt(2) x``."""
    return rho_bound(r, math.sqrt(2.0) * x, p)


def modulus_identity_residual(params: StaircaseParams, n: int, spec, t) -> float:
    """``max | |P_n(t)| - |p^{-1/2} sum_j exp(i omega_n(j) t)| |`` over ``t``.

    The factor's frequencies are ``omega_n(j) - omega_n(0)``; the shift is a
    unimodular rotation so moduli agree.
    """
    from .riesz import pk_eval
    tbl = omega_table(params, n)
    direct = np.abs(tbl.exp_sum(t)) / math.sqrt(params.p[n])
    return float(np.max(np.abs(np.abs(pk_eval(spec, n, np.atleast_1d(t))) - direct)))
