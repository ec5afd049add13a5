"""Bourgain-criterion functionals and weak-convergence checks.

Everything here is evidence from finite data: nested stage products and
single factors are integrated against ``mu_s`` by seeded Monte Carlo, with
closed-form paths where the integrand is a trigonometric polynomial.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from .flowspec import RankOneSpec
from .kernel import FejerKernel
from .parallel import batch_sizes, ordered_map
from .riesz import PartialProduct, ft_exact, pk_eval, quadrature_work

MC_BATCH = 4096
QUAD_WORK_LIMIT = 2 * 10**7


class CrossCheckWarning(UserWarning):
    """Monte Carlo and quadrature estimates disagree beyond 3 standard errors."""


@dataclass
class Estimate:
    mean: float
    stderr: float
    count: int = 0
    method: str = "mc"

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "count": self.count, "method": self.method}


def _moments(values: np.ndarray) -> np.ndarray:
    """Per-batch column sums and sums of squares."""
    return np.stack([values.sum(axis=-1), (values ** 2).sum(axis=-1)])


def mc_integrals(kernel: FejerKernel, integrands: Callable, budget: int, seed: int,
                 stream: int = 0, workers: int | None = None):
    """Monte Carlo ``int g_i d mu_s`` for a family of integrands sharing samples.

    ``integrands(theta)`` returns an array of shape ``(K, len(theta))``.
    Batches use fixed substreams and are reduced in batch order, so the
    result does not depend on ``workers``.  Returns ``(means, stderrs, raw)``
    where ``raw`` holds per-batch sums for paired statistics.
    """
    sizes = batch_sizes(budget, MC_BATCH)

    def run(item):
        i, size = item
        theta = kernel.sample_batch(seed, stream, i, size)
        vals = np.atleast_2d(integrands(theta))
        return vals

    chunks = ordered_map(run, list(enumerate(sizes)), workers)
    vals = np.concatenate(chunks, axis=1)
    means = vals.mean(axis=1)
    std = vals.std(axis=1, ddof=1) if budget > 1 else np.zeros_like(means)
    return means, std / math.sqrt(budget), vals


def bourgain_beta(pp: PartialProduct, budget: int = 10**4, seed: int = 0,
                  cross_check: bool = False, workers: int | None = None) -> Estimate:
    """``int prod_l |P_{n_l}| d mu_s`` with its standard error."""
    if budget < 1000:
        raise ValueError("budget must be >= 1000")
    if not pp.stages:
        return Estimate(1.0, 0.0, budget, "exact")
    means, errs, _ = mc_integrals(pp.kernel, lambda th: pp.abs_eval(th)[None, :], budget, seed,
                                  workers=workers)
    est = Estimate(float(means[0]), float(errs[0]), budget, "mc")
    if cross_check:
        quad = beta_quadrature(pp)
        if quad is not None:
            value, err = quad
            if abs(value - est.mean) > 3 * est.stderr + err:
                warnings.warn(f"beta: MC {est.mean:.6g} +- {est.stderr:.2g} vs quadrature "
                              f"{value:.6g} (tail <= {err:.2g})", CrossCheckWarning, stacklevel=2)
    return est


def beta_quadrature(pp: PartialProduct, cutoff: float | None = None, budget: int = 4096):
    """Panel-rule value of ``int prod |P| d mu_s`` and its tail error bound, or None."""
    cutoff = 200.0 / pp.kernel.s if cutoff is None else cutoff
    if quadrature_work(pp, budget, cutoff) > QUAD_WORK_LIMIT:
        return None
    rule = pp.kernel.quadrature(budget, cutoff, max_freq=pp.max_frequency)
    value = rule.integrate(lambda x: pp.abs_eval(x))
    sup = math.prod(math.sqrt(pp.spec.cuts[k]) for k in pp.stages)
    return value, rule.tail_bound * sup


@dataclass
class ScanRow:
    L: int
    stages: tuple
    beta: float
    stderr: float

    def to_dict(self) -> dict:
        return {"L": self.L, "stages": list(self.stages), "beta": self.beta, "stderr": self.stderr}


@dataclass
class ScanResult:
    rows: list
    nonincreasing: bool
    decreased: bool
    verdict: str
    extra: dict = field(default_factory=dict)


def singularity_scan(spec: RankOneSpec, kernel: FejerKernel, stage_sets: Sequence | None = None,
                     budget: int = 10**4, seed: int = 0, workers: int | None = None) -> ScanResult:
    """``beta`` for each stage set, all from one shared sample of ``mu_s``.

    Default stage sets are the nested prefixes ``{0}, {0,1}, ...``; an
    ``L = 0`` row (empty product, ``beta = 1``) is always prepended.
    """
    if stage_sets is None:
        stage_sets = [tuple(range(L)) for L in range(1, spec.stages + 1)]
    stage_sets = [tuple(sorted(s)) for s in stage_sets]
    used = sorted({k for s in stage_sets for k in s})
    index = {k: i for i, k in enumerate(used)}

    def integrands(theta):
        if not used:
            return np.ones((len(stage_sets), theta.size))
        fac = np.vstack([np.abs(pk_eval(spec, k, theta)) for k in used])
        return np.vstack([np.prod(fac[[index[k] for k in s]], axis=0) if s else np.ones(theta.size)
                          for s in stage_sets])

    means, errs, _ = mc_integrals(kernel, integrands, budget, seed, workers=workers)
    rows = [ScanRow(0, (), 1.0, 0.0)]
    rows += [ScanRow(len(s), s, float(m), float(e)) for s, m, e in zip(stage_sets, means, errs)]
    body = rows[1:]
    steps_ok = all(b.beta <= a.beta + 2 * math.hypot(a.stderr, b.stderr)
                   for a, b in zip(body, body[1:]))
    decreased = bool(body) and body[-1].beta < body[0].beta - 3 * math.hypot(body[0].stderr, body[-1].stderr)
    if steps_ok and decreased:
        verdict = "evidence: beta decreasing with L"
    elif steps_ok:
        verdict = "evidence inconclusive: no significant decrease"
    else:
        verdict = "evidence against monotone decrease"
    return ScanResult(rows, steps_ok, decreased, verdict)


def deviation_Dm(spec: RankOneSpec, m: int, kernel: FejerKernel, phi: Callable | None = None,
                 budget: int = 10**4, seed: int = 0, workers: int | None = None) -> Estimate:
    """``int phi ||P_m|^2 - 1| d mu_s`` (``phi = 1`` by default)."""

    def integrand(theta):
        dev = np.abs(np.abs(pk_eval(spec, m, theta)) ** 2 - 1.0)
        return (dev if phi is None else phi(theta) * dev)[None, :]

    means, errs, _ = mc_integrals(kernel, integrand, budget, seed, workers=workers)
    return Estimate(float(means[0]), float(errs[0]), budget, "mc")


# -- test functions for the weak-limit check ----------------------------------

@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __call__(self, theta):
        return np.full(np.shape(theta), self.c, dtype=float)

    def weighted_ft(self, kernel: FejerKernel, u):
        return self.c * kernel.ft_triangle(u)


@dataclass(frozen=True)
class Cosine:
    t: float

    def __call__(self, theta):
        return np.cos(self.t * np.asarray(theta, dtype=float))

    def weighted_ft(self, kernel: FejerKernel, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * (kernel.ft_triangle(u - self.t) + kernel.ft_triangle(u + self.t))


@dataclass(frozen=True)
class TriangleBump:
    """``max(1 - |theta|/halfwidth, 0)``."""

    halfwidth: float = 1.0

    def __call__(self, theta):
        return np.maximum(1.0 - np.abs(np.asarray(theta, dtype=float)) / self.halfwidth, 0.0)

    def fourier(self, xi):
        w = self.halfwidth
        return w * np.sinc(np.asarray(xi, dtype=float) * w / (2 * np.pi)) ** 2

    def weighted_ft(self, kernel: FejerKernel, u, nodes: int = 64):
        # FT of a product = convolution of the transforms / 2pi; K_s transforms to a triangle on [-s, s]
        x, w = np.polynomial.legendre.leggauss(nodes)
        s = kernel.s
        v = np.concatenate([0.5 * s * (x - 1), 0.5 * s * (x + 1)])
        wv = np.concatenate([0.5 * s * w, 0.5 * s * w]) * kernel.ft_triangle(v)
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return (self.fourier(u[:, None] - v[None, :]) @ wv) / (2 * np.pi)


@dataclass
class WeakLimitResult:
    residual: float
    stderr: float
    method: str


def weak_limit_check(spec: RankOneSpec, m: int, kernel: FejerKernel, f,
                     budget: int = 10**4, seed: int = 0, workers: int | None = None) -> WeakLimitResult:
    """``|int f |P_m|^2 d mu_s - int f d mu_s|``.

    Constants and cosines go through :func:`ft_exact`; other test functions
    exposing ``weighted_ft`` use the pair expansion of ``|P_m|^2``; plain
    callables fall back to Monte Carlo.
    """
    pp = PartialProduct(spec, (m,), kernel)
    if isinstance(f, Constant):
        return WeakLimitResult(abs(f.c) * abs(ft_exact(pp, 0.0) - 1.0), 0.0, "exact")
    if isinstance(f, Cosine):
        return WeakLimitResult(abs(ft_exact(pp, abs(f.t)) - float(kernel.ft_triangle(f.t))), 0.0, "exact")
    if hasattr(f, "weighted_ft"):
        freqs = spec.phase_table(m).approx
        p = freqs.size
        iu, ju = np.triu_indices(p, k=1)
        diffs = freqs[ju] - freqs[iu]
        total = 2.0 * float(np.sum(f.weighted_ft(kernel, diffs))) / p
        return WeakLimitResult(abs(total), 0.0, "pair-expansion")

    def integrand(theta):
        return (f(theta) * (np.abs(pk_eval(spec, m, theta)) ** 2 - 1.0))[None, :]

    means, errs, _ = mc_integrals(kernel, integrand, budget, seed, workers=workers)
    return WeakLimitResult(abs(float(means[0])), float(errs[0]), "mc")


def lemma_quantities(pp: PartialProduct, m: int, budget: int = 10**4, seed: int = 0,
                     workers: int | None = None) -> dict:
    """``int Q|P_m|``, ``int Q`` and ``int Q ||P_m|^2 - 1|`` from one sample.

    These are the three quantities related by the limsup inequality with
    constant 1/8; the inequality itself is asymptotic and not evaluated.
    """
    spec = pp.spec

    def integrand(theta):
        q = np.atleast_1d(pp.abs_eval(theta))
        a = np.abs(pk_eval(spec, m, theta))
        return np.vstack([q * a, q, q * np.abs(a ** 2 - 1.0)])

    means, errs, _ = mc_integrals(pp.kernel, integrand, budget, seed, workers=workers)
    keys = ("Q_times_Pm", "Q", "Q_times_deviation")
    return {k: Estimate(float(v), float(e), budget) for k, v, e in zip(keys, means, errs)}


def prop_constant(x):
    """``(x - 1) {1 - N([-sqrt2 x, sqrt2 x])} = (x - 1) erfc(x)`` for ``x > 1``."""
    x = np.asarray(x, dtype=float)
    return (x - 1.0) * erfc(x)


def max_prop_constant() -> tuple:
    """``(argmax, max)`` of :func:`prop_constant` over ``x > 1``."""
    res = minimize_scalar(lambda x: -float(prop_constant(x)), bounds=(1.0, 6.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), float(-res.fun)
