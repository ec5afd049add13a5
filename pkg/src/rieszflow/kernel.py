"""The Fejer-type reference measure ``mu_s`` with density ``K_s``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .parallel import batch_sizes, stream_rng

SAMPLE_BATCH = 8192
GL_ORDER = 8
MIN_MASS = 1e-6


def ft_triangle_s(s: float, t):
    """``max(1 - |t|/s, 0)``."""
    return np.maximum(1.0 - np.abs(np.asarray(t, dtype=float)) / s, 0.0)


def _cos_over_sq_tail(a, cutoff):
    """``int_cutoff^inf cos(a x) / x^2 dx`` (``a`` any real, ``cutoff > 0``)."""
    a = np.abs(np.asarray(a, dtype=float))
    si, _ = sici(a * cutoff)
    return np.cos(a * cutoff) / cutoff - a * (np.pi / 2 - si)


@dataclass(frozen=True)
class FejerKernel:
    s: float = 1.0

    def __post_init__(self):
        if not 0 < self.s <= 1:
            raise ValueError(f"kernel parameter s must lie in (0, 1], got {self.s}")

    def density(self, theta):
        s = self.s
        x = s * np.asarray(theta, dtype=float) / (2 * np.pi)
        return s / (2 * np.pi) * np.sinc(x) ** 2

    def ft_triangle(self, t):
        return ft_triangle_s(self.s, t)

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        u = self.s * np.abs(theta)
        si, _ = sici(u)
        with np.errstate(invalid="ignore", divide="ignore"):
            half = np.where(u > 0, (si - 2 * np.sin(u / 2) ** 2 / np.where(u > 0, u, 1.0)) / np.pi, 0.0)
        return 0.5 + np.sign(theta) * half

    def mass(self, a: float, b: float) -> float:
        """``mu_s([a, b])``; infinite endpoints allowed."""
        lo = 0.0 if a == -math.inf else float(self.cdf(a))
        hi = 1.0 if b == math.inf else float(self.cdf(b))
        return hi - lo

    def tail_bound(self, cutoff: float) -> float:
        """Envelope bound ``4 / (pi s cutoff)`` on ``mu_s(|theta| > cutoff)``."""
        return 4.0 / (np.pi * self.s * cutoff)

    def tail_mass(self, cutoff: float) -> float:
        """Exact ``mu_s(|theta| > cutoff)`` from the closed-form CDF."""
        u = self.s * cutoff
        si, _ = sici(u)
        return float(1.0 - 2.0 * (si - 2.0 * np.sin(u / 2) ** 2 / u) / np.pi)

    def tail_cos(self, t, cutoff: float):
        """Exact ``int_{|theta| > cutoff} cos(t theta) d mu_s``."""
        s = self.s
        c = _cos_over_sq_tail
        return 2.0 / (np.pi * s) * (c(t, cutoff) - 0.5 * c(np.asarray(t) + s, cutoff)
                                     - 0.5 * c(np.asarray(t) - s, cutoff))

    # -- sampling ---------------------------------------------------------

    def _envelope(self, theta):
        s = self.s
        a = np.abs(theta)
        return np.where(a <= 2 / s, s / (2 * np.pi), 2 / (np.pi * s * np.maximum(a, 1e-300) ** 2))

    def _draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # rejection from a flat cap on |theta| <= 2/s and a 1/theta^2 tail; each half has mass 2/pi
        s = self.s
        out = []
        need = n
        while need > 0:
            k = int(need * 1.35) + 16
            part = rng.random(k) < 0.5
            u = rng.random(k)
            sign = np.where(rng.random(k) < 0.5, -1.0, 1.0)
            centre = (2 * u - 1) * (2 / s)
            tail = sign * (2 / s) / (1.0 - u)
            theta = np.where(part, centre, tail)
            accept = rng.random(k) * self._envelope(theta) <= self.density(theta)
            got = theta[accept][:need]
            out.append(got)
            need -= got.size
        return np.concatenate(out)

    def sample(self, count: int, seed: int, stream: int = 0) -> np.ndarray:
        """``count`` i.i.d. draws from ``mu_s``; fixed ``(seed, stream)`` fixes the output.

        Draws come in batches of ``SAMPLE_BATCH``, batch ``i`` from its own
        substream, so any prefix split across workers reproduces exactly.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        parts = [self._draw(stream_rng(seed, stream, i), n)
                 for i, n in enumerate(batch_sizes(count, SAMPLE_BATCH))]
        return np.concatenate(parts)

    def sample_batch(self, seed: int, stream: int, index: int, size: int) -> np.ndarray:
        return self._draw(stream_rng(seed, stream, index), size)

    def sample_restricted(self, interval, count: int, seed: int, stream: int = 0) -> np.ndarray:
        """Draws from ``mu_s`` conditioned on the closed interval ``[a, b]``."""
        a, b = float(interval[0]), float(interval[1])
        if not a < b:
            raise ValueError(f"empty interval [{a}, {b}]")
        if a == -math.inf and b == math.inf:
            return self.sample(count, seed, stream)
        mass = self.mass(a, b)
        if mass <= MIN_MASS:
            raise ValueError(f"interval [{a}, {b}] has negligible mu_s mass {mass:.3g}")
        parts = []
        for i, n in enumerate(batch_sizes(count, SAMPLE_BATCH)):
            rng = stream_rng(seed, stream, i)
            got, need = [], n
            while need > 0:
                k = int(need / mass * 1.2) + 64
                th = self._draw(rng, k)
                th = th[(th >= a) & (th <= b)][:need]
                got.append(th)
                need -= th.size
            parts.append(np.concatenate(got))
        return np.concatenate(parts)

    # -- quadrature -------------------------------------------------------

    def quadrature(self, budget: int = 4096, cutoff: float | None = None,
                   max_freq: float = 0.0) -> "QuadratureRule":
        """Panel Gauss-Legendre rule for ``mu_s`` on ``[-cutoff, cutoff]``.

        Panels are no wider than ``pi / (5 f)`` with ``f = max_freq + s`` and
        there are at least ``budget`` nodes in total.
        """
        if budget < 16:
            raise ValueError("budget must be >= 16")
        cutoff = 1e4 / self.s if cutoff is None else float(cutoff)
        if cutoff <= 0:
            raise ValueError("cutoff must be positive")
        width = np.pi / (5.0 * (abs(max_freq) + self.s))
        panels = max(math.ceil(2 * cutoff / width), math.ceil(budget / GL_ORDER))
        x, w = np.polynomial.legendre.leggauss(GL_ORDER)
        edges = np.linspace(-cutoff, cutoff, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel() * self.density(nodes)
        return QuadratureRule(nodes, weights, self.tail_mass(cutoff), cutoff, self)


@dataclass
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    tail_bound: float
    cutoff: float
    kernel: FejerKernel

    def integrate(self, g) -> float:
        """``sum w_i g(x_i)``; the part of ``mu_s`` beyond the cutoff is omitted."""
        vals = g(self.nodes) if callable(g) else np.asarray(g)
        return float(np.dot(self.weights, vals))

    def integrate_cos(self, t) -> float:
        """``int cos(t theta) d mu_s`` including the exact contribution beyond the cutoff."""
        inner = float(np.dot(self.weights, np.cos(t * self.nodes)))
        return inner + float(self.kernel.tail_cos(t, self.cutoff))

    def integrate_trig(self, amplitudes, freqs, values=None) -> float:
        """``int sum_k a_k cos(f_k theta) d mu_s`` with exact tail.

        ``values`` may carry the precomputed integrand at the nodes (for
        instance evaluated with exact phase reduction).
        """
        amplitudes = np.asarray(amplitudes, dtype=float)
        freqs = np.asarray(freqs, dtype=float)
        if values is None:
            values = np.cos(np.outer(self.nodes, freqs)) @ amplitudes
        tail = float(np.dot(amplitudes, self.kernel.tail_cos(freqs, self.cutoff)))
        return float(np.dot(self.weights, values)) + tail
