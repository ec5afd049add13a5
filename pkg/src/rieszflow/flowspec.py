"""Rank-one cutting-and-stacking specifications and their validity checks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .phase import DEFAULT_DIGITS, PhaseTable, context, parse_real, to_mp

RATIO_THRESHOLD = 0.9


class SpecError(ValueError):
    """Raised for malformed or inconsistent rank-one specifications."""


class StageError(SpecError, IndexError):
    """Raised when a stage beyond the provided spacer rows is requested."""


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class RankOneSpec:
    """Cut counts ``p_k``, spacer rows ``s_{k+1,j}`` and base height ``h_0``.

    When every spacer and the base height are rational the flow is held in
    exact :class:`~fractions.Fraction` arithmetic; otherwise all values are
    mpf numbers at ``precision_digits`` (plus guard digits).
    Heights are derived once at construction and stored in ``heights``.
    """

    cuts: tuple
    spacers: tuple
    base_height: Any = 1
    precision_digits: int = DEFAULT_DIGITS
    heights: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ctx = context(self.precision_digits)
        cuts = tuple(int(p) for p in self.cuts)
        if len(self.spacers) != len(cuts):
            raise SpecError(f"{len(cuts)} cut counts but {len(self.spacers)} spacer rows")
        raw_rows = [tuple(parse_real(v, ctx) for v in row) for row in self.spacers]
        h0 = parse_real(self.base_height, ctx)
        exact = _is_exact(h0) and all(_is_exact(v) for row in raw_rows for v in row)
        conv = Fraction if exact else (lambda v: to_mp(v, ctx))
        rows = tuple(tuple(conv(v) for v in row) for row in raw_rows)
        h0 = conv(h0)
        for k, (p, row) in enumerate(zip(cuts, rows)):
            if p < 1:
                raise SpecError(f"stage {k}: cut count must be positive, got {p}")
            if len(row) != p:
                raise SpecError(f"stage {k}: expected {p} spacers, got {len(row)}")
            for j, v in enumerate(row, start=1):
                if v < 0:
                    raise SpecError(f"stage {k}: spacer s[{k + 1},{j}] = {v} is negative")
        if not h0 > 0:
            raise SpecError("base height must be positive")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "spacers", rows)
        object.__setattr__(self, "base_height", h0)
        object.__setattr__(self, "heights", _recurrence(cuts, rows, h0, len(cuts)))
        object.__setattr__(self, "_tables", {})

    @property
    def exact(self) -> bool:
        return isinstance(self.base_height, Fraction)

    @property
    def stages(self) -> int:
        return len(self.cuts)

    def frequencies(self, k: int) -> tuple:
        """``j*h_k + sbar_k(j)`` for ``j = 0 .. p_k - 1``."""
        sb = cumulative_spacers(self, k)
        h = self.heights[k]
        return tuple(j * h + sb[j] for j in range(self.cuts[k]))

    def phase_table(self, k: int) -> PhaseTable:
        tables = self._tables
        if k not in tables:
            tables[k] = PhaseTable(self.frequencies(k), self.precision_digits)
        return tables[k]

    def min_gap(self, k: int):
        f = self.frequencies(k)
        if len(f) < 2:
            return None
        return min(b - a for a, b in zip(f, f[1:]))

    def to_config(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else mpnstr(v, self.precision_digits)
        return {
            "cuts": list(self.cuts),
            "spacers": [[enc(v) for v in row] for row in self.spacers],
            "base_height": enc(self.base_height),
            "precision_digits": self.precision_digits,
        }

    @classmethod
    def from_config(cls, tree: dict) -> "RankOneSpec":
        missing = [k for k in ("cuts", "spacers") if k not in tree]
        if missing:
            raise SpecError(f"spec config missing key(s): {', '.join(missing)}")
        return cls(
            cuts=tuple(tree["cuts"]),
            spacers=tuple(tuple(r) for r in tree["spacers"]),
            base_height=tree.get("base_height", 1),
            precision_digits=int(tree.get("precision_digits", DEFAULT_DIGITS)),
        )


def mpnstr(v, digits: int) -> str:
    import mpmath
    return mpmath.nstr(v, digits, strip_zeros=False) if hasattr(v, "_mpf_") else str(v)


def _recurrence(cuts, rows, h0, up_to):
    hs = [h0]
    for k in range(up_to):
        hs.append(cuts[k] * hs[-1] + sum(rows[k], 0 * h0))
    return tuple(hs)


def derive_heights(spec: RankOneSpec, up_to: int) -> tuple:
    """Heights ``(h_0, ..., h_{up_to})`` recomputed from cuts and spacers."""
    if up_to > spec.stages:
        raise StageError(f"heights up to {up_to} need {up_to} spacer rows, spec has {spec.stages}")
    return _recurrence(spec.cuts, spec.spacers, spec.base_height, up_to)


def cumulative_spacers(spec: RankOneSpec, k: int) -> tuple:
    """Prefix sums ``sbar_k(j) = s_{k+1,1} + ... + s_{k+1,j}``, ``j = 0..p_k``."""
    if not 0 <= k < spec.stages:
        raise StageError(f"stage {k} has no spacer row (spec has {spec.stages} stages)")
    out = [0 * spec.base_height]
    for v in spec.spacers[k]:
        out.append(out[-1] + v)
    return tuple(out)


@dataclass
class Check:
    name: str
    index: int | None
    passed: bool | None
    margin: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "index": self.index, "passed": self.passed,
                "margin": self.margin, "note": self.note}


@dataclass
class ValidityReport:
    checks: list = field(default_factory=list)
    terms: list = field(default_factory=list)
    partial_sums: list = field(default_factory=list)
    verdict: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if c.passed is False]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "verdict": self.verdict,
            "checks": [c.to_dict() for c in self.checks],
            "terms": self.terms,
            "partial_sums": self.partial_sums,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def check_finiteness(spec: RankOneSpec, stages: int | None = None) -> ValidityReport:
    """Truncated finiteness series ``sum_k (sum_j s_{k+1,j}) / (p_k h_k)``.

    The verdict is a ratio-test heuristic over the provided range only.
    """
    stages = spec.stages if stages is None else stages
    if stages > spec.stages:
        raise StageError(f"{stages} stages requested, spec has {spec.stages}")
    terms, sums = [], []
    total = 0.0
    for k in range(stages):
        term = float(sum(spec.spacers[k], 0 * spec.base_height) / (spec.cuts[k] * spec.heights[k]))
        total += term
        terms.append(term)
        sums.append(total)
    report = ValidityReport(terms=terms, partial_sums=sums)
    nonzero = [t for t in terms if t > 0]
    if not nonzero:
        report.verdict = "finite (all spacer terms vanish)"
        report.checks.append(Check("finiteness", None, True, 0.0, "exact: zero spacers"))
        return report
    tail = terms[len(terms) // 2:]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0]
    if not ratios:
        report.verdict = "heuristic: undetermined (too few stages)"
        report.checks.append(Check("finiteness", None, None, None, "heuristic"))
        return report
    worst = max(ratios)
    ok = worst <= RATIO_THRESHOLD
    report.verdict = ("heuristic: plausibly finite" if ok
                      else "heuristic: non-summable trend")
    report.checks.append(Check("finiteness", None, ok, RATIO_THRESHOLD - worst,
                               f"heuristic ratio test, max tail ratio {worst:.6g}"))
    report.extra["ratios"] = ratios
    return report


def check_typeI_conditions(params, heights: Sequence, up_to: int | None = None) -> ValidityReport:
    """Per-stage admissibility of exponential staircase parameters.

    Condition (1): ``m_n >= eps_n h_n``.  For ``p_n < m_n/eps_n`` the
    inequality ``log(p_n)/p_n <= eps_n`` must also hold.  The limits
    ``log(p_n)/m_n -> 0`` cannot be decided on a finite range; they are
    reported as a trend (nonincreasing over the second half of the range).
    """
    n_max = len(params.p) if up_to is None else up_to
    report = ValidityReport()
    ratio_seq = []
    for n in range(n_max):
        m, p, eps = params.m[n], params.p[n], params.eps[n]
        h = heights[n]
        margin1 = float(m - eps * h) if _is_exact(h) else float(m - to_mp(eps, context(params.precision_digits)) * h)
        report.checks.append(Check("cond1", n, margin1 >= 0, margin1, "m_n >= eps_n h_n"))
        ratio = math.log(p) / m
        ratio_seq.append(ratio)
        if p >= m / eps:
            report.checks.append(Check("regime", n, None, None, "p_n >= m_n/eps_n: condition (2)"))
        else:
            margin3 = float(eps) - math.log(p) / p
            report.checks.append(Check("cond3", n, margin3 >= 0, margin3,
                                       "p_n < m_n/eps_n: log(p_n)/p_n <= eps_n"))
    tail = ratio_seq[len(ratio_seq) // 2:]
    trend_ok = all(b <= a for a, b in zip(tail, tail[1:]))
    report.checks.append(Check("log_p_over_m_trend", None, trend_ok,
                               (tail[0] - tail[-1]) if tail else None,
                               "heuristic: log(p_n)/m_n nonincreasing over second half"))
    report.extra["log_p_over_m"] = ratio_seq
    report.verdict = "admissible over range" if report.passed else "violations found"
    return report
