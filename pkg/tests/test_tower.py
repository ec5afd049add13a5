from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszflow.flowspec import RankOneSpec
from rieszflow.tower import TowerStage, autocorrelation, compare_ft, occurrence_heights
from rieszflow.staircase import preset


def recursive_occurrences(spec, N):
    # stack copies bottom to top: copy j of stage k sits at j*h_k + s_{k+1,1} + ... + s_{k+1,j}
    if N == 0:
        return [0 * spec.base_height]
    below = recursive_occurrences(spec, N - 1)
    k = N - 1
    out, offset = [], 0 * spec.base_height
    for j in range(spec.cuts[k]):
        out.extend(offset + o for o in below)
        offset = offset + spec.heights[k] + spec.spacers[k][j]
    return sorted(out)


def brute_autocorr(occ, height, s, t):
    total = Fraction(0)
    for o in occ:
        for q in occ:
            lo = max(o + t, q, 0)
            hi = min(o + s + t, q + s, height)
            total += max(hi - lo, 0)
    return total / height


def test_small_towers():
    spec = RankOneSpec(cuts=(2,), spacers=((1, 1),))
    ts = occurrence_heights(spec, 1)
    assert ts.occ == (0, 2) and ts.height == 4
    spec2 = RankOneSpec(cuts=(2, 2), spacers=((1, 1), (0, 1)))
    ts2 = occurrence_heights(spec2, 2)
    assert ts2.occ == (0, 2, 4, 6) and ts2.height == 9
    assert ts2.width == Fraction(1, 9)


def test_autocorr_examples():
    ts = TowerStage((Fraction(0), Fraction(2)), Fraction(4), Fraction(1), True, 60)
    assert autocorrelation(ts, 1, 2, exact=True) == Fraction(1, 4)
    assert autocorrelation(ts, 1, 0, exact=True) == Fraction(2, 4)
    assert autocorrelation(ts, 1, 4, exact=True) == 0
    assert autocorrelation(ts, 1, 100) == 0.0
    with pytest.raises(ValueError):
        autocorrelation(ts, 2, 0)
    with pytest.raises(ValueError):
        autocorrelation(ts, 1, -1)


def test_desk_occurrences_against_recursion():
    _, spec = preset("desk")
    ts = occurrence_heights(spec, 2)
    ref = recursive_occurrences(spec, 2)
    assert len(ts) == 16 * 64
    assert max(abs(a - b) for a, b in zip(ts.occ, ref)) < 1e-50
    gaps = np.diff([float(o) for o in ts.occ])
    assert gaps.min() >= float(spec.base_height)


def test_rational_compare():
    spec = RankOneSpec(cuts=(2, 3), spacers=((1, 2), (0, 1, 3)))
    for t in (0, Fraction(1, 2), 1, 2, 7, Fraction(19, 2)):
        c = compare_ft(spec, 2, 1, t)
        assert c.ok and c.residual <= c.bound
    assert compare_ft(spec, 2, 1, 0).residual == 0


@settings(max_examples=30, deadline=None)
@given(rows=st.lists(st.lists(st.integers(0, 3), min_size=1, max_size=3), min_size=1, max_size=3),
       t=st.fractions(0, 30, max_denominator=4), s=st.sampled_from([Fraction(1, 2), Fraction(1)]))
def test_autocorr_against_brute_force(rows, t, s):
    spec = RankOneSpec(cuts=tuple(len(r) for r in rows), spacers=tuple(tuple(r) for r in rows))
    N = spec.stages
    ts = occurrence_heights(spec, N)
    assert list(ts.occ) == recursive_occurrences(spec, N)
    assert len(ts) == np.prod(spec.cuts)
    assert autocorrelation(ts, s, t, exact=True) == brute_autocorr(ts.occ, ts.height, s, t)
    c = compare_ft(spec, N, float(s), float(t), ts)
    assert c.ok


def test_occurrence_limit():
    _, spec = preset("desk")
    with pytest.raises(ValueError):
        occurrence_heights(spec, 4, limit=10**5)
