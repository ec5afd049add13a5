import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszflow.staircase import StaircaseParams, Variant, preset
from rieszflow.words import (CombinatorialOverflow, bound_window, certify_distinct, count_in_window,
                             enumerate_words, excluded_class_minima, min_gap, word_count)


def p2():
    return StaircaseParams((4,), (2,), (Fraction(1, 2),), Variant.THEOREM)


def mp_omega(m, p, eps, j):
    with mpmath.workdps(80):
        e = mpmath.mpf(eps.numerator) / eps.denominator
        return m * p / e ** 2 * mpmath.exp(e * j / p)


def test_counts():
    assert len(enumerate_words(p2(), 0, 2)) == 8
    one = StaircaseParams((4,), (1,), (Fraction(1, 2),))
    ws = enumerate_words(one, 0, 3)
    assert len(ws) == 2
    assert sorted(float(w.value) for w in ws) == [-16.0, 16.0]
    four = StaircaseParams((5,), (4,), (Fraction(1, 3),))
    ws = enumerate_words(four, 0, 4)
    assert len(ws) == 80
    om = [mp_omega(5, 4, Fraction(1, 3), j) for j in range(4)]
    with mpmath.workdps(80):
        for w in ws:
            ref = sum(e * om[j] for j, e in zip(w.support, w.signs))
            assert abs(w.value - ref) < mpmath.mpf(10) ** -50


def test_min_gap_golden(golden):
    ref = mpmath.mpf(golden["min_gap_p2_m4_eps_half"]["value"])
    assert min_gap(enumerate_words(p2(), 0, 2)) == pytest.approx(float(ref), rel=1e-15)


def test_min_gap_duplicates():
    assert min_gap([1.5, 2.0, 1.5]) == 0
    with pytest.raises(ValueError):
        min_gap([1.0])


@pytest.mark.parametrize("name", ["desk-words", "remark", "paper-main"])
def test_distinct_small_stages(name):
    params, _ = preset(name)
    for n in range(params.stages):
        if params.p[n] <= 10:
            res = certify_distinct(params, n)
            assert res["distinct"] and res["min_gap"] > 1e-30


def test_window_examples():
    params, spec = preset("desk-words")
    ws = enumerate_words(params, 1, 4)
    a = ws.abs_floats()
    assert count_in_window(ws, a.min() / 2) == 0
    assert count_in_window(ws, a.max() * 2) == len(ws)
    with pytest.raises(ValueError):
        count_in_window(ws, 0)
    h = float(spec.heights[1])
    for cut in (h, 10 * h):
        assert count_in_window(ws, cut, 4) <= bound_window(params, 1, 4, cut)


def test_bound_formulas():
    params = StaircaseParams((7,), (9,), (Fraction(1, 3),))
    om = 123.0
    assert bound_window(params, 0, 4, om) == pytest.approx(om * 81 * math.log(9) / 7)
    assert bound_window(params, 0, 8, om) == pytest.approx(om * 729 * math.log(9) ** 2 / (7 / 3))
    assert bound_window(params, 0, 6, om) == bound_window(params, 0, 4, om)
    for r in (3, 2):
        with pytest.raises(ValueError):
            bound_window(params, 0, r, om)


def test_overflow():
    big = StaircaseParams((1,), (40,), (Fraction(1, 8),))
    with pytest.raises(CombinatorialOverflow):
        enumerate_words(big, 0, 10)


def test_excluded_classes_are_far():
    params, spec = preset("desk-words")
    ws = enumerate_words(params, 2, 4)
    mins = excluded_class_minima(ws)
    assert mins["odd_length"] > 0 and mins["nonzero_sign_sum"] > 0


@settings(max_examples=25, deadline=None)
@given(p=st.integers(1, 7), L=st.integers(1, 7), m=st.integers(1, 20), q=st.integers(1, 6))
def test_word_structure_property(p, L, m, q):
    params = StaircaseParams((m,), (p,), (Fraction(1, q),))
    ws = enumerate_words(params, 0, L)
    L = min(L, p)
    assert len(ws) == word_count(p, L) == sum(math.comb(p, r) * 2 ** r for r in range(1, L + 1))
    assert ws.count_by_length() == {r: math.comb(p, r) * 2 ** r for r in range(1, L + 1)}
    vals = sorted(ws.values)
    assert vals == sorted(-v for v in vals)
    if len(ws) > 1:
        assert min_gap(ws) > 1e-30
