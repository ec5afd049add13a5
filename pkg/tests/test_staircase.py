from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszflow.staircase import (PRESETS, ConditionError, StaircaseParams, Variant, frequencies, omega,
                                 omegas, preset, prikhodko_subclass_check, spacers_from_omega,
                                 sqrt_floor_beta, telescoping_residual, to_spec)

HALF = Fraction(1, 2)


def small(variant):
    return StaircaseParams(m=(4,), p=(2,), eps=(HALF,), variant=variant)


def close(a, b, tol=55):
    with mpmath.workdps(80):
        return abs(mpmath.mpf(a) - b) < mpmath.mpf(10) ** -tol


def e_quarter():
    return 32 * (mpmath.exp(mpmath.mpf(1) / 4) - 1)


def test_omega_examples():
    assert omega(small(Variant.TYPE_I_MINUS_ONE), 0, 0) == 0
    assert omega(small(Variant.THEOREM), 0, 0) == 32
    v = omega(small(Variant.TYPE_I_MINUS_ONE), 0, 1)
    with mpmath.workdps(80):
        assert close(v, e_quarter())
    assert abs(float(v) - 9.0888133) < 1e-7


def test_omega_range():
    with pytest.raises(ValueError):
        omega(small(Variant.THEOREM), 0, 3)
    omega(small(Variant.THEOREM), 0, 2)


def test_spacer_example_and_variant_independence():
    a = spacers_from_omega(small(Variant.TYPE_I_MINUS_ONE), 0, 4)
    b = spacers_from_omega(small(Variant.THEOREM), 0, 4)
    with mpmath.workdps(80):
        assert close(a[0], e_quarter() - 4)
    assert abs(float(a[0]) - 5.0888133) < 1e-7
    assert all(abs(x - y) < mpmath.mpf(10) ** -50 for x, y in zip(a, b))


def test_condition_one_violation():
    params = StaircaseParams(m=(1,), p=(2,), eps=(HALF,))
    with pytest.raises(ConditionError, match="condition"):
        spacers_from_omega(params, 0, 10)


def test_frequencies_examples():
    f = frequencies(small(Variant.THEOREM), 0, 4)
    assert f[0] == 0
    with mpmath.workdps(80):
        assert close(f[1], e_quarter())


def test_params_validation():
    with pytest.raises(ValueError):
        StaircaseParams(m=(1, 2), p=(2,), eps=(HALF,))
    with pytest.raises(ValueError):
        StaircaseParams(m=(1,), p=(2,), eps=(0,))
    warn = StaircaseParams(m=(2, 1), p=(4, 2), eps=(HALF, 1)).monotone_warnings()
    assert len(warn) == 3


def test_prikhodko_examples():
    params = StaircaseParams(m=(1,), p=(16,), eps=(HALF,))
    assert prikhodko_subclass_check(params, (4,), Fraction(1, 8), 2).passed
    params = StaircaseParams(m=(1,), p=(4,), eps=(HALF,))
    rep = prikhodko_subclass_check(params, (4,), Fraction(1, 8), 2)
    assert [c.name for c in rep.failures()] == ["lower"]
    p, spec = preset("paper-main")
    rep = prikhodko_subclass_check(p, spec.heights, Fraction(1, 8), sqrt_floor_beta())
    assert len(rep.checks) == 2 * p.stages


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_build(name):
    params, spec = preset(name)
    assert spec.stages == params.stages
    top = max(float(omega(params, n, params.p[n])) for n in range(params.stages))
    assert top <= 1e12
    for n in range(params.stages):
        assert telescoping_residual(params, n, spec.heights[n]) < 1e-50


def test_desk_layout():
    params, _ = preset("desk")
    assert params.p == (16, 64, 256, 1024)
    assert params.variant is Variant.THEOREM


def test_to_spec_heights_telescoping():
    params, spec = preset("paper-main")
    for n in range(params.stages):
        w = omegas(params, n, params.p[n])
        assert abs(spec.heights[n + 1] - (w[-1] - w[0])) < mpmath.mpf(10) ** -45


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 60), p=st.integers(2, 24), q=st.integers(1, 12),
       variant=st.sampled_from(list(Variant)), digits=st.sampled_from([30, 60]))
def test_telescoping_property(m, p, q, variant, digits):
    eps = Fraction(1, q)
    h = Fraction(m * q, 1)  # largest h allowed by m >= eps h
    params = StaircaseParams((m,), (p,), (eps,), variant, digits)
    assert telescoping_residual(params, 0, h) < 10.0 ** -(digits - 10)
    w = omegas(params, 0, p)
    inc = min(b - a for a, b in zip(w, w[1:]))
    assert inc >= m * q - 10.0 ** -(digits - 10)
    assert min(spacers_from_omega(params, 0, h)) >= -10.0 ** -(digits - 10)
    spec = to_spec(params, base_height=h)
    assert spec.stages == 1
