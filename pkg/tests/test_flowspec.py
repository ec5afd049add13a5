import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszflow.flowspec import (RankOneSpec, SpecError, StageError, ValidityReport, check_finiteness,
                                check_typeI_conditions, cumulative_spacers, derive_heights)
from rieszflow.staircase import preset


@pytest.fixture
def rational_spec():
    return RankOneSpec(cuts=(2, 3), spacers=((1, 2), (0, 1, 3)))


def test_heights_recurrence(rational_spec):
    assert rational_spec.heights == (1, 5, 19)
    assert rational_spec.exact
    assert derive_heights(rational_spec, 1) == (1, 5)


def test_frequencies_and_cumulative(rational_spec):
    assert cumulative_spacers(rational_spec, 1) == (0, 0, 1, 4)
    assert rational_spec.frequencies(0) == (0, 2)
    assert rational_spec.frequencies(1) == (0, 5, 11)
    assert rational_spec.min_gap(1) == 5


def test_stage_errors(rational_spec):
    with pytest.raises(StageError):
        derive_heights(rational_spec, 3)
    with pytest.raises(IndexError):
        cumulative_spacers(rational_spec, 2)


@pytest.mark.parametrize("cuts, spacers", [
    ((2,), ((1,),)),
    ((2,), ((1, -1),)),
    ((0,), ((),)),
    ((2, 2), ((0, 0),)),
])
def test_invalid_specs(cuts, spacers):
    with pytest.raises(SpecError):
        RankOneSpec(cuts=cuts, spacers=spacers)


def test_nonrational_spacers_use_mp():
    spec = RankOneSpec(cuts=(2,), spacers=(("0.1", "1/3"),), precision_digits=40)
    assert not spec.exact
    assert abs(float(spec.heights[1]) - (2 + 0.1 + 1 / 3)) < 1e-15


def test_config_roundtrip(rational_spec):
    tree = json.loads(json.dumps(rational_spec.to_config()))
    again = RankOneSpec.from_config(tree)
    assert again.heights == rational_spec.heights
    with pytest.raises(SpecError):
        RankOneSpec.from_config({"cuts": [2]})


def test_finiteness_zero_spacers():
    rep = check_finiteness(RankOneSpec(cuts=(2, 2, 2), spacers=((0, 0),) * 3))
    assert rep.passed and rep.verdict.startswith("finite")


def test_finiteness_heuristic_labels():
    summable = RankOneSpec(cuts=(2,) * 8, spacers=((0, 1),) * 8)
    rep = check_finiteness(summable)
    assert "heuristic" in rep.verdict and rep.passed
    growing = RankOneSpec(cuts=(2,) * 6, spacers=tuple((0, 4 ** k) for k in range(6)))
    rep = check_finiteness(growing)
    assert "heuristic" in rep.verdict and not rep.passed
    assert all(b >= a for a, b in zip(rep.partial_sums, rep.partial_sums[1:]))


def test_report_json():
    rep = check_finiteness(RankOneSpec(cuts=(2,), spacers=((0, 0),)))
    tree = json.loads(rep.to_json())
    assert tree["verdict"] == rep.verdict
    assert isinstance(rep, ValidityReport)


def test_typeI_conditions_on_presets():
    params, spec = preset("desk")
    assert check_typeI_conditions(params, spec.heights).passed
    params, spec = preset("remark")
    rep = check_typeI_conditions(params, spec.heights)
    assert {c.name for c in rep.failures()} == {"cond3"}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 4), st.integers(0, 5)), min_size=1, max_size=4),
       st.integers(1, 5))
def test_height_recurrence_property(rows, h0):
    cuts = tuple(p for p, _ in rows)
    spacers = tuple(tuple(Fraction(s * (j + 1), 3) for j in range(p)) for p, s in rows)
    spec = RankOneSpec(cuts=cuts, spacers=spacers, base_height=h0)
    h = Fraction(h0)
    for k, p in enumerate(cuts):
        h = p * h + sum(spacers[k])
        assert spec.heights[k + 1] == h
    for k in range(spec.stages):
        f = spec.frequencies(k)
        assert all(b - a >= spec.heights[k] for a, b in zip(f, f[1:]))
