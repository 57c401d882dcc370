import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurplace.errors import DuplicateSplitGroup, NotConjugateClosed, ValidationError
from schurplace.poles import (
    Kind,
    build_pole_spec,
    load_pole_file,
    pole_spec_from_json,
    pole_spec_to_json,
    spec_from_values,
)


def test_single_real_group():
    spec = build_pole_spec([(5, 0, 2)])
    (g,) = spec.groups
    assert g.kind is Kind.REAL and g.multiplicity == 2 and g.dimension == 2
    assert spec.total_real_dimension == 2


def test_conjugate_merge():
    spec = build_pole_spec([(1, 2, 3), (1, -2, 3)])
    (g,) = spec.groups
    assert g.kind is Kind.COMPLEX_PAIR
    assert g.value.value == 1 + 2j
    assert g.multiplicity == 3 and g.dimension == 6


def test_missing_conjugate():
    with pytest.raises(NotConjugateClosed):
        build_pole_spec([(2, 1, 1), (0, 0, 1)])


def test_unequal_conjugate_multiplicity():
    with pytest.raises(NotConjugateClosed):
        build_pole_spec([(2, 1, 2), (2, -1, 1)])


def test_implied_conjugates():
    spec = build_pole_spec([(2, 1, 2)], conjugate_pairs=True)
    assert spec.groups[0].multiplicity == 2
    assert spec.total_real_dimension == 4


def test_ascending_order_and_merge():
    spec = build_pole_spec([(3, 0, 1), (1, 0, 1), (3, 0, 1), (-1, 2, 1), (-1, -2, 1)])
    assert [g.value.re for g in spec.groups] == [-1, 1, 3]
    assert spec.groups[2].multiplicity == 2


def test_ascending_tie_break():
    spec = build_pole_spec([(1, 0, 1), (1, 1, 1), (1, -1, 1), (0.5, 0, 1), (1, 0.5, 2), (1, -0.5, 2)])
    keys = [(g.value.re, g.value.im) for g in spec.groups]
    assert keys == [(0.5, 0.0), (1.0, 0.0), (1.0, 0.5), (1.0, 1.0)]


def test_as_given_keeps_order_and_rejects_split():
    spec = build_pole_spec([(3, 0, 1), (1, 0, 1), (1, 0, 1)], order="given")
    assert [(g.value.re, g.multiplicity) for g in spec.groups] == [(3, 1), (1, 2)]
    with pytest.raises(DuplicateSplitGroup):
        build_pole_spec([(1, 0, 1), (3, 0, 1), (1, 0, 1)], order="given")


def test_imag_snap():
    spec = build_pole_spec([(1, 1e-14, 1), (1, -1e-14, 1)], imag_tol=1e-12)
    assert spec.groups[0].is_real and spec.groups[0].multiplicity == 2


def test_zero_pole_allowed():
    assert build_pole_spec([(0, 0, 3)]).groups[0].multiplicity == 3


@pytest.mark.parametrize("raw", [[(float("nan"), 0, 1)], [(1, 0, 0)], [(1, 0, 1.5)], [], [(1,)]])
def test_invalid_entries(raw):
    with pytest.raises(ValidationError):
        build_pole_spec(raw)


def test_expanded_interleaves_pairs():
    spec = build_pole_spec([(0, 1, 2), (0, -1, 2), (5, 0, 1)])
    assert spec.expanded() == [1j, -1j, 1j, -1j, 5]


def test_json_round_trip(tmp_path):
    spec = build_pole_spec([(1, 2, 1), (1, -2, 1), (-3, 0, 2)])
    path = tmp_path / "p.json"
    path.write_text(json.dumps(pole_spec_to_json(spec)))
    assert load_pole_file(path) == spec
    bare = [{"re": 1, "im": 2}, {"re": 1, "im": -2}, {"re": -3, "mult": 2}]
    assert pole_spec_from_json(bare) == spec


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 2), st.integers(1, 3)),
                min_size=1, max_size=6))
def test_round_trip_property(entries):
    raw = []
    for re, im, mult in entries:
        raw.append((re, im, mult))
        if im:
            raw.append((re, -im, mult))
    spec = build_pole_spec(raw)
    assert spec_from_values(spec.expanded()) == spec
    assert sum(g.dimension for g in spec.groups) == spec.total_real_dimension == len(spec.expanded())
