import pytest
from hypothesis import given, strategies as st

from memtier.curves import ScalingCurve, access_fraction_at, build_scaling_curve, curve_to_csv, footprint_for_access
from memtier.ingest import PageHistogram
from memtier.model import ValidationError

import oracles


def curve_of(*counts):
    return build_scaling_curve(PageHistogram(4096, dict(enumerate(counts))))


UNIFORM = curve_of(10, 10, 10, 10)
SKEWED = curve_of(9, 70, 1, 20)


def test_uniform_points():
    assert UNIFORM.points == ((0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (1.0, 1.0))


def test_skewed_points():
    assert SKEWED.points == ((0.25, 0.70), (0.5, 0.90), (0.75, 0.99), (1.0, 1.0))


def test_single_page():
    assert curve_of(42).points == ((1.0, 1.0),)


def test_empty_histogram():
    with pytest.raises(ValidationError):
        build_scaling_curve(PageHistogram(4096, {}))


def test_ties_broken_by_page_number():
    # Same counts give the same curve whatever the insertion order.
    a = build_scaling_curve(PageHistogram(4096, {5: 3, 1: 3, 9: 1}))
    b = build_scaling_curve(PageHistogram(4096, {9: 1, 1: 3, 5: 3}))
    assert a == b


@pytest.mark.parametrize("curve,x,expected", [
    (UNIFORM, 0.5, 0.5),
    (SKEWED, 0.125, 0.35),
    (SKEWED, 0.0, 0.0),
    (SKEWED, 1.0, 1.0),
])
def test_access_fraction_at(curve, x, expected):
    assert access_fraction_at(curve, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("curve,y,expected", [
    (UNIFORM, 0.9, 0.9),
    (SKEWED, 0.70, 0.25),
    (SKEWED, 0.35, 0.125),
    (SKEWED, 0.0, 0.0),
])
def test_footprint_for_access(curve, y, expected):
    assert footprint_for_access(curve, y) == pytest.approx(expected, abs=1e-15)


def test_out_of_range_queries():
    for f in (access_fraction_at, footprint_for_access):
        with pytest.raises(ValidationError):
            f(UNIFORM, 1.5)


def test_curve_rejects_points_below_diagonal():
    with pytest.raises(ValidationError):
        ScalingCurve(((0.5, 0.4), (1.0, 1.0)))


def test_csv():
    assert curve_to_csv(SKEWED).splitlines()[1] == "0.25,0.7"


hists = st.dictionaries(st.integers(0, 10**6), st.integers(1, 10**6), min_size=1, max_size=64)


@given(hists)
def test_matches_brute_force(counts):
    assert list(build_scaling_curve(PageHistogram(4096, counts)).points) == oracles.scaling_curve(counts)


@given(hists, st.floats(0, 1))
def test_inverse_queries_agree(counts, y):
    c = build_scaling_curve(PageHistogram(4096, counts))
    x = footprint_for_access(c, y)
    assert access_fraction_at(c, x) == pytest.approx(y, abs=1e-9)
