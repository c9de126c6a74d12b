import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlattice.errors import DimensionError, SupportError
from spinlattice.lattice import (
    EMPTY,
    MANHATTAN,
    Metric,
    Region,
    ball,
    diameter,
    distance,
    fattening,
    region_distance,
)

coords = st.integers(-50, 50)
sites2 = st.tuples(coords, coords)


def test_distance_examples():
    assert distance(MANHATTAN, (0, 0), (2, 3)) == 5
    assert distance(MANHATTAN, (4, -1), (4, -1)) == 0
    assert distance(Metric((6,)), (0,), (5,)) == 1


def test_distance_rejects_mismatched_dimension():
    with pytest.raises(DimensionError):
        distance(MANHATTAN, (0,), (0, 1))


@given(sites2, sites2, sites2)
def test_metric_axioms(x, y, z):
    d = MANHATTAN.distance
    assert d(x, y) == d(y, x)
    assert d(x, z) <= d(x, y) + d(y, z)
    assert (d(x, y) == 0) == (x == y)
    if x != y:
        assert d(x, y) >= 1


@given(st.tuples(st.integers(0, 6), st.integers(0, 4)), st.tuples(st.integers(0, 6), st.integers(0, 4)),
       st.tuples(st.integers(0, 6), st.integers(0, 4)))
def test_torus_metric_axioms(x, y, z):
    m = Metric((7, 5))
    assert m.distance(x, z) <= m.distance(x, y) + m.distance(y, z)
    assert (m.distance(x, y) == 0) == (x == y)
    # brute force over wrapped images
    brute = min(abs(x[0] - y[0] + 7 * a) + abs(x[1] - y[1] + 5 * b) for a in (-1, 0, 1) for b in (-1, 0, 1))
    assert m.distance(x, y) == brute


def test_region_is_sorted_and_deduplicated():
    r = Region([(2,), (0,), (2,), (1,)])
    assert r.sites == ((0,), (1,), (2,))
    assert len(r) == 3
    assert r.index((2,)) == 2


def test_torus_region_rejects_out_of_range_coordinates():
    with pytest.raises(DimensionError):
        Region([(7, -1)], lengths=(5, 5))
    assert Region([(4, 0)], lengths=(5, 5)).lengths == (5, 5)


def test_region_distance_examples():
    a = Region.chain(2)
    assert region_distance(MANHATTAN, a, a) == 0
    assert region_distance(MANHATTAN, Region([(0,)]), Region([(4,)])) == 4
    b = Region([(3,), (7,)])
    brute = min(abs(x[0] - y[0]) for x in a for y in b)
    assert region_distance(MANHATTAN, a, b) == brute == 2


def test_region_distance_empty_raises():
    with pytest.raises(SupportError):
        region_distance(MANHATTAN, EMPTY, Region.chain(1))


def test_ball_examples():
    assert ball(MANHATTAN, (0,), 0) == Region([(0,)])
    within = Region.interval(-1, 5)
    assert ball(MANHATTAN, (0,), 2, within=within) == Region.interval(-1, 2)
    assert len(ball(MANHATTAN, (0, 0), 1)) == 5


@given(st.integers(0, 4))
def test_ball_monotone_in_radius(r):
    assert ball(MANHATTAN, (0, 0), r).issubset(ball(MANHATTAN, (0, 0), r + 1))


def test_diameter_examples():
    assert diameter(MANHATTAN, Region([(3,)])) == 0
    assert diameter(MANHATTAN, Region.chain(3)) == 2
    square = Region.box((2, 2))
    brute = max(MANHATTAN.distance(x, y) for x, y in itertools.product(square, square))
    assert diameter(MANHATTAN, square) == brute == 2
    with pytest.raises(SupportError):
        diameter(MANHATTAN, EMPTY)


def test_fattening_examples():
    a = Region([(0,)])
    assert fattening(a, 0) == a
    assert len(fattening(a, 1)) == 3
    two = Region([(0,), (2,)])
    assert fattening(two, 1) == Region.interval(-1, 3)


@settings(max_examples=30)
@given(st.integers(0, 2), st.integers(0, 2))
def test_fattening_composes(r1, r2):
    within = Region.box((7, 7), origin=(-3, -3))
    a = Region([(0, 0), (1, -1)])
    once = fattening(a, r1 + r2, within=within)
    twice = fattening(fattening(a, r1, within=within), r2, within=within)
    assert twice.issubset(once)


def test_json_round_trip_preserves_order():
    r = Region([(1, 2), (0, 5), (1, 0)], lengths=(3, 6))
    back = Region.from_json(r.to_json())
    assert back.sites == r.sites
    assert back.lengths == r.lengths
    open_r = Region.interval(-2, 2)
    assert Region.from_json(open_r.to_json()) == open_r


def test_set_operations():
    a, b = Region.interval(0, 3), Region.interval(2, 5)
    assert a.union(b) == Region.interval(0, 5)
    assert a.intersection(b) == Region.interval(2, 3)
    assert a.difference(b) == Region.interval(0, 1)
    assert not a.isdisjoint(b)
    assert a.translate((10,)) == Region.interval(10, 13)
