import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakbench.archive import (
    Dominance,
    NondominatedArchive2D,
    dominates,
    nondominated_filter,
    nondominated_indices,
)


def test_dominates_examples():
    assert dominates((0, 0), (1, 1)) is Dominance.STRICT
    assert dominates((0, 1), (0, 2)) is Dominance.WEAK
    assert dominates((0, 1), (1, 0)) is Dominance.NONE
    assert dominates((1, 1), (1, 1)) is Dominance.NONE
    assert dominates((1, 1), (0, 0)) is Dominance.NONE


def test_insert_examples():
    a = NondominatedArchive2D()
    assert a.insert((1, 1)) and list(a) == [(1.0, 1.0)]
    b = NondominatedArchive2D([(0, 2), (2, 0)])
    assert b.insert((1, 1)) and len(b) == 3
    c = NondominatedArchive2D([(0, 2), (2, 0)])
    assert not c.insert((3, 3)) and len(c) == 2


def test_weakly_dominated_examples():
    a = NondominatedArchive2D([(0, 2), (2, 0)])
    assert not a.weakly_dominated((1, 1))
    assert NondominatedArchive2D([(0, 0)]).weakly_dominated((0, 0))
    assert a.weakly_dominated((2.5, 0.5))


def test_insert_reports_removed_points_and_payloads():
    a = NondominatedArchive2D()
    a.insert((0, 3), "p")
    a.insert((1, 2), "q")
    a.insert((2, 1), "r")
    res = a.insert_detailed((0.5, 0.5), "s")
    assert res.inserted and res.index == 1
    assert res.removed == [(1.0, 2.0), (2.0, 1.0)]
    assert a.payloads == ["p", "s"]
    assert a.payload(1) == "s" and a.point(0) == (0.0, 3.0)


def test_non_finite_insert_is_rejected():
    with pytest.raises(ValueError):
        NondominatedArchive2D().insert((np.nan, 1.0))


def test_copy_is_independent():
    a = NondominatedArchive2D([(0, 1)])
    b = a.copy()
    b.insert((-1, -1))
    assert list(a) == [(0.0, 1.0)] and list(b) == [(-1.0, -1.0)]


def _check_sorted(a):
    pts = list(a)
    for p, q in zip(pts, pts[1:]):
        assert p[0] < q[0] and p[1] > q[1]


points = st.lists(
    st.tuples(st.integers(0, 30).map(float), st.integers(0, 30).map(float)),
    max_size=200,
)


@settings(max_examples=10_000, deadline=None)
@given(pts=points)
def test_archive_matches_quadratic_oracle(pts):
    a = NondominatedArchive2D()
    for p in pts:
        a.insert(p)
    _check_sorted(a)
    assert list(a) == nondominated_filter(pts)


@settings(max_examples=1000, deadline=None)
@given(pts=points)
def test_sortedness_after_every_insert_and_idempotence(pts):
    a = NondominatedArchive2D()
    for p in pts:
        a.insert(p)
        _check_sorted(a)
    for p in list(a):
        before = list(a)
        assert not a.insert(p)
        assert list(a) == before


@settings(max_examples=1000, deadline=None)
@given(pts=points)
def test_vectorized_filter_matches_oracle(pts):
    arr = np.array(pts, dtype=float).reshape(-1, 2)
    idx = nondominated_indices(arr)
    assert [tuple(map(float, arr[i])) for i in idx] == nondominated_filter(pts)
    # earliest duplicate wins
    for i in idx:
        same = np.flatnonzero(np.all(arr == arr[i], axis=1))
        assert i == same[0]


def test_weakly_dominated_matches_brute_force(rng):
    for _ in range(200):
        pts = rng.integers(0, 20, (30, 2)).astype(float)
        a = NondominatedArchive2D(pts)
        for y in rng.integers(0, 20, (20, 2)).astype(float):
            brute = any(p[0] <= y[0] and p[1] <= y[1] for p in a)
            assert a.weakly_dominated(y) == brute
