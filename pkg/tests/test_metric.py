"""Unit tests for finite metric spaces, counting brackets, and GH distances."""

import math

import numpy as np
import pytest

from tandim import metric
from tandim.errors import InputError


def grid_space(n=4, step=1.0):
    xs = np.arange(n) * step
    pts = np.array([(x, y) for x in xs for y in xs])
    return metric.FiniteMetricSpace.from_points(pts)


def test_validate_reports_triangle_violation():
    d = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    with pytest.raises(InputError, match="triangle"):
        metric.FiniteMetricSpace(["a", "b", "c"], d)


def test_validate_reports_asymmetry_and_diagonal():
    d = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(InputError, match="asymmetric"):
        metric.FiniteMetricSpace(["a", "b"], d)
    d = np.array([[0.5, 1.0], [1.0, 0.0]])
    with pytest.raises(InputError, match="self-distance"):
        metric.FiniteMetricSpace(["a", "b"], d)


def test_json_roundtrip():
    sp = grid_space(3)
    again = metric.FiniteMetricSpace.from_json(sp.to_json())
    assert again.labels == sp.labels
    np.testing.assert_allclose(again.dist, sp.dist)


def test_ball_open_vs_closed():
    sp = grid_space(3)
    c = sp.index("0")
    open_b = metric.ball(sp, c, 1.0, metric.OPEN)
    closed_b = metric.ball(sp, c, 1.0, metric.CLOSED)
    assert len(open_b) == 1
    assert len(closed_b) == 3


def test_covering_number_line():
    # 5 points spaced 1 apart: open balls of radius 1.5 centered in E
    sp = metric.FiniteMetricSpace.from_points(np.arange(5.0))
    E = np.arange(5)
    cb = metric.covering_number(sp, E, 1.5)
    assert cb.exact and cb.value == 2
    cb1 = metric.covering_number(sp, E, 0.5)
    assert cb1.value == 5


def test_covering_closed_between():
    sp = metric.FiniteMetricSpace.from_points(np.arange(5.0))
    E = np.arange(5)
    r = 1.0
    n_r = metric.covering_number(sp, E, r).value
    nbar = metric.covering_number(sp, E, r, kind=metric.CLOSED).value
    n_2r = metric.covering_number(sp, E, 2 * r).value
    assert n_2r <= nbar <= n_r


def test_packing_modes():
    sp = metric.FiniteMetricSpace.from_points(np.arange(5.0))
    E = np.arange(5)
    # centers mode: pairwise distance >= 2r
    assert metric.packing_number(sp, E, 1.0).value == 3
    # contained mode: open 1-balls inside E are singletons, all disjoint
    assert metric.packing_number(sp, E, 1.0,
                                 mode=metric.PACK_CONTAINED).value == 5


def test_count_bracket_contract():
    with pytest.raises(InputError):
        metric.CountBracket(3, 2, False)
    with pytest.raises(InputError):
        metric.CountBracket(1, 2, True)
    cb = metric.CountBracket(2, 4, False)
    with pytest.raises(ValueError):
        cb.value


def test_gh_distance_identical_and_scaled():
    sp = grid_space(2)
    d0 = metric.gh_distance(sp, sp)
    assert d0.exact and d0.upper <= 1e-12
    two = metric.FiniteMetricSpace.from_points(np.array([0.0, 1.0]))
    four = metric.FiniteMetricSpace.from_points(np.array([0.0, 2.0]))
    d = metric.gh_distance(two, four)
    assert d.exact
    assert math.isclose(d.upper, 0.5)


def test_gh_lower_bound_diameters():
    a = metric.FiniteMetricSpace.from_points(np.arange(12.0))
    b = metric.FiniteMetricSpace.from_points(np.arange(12.0) * 3)
    d = metric.gh_distance(a, b)
    assert d.lower >= 0.5 * (b.diameter - a.diameter) - 1e-12


def test_pointed_gh_degenerate_truncation():
    a = metric.PointedSpace(metric.FiniteMetricSpace.from_points(
        np.array([0.0, 5.0])), "0")
    b = metric.PointedSpace(metric.FiniteMetricSpace.from_points(
        np.array([0.0, 7.0])), "0")
    d = metric.pointed_gh_distance(a, b, R=1.0)
    assert d.exact and d.upper == 0.0


def test_pointed_gh_forced_base():
    pts = np.array([0.0, 1.0, 2.0])
    a = metric.PointedSpace(metric.FiniteMetricSpace.from_points(pts), "0")
    b = metric.PointedSpace(metric.FiniteMetricSpace.from_points(pts), "1")
    d = metric.pointed_gh_distance(a, b, R=2.5)
    assert d.upper > 0.0


def test_rescale():
    sp = grid_space(3)
    sp2 = sp.rescale(3.0)
    np.testing.assert_allclose(sp2.dist, sp.dist * 3.0)
    with pytest.raises(InputError):
        sp.rescale(0.0)


def test_large_subset_gives_bracket():
    rng = np.random.default_rng(1)
    sp = metric.FiniteMetricSpace.from_points(rng.random((80, 2)))
    cb = metric.covering_number(sp, np.arange(80), 0.2)
    assert cb.lower <= cb.upper
    if not cb.exact:
        assert cb.lower < cb.upper or cb.lower >= 1
