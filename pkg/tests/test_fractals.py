"""Unit tests for schedules, cell generation, and the shell cloud."""

import math

import numpy as np
import pytest

from tandim import fractals as fr
from tandim.errors import InputError


def test_named_schedule_prefixes():
    assert fr.named_values("sierpinski-23", 10).tolist() == \
        [2, 3, 3, 2, 2, 2, 3, 3, 3, 3]
    assert fr.named_values("vicsek-12", 6).tolist() == [2, 1, 1, 2, 2, 2]
    assert fr.named_values("vicsek-caption", 3).tolist() == [1, 2, 1]


def test_caption_tail_matches_formula_runs():
    # after the fixed prefix both vicsek variants alternate the same way,
    # so their persistent run values agree
    a = fr.named_values("vicsek-12", 200)
    b = fr.named_values("vicsek-caption", 200)
    assert set(a.tolist()) == set(b.tolist()) == {1, 2}


def test_child_counts():
    assert fr.child_count(fr.SIERPINSKI, 2) == 3
    assert fr.child_count(fr.SIERPINSKI, 3) == 6
    assert fr.child_count(fr.CHESSBOARD, 1) == 5
    assert fr.child_count(fr.CHESSBOARD, 2) == 13
    assert fr.side_factor(fr.SIERPINSKI, 3) == 3
    assert fr.side_factor(fr.CHESSBOARD, 2) == 5


def test_build_cell_counts():
    spec = fr.FractalSpec(fr.SIERPINSKI, "sierpinski-23", 4)
    cells = fr.build(spec)
    assert len(cells.addresses) == 3 * 6 * 6 * 3
    spec1 = fr.FractalSpec(fr.CHESSBOARD, [1], 1)
    assert len(fr.build(spec1).addresses) == 5


def test_corner_cell_kept_at_origin():
    for family, sched in ((fr.SIERPINSKI, [2, 3, 2]), (fr.CHESSBOARD, [1, 2])):
        cells = fr.build(fr.FractalSpec(family, sched, len(sched)))
        corners = np.asarray(cells.corners)
        at_origin = np.flatnonzero((corners == 0).all(axis=1))
        assert len(at_origin) == 1
        assert fr._cell_min_dist(family, 0, 0, cells.Q) == 0.0


def test_cell_distance_bounds():
    cells = fr.build(fr.FractalSpec(fr.SIERPINSKI, [2, 2], 2))
    for a, b in np.asarray(cells.corners):
        lo = fr._cell_min_dist(fr.SIERPINSKI, a, b, cells.Q)
        hi = fr._cell_max_dist(fr.SIERPINSKI, a, b, cells.Q)
        assert 0.0 <= lo <= hi <= math.sqrt(2.0)


def test_spec_validation():
    with pytest.raises(InputError):
        fr.FractalSpec(fr.SIERPINSKI, [1, 2], 2)  # q=1 invalid for triangles
    with pytest.raises(InputError):
        fr.FractalSpec("hexagon", [2], 1)
    with pytest.raises(InputError):
        fr.FractalSpec(fr.SIERPINSKI, [2], 3)  # schedule shorter than depth


def test_spec_json_roundtrip():
    spec = fr.FractalSpec(fr.CHESSBOARD, "vicsek-12", 7)
    again = fr.FractalSpec.from_json(spec.to_json())
    assert again.values().tolist() == spec.values().tolist()
    spec2 = fr.FractalSpec(fr.SIERPINSKI, [2, 3], 2)
    again2 = fr.FractalSpec.from_json(spec2.to_json())
    assert again2.values().tolist() == [2, 3]


def test_sample_points_deterministic_and_inside():
    cells = fr.build(fr.FractalSpec(fr.SIERPINSKI, [2, 3], 2))
    a = fr.sample_points(cells, per_cell=2, seed=5)
    b = fr.sample_points(cells, per_cell=2, seed=5)
    np.testing.assert_array_equal(a, b)
    assert np.linalg.norm(a, axis=1).max() <= math.sqrt(2.0) + 1e-12


def test_shell_log_radius():
    assert fr.shell_log_radius(1, 1) == -16.0
    # exponents are squares of distinct integers >= 4, so all pairwise
    # log-radius gaps are at least 2*4 + 1 = 9
    exps = sorted(fr.shell_log_radius(k, n)
                  for k in range(1, 5) for n in range(1, 5))
    assert len(set(exps)) == len(exps)
    for a, b in zip(exps, exps[1:]):
        assert b - a >= 9.0


def test_cloud_constraints_verified():
    cloud = fr.counterexample_points(4, 3)
    cloud.verify()
    for k in range(1, 5):
        cap = cloud.caps[k]
        assert cap.shape == (k * k, 3)
        if k > 1:
            d = np.linalg.norm(cap[:, None] - cap[None, :], axis=2)
            np.fill_diagonal(d, np.inf)
            assert d.min() * k ** 3 >= 1.0 - 1e-12  # separation floor
            dmax = d[np.isfinite(d)].max()
            assert 0.5 <= dmax * k ** 2 <= 2.0  # diameter band


def test_cloud_csv_has_plain_numbers(tmp_path):
    cloud = fr.counterexample_points(2, 2)
    path = tmp_path / "cloud.csv"
    cloud.to_csv(path)
    text = path.read_text()
    assert "np.float" not in text and "np.int" not in text
