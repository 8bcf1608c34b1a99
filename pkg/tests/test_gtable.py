"""Unit tests for g-tables across the three backends."""

import math

import numpy as np
import pytest

from tandim import fractals as fr
from tandim import gtable as gt
from tandim import metric
from tandim.errors import GridRangeError, InputError


def sier(depth=8, sched=None):
    return fr.FractalSpec(fr.SIERPINSKI, sched or "sierpinski-23", depth)


def test_combinatorial_values_match_products():
    spec = sier(6)
    G = gt.g_combinatorial(spec)
    la, _ = spec.level_logs()
    # g(t_j, h) with h spanning levels j+1..j+m equals sum of log a_i
    assert math.isclose(G.g_im(0, 3), la[:3].sum())
    assert math.isclose(G.g_im(2, 2), la[2:4].sum())


def test_combinatorial_is_exact_cocycle():
    G = gt.g_combinatorial(sier(10))
    for i in (0, 2, 5):
        t = G.t[i]
        h = G.t[i + 2] - t
        k = G.t[i + 4] - G.t[i + 2]
        dg = G.g(t, h + k) - G.g(t + h, k) - G.g(t, h)
        assert abs(dg) < 1e-9


def test_validate_monotone():
    G = gt.g_combinatorial(sier(5))
    G.validate()
    bad = gt.GFunction(np.array([0.0, 1.0, 2.0]),
                       values=np.array([[1.0, 0.5], [1.0, 2.0], [1.0, 2.0]]),
                       backend="test", basepoint="x")
    with pytest.raises(InputError):
        bad.validate()


def test_t_index_reports_neighbors():
    G = gt.g_combinatorial(sier(4))
    with pytest.raises(InputError, match="grid"):
        G.t_index(0.123456)


def test_geometric_matches_combinatorial_at_corner_scales():
    # arithmetic grid in units of log 2 hits the constant-2 level boundaries
    spec = fr.FractalSpec(fr.SIERPINSKI, [2] * 10, 10)
    kappa = math.log(2.0)
    tGrid = kappa * np.arange(0, 4)
    hGrid = kappa * np.arange(1, 4)
    Gg = gt.g_geometric(spec, tGrid=tGrid, hGrid=hGrid)
    Gc = gt.g_combinatorial(spec)
    for i in range(3):
        lo, hi = Gg.bracket_im(i, 2)
        exact = Gc.g(Gc.t[i], 2 * kappa)
        # combinatorial corner count lies inside the geometric bracket
        assert lo - 1e-9 <= exact <= hi + 1e-9


def test_geometric_grid_range_error():
    spec = fr.FractalSpec(fr.SIERPINSKI, [2, 2], 2)
    with pytest.raises(GridRangeError, match="usable t"):
        gt.g_geometric(spec, tGrid=np.array([0.0, 1.0]),
                       hGrid=np.array([1.0, 2.0]))


def test_lattice_validation():
    spec = sier(8)
    with pytest.raises(InputError):
        gt.g_geometric(spec, tGrid=np.array([0.0, 1.0, 2.5]),
                       hGrid=np.array([1.0]))
    with pytest.raises(InputError):
        gt.g_geometric(spec, tGrid=np.array([0.0, 1.0, 2.0]),
                       hGrid=np.array([2.0, 1.0]))


def test_finite_single_point_all_zero():
    sp = metric.FiniteMetricSpace(["p"], np.zeros((1, 1)))
    G = gt.g_finite(metric.PointedSpace(sp, "p"),
                    np.array([0.0, 0.5, 1.0]), np.array([0.5, 1.0]))
    for i in range(G.N):
        for m in range(1, G.max_offset(i) + 1):
            assert G.g_im(i, m) == 0.0


def test_finite_matches_counts():
    sp = metric.FiniteMetricSpace.from_points(np.arange(8.0) / 8.0)
    ps = metric.PointedSpace(sp, "0")
    G = gt.g_finite(ps, np.array([0.0, 0.5]), np.array([0.5, 1.0]))
    E = metric.ball(sp, 0, 1.0)
    n = metric.covering_number(sp, E, math.exp(-1.0)).value
    assert math.isclose(G.g_im(0, 2), math.log(n))


def test_product_adds_potentials():
    A = gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, [2] * 6, 6))
    B = gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, [2] * 6, 6))
    P = gt.g_product(A, B)
    assert math.isclose(P.g_im(0, 2), A.g_im(0, 2) + B.g_im(0, 2))


def test_union_upper_bounded_by_logsum():
    A = gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, [2] * 6, 6))
    U = gt.g_union(A, A)
    assert math.isclose(U.g_im(0, 1), A.g_im(0, 1) + math.log(2.0))


def test_csv_format(tmp_path):
    G = gt.g_combinatorial(sier(4))
    path = tmp_path / "g.csv"
    G.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,h,g,gLower,gUpper,backend"
    assert "np.float" not in lines[1]
    assert lines[1].endswith("combinatorial")
