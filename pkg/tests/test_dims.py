"""Unit tests for dimension reports, the closed-form oracle, and the
ball-comparability assumption check."""

import math

import numpy as np
import pytest

from tandim import dims
from tandim import fractals as fr
from tandim import gtable as gt
from tandim import metric


def test_neville_recovers_polynomial_limit():
    xs = [1.0, 0.5, 0.25, 0.125]
    ys = [7.0 + 3 * x - 2 * x ** 2 for x in xs]
    assert math.isclose(dims._neville(xs, ys), 7.0, abs_tol=1e-12)


def test_closed_form_constant_schedule():
    got = dims.closed_form_dims([3] * 50, fr.SIERPINSKI, 50)
    gold = math.log(6) / math.log(3)
    for v in got:
        assert math.isclose(v, gold, abs_tol=1e-9)


def test_closed_form_mixed_schedule_ordering():
    dl, il, iu, du = dims.closed_form_dims("sierpinski-23", fr.SIERPINSKI, 5000)
    assert dl <= il <= iu <= du
    assert math.isclose(dl, math.log(3) / math.log(2), abs_tol=1e-9)
    assert math.isclose(du, math.log(6) / math.log(3), abs_tol=1e-9)


def test_estimator_oracle_agreement_depth_1e4():
    for name, fam in (("sierpinski-23", fr.SIERPINSKI),
                      ("vicsek-12", fr.CHESSBOARD)):
        spec = fr.FractalSpec(fam, name, 10_000)
        oracle = dims.closed_form_dims(spec)
        rep = dims.dimension_report(gt.g_combinatorial(spec))
        est = (rep.deltaLower, rep.dLower, rep.dUpper, rep.deltaUpper)
        assert max(abs(a - b) for a, b in zip(est, oracle)) <= 0.02


def test_rescaling_invariance_of_report():
    # bi-Lipschitz invariance, finite form: the combinatorial table of a
    # rescaled space is the same table with shifted t grid, so the four
    # estimates agree (grid-shifted comparison via a finite space)
    rng = np.random.default_rng(3)
    sp = metric.FiniteMetricSpace.from_points(rng.random((30, 2)))
    ps = metric.PointedSpace(sp, "0")
    tGrid = 0.5 * np.arange(0, 6)
    hGrid = 0.5 * np.arange(1, 5)
    repA = dims.dimension_report(gt.g_finite(ps, tGrid, hGrid))
    ps2 = metric.PointedSpace(sp.rescale(math.exp(-0.5)), "0")
    repB = dims.dimension_report(gt.g_finite(ps2, tGrid + 0.5, hGrid))
    for a, b in zip((repA.deltaLower, repA.dLower, repA.dUpper, repA.deltaUpper),
                    (repB.deltaLower, repB.dLower, repB.dUpper, repB.deltaUpper)):
        assert math.isclose(a, b, abs_tol=1e-9)


def test_chain_check_and_inverted_report():
    rep = dims.dimension_report(
        gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, "sierpinski-23", 500)))
    assert dims.dim_chain_check(rep)
    bad = dims.DimensionReport(deltaLower=2.0, dLower=1.0, dUpper=1.5,
                               deltaUpper=1.2)
    assert not dims.dim_chain_check(bad)


def test_check_assumption_fractal():
    spec = fr.FractalSpec(fr.SIERPINSKI, [2, 2, 2], 3)
    rep = dims.check_assumption(spec, plan={"pairs": 6})
    assert rep.cHat >= 1.0
    assert rep.samples > 0
    assert rep.stable in (True, False)


def test_check_assumption_single_point():
    sp = metric.FiniteMetricSpace(["p"], np.zeros((1, 1)))
    rep = dims.check_assumption(sp)
    assert rep.cHat == 1.0 and rep.stable


def test_report_serialization():
    rep = dims.dimension_report(
        gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, [2] * 30, 30)))
    js = rep.to_json()
    assert '"deltaUpper"' in js
    row = rep.csv_row()
    assert row.startswith("combinatorial:corner,")
