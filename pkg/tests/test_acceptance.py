"""Acceptance gate: one test per criterion, pinned tolerances, with the
measured numbers printed so the log records how much margin each run had."""

import math
import time

import numpy as np
import pytest

from tandim import dims
from tandim import fractals as fr
from tandim import gtable as gt
from tandim import quasicocycle as qc
from tandim import tangent as tg
from tandim import verify

GOLD_SIERPINSKI = (math.log(3) / math.log(2), math.log(18) / math.log(6),
                   math.log(18) / math.log(6), math.log(6) / math.log(3))
GOLD_VICSEK = (math.log(5) / math.log(3), math.log(65) / math.log(15),
               math.log(65) / math.log(15), math.log(13) / math.log(5))


def _estimator_values(name, family, depth=10_000):
    G = gt.g_combinatorial(fr.FractalSpec(family, name, depth))
    rep = dims.dimension_report(G)
    return (rep.deltaLower, rep.dLower, rep.dUpper, rep.deltaUpper)


def test_criterion_01_sierpinski_golden():
    t0 = time.time()
    got = dims.closed_form_dims("sierpinski-23", fr.SIERPINSKI, 100_000)
    err = max(abs(a - b) for a, b in zip(got, GOLD_SIERPINSKI))
    est = _estimator_values("sierpinski-23", fr.SIERPINSKI)
    est_err = max(abs(a - b) for a, b in zip(est, GOLD_SIERPINSKI))
    dt = time.time() - t0
    print(f"criterion 1: closed-form err {err:.2e} (tol 1e-6), "
          f"estimator err {est_err:.4f} (tol 0.02), {dt:.1f}s (limit 10s)")
    assert err <= 1e-6
    assert est_err <= 0.02
    assert dt < 10.0


def test_criterion_02_vicsek_golden():
    t0 = time.time()
    worst = 0.0
    for name in ("vicsek-12", "vicsek-caption"):
        got = dims.closed_form_dims(name, fr.CHESSBOARD, 100_000)
        worst = max(worst, max(abs(a - b) for a, b in zip(got, GOLD_VICSEK)))
    est = _estimator_values("vicsek-12", fr.CHESSBOARD)
    est_err = max(abs(a - b) for a, b in zip(est, GOLD_VICSEK))
    dt = time.time() - t0
    print(f"criterion 2: closed-form err {worst:.2e} (tol 1e-6), "
          f"estimator err {est_err:.4f} (tol 0.02), {dt:.1f}s (limit 10s)")
    assert worst <= 1e-6
    assert est_err <= 0.02
    assert dt < 10.0


def test_criterion_03_counting_inequalities():
    t0 = time.time()
    rep = verify.suite_counting_inequalities(n_spaces=200, per_space=50)
    dt = time.time() - t0
    print(f"criterion 3: {rep['checked']} checks, "
          f"{rep['violationCount']} violations, {dt:.1f}s (limit 60s)")
    assert rep["pass"], rep["violations"]
    assert dt < 60.0


def test_criterion_04_lemma_inequalities():
    t0 = time.time()
    rep = verify.suite_lemma_inequalities(n_spaces=200)
    dt = time.time() - t0
    print(f"criterion 4: {rep['checked']} checks, cover violations "
          f"{rep['coverViolationCount']}, packing violations "
          f"{rep['packViolationCount']}, {dt:.1f}s (limit 60s)")
    assert rep["pass"], (rep["coverViolations"], rep["packViolations"])
    assert dt < 60.0


def test_criterion_05_quasicocycle():
    t0 = time.time()
    rep = verify.suite_quasicocycle()
    dt = time.time() - t0
    gaps = {k: v["certificate"]["gap"] for k, v in rep["tables"].items()}
    print(f"criterion 5: dg zero and splits on {len(rep['tables'])} tables, "
          f"certificate gaps {gaps}, {dt:.1f}s (limit 60s)")
    assert rep["pass"], rep
    assert dt < 60.0


def test_criterion_06_dimension_chain():
    rep = verify.suite_dimension_chain()
    margins = {k: v["margins"] for k, v in rep["reports"].items()}
    print(f"criterion 6: chain and strict margins {margins} (floor 0.01)")
    assert rep["pass"], rep
    for v in rep["reports"].values():
        assert min(v["margins"]) >= 0.01


def test_criterion_07_tangent_window():
    t0 = time.time()
    rep = verify.suite_tangent_window(depth=40, min_run=4)
    dt = time.time() - t0
    print(f"criterion 7: {len(rep['windows'])} windows, all within bound: "
          f"{rep['pass']}, {dt:.1f}s (limit 120s)")
    assert len(rep["windows"]) >= 4
    assert rep["pass"], rep["windows"]
    assert dt < 120.0


def test_criterion_08_selfsimilar():
    rep = verify.suite_selfsimilar()
    vals = [row["bracket"] for row in rep["brackets"]]
    print(f"criterion 8: brackets {['%.5f' % v for v in vals]}, "
          f"monotone {rep['monotone_decreasing']}, final < 0.05: "
          f"{rep['final_below_005']}")
    assert rep["pass"], rep


def test_criterion_09_counterexample():
    t0 = time.time()
    rep = verify.suite_counterexample(K=6)
    dt = time.time() - t0
    print(f"criterion 9: curves <= {rep['supCandidateCurves']:.4f} (tol 0.1), "
          f"deltaUpper {rep['deltaUpperEstimate']:.4f} (floor 0.5), gap "
          f"{rep['gap']:.4f} (floor 0.4), {dt:.1f}s (limit 120s)")
    assert rep["pass"], rep
    assert dt < 120.0
    assert all(np.isfinite(row["finest_value"]) for row in rep["candidates"])


def test_criterion_10_newformula():
    rep = verify.suite_newformula()
    gaps = {k: (v["upperGap"], v["lowerGap"]) for k, v in rep["audits"].items()}
    print(f"criterion 10: gaps {gaps} (tol 0.05)")
    assert rep["pass"], gaps
