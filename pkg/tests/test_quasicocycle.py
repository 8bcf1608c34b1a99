"""Unit tests for coboundary bounds, ratio limits, and certificates."""

import math

import numpy as np
import pytest

from tandim import fractals as fr
from tandim import gtable as gt
from tandim import quasicocycle as qc
from tandim.errors import InputError


def table(name="sierpinski-23", fam=fr.SIERPINSKI, depth=400):
    return gt.g_combinatorial(fr.FractalSpec(fam, name, depth))


def test_coboundary_zero_on_combinatorial():
    G = table()
    rep = qc.coboundary_bound(G)
    assert rep.S <= 1e-9
    assert rep.verify(G)


def test_coboundary_nonzero_on_perturbed_dense():
    G = table(depth=40)
    M = 10
    vals = np.array([[G.g_im(i, m) for m in range(1, M + 1)]
                     for i in range(G.N - M)])
    rng = np.random.default_rng(0)
    vals = np.sort(vals + 0.01 * rng.random(vals.shape), axis=1)
    # dense layout needs an arithmetic grid; resample onto one
    kappa = float(np.min(np.diff(G.t[:G.N - M])))
    tGrid = G.t[0] + kappa * np.arange(vals.shape[0])
    D = gt.GFunction(tGrid, values=vals, backend="test", basepoint="x")
    rep = qc.coboundary_bound(D)
    assert rep.S > 1e-4


def test_check_quasicocycle_splits():
    G = table(depth=100)
    rep = qc.coboundary_bound(G)
    for parts in ([1, 1], [2, 1, 3], [1, 1, 1, 1, 1, 1]):
        offs = np.concatenate(([0], np.cumsum(parts)))
        hList = [G.t[int(b)] - G.t[int(a)] for a, b in zip(offs, offs[1:])]
        passed, slack = qc.check_quasicocycle(G, G.t[0], hList, rep.S)
        assert passed
        assert slack >= -1e-12


def test_limit_ratios_constant_schedule():
    G = gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, [2] * 300, 300))
    lr = qc.limit_ratios(G)
    gold = math.log(3) / math.log(2)
    for v in (lr.delta_lower, lr.d_lower, lr.d_upper, lr.delta_upper):
        assert abs(v - gold) < 1e-9


def test_limit_ratios_ordering_and_brackets():
    lr = qc.limit_ratios(table())
    assert lr.delta_lower <= lr.d_lower + 1e-9
    assert lr.d_upper <= lr.delta_upper + 1e-9
    for full, half, diff in lr.brackets.values():
        assert math.isclose(diff, abs(full - half), abs_tol=1e-12)


def test_uniform_witness():
    G = table(depth=200)
    lr = qc.limit_ratios(G)
    t = qc.uniform_witness(G, lr.delta_lower - 0.05, hMax=5.0, t0=G.t[2])
    assert t is not None and t > G.t[2]
    assert qc.uniform_witness(G, 10.0, hMax=5.0, t0=G.t[2]) is None


def test_extremal_sequence_certificate():
    G = table(depth=2000)
    seq, cert = qc.extremal_sequence(G)
    assert len(seq) > 2
    assert all(b > a for a, b in zip(seq, seq[1:]))
    assert cert["ok"]
    assert cert["gap"] <= cert["bound"] + 1e-12


def test_envelope_inequality_margin():
    G = gt.g_combinatorial(fr.FractalSpec(fr.SIERPINSKI, [2] * 200, 200))
    worst = qc.envelope_inequality(G, S=0.0)
    assert worst >= -1e-9


def test_degenerate_inputs():
    G = table(depth=4)
    with pytest.raises(InputError):
        qc.check_quasicocycle(G, G.t[0], [], 0.0)
