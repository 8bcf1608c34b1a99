"""Named verification suites: seeded random-space harnesses for the exact
counting inequalities and the two composition lemmas, plus wrappers that
drive the quasicocycle, dimension-chain, tangent and counterexample audits.
Each suite returns a dict with a boolean "pass" and enough detail to see
what was measured."""

from __future__ import annotations

import math

import numpy as np

from . import dims
from . import fractals as fr
from . import gtable as gt
from . import metric
from . import quasicocycle as qc
from . import tangent as tg


def random_space(rng, n_max: int = 12) -> metric.FiniteMetricSpace:
    """Seeded random finite metric space: either a Euclidean cloud in 1-3
    dimensions or a shortest-path repair of a random symmetric matrix."""
    n = int(rng.integers(2, n_max + 1))
    if rng.random() < 0.6:
        d = int(rng.integers(1, 4))
        pts = rng.random((n, d)) * rng.choice([0.5, 1.0, 3.0])
        return metric.FiniteMetricSpace.from_points(pts)
    m = rng.random((n, n)) + 0.05
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 0.0)
    # Floyd-Warshall repair to enforce the triangle inequality
    for k in range(n):
        m = np.minimum(m, m[:, k][:, None] + m[k, :][None, :])
    return metric.FiniteMetricSpace([str(i) for i in range(n)], m)


def _random_subset_radius(rng, space):
    n = len(space)
    size = int(rng.integers(1, n + 1))
    E = rng.choice(n, size=size, replace=False)
    d = space.dist[space.dist > 0]
    if d.size == 0:
        return E, 1.0
    r = float(rng.choice(d)) * float(rng.choice([0.4, 0.7, 1.1, 1.9]))
    return E, max(r, 1e-9)


def suite_counting_inequalities(n_spaces: int = 200, per_space: int = 50,
                                seed: int = 20260823) -> dict:
    """n_2r(E) <= nu_r(E) <= n_r(E) and n_2r <= nbar_r <= n_r with exact
    counts on seeded small spaces."""
    rng = np.random.default_rng(seed)
    checked = 0
    violations = []
    for si in range(n_spaces):
        space = random_space(rng)
        for _ in range(per_space):
            E, r = _random_subset_radius(rng, space)
            n_r = metric.covering_number(space, E, r).value
            n_2r = metric.covering_number(space, E, 2 * r).value
            nbar_r = metric.covering_number(space, E, r, kind=metric.CLOSED).value
            nu_r = metric.packing_number(space, E, r).value
            checked += 1
            if not (n_2r <= nu_r <= n_r):
                violations.append(("packing", si, r, n_2r, nu_r, n_r))
            if not (n_2r <= nbar_r <= n_r):
                violations.append(("closed", si, r, n_2r, nbar_r, n_r))
    return {"pass": not violations, "checked": checked,
            "violations": violations[:10], "violationCount": len(violations)}


def suite_lemma_inequalities(n_spaces: int = 200, per_space: int = 9,
                             seed: int = 20260824) -> dict:
    """Composition lemmas on random spaces with exact counts.

    Covering: n(lm*r, B(x,r)) <= n(l*r, B(x,r)) * max_y n(lm*r, B(y, l*r)),
    with all covering centers drawn from the respective subsets.
    Packing: nu(lm*r, B(x,r)) >= nu(l*r, B(x,r)) * min_y nu(lm*r, B(y, l*r)),
    in the contained-balls reading (the centers-at-distance-2r reading
    admits finite counterexamples and is excluded here on purpose)."""
    rng = np.random.default_rng(seed)
    checked = 0
    cover_viol = []
    pack_viol = []
    for si in range(n_spaces):
        space = random_space(rng)
        n = len(space)
        diam = space.diameter
        if diam == 0:
            continue
        for _ in range(per_space):
            x = int(rng.integers(0, n))
            r = diam * float(rng.choice([0.3, 0.6, 1.2]))
            lam = float(rng.choice([0.5, 0.75]))
            mu = float(rng.choice([0.5, 0.75]))
            E = metric.ball(space, x, r)
            if len(E) == 0:
                continue
            checked += 1
            lhs_c = metric.covering_number(space, E, lam * mu * r).value
            n_lr = metric.covering_number(space, E, lam * r).value
            sup_y = 1
            inf_y = None
            for y in range(n):
                By = metric.ball(space, y, lam * r)
                if len(By) == 0:
                    continue
                c = metric.covering_number(space, By, lam * mu * r).value
                sup_y = max(sup_y, c)
                if y in set(int(e) for e in E):
                    p = metric.packing_number(space, By, lam * mu * r,
                                              mode=metric.PACK_CONTAINED).value
                    inf_y = p if inf_y is None else min(inf_y, p)
            if lhs_c > n_lr * sup_y:
                cover_viol.append((si, x, r, lam, mu, lhs_c, n_lr, sup_y))
            lhs_p = metric.packing_number(space, E, lam * mu * r,
                                          mode=metric.PACK_CONTAINED).value
            nu_lr = metric.packing_number(space, E, lam * r,
                                          mode=metric.PACK_CONTAINED).value
            if inf_y is not None and lhs_p < nu_lr * inf_y:
                pack_viol.append((si, x, r, lam, mu, lhs_p, nu_lr, inf_y))
    return {"pass": not cover_viol and not pack_viol, "checked": checked,
            "coverViolations": cover_viol[:10], "packViolations": pack_viol[:10],
            "coverViolationCount": len(cover_viol),
            "packViolationCount": len(pack_viol)}


def shipped_tables(depth: int = 2000):
    """The g-tables every table-level suite runs over."""
    out = {}
    for name, fam in (("sierpinski-23", fr.SIERPINSKI),
                      ("vicsek-12", fr.CHESSBOARD),
                      ("vicsek-caption", fr.CHESSBOARD)):
        out[name] = gt.g_combinatorial(fr.FractalSpec(fam, name, depth))
    out["constant-2"] = gt.g_combinatorial(
        fr.FractalSpec(fr.SIERPINSKI, [2] * 60, 60))
    return out


def suite_quasicocycle(depth: int = 2000, seed: int = 7) -> dict:
    """dg vanishes on combinatorial tables, the telescoped split bound holds
    for all splits up to length 6, and the minimizing-sequence certificate
    gap stays within 2S/kappa plus slack."""
    rng = np.random.default_rng(seed)
    results = {}
    ok = True
    for name, G in shipped_tables(depth).items():
        rep = qc.coboundary_bound(G)
        dg_zero = rep.S <= 1e-9
        splits_ok = True
        worst_slack = math.inf
        for _ in range(200):
            i = int(rng.integers(0, G.N - 2))
            m_total = int(rng.integers(2, min(12, G.N - i)))
            nparts = int(rng.integers(2, 7))
            cuts = sorted(rng.choice(np.arange(1, m_total), size=min(nparts - 1, m_total - 1),
                                     replace=False).tolist())
            offsets = [0] + cuts + [m_total]
            hList = [G.t[i + b] - G.t[i + a] for a, b in zip(offsets, offsets[1:])]
            passed, slack = qc.check_quasicocycle(G, G.t[i], hList, rep.S)
            worst_slack = min(worst_slack, slack)
            splits_ok = splits_ok and passed
        _, cert = qc.extremal_sequence(G)
        results[name] = {"S": rep.S, "dgZero": dg_zero, "splits": splits_ok,
                         "worstSlack": worst_slack, "certificate": cert}
        ok = ok and dg_zero and splits_ok and cert["ok"]
    return {"pass": ok, "tables": results}


def suite_dimension_chain(depth: int = 10000) -> dict:
    """Chain check gated on a stable assumption constant, plus the strict
    estimator inequalities for both named schedules."""
    results = {}
    ok = True
    for name, fam in (("sierpinski-23", fr.SIERPINSKI), ("vicsek-12", fr.CHESSBOARD)):
        spec = fr.FractalSpec(fam, name, depth)
        ar = dims.check_assumption(fr.FractalSpec(fam, spec.values()[:3], 3),
                                   plan={"pairs": 8})
        rep = dims.dimension_report(gt.g_combinatorial(spec),
                                    assumption={"cHat": ar.cHat, "stable": ar.stable})
        chain = dims.dim_chain_check(rep)
        margins = (rep.dLower - rep.deltaLower, rep.deltaUpper - rep.dUpper)
        strict = min(margins) >= 0.01
        results[name] = {"cHat": ar.cHat, "stable": ar.stable, "chain": chain,
                         "margins": margins, "strict": strict}
        ok = ok and (chain or not ar.stable) and strict and ar.stable
    return {"pass": ok, "reports": results}


def suite_tangent_window(depth: int = 40, min_run: int = 4) -> dict:
    spec = fr.FractalSpec(fr.SIERPINSKI, "sierpinski-23", depth)
    rows = []
    ok = True
    for v, j, L in tg.find_runs(spec, min_length=min_run):
        rep = tg.verify_schedule_window(spec, (j, L))
        rows.append(rep)
        ok = ok and rep["pass"]
    return {"pass": ok, "windows": rows}


def suite_selfsimilar() -> dict:
    rep = tg.verify_selfsimilar(2, m_list=(2, 3, 4, 5, 6))
    rep["pass"] = rep["monotone_decreasing"] and rep["final_below_005"]
    return rep


def suite_counterexample(K: int = 6, N: int = 4) -> dict:
    rep = tg.counterexample_audit(K=K, N=N)
    rep["pass"] = (rep["allCandidatesFinite"]
                   and rep["supCandidateCurves"] <= 0.1
                   and rep["deltaUpperEstimate"] >= 0.5
                   and rep["gap"] >= 0.4)
    return rep


def suite_newformula(depth: int = 64) -> dict:
    rows = {}
    ok = True
    for name, fam in (("sierpinski-23", fr.SIERPINSKI), ("vicsek-12", fr.CHESSBOARD)):
        rep = tg.newformula_audit(fr.FractalSpec(fam, name, depth))
        rows[name] = rep
        ok = ok and rep["upperGap"] <= 0.05 and rep["lowerGap"] <= 0.05
    return {"pass": ok, "audits": rows}


SUITES = {
    "counting-inequalities": suite_counting_inequalities,
    "lemma-inequalities": suite_lemma_inequalities,
    "quasicocycle": suite_quasicocycle,
    "dimension-chain": suite_dimension_chain,
    "tangent-window": suite_tangent_window,
    "selfsimilar": suite_selfsimilar,
    "counterexample": suite_counterexample,
    "newformula": suite_newformula,
}


def run_suite(name: str) -> dict:
    if name not in SUITES:
        from .errors import InputError
        raise InputError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    return SUITES[name]()
