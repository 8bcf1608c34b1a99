"""Dimension reports: lower/upper tangential dimensions (outer iterated
limits of g/h), lower/upper local box dimensions (inner iterated limits),
a closed-form schedule oracle, and the comparability-of-ball-coverings
assumption check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fractals as fr
from . import gtable as gt
from . import metric
from . import quasicocycle as qc
from .errors import InputError

TOL = 1e-9


@dataclass
class DimensionReport:
    deltaLower: float
    dLower: float
    dUpper: float
    deltaUpper: float
    brackets: dict = field(default_factory=dict)
    windows: dict = field(default_factory=dict)
    source: str = ""
    assumption: dict | None = None

    def bracket_width(self) -> float:
        return float(sum(b[2] for b in self.brackets.values()))

    def to_json(self) -> str:
        return json.dumps({
            "deltaLower": self.deltaLower, "dLower": self.dLower,
            "dUpper": self.dUpper, "deltaUpper": self.deltaUpper,
            "brackets": self.brackets, "windows": self.windows,
            "source": self.source, "assumption": self.assumption,
        })

    def csv_row(self) -> str:
        return (f"{self.source},{self.deltaLower!r},{self.dLower!r},"
                f"{self.dUpper!r},{self.deltaUpper!r},{self.bracket_width()!r}")


def tangential_dims(g: gt.GFunction, **kw):
    """(deltaLower, deltaUpper): outer iterated extremes of g/h."""
    lr = qc.limit_ratios(g, **kw)
    return lr.delta_lower, lr.delta_upper


def local_dims(g: gt.GFunction, **kw):
    """(dLower, dUpper): inner iterated extremes of g/h."""
    lr = qc.limit_ratios(g, **kw)
    return lr.d_lower, lr.d_upper


def dimension_report(g: gt.GFunction, assumption: dict | None = None, **kw) -> DimensionReport:
    lr = qc.limit_ratios(g, **kw)
    return DimensionReport(
        deltaLower=lr.delta_lower, dLower=lr.d_lower,
        dUpper=lr.d_upper, deltaUpper=lr.delta_upper,
        brackets=lr.brackets, windows=lr.windows,
        source=g.backend + ":" + g.basepoint, assumption=assumption,
    )


def _runs(values):
    """(value, start, length) for each maximal constant run."""
    out = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] != values[start]:
            out.append((values[start], start, i - start))
            start = i
    return out


def _neville(xs, ys):
    """Polynomial extrapolation to x = 0."""
    xs = list(xs)
    p = list(ys)
    n = len(p)
    for level in range(1, n):
        for i in range(n - level):
            p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i])
    return p[0]


def closed_form_dims(schedule, family: str | None = None, depth: int | None = None):
    """Independent oracle (deltaLower, dLower, dUpper, deltaUpper) from the
    per-level (log kept-count, log side) pairs.

    Local pair: prefix Cesaro ratios at run-end checkpoints of a fixed phase
    are rational in 1/(run index), so polynomial extrapolation to the limit
    converges far faster than the O(1/sqrt(depth)) raw prefix ratio.
    Tangential pair: extreme per-level ratio among schedule values whose runs
    keep recurring with substantial length (windowed ratios are weighted means
    of per-level ratios, so long pure runs realize the extremes).
    """
    if isinstance(schedule, fr.FractalSpec):
        spec = schedule
    else:
        spec = fr.FractalSpec(family, schedule, depth)
    qs = spec.values()
    la, ls = spec.level_logs()
    A = np.cumsum(la)
    S = np.cumsum(ls)
    prefix = A / S

    runs = _runs(list(qs))
    # tangential pair from persistent schedule values
    longest = max(r[2] for r in runs)
    tail_start = 3 * len(qs) // 4
    persistent = set()
    for v, start, length in runs:
        if start + length > tail_start and length >= max(1, longest // 3):
            persistent.add(v)
    ratios = {v: math.log(fr.child_count(spec.family, v))
                 / math.log(fr.side_factor(spec.family, v))
              for v in persistent}
    delta_lower = min(ratios.values())
    delta_upper = max(ratios.values())

    # local pair from per-phase run-end checkpoint extrapolation; the final
    # run may be truncated by the depth cut, so it is dropped
    ends = {}
    # a single run cannot be depth-truncated in a way that biases its phase
    checkpoint_runs = runs[:-1] if len(runs) > 1 else runs
    for v, start, length in checkpoint_runs:
        ends.setdefault(v, []).append(start + length - 1)
    estimates = []
    for v, idx in ends.items():
        if len(idx) >= 16:
            # geometric subsample of run indices: clustered abscissae make
            # polynomial extrapolation ill-conditioned, halving them does not
            ks = []
            k = len(idx)
            while k >= 4 and len(ks) < 5:
                ks.append(k)
                k //= 2
            xs = [1.0 / k for k in ks]
            ys = [float(prefix[idx[k - 1]]) for k in ks]
            estimates.append(_neville(xs, ys))
        else:
            estimates.append(float(prefix[idx[-1]]))
    d_lower = min(estimates)
    d_upper = max(estimates)
    # the chain must hold; clamp roundoff-level inversions only
    d_lower = min(max(d_lower, delta_lower), delta_upper)
    d_upper = min(max(d_upper, delta_lower), delta_upper)
    return delta_lower, d_lower, d_upper, delta_upper


@dataclass
class AssumptionReport:
    cHat: float
    a: float
    samples: int
    worst: dict
    stable: bool
    partial: bool = False

    def to_json(self) -> str:
        return json.dumps({
            "cHat": self.cHat, "a": self.a, "samples": self.samples,
            "worst": self.worst, "stable": self.stable, "partial": self.partial,
        })


def _space_of(source, level=6, seed=0):
    if isinstance(source, metric.PointedSpace):
        return source.space, source.base_index
    if isinstance(source, metric.FiniteMetricSpace):
        return source, 0
    if isinstance(source, fr.FractalSpec):
        spec = source
        lev = min(level, spec.depth)
        cells = fr.build(spec, lev)
        pts = fr.sample_points(cells, per_cell=1, seed=seed)
        sp = metric.FiniteMetricSpace.from_points(pts)
        base = int(np.argmin(np.hypot(pts[:, 0], pts[:, 1])))
        return sp, base
    raise InputError(f"cannot build a space from {type(source).__name__}")


def check_assumption(source, x=None, plan=None) -> AssumptionReport:
    """Empirical comparability constant: max over sampled scales and center
    pairs of n(lm*r, B(y, l*r)) / n(lm*r, B(z, l*r))."""
    plan = dict(plan or {})
    pairs = int(plan.get("pairs", 32))
    lambdas = plan.get("lambdas", (0.5, 0.25))
    mus = plan.get("mus", (0.5, 0.25))
    seed = int(plan.get("seed", 0))
    budget = int(plan.get("budget", 0))
    if pairs < 1:
        raise InputError("sampling plan needs at least one center pair")
    space, base = _space_of(source, seed=seed)
    if x is not None:
        base = int(x)
    n = len(space)
    diam = space.diameter
    if diam == 0.0:
        return AssumptionReport(cHat=1.0, a=0.0, samples=0, worst={},
                                stable=True)
    scales = plan.get("scales")
    if scales is None:
        scales = [diam * 0.5 ** j for j in range(1, 7)]
    rng = np.random.default_rng(seed)
    cHat = 1.0
    worst = {}
    count = 0
    partial = False
    per_scale_max = {}
    for r in scales:
        smax = 1.0
        for lam in lambdas:
            for mu in mus:
                for _ in range(pairs):
                    y, z = rng.integers(0, n, size=2)
                    vals = []
                    for c in (int(y), int(z)):
                        E = metric.ball(space, c, lam * r, kind=metric.OPEN)
                        if len(E) == 0:
                            vals.append(1.0)
                            continue
                        cb = metric.covering_number(space, E, lam * mu * r,
                                                    budget=budget)
                        if not cb.exact:
                            partial = True
                        vals.append(float(cb.value if cb.exact
                                          else 0.5 * (cb.lower + cb.upper)))
                    count += 1
                    hi, lo = max(vals), max(min(vals), 1.0)
                    ratio = hi / lo
                    smax = max(smax, ratio)
                    if ratio > cHat:
                        cHat = ratio
                        worst = {"r": float(r), "lambda": float(lam),
                                 "mu": float(mu), "y": int(y), "z": int(z),
                                 "ratio": float(ratio)}
        per_scale_max[float(r)] = smax
    rs = sorted(per_scale_max)
    coarse = max(per_scale_max[r] for r in rs[len(rs) // 2:])
    fine = max(per_scale_max[r] for r in rs[:len(rs) // 2])
    stable = fine <= 2.0 * coarse + TOL
    return AssumptionReport(cHat=float(cHat), a=float(max(scales)),
                            samples=count, worst=worst, stable=stable,
                            partial=partial)


def dim_chain_check(report: DimensionReport) -> bool:
    """deltaLower <= dLower <= dUpper <= deltaUpper up to bracket widths."""
    w = report.bracket_width() + 1e-9
    return (report.deltaLower <= report.dLower + w
            and report.dLower <= report.dUpper + w
            and report.dUpper <= report.deltaUpper + w)
