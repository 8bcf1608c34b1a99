"""Rescaled-snapshot experiments: tangent-set candidates via pointed-GH
clustering, tangent-ball dimension curves, and numerical verification of the
self-similar tangent cone, the schedule-window comparison, the tangent
dimension formula, and the spherical-shell counterexample."""

from __future__ import annotations

import json
import math

import numpy as np
from dataclasses import dataclass, field
from scipy.spatial import cKDTree

from . import fractals as fr
from . import gtable as gt
from . import metric
from . import quasicocycle as qc
from .errors import InputError

DEFAULT_POINT_BUDGET = 512
# Rescaled shells below this log scale are identified with the basepoint.
# Consecutive shell exponents differ by at least 9, and at shell scales every
# shell other than the focal one lands below e^-30, so this collapse realizes
# the limit object S_k union {0} exactly.
COLLAPSE_LOG = -30.0


def farthest_point_subsample(coords, budget: int, base_index: int = 0):
    """Deterministic farthest-point selection starting at the basepoint.
    Returns (selected indices, covering radius of the selection)."""
    n = coords.shape[0]
    if n <= budget:
        return np.arange(n), 0.0
    sel = np.empty(budget, dtype=np.int64)
    sel[0] = base_index
    d = np.linalg.norm(coords - coords[base_index], axis=1)
    for i in range(1, budget):
        # np.argmax takes the first maximizer, so ties break by index
        nxt = int(np.argmax(d))
        sel[i] = nxt
        d = np.minimum(d, np.linalg.norm(coords - coords[nxt], axis=1))
    return sel, float(d.max())


def _pointed_from_coords(coords, flags=None) -> metric.PointedSpace:
    sp = metric.FiniteMetricSpace.from_points(coords)
    ps = metric.PointedSpace(sp, 0)
    ps.flags = flags or {}
    return ps


def _fractal_cloud(spec: fr.FractalSpec, radius: float, max_level: int,
                   max_cells: int = 8192):
    """Min-norm cell vertices within `radius` of the origin, descending until
    max_level or the cell count would pass max_cells. Returns (points,
    cell diameter at the reached level)."""
    cells = fr.CellSet.root(spec)
    level = 0
    while level < max_level:
        nxt = fr.refine(cells, within=radius)
        level += 1
        cells = nxt
        if len(cells) > max_cells:
            break
    Q = cells.Q
    fam = spec.family
    pts = []
    for a, b in cells.corners:
        verts = fr.cell_vertices(fam, a, b, Q)
        pts.append(verts[int(np.argmin(np.hypot(verts[:, 0], verts[:, 1])))])
    return np.array(pts), gt.UNIT_DIAMETER[fam] / Q


def snapshot(source, x, t: float, R: float,
             point_budget: int = DEFAULT_POINT_BUDGET) -> metric.PointedSpace:
    """Pointed space of the source restricted to B(x, R/t) with distances
    rescaled by t. For the log-radius cloud, membership and rescaling run in
    exponent arithmetic; only survivable shells are materialized."""
    if not t > 0 or not R > 0:
        raise InputError("snapshot needs t > 0 and R > 0")
    flags = {"t": float(t), "R": float(R)}
    if isinstance(source, fr.LogRadiusCloud):
        return _snapshot_cloud(source, math.log(t), R, point_budget, flags)
    if isinstance(source, (fr.CellSet, fr.FractalSpec)):
        spec = source.spec if isinstance(source, fr.CellSet) else source
        max_level = source.level if isinstance(source, fr.CellSet) else spec.depth
        pts, cell_diam = _fractal_cloud(spec, R / t * 1.001, max_level)
        coords = pts * t
        keep = np.linalg.norm(coords, axis=1) <= R * (1 + 1e-12)
        coords = coords[keep]
        flags["cell_diam"] = cell_diam * t
        flags["spec"] = spec
        return _finish_snapshot(coords, point_budget, flags)
    if isinstance(source, metric.PointedSpace):
        space, base = source.space, source.base_index
    elif isinstance(source, metric.FiniteMetricSpace):
        space, base = source, source.index(x)
    else:
        raise InputError(f"cannot snapshot a {type(source).__name__}")
    idx = metric.ball(space, base, R / t, kind=metric.CLOSED)
    if len(idx) == 0:
        idx = np.array([base])
        flags["empty"] = True
    sub = space.dist[np.ix_(idx, idx)] * t
    labels = [space.labels[i] for i in idx]
    sp = metric.FiniteMetricSpace(labels, sub, validate=False)
    if hasattr(space, "coords"):
        sp.coords = space.coords[idx] * t
    ps = metric.PointedSpace(sp, int(np.flatnonzero(idx == base)[0]))
    ps.flags = flags
    return ps


def snapshot_log(cloud: fr.LogRadiusCloud, tau: float, R: float = 1.0,
                 point_budget: int = DEFAULT_POINT_BUDGET) -> metric.PointedSpace:
    """Snapshot of the shell cloud at log scale tau (t = e^tau); shell scale
    factors overflow floats long before tau does, so take tau directly."""
    flags = {"t": math.exp(min(tau, 700.0)), "R": float(R), "logt": float(tau)}
    return _snapshot_cloud(cloud, tau, R, point_budget, flags)


def _snapshot_cloud(cloud: fr.LogRadiusCloud, tau: float, R: float,
                    point_budget: int, flags: dict):
    logR = math.log(R)
    pts = [np.zeros(3)]
    collapsed = 0
    for k, n, logr in cloud.shells:
        scale = logr + tau
        if scale > logR + 1e-12:
            continue
        if scale < COLLAPSE_LOG:
            collapsed += 1
            continue
        pts.extend(math.exp(scale) * v for v in cloud.caps[k])
    flags["collapsed_shells"] = collapsed
    if len(pts) == 1:
        flags["empty"] = True
    return _finish_snapshot(np.array(pts), point_budget, flags)


def _finish_snapshot(coords, point_budget, flags):
    if coords.shape[0] == 0:
        coords = np.zeros((1, coords.shape[1] if coords.ndim == 2 else 2))
        flags["empty"] = True
    base = int(np.argmin(np.linalg.norm(coords, axis=1)))
    sel, cover = farthest_point_subsample(coords, point_budget, base)
    flags["subsample_radius"] = cover
    coords = coords[sel]
    return _pointed_from_coords(coords, flags)


def _hausdorff(A, B) -> float:
    ta, tb = cKDTree(A), cKDTree(B)
    return max(float(tb.query(A)[0].max()), float(ta.query(B)[0].max()))


def pgh_upper(X: metric.PointedSpace, Y: metric.PointedSpace, R: float) -> float:
    """Upper bound on the pointed GH distance of R-truncations. Coordinate
    clouds in a common ambient dimension are compared by base-aligned
    Hausdorff distance (a valid correspondence); otherwise the greedy
    correspondence bracket is used."""
    cx = getattr(X.space, "coords", None)
    cy = getattr(Y.space, "coords", None)
    if cx is not None and cy is not None and cx.shape[1] == cy.shape[1]:
        A = cx - cx[X.base_index]
        B = cy - cy[Y.base_index]
        return _hausdorff(A, B)
    return float(metric.pointed_gh_distance(X, Y, R).upper)


@dataclass
class TangentCandidate:
    representative: metric.PointedSpace
    scales: list
    clusterRadius: float
    members: list = field(default_factory=list)

    @property
    def limit_like(self) -> bool:
        """Recurrence evidence: >= 3 member scales spanning a factor >= 8."""
        if len(self.scales) < 3:
            return False
        return max(self.scales) / min(self.scales) >= 8.0

    def to_json(self) -> str:
        return json.dumps({
            "space": self.representative.space.to_json(),
            "base": self.representative.base,
            "scales": [float(s) for s in self.scales],
            "clusterRadius": self.clusterRadius,
            "limitLike": self.limit_like,
        })


def tangent_clusters(snapshots, R: float, merge_threshold: float | None = None):
    """Single-linkage clustering of snapshots under pointed-GH upper bounds;
    the representative minimizes its max distance within the cluster."""
    if len(snapshots) < 2:
        raise InputError("need at least two snapshots to cluster")
    if merge_threshold is None:
        merge_threshold = 0.05 * R
    n = len(snapshots)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = pgh_upper(snapshots[i], snapshots[j], R)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if D[i, j] <= merge_threshold:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        sub = D[np.ix_(members, members)]
        rep = members[int(np.argmin(sub.max(axis=1)))]
        out.append(TangentCandidate(
            representative=snapshots[rep],
            scales=[snapshots[i].flags.get("t", 0.0) for i in members],
            clusterRadius=float(sub.max()),
            members=members,
        ))
    out.sort(key=lambda c: min(c.scales))
    return out


def tangent_ball_dim(candidate: TangentCandidate, rGrid):
    """Curve log n_r(closed unit ball at the base) / log(1/r) with brackets.
    Returns rows (r, value, lower, upper, count_mid).

    Candidates generated from a fractal snapshot carry their cell tree; for
    those the counts come from exact ball-pruned cell enumeration, which is
    immune to point-budget subsampling."""
    ps = candidate.representative
    flags = getattr(ps, "flags", {})
    if "spec" in flags:
        return _cell_ball_dim(flags["spec"], flags["t"], rGrid)
    E = metric.ball(ps.space, ps.base_index, 1.0, kind=metric.CLOSED)
    rows = []
    for r in rGrid:
        if len(E) == 0:
            rows.append((float(r), 0.0, 0.0, 0.0, 1))
            continue
        cb = metric.covering_number(ps.space, E, float(r), kind=metric.CLOSED)
        denom = math.log(1.0 / r)
        if denom <= 0:
            raise InputError(f"rGrid values must be < 1, got {r}")
        rows.append((float(r), cb.log_mid() / denom,
                     math.log(cb.lower) / denom, math.log(cb.upper) / denom,
                     0.5 * (cb.lower + cb.upper)))
    return rows


def _cell_ball_dim(spec: fr.FractalSpec, t: float, rGrid):
    """Exact cell-count curve for a fractal snapshot at scale t: covering the
    rescaled unit ball at radius r counts cells of original size ~ r/t."""
    _, ls = spec.level_logs()
    logQ = np.concatenate(([0.0], np.cumsum(ls)))
    counter = gt._CellCounter(spec)
    radius = 1.001 / t
    rows = []
    for r in rGrid:
        target = math.log(t) + math.log(1.0 / r)
        lev = int(np.argmin(np.abs(logQ - target)))
        inside, meets = counter.counts(radius, lev)
        lo, hi = max(inside, 1), max(meets, 1)
        denom = math.log(1.0 / r)
        rows.append((float(r), 0.5 * (math.log(lo) + math.log(hi)) / denom,
                     math.log(lo) / denom, math.log(hi) / denom,
                     0.5 * (lo + hi)))
    return rows


def _dim_slope(rows):
    """Box-dimension plateau from the curve's finest octaves: successive
    secant slopes of log count against log(1/r) cancel the constant factor
    that contaminates the raw ratio at finite depth."""
    slopes = []
    for (r1, _, _, _, c1), (r2, _, _, _, c2) in zip(rows, rows[1:]):
        dl = math.log(r1 / r2)
        if dl > 0 and c2 >= c1:
            slopes.append(math.log(c2 / c1) / dl)
    if not slopes:
        return 0.0
    tail = slopes[len(slopes) // 2:]
    return float(np.median(tail))


def verify_selfsimilar(spec_or_q, m_list=(2, 3, 4, 5, 6), R: float = 1.0,
                       point_budget: int = DEFAULT_POINT_BUDGET,
                       family: str = fr.SIERPINSKI, extra_depth: int = 3):
    """Constant schedule: pointed-GH brackets between snapshots at t = s^m
    and t = s^(m+1) must decrease with m (deeper rescalings converge to the
    self-similar tangent set). Each snapshot is generated at depth 2m + c so
    its own resolution error shrinks with m."""
    if isinstance(spec_or_q, fr.FractalSpec):
        qs = set(spec_or_q.values().tolist())
        if len(qs) != 1:
            raise InputError("verify_selfsimilar needs a constant schedule")
        q = qs.pop()
        family = spec_or_q.family
    else:
        q = int(spec_or_q)
    s = fr.side_factor(family, q)
    brackets = []
    snaps = {}
    clouds = {}
    for m in list(m_list) + [max(m_list) + 1]:
        depth = 2 * m + extra_depth
        spec = fr.FractalSpec(family, [q] * depth, depth)
        t = float(s) ** m
        # full clouds for the Hausdorff brackets: subsampling noise would
        # swamp the s^-m decay this theorem predicts
        pts, _ = _fractal_cloud(spec, R / t * 1.001, depth,
                                max_cells=1_000_000)
        keep = np.linalg.norm(pts, axis=1) * t <= R * (1 + 1e-12)
        clouds[m] = pts[keep] * t
        snaps[m] = snapshot(spec, None, t, R, point_budget)
    for m in m_list:
        b = _hausdorff(clouds[m], clouds[m + 1])
        envelope = 2.0 * float(s) ** (-m) * R
        brackets.append({"m": int(m), "bracket": b, "envelope": envelope,
                         "within_envelope": b <= envelope + 1e-9})
    vals = [row["bracket"] for row in brackets]
    report = {
        "q": int(q), "family": family, "R": R,
        "brackets": brackets,
        "monotone_decreasing": all(a > b for a, b in zip(vals, vals[1:])),
        "final_below_005": vals[-1] < 0.05,
        "semicontinuity": _semicontinuity_check(snaps, m_list),
    }
    return report


def _semicontinuity_check(snaps, m_list):
    """Finite surrogate of upper/lower semicontinuity of r-covering numbers
    along the converging snapshot sequence, against the deepest snapshot."""
    T = snaps[max(m_list) + 1]
    ET = metric.ball(T.space, T.base_index, 1.0, kind=metric.CLOSED)
    rows = []
    for r in (0.5, 0.25):
        nT = metric.covering_number(T.space, ET, r, kind=metric.CLOSED)
        nT_bar = metric.covering_number(T.space, ET, r, kind=metric.OPEN)
        upper_ok = True
        lower_ok = True
        for m in list(m_list)[-2:]:
            S = snaps[m]
            ES = metric.ball(S.space, S.base_index, 1.0, kind=metric.CLOSED)
            nS = metric.covering_number(S.space, ES, r, kind=metric.CLOSED)
            nS_bar = metric.covering_number(S.space, ES, r, kind=metric.OPEN)
            if nS.lower > nT.upper:
                upper_ok = False
            if nS_bar.upper < nT_bar.lower:
                lower_ok = False
        rows.append({"r": r, "upper_semicontinuous": upper_ok,
                     "lower_semicontinuous": lower_ok})
    return rows


def find_runs(spec: fr.FractalSpec, min_length: int = 1):
    """(value, first level, length) for maximal constant runs, 1-based."""
    vals = spec.values()
    out = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] != vals[start]:
            if i - start >= min_length:
                out.append((int(vals[start]), start + 1, i - start))
            start = i
    return out


def verify_schedule_window(spec: fr.FractalSpec, window, R: float = 1.0,
                           p: int | None = None,
                           point_budget: int = DEFAULT_POINT_BUDGET):
    """Window comparison: inside a constant-q run at levels j..j+L-1, the
    snapshot of the scheduled fractal at t = Q_{j-1} matches the constant-q
    fractal within Hausdorff distance q^-p plus measured resolution slack."""
    j_start, length = window
    vals = spec.values()
    if j_start < 1 or j_start + length - 1 > spec.depth:
        raise InputError(f"window {window} outside depth {spec.depth}")
    run_vals = set(vals[j_start - 1:j_start + length - 1].tolist())
    if len(run_vals) != 1:
        raise InputError(f"levels {j_start}..{j_start + length - 1} are not a constant run")
    q = run_vals.pop()
    if p is None:
        p = max(length - 2, 0)
    s_factors = [fr.side_factor(spec.family, int(v)) for v in vals]
    Q_before = 1
    for f in s_factors[:j_start - 1]:
        Q_before *= f
    t = float(Q_before)
    # truncate at the run's end so levels past the window cannot leak in
    cut = fr.FractalSpec(spec.family, vals[:j_start - 1 + length],
                         j_start - 1 + length)
    snapA = snapshot(cut, None, t, R, point_budget)
    depthB = length
    specB = fr.FractalSpec(spec.family, [q] * max(depthB, 1), max(depthB, 1))
    snapB = snapshot(specB, None, 1.0, R, point_budget)
    measured = pgh_upper(snapA, snapB, R)
    s = fr.side_factor(spec.family, q)
    slack = (snapA.flags.get("cell_diam", 0.0) + snapB.flags.get("cell_diam", 0.0)
             + snapA.flags.get("subsample_radius", 0.0)
             + snapB.flags.get("subsample_radius", 0.0))
    bound = float(s) ** (-p) + slack
    return {
        "q": int(q), "window": [int(j_start), int(length)], "p": int(p),
        "measured": measured, "bound": bound, "slack": slack,
        "pass": measured <= bound + 1e-9,
    }


def newformula_audit(spec: fr.FractalSpec, depth: int | None = None,
                     point_budget: int = DEFAULT_POINT_BUDGET,
                     snap_depth: int = 5):
    """Tangential dimensions against tangent candidates: deltaUpper should
    match the sup over candidates of their box-dimension slope, deltaLower
    the inf (the tangent dimension formula). Candidates are snapshots of the
    scheduled fractal itself at run-start scales; run-start rescalings see a
    constant-q window, so the candidate set realizes both extremes."""
    if depth is not None and depth != spec.depth:
        spec = fr.FractalSpec(spec.family, spec.schedule, depth)
    G = gt.g_combinatorial(spec)
    lr = qc.limit_ratios(G)
    runs = [r for r in find_runs(spec) if r[2] >= snap_depth]
    if not runs:
        raise InputError("no run long enough for tangent snapshots")
    _, ls = spec.level_logs()
    logQ = np.concatenate(([0.0], np.cumsum(ls)))
    vals = spec.values()
    snaps = []
    per_value = {}
    for v, j_start, length in runs:
        per_value.setdefault(v, []).append((j_start, length))
    for v, rs in per_value.items():
        for j_start, length in rs[-2:]:
            if logQ[j_start - 1] > 300.0:
                continue  # scale factor beyond float range; earlier runs suffice
            d = min(length, snap_depth + 2)
            cut = fr.FractalSpec(spec.family, vals[:j_start - 1 + d],
                                 j_start - 1 + d)
            t = math.exp(logQ[j_start - 1])
            snap = snapshot(cut, None, t, 1.0, point_budget)
            snap.flags["t"] = t
            snap.flags["value"] = int(v)
            snap.flags["run_length"] = int(length)
            snaps.append(snap)
    if len(snaps) < 2:
        raise InputError("not enough in-range runs for tangent snapshots")
    cands = tangent_clusters(snaps, R=1.0)
    dims_of = []
    for c in cands:
        v = c.representative.flags["value"]
        s = fr.side_factor(spec.family, int(v))
        depth_r = min(c.representative.flags["run_length"], snap_depth)
        rGrid = [float(s) ** (-i) for i in range(1, depth_r + 1)]
        rows = tangent_ball_dim(c, rGrid)
        dims_of.append(_dim_slope(rows))
    sup_c, inf_c = max(dims_of), min(dims_of)
    return {
        "deltaUpper": lr.delta_upper, "deltaLower": lr.delta_lower,
        "supCandidates": sup_c, "infCandidates": inf_c,
        "upperGap": abs(lr.delta_upper - sup_c),
        "lowerGap": abs(lr.delta_lower - inf_c),
        "candidates": len(cands),
    }


def _cloud_cover_log(cloud: fr.LogRadiusCloud, t: float, u: float):
    """Covering-count bracket for B(0, e^-t) of the shell cloud at radius
    e^-u, u >= t, entirely in exponent arithmetic. Shells fully below the
    target radius merge into the origin ball; visible shells contribute
    between a grid-area lower bound and their full cardinality."""
    lo = hi = 1  # ball at the origin
    for k, n, logr in cloud.shells:
        if logr > -t + 1e-12:
            continue  # outside the ball
        if logr <= -u:
            continue  # inside the origin ball
        # shell at chordal spacing ~ e^logr / k^3 and diameter ~ e^logr / k^2
        log_sp = logr - 3.0 * math.log(k)
        log_diam = logr + 0.5 * math.log(2.0) - 2.0 * math.log(k) if k > 1 else None
        if k == 1:
            lo += 1
            hi += 1
            continue
        if -u < log_sp - math.log(2.0):
            # covering radius below half the grid spacing: every point separate
            lo += k * k
            hi += k * k
        elif -u >= log_diam:
            # one ball around any shell point covers the whole shell
            lo += 1
            hi += 1
        else:
            # a ball of radius rho covers at most (2 rho/spacing + 1)^2 grid
            # points, so at least k^2 / that many balls are needed
            per_ball = (2.0 * math.exp(-u - log_sp) + 1.0) ** 2
            lo += max(1, int(math.ceil(k * k / per_ball)))
            hi += k * k
    return lo, hi


def counterexample_audit(K: int = 6, N: int = 4,
                         point_budget: int = DEFAULT_POINT_BUDGET,
                         r_floor_log: float = -40.0):
    """Shell-cloud counterexample: every tangent candidate is a finite set
    whose dimension curve collapses, while the upper tangential dimension
    estimated from shell-scale counting stays above 1/2."""
    if K < 2:
        raise InputError("counterexample audit needs K >= 2")
    cloud = fr.counterexample_points(K, N)
    # snapshots at shell scales: t the inverse of each shell radius
    snaps = []
    for k, n, logr in cloud.shells:
        if n > 2:
            continue
        snap = _snapshot_cloud(cloud, -logr, 1.0 + 1e-9, point_budget,
                               {"t": math.exp(min(-logr, 700.0)), "k": k, "n": n})
        snap.flags["logt"] = -logr
        snaps.append(snap)
    # merge threshold scaled to the smallest shell gap, not the 0.05 R default:
    # neighboring caps differ by only ~|theta_k - theta_h| in GH
    gaps = []
    for i in range(len(snaps)):
        for j in range(i + 1, len(snaps)):
            if snaps[i].flags["k"] != snaps[j].flags["k"]:
                gaps.append(pgh_upper(snaps[i], snaps[j], 1.0))
    threshold = 0.2 * min(gaps)
    cands = tangent_clusters(snaps, R=1.0, merge_threshold=threshold)
    rGrid = [math.exp(x) for x in np.linspace(-2, r_floor_log, 12)]
    cand_rows = []
    curve_max = -math.inf
    for c in cands:
        rows = tangent_ball_dim(c, rGrid)
        finest = rows[-1]
        curve_max = max(curve_max, finest[1])
        cand_rows.append({
            "k": int(c.representative.flags.get("k", -1)),
            "points": len(c.representative.space),
            "finest_r_log": math.log(finest[0]),
            "finest_value": finest[1],
            "scales": len(c.scales),
        })
    # delta-upper from shell-scale counting in exponent arithmetic
    best = 0.0
    per_shell = []
    for k, n, logr in cloud.shells:
        if k == 1:
            continue
        t = -logr
        h = 3.0 * math.log(k) + math.log(2.0) + 1e-6
        lo, hi = _cloud_cover_log(cloud, t, t + h)
        ratio = math.log(lo) / h
        per_shell.append({"k": k, "n": n, "h": h, "count": lo, "ratio": ratio})
        best = max(best, ratio)
    finite_all = all(row["points"] <= row["k"] ** 2 + 1
                     for row in cand_rows if row["k"] > 0)
    return {
        "K": K, "N": N,
        "candidates": cand_rows,
        "mergeThreshold": threshold,
        "allCandidatesFinite": finite_all,
        "supCandidateCurves": curve_max,
        "deltaUpperEstimate": best,
        "gap": best - curve_max,
        "perShell": per_shell,
        "kPlusOneRoute": "unverified: realizing exactly k+1 points in the "
                         "unit ball at pairwise distance > 2/k^2 needs a "
                         "scale choice the construction does not pin down",
    }
