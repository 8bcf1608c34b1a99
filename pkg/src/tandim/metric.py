"""Finite metric spaces: balls, certified covering/packing numbers, and
(pointed) Gromov-Hausdorff distance brackets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from . import kernels

OPEN = "open"
CLOSED = "closed"
CENTERS_IN_SUBSET = "subset"
CENTERS_AMBIENT = "ambient"

DEFAULT_COVER_EXACT = 24
DEFAULT_GH_EXACT = 10

METRIC_RTOL = 1e-12


@dataclass
class CountBracket:
    """Certified bracket [lower, upper] on an integer count."""

    lower: int
    upper: int
    exact: bool

    def __post_init__(self):
        if self.lower < 0 or self.upper < self.lower:
            raise InputError(f"bad bracket [{self.lower}, {self.upper}]")
        if self.exact and self.lower != self.upper:
            raise InputError("exact bracket must have lower == upper")

    @property
    def value(self) -> int:
        if not self.exact:
            raise ValueError("bracket is not exact")
        return self.lower

    def log_mid(self) -> float:
        return 0.5 * (np.log(max(self.lower, 1)) + np.log(max(self.upper, 1)))


@dataclass
class RealBracket:
    lower: float
    upper: float
    exact: bool

    def __post_init__(self):
        if self.upper < self.lower - 1e-12:
            raise InputError(f"bad bracket [{self.lower}, {self.upper}]")


class FiniteMetricSpace:
    """Explicit point set with a validated distance table."""

    def __init__(self, labels, dist, validate=True):
        self.labels = [str(x) for x in labels]
        self.dist = np.asarray(dist, dtype=np.float64)
        n = len(self.labels)
        if self.dist.shape != (n, n):
            raise InputError(f"distance table shape {self.dist.shape} != ({n},{n})")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != n:
            raise InputError("duplicate point labels")
        if validate:
            self.validate()

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)):
            i = int(label)
            if not 0 <= i < len(self):
                raise InputError(f"point index {i} out of range")
            return i
        try:
            return self._index[str(label)]
        except KeyError:
            raise InputError(f"unknown point identifier {label!r}") from None

    def validate(self):
        d = self.dist
        scale = float(d.max()) if d.size else 0.0
        tol = METRIC_RTOL * max(scale, 1.0)
        if np.any(d < -tol):
            i, j = np.unravel_index(int(np.argmin(d)), d.shape)
            raise InputError(f"negative distance at ({self.labels[i]},{self.labels[j]})")
        diag = np.abs(np.diag(d))
        if diag.size and diag.max() > tol:
            i = int(np.argmax(diag))
            raise InputError(f"nonzero self-distance at {self.labels[i]}")
        asym = np.abs(d - d.T)
        if asym.size and asym.max() > tol:
            i, j = np.unravel_index(int(np.argmax(asym)), d.shape)
            raise InputError(f"asymmetric distance at ({self.labels[i]},{self.labels[j]})")
        # triangle inequality: d[i,k] <= d[i,j] + d[j,k]
        n = len(self)
        for j in range(n):
            viol = d - (d[:, j][:, None] + d[j, :][None, :])
            if viol.size and viol.max() > tol:
                i, k = np.unravel_index(int(np.argmax(viol)), viol.shape)
                raise InputError(
                    "triangle inequality violated at "
                    f"({self.labels[i]},{self.labels[j]},{self.labels[k]})"
                )

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self) else 0.0

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "dist": [float(x) for x in self.dist.ravel()]}

    @classmethod
    def from_json(cls, obj) -> "FiniteMetricSpace":
        if isinstance(obj, str):
            obj = json.loads(obj)
        labels = obj.get("labels")
        flat = obj.get("dist")
        if not labels or flat is None:
            raise InputError("metric space JSON needs 'labels' and 'dist'")
        n = len(labels)
        if len(flat) != n * n:
            raise InputError(f"'dist' has {len(flat)} entries, expected {n * n}")
        return cls(labels, np.asarray(flat, dtype=np.float64).reshape(n, n))

    @classmethod
    def from_points(cls, points, labels=None) -> "FiniteMetricSpace":
        """Euclidean space on a coordinate array (n, d)."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if labels is None:
            labels = [str(i) for i in range(pts.shape[0])]
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff * diff).sum(axis=2))
        np.fill_diagonal(d, 0.0)
        d = 0.5 * (d + d.T)
        sp = cls(labels, d, validate=False)
        sp.coords = pts
        return sp

    def rescale(self, t: float) -> "FiniteMetricSpace":
        if not t > 0:
            raise InputError(f"rescale factor must be positive, got {t}")
        out = FiniteMetricSpace(self.labels, self.dist * t, validate=False)
        if hasattr(self, "coords"):
            out.coords = self.coords * t
        return out


@dataclass
class PointedSpace:
    space: FiniteMetricSpace
    base: str

    def __post_init__(self):
        self.base_index = self.space.index(self.base)
        self.base = self.space.labels[self.base_index]


def ball(space: FiniteMetricSpace, center, r: float, kind: str = OPEN) -> np.ndarray:
    """Indices of the open/closed r-ball around center."""
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    c = space.index(center)
    row = space.dist[c]
    mask = row < r if kind == OPEN else row <= r
    return np.flatnonzero(mask)


def _as_subset(space, E):
    E = np.unique(np.asarray([space.index(e) for e in E], dtype=np.int64))
    if E.size == 0:
        raise InputError("subset E must be nonempty")
    return E


def _element_masks(cov):
    """cov: bool (ncand, nelem) -> uint64 masks per candidate."""
    nelem = cov.shape[1]
    bits = (np.uint64(1) << np.arange(nelem, dtype=np.uint64))
    return (cov.astype(np.uint64) * bits[None, :]).sum(axis=1, dtype=np.uint64)


def covering_number(
    space: FiniteMetricSpace,
    E,
    r: float,
    kind: str = OPEN,
    policy: str = CENTERS_IN_SUBSET,
    budget: int = 0,
    exact_threshold: int = DEFAULT_COVER_EXACT,
) -> CountBracket:
    """Minimum number of r-balls (centers per policy) covering E, as a
    certified bracket; exact below the threshold."""
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    E = _as_subset(space, E)
    cand = E if policy == CENTERS_IN_SUBSET else np.arange(len(space), dtype=np.int64)
    sub = space.dist[np.ix_(cand, E)]
    cov = sub < r if kind == OPEN else sub <= r

    if E.size > 64:
        return _greedy_cover_bracket(cov)

    masks = _element_masks(cov)
    universe = np.uint64((1 << E.size) - 1)
    ub = int(kernels.greedy_cover(masks, universe))
    if ub < 0:
        raise InputError("subset not coverable by candidate balls")
    lb = int(kernels.cover_lower_bound(masks, universe, E.size))
    if lb == ub:
        return CountBracket(lb, ub, True)
    if E.size <= exact_threshold:
        best, complete = kernels.set_cover_exact(
            masks, universe, np.int64(ub), np.int64(budget)
        )
        if complete:
            return CountBracket(int(best), int(best), True)
        return CountBracket(lb, int(best), False)
    return CountBracket(lb, ub, False)


def _greedy_cover_bracket(cov: np.ndarray) -> CountBracket:
    """Vectorised greedy cover + independent-element lower bound for large E."""
    nelem = cov.shape[1]
    uncovered = np.ones(nelem, dtype=bool)
    ub = 0
    while uncovered.any():
        gains = (cov & uncovered[None, :]).sum(axis=1)
        i = int(np.argmax(gains))
        if gains[i] == 0:
            raise InputError("subset not coverable by candidate balls")
        uncovered &= ~cov[i]
        ub += 1
    # elements no candidate covers jointly with any chosen one
    chosen: list[int] = []
    co = cov.T.astype(np.float64) @ cov.astype(np.float64)  # co[e,f] > 0 iff co-coverable
    for e in range(nelem):
        if all(co[e, f] == 0 for f in chosen):
            chosen.append(e)
    return CountBracket(len(chosen), ub, len(chosen) == ub)


PACK_CENTERS = "centers"      # centers in E, pairwise distance >= 2r
PACK_CONTAINED = "contained"  # open balls of the space contained in E, set-disjoint


def packing_number(
    space: FiniteMetricSpace,
    E,
    r: float,
    budget: int = 0,
    exact_threshold: int = DEFAULT_COVER_EXACT,
    mode: str = PACK_CENTERS,
) -> CountBracket:
    """Maximum number of disjoint open r-balls of E.

    The default reading counts centers in E with pairwise distance >= 2r.
    The 'contained' reading counts open balls of the ambient space contained
    in E that are pairwise disjoint as point sets (the reading under which
    the two-stage packing inequality is a theorem on finite spaces).
    """
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    E = _as_subset(space, E)
    if mode == PACK_CONTAINED:
        balls = space.dist < r  # row y: open ball membership over all points
        inE = np.zeros(len(space), dtype=bool)
        inE[E] = True
        cand = np.flatnonzero((balls & ~inE[None, :]).sum(axis=1) == 0)
        if cand.size == 0:
            return CountBracket(0, 0, True)
        bc = balls[cand]
        conflict = (bc.astype(np.int64) @ bc.astype(np.int64).T) > 0
        np.fill_diagonal(conflict, False)
        return _independent_set_bracket(conflict, budget, exact_threshold)
    sub = space.dist[np.ix_(E, E)]
    conflict = sub < 2.0 * r
    np.fill_diagonal(conflict, False)
    return _independent_set_bracket(conflict, budget, exact_threshold)


def _independent_set_bracket(conflict, budget, exact_threshold) -> CountBracket:
    E = np.arange(conflict.shape[0])

    if E.size > 64:
        order = np.arange(E.size)
        chosen = np.zeros(E.size, dtype=bool)
        for v in order:
            if not (conflict[v] & chosen).any():
                chosen[v] = True
        lb = int(chosen.sum())
        return CountBracket(lb, int(E.size), lb == E.size)

    adj = _element_masks(conflict)
    lb = int(kernels.greedy_packing(adj, E.size))
    ub = int(kernels.clique_cover(adj, E.size))
    if lb == ub:
        return CountBracket(lb, ub, True)
    if E.size <= exact_threshold:
        best, complete = kernels.packing_exact(
            adj, E.size, np.int64(lb), np.int64(budget)
        )
        if complete:
            return CountBracket(int(best), int(best), True)
        return CountBracket(int(best), ub, False)
    return CountBracket(lb, ub, False)


def rescale(space: FiniteMetricSpace, t: float) -> FiniteMetricSpace:
    return space.rescale(t)


# ---------------------------------------------------------------------------
# Gromov-Hausdorff distance via correspondences (half minimal distortion).


def _greedy_correspondence_distortion(dx, dy, anchor=None):
    """Distortion of the correspondence pairing points sorted by eccentricity
    (or by distance to the anchor pair when given)."""
    nx, ny = dx.shape[0], dy.shape[0]
    if anchor is None:
        kx = np.lexsort((np.arange(nx), dx.sum(axis=0)))
        ky = np.lexsort((np.arange(ny), dy.sum(axis=0)))
    else:
        bx, by = anchor
        kx = np.lexsort((np.arange(nx), dx[bx]))
        ky = np.lexsort((np.arange(ny), dy[by]))
    m = max(nx, ny)
    ix = kx[np.minimum((np.arange(m) * nx) // m, nx - 1)]
    iy = ky[np.minimum((np.arange(m) * ny) // m, ny - 1)]
    if anchor is not None:
        ix = np.concatenate(([anchor[0]], ix))
        iy = np.concatenate(([anchor[1]], iy))
    # make sure the correspondence is surjective on both sides
    ix = np.concatenate((ix, kx, ix[np.zeros(ny, dtype=int)]))
    iy = np.concatenate((iy, iy[np.zeros(nx, dtype=int)], ky))
    d = np.abs(dx[np.ix_(ix, ix)] - dy[np.ix_(iy, iy)])
    return float(d.max())


def _gh_exact(dx, dy, forced=None, node_budget=5_000_000):
    """Minimal distortion over correspondences of the form
    graph(f) | graph(g), f: X->Y, g: Y->X, by branch and bound."""
    nx, ny = dx.shape[0], dy.shape[0]
    fx = np.full(nx, -1, dtype=np.int64)
    gy = np.full(ny, -1, dtype=np.int64)
    slots = []
    for i in range(max(nx, ny)):
        if i < nx:
            slots.append((0, i))
        if i < ny:
            slots.append((1, i))
    if forced is not None:
        bx, by = forced
        slots = [s for s in slots if s not in ((0, bx), (1, by))]
        fx[bx] = by
        gy[by] = bx

    best = _greedy_correspondence_distortion(dx, dy, anchor=forced)
    nodes = 0
    complete = True

    def partial_max(side, i, j):
        # distortion contributions of the new assignment against existing ones
        m = 0.0
        if side == 0:  # f(i) = j
            for a in range(nx):
                b = fx[a]
                if b >= 0:
                    v = abs(dx[i, a] - dy[j, b])
                    if v > m:
                        m = v
            for b in range(ny):
                a = gy[b]
                if a >= 0:
                    v = abs(dx[i, a] - dy[j, b])
                    if v > m:
                        m = v
        else:  # g(j was i)... g(i) = j means Y point i -> X point j
            for b in range(ny):
                a = gy[b]
                if a >= 0:
                    v = abs(dy[i, b] - dx[j, a])
                    if v > m:
                        m = v
            for a in range(nx):
                b = fx[a]
                if b >= 0:
                    v = abs(dy[i, b] - dx[j, a])
                    if v > m:
                        m = v
        return m

    def rec(k, cur):
        nonlocal best, nodes, complete
        if k == len(slots):
            if cur < best:
                best = cur
            return
        side, i = slots[k]
        targets = range(ny) if side == 0 else range(nx)
        for j in targets:
            nodes += 1
            if nodes > node_budget:
                complete = False
                return
            m = max(cur, partial_max(side, i, j))
            if m >= best:
                continue
            if side == 0:
                fx[i] = j
            else:
                gy[i] = j
            rec(k + 1, m)
            if side == 0:
                fx[i] = -1
            else:
                gy[i] = -1
            if not complete:
                return

    rec(0, 0.0)
    return best, complete


def gh_distance(
    X: FiniteMetricSpace,
    Y: FiniteMetricSpace,
    budget: int = 5_000_000,
    exact_threshold: int = DEFAULT_GH_EXACT,
) -> RealBracket:
    """Bracket on the Gromov-Hausdorff distance (half minimal correspondence
    distortion); exact enumeration below the size threshold."""
    if len(X) == 0 or len(Y) == 0:
        raise InputError("GH distance needs nonempty spaces")
    dx, dy = X.dist, Y.dist
    lower = 0.5 * abs(X.diameter - Y.diameter)
    if len(X) + len(Y) <= exact_threshold:
        dis, complete = _gh_exact(dx, dy, node_budget=budget)
        if complete:
            val = 0.5 * dis
            return RealBracket(max(lower, val), val, True)
        return RealBracket(lower, 0.5 * dis, False)
    upper = 0.5 * _greedy_correspondence_distortion(dx, dy)
    return RealBracket(lower, upper, lower == upper)


def pointed_gh_distance(
    X: PointedSpace,
    Y: PointedSpace,
    R: float,
    budget: int = 5_000_000,
    exact_threshold: int = DEFAULT_GH_EXACT,
) -> RealBracket:
    """Forced-basepoint correspondence surrogate for the pointed GH distance:
    both spaces are truncated to closed R-balls around their basepoints."""
    if not R > 0:
        raise InputError(f"truncation radius must be positive, got {R}")
    bx = ball(X.space, X.base_index, R, CLOSED)
    by = ball(Y.space, Y.base_index, R, CLOSED)
    dx = X.space.dist[np.ix_(bx, bx)]
    dy = Y.space.dist[np.ix_(by, by)]
    ibx = int(np.flatnonzero(bx == X.base_index)[0])
    iby = int(np.flatnonzero(by == Y.base_index)[0])
    lower = 0.5 * abs(float(dx.max()) - float(dy.max()))
    if len(bx) + len(by) <= exact_threshold:
        dis, complete = _gh_exact(dx, dy, forced=(ibx, iby), node_budget=budget)
        if complete:
            val = 0.5 * dis
            return RealBracket(max(lower, val), val, True)
        return RealBracket(lower, 0.5 * dis, False)
    upper = 0.5 * _greedy_correspondence_distortion(dx, dy, anchor=(ibx, iby))
    return RealBracket(lower, upper, lower == upper)
