"""Two-variable scale function g(t, h) = log (covering count of the ball of
radius e^-t at radius e^-(t+h)), sampled on composition-closed grids.

Three backends: exact combinatorial cell counting on a fractal schedule,
geometric cell-tree counting with certified brackets, and covering numbers on
a finite pointed metric space.
"""

from __future__ import annotations

import math

import numpy as np

from . import fractals as fr
from . import metric
from .errors import BudgetExhausted, GridRangeError, InputError

GRID_TOL = 1e-9


class GFunction:
    """g sampled on a chain grid: every argument pair is (t_i, t_{i+m} - t_i),
    so each composition t + h lands back on the grid.

    Two storage layouts. A "potential" table holds a prefix array P with
    g(t_i, t_{i+m} - t_i) = P[i+m] - P[i]; it is O(N) in memory and exactly a
    cocycle. A dense table holds per-entry values with brackets; column m - 1
    carries offset m.
    """

    def __init__(self, tGrid, *, potential=None, values=None, lower=None,
                 upper=None, backend="", basepoint="", max_offset=None,
                 flags=None):
        self.t = np.asarray(tGrid, dtype=np.float64)
        if self.t.ndim != 1 or len(self.t) < 2:
            raise InputError("tGrid needs at least two points")
        if not (np.diff(self.t) > 0).all():
            raise InputError("tGrid must be strictly increasing")
        self.backend = backend
        self.basepoint = basepoint
        self.flags = flags if flags is not None else {}
        if potential is not None:
            self.P = np.asarray(potential, dtype=np.float64)
            if self.P.shape != self.t.shape:
                raise InputError("potential must match tGrid in length")
            self.values = None
            self.h_step = None
            self._max_offset = len(self.t) - 1 if max_offset is None else int(max_offset)
        else:
            self.P = None
            self.values = np.asarray(values, dtype=np.float64)
            if self.values.ndim != 2 or self.values.shape[0] != len(self.t):
                raise InputError("values must be (len(tGrid), M)")
            self.lower = self.values if lower is None else np.asarray(lower, dtype=np.float64)
            self.upper = self.values if upper is None else np.asarray(upper, dtype=np.float64)
            self._max_offset = self.values.shape[1]
            # dense columns carry h = m * h_step regardless of tGrid extent
            k = self.kappa
            if k is None:
                raise InputError("dense tables need an arithmetic tGrid")
            self.h_step = k

    @property
    def N(self) -> int:
        return len(self.t)

    @property
    def M(self) -> int:
        return self._max_offset

    @property
    def kappa(self):
        """Grid step if tGrid is arithmetic, else None."""
        d = np.diff(self.t)
        k = d[0]
        return float(k) if np.allclose(d, k, atol=GRID_TOL, rtol=0.0) else None

    def t_index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > GRID_TOL:
            lo = self.t[max(i - 1, 0)]
            hi = self.t[min(i + 1, self.N - 1)]
            raise InputError(
                f"t={t} is off-grid; nearest grid points {lo}, {self.t[i]}, {hi}"
            )
        return i

    def h_offset(self, i: int, h: float) -> int:
        if abs(h) <= GRID_TOL:
            return 0
        if self.h_step is not None:
            m = int(round(h / self.h_step))
            if abs(m * self.h_step - h) > 1e-6 or not 1 <= m <= self._max_offset:
                raise InputError(
                    f"h={h} is off-grid; nearest multiples of {self.h_step}: "
                    f"{max(m - 1, 1) * self.h_step}, {m * self.h_step}"
                )
            return m
        target = self.t[i] + h
        j = int(np.argmin(np.abs(self.t - target)))
        if abs(self.t[j] - target) > GRID_TOL or j <= i:
            raise InputError(
                f"h={h} from t={self.t[i]} is off-grid; nearest t+h grid point {self.t[j]}"
            )
        return j - i

    def h_of(self, i: int, m: int) -> float:
        if self.h_step is not None:
            return m * self.h_step
        return float(self.t[i + m] - self.t[i])

    def max_offset(self, i: int) -> int:
        if self.h_step is not None:
            return self._max_offset
        return min(self._max_offset, self.N - 1 - i)

    def g_im(self, i: int, m: int) -> float:
        if m == 0:
            return 0.0
        if m < 0 or m > self.max_offset(i):
            raise InputError(f"offset {m} out of range at row {i}")
        if self.P is not None:
            return float(self.P[i + m] - self.P[i])
        return float(self.values[i, m - 1])

    def bracket_im(self, i: int, m: int):
        if m == 0 or self.P is not None:
            v = self.g_im(i, m)
            return v, v
        return float(self.lower[i, m - 1]), float(self.upper[i, m - 1])

    def g(self, t: float, h: float) -> float:
        i = self.t_index(t)
        return self.g_im(i, self.h_offset(i, h))

    def bracket(self, t: float, h: float):
        i = self.t_index(t)
        return self.bracket_im(i, self.h_offset(i, h))

    def validate(self):
        """Non-negativity and monotonicity in h, exhaustively."""
        for i in range(self.N):
            prev = 0.0
            for m in range(1, self.max_offset(i) + 1):
                v = self.g_im(i, m)
                if v < -GRID_TOL or v < prev - GRID_TOL:
                    raise InputError(
                        f"g not non-decreasing in h at t={self.t[i]}, offset {m}"
                    )
                prev = v

    def ratio_im(self, i: int, m: int) -> float:
        return self.g_im(i, m) / self.h_of(i, m)

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("t,h,g,gLower,gUpper,backend\n")
            for i in range(self.N):
                for m in range(1, self.max_offset(i) + 1):
                    lo, hi = self.bracket_im(i, m)
                    h = self.h_of(i, m)
                    f.write(f"{float(self.t[i])!r},{h!r},{self.g_im(i, m)!r},"
                            f"{lo!r},{hi!r},{self.backend}\n")


def g_combinatorial(spec: fr.FractalSpec, j_range=None, m_range=None) -> GFunction:
    """Exact corner-descendant counting: at t_j = log Q_j the ball of radius
    e^-t_j is the corner cell, and its level-(j+m) descendant count is
    prod a_i. Stored as a prefix potential, so this table is an exact cocycle.
    """
    la, ls = spec.level_logs()
    t = np.concatenate(([0.0], np.cumsum(ls)))
    P = np.concatenate(([0.0], np.cumsum(la)))
    j_lo, j_hi = (0, spec.depth) if j_range is None else j_range
    if not 0 <= j_lo < j_hi <= spec.depth:
        raise InputError(f"jRange {j_range} outside depth {spec.depth}")
    max_off = None
    if m_range is not None:
        max_off = int(m_range[1]) if isinstance(m_range, (tuple, list)) else int(m_range)
        if max_off < 1:
            raise InputError(f"mRange {m_range} must allow offset >= 1")
    return GFunction(
        t[j_lo:j_hi + 1], potential=P[j_lo:j_hi + 1],
        backend="combinatorial", basepoint="corner", max_offset=max_off,
    )


def g_product(gA: GFunction, gB: GFunction) -> GFunction:
    """Table for a max-metric product: covering counts multiply, so g adds.
    Grids must match."""
    if not np.allclose(gA.t, gB.t, atol=GRID_TOL):
        raise InputError("product needs matching tGrids")
    if gA.P is not None and gB.P is not None:
        return GFunction(gA.t, potential=gA.P + gB.P, backend="product",
                         basepoint=f"({gA.basepoint},{gB.basepoint})",
                         max_offset=min(gA.M, gB.M))
    M = min(gA.M, gB.M)
    vals = np.array([[gA.g_im(i, m) + gB.g_im(i, m) for m in range(1, M + 1)]
                     for i in range(gA.N)])
    return GFunction(gA.t, values=vals, backend="product",
                     basepoint=f"({gA.basepoint},{gB.basepoint})")


def g_union(gA: GFunction, gB: GFunction) -> GFunction:
    """Table for a disjoint union glued at the basepoint: counts add, so
    g = log(e^gA + e^gB) entrywise."""
    if not np.allclose(gA.t, gB.t, atol=GRID_TOL):
        raise InputError("union needs matching tGrids")
    M = min(min(gA.max_offset(i), gB.max_offset(i)) for i in range(gA.N - 1))
    M = max(M, 1)
    vals = np.array([
        [np.logaddexp(gA.g_im(i, m), gB.g_im(i, m))
         for m in range(1, min(M, gA.max_offset(i), gB.max_offset(i)) + 1)]
        + [np.nan] * (M - min(M, gA.max_offset(i), gB.max_offset(i)))
        for i in range(gA.N)
    ])
    # rows near the end of a chain grid have fewer offsets; trim to the
    # common rectangle so the dense layout stays full
    keep = ~np.isnan(vals).any(axis=1)
    return GFunction(gA.t[keep], values=vals[keep], backend="union",
                     basepoint=f"({gA.basepoint}|{gB.basepoint})")


UNIT_DIAMETER = {fr.SIERPINSKI: 1.0, fr.CHESSBOARD: math.sqrt(2.0)}


class _CellCounter:
    """Lazy ball-pruned descent through a fractal cell tree, counting kept
    cells that meet / fit inside a ball around the origin."""

    def __init__(self, spec: fr.FractalSpec, budget: int = 0):
        self.spec = spec
        self.budget = budget
        self.expanded = 0

    def counts(self, radius: float, level: int):
        """(inside, meets) at the given level for B(origin, radius)."""
        cells = fr.CellSet.root(self.spec)
        for _ in range(level):
            self.expanded += len(cells)
            if self.budget and self.expanded > self.budget:
                raise BudgetExhausted(
                    f"cell descent exceeded budget {self.budget}"
                )
            cells = fr.refine(cells, within=radius)
        Q = cells.Q
        fam = self.spec.family
        inside = 0
        for a, b in cells.corners:
            if fr._cell_max_dist(fam, a, b, Q) <= radius:
                inside += 1
        return inside, len(cells)


def g_geometric(cells, x=None, tGrid=None, hGrid=None, budget: int = 0) -> GFunction:
    """Count kept cells meeting B(origin, e^-t) at the resolution level whose
    scale is nearest e^-(t+h). Bracket: [cells inside, cells meeting]."""
    spec = cells.spec if isinstance(cells, fr.CellSet) else cells
    if x is not None and np.linalg.norm(np.asarray(x, dtype=float)) > GRID_TOL:
        raise InputError("geometric backend only supports the origin basepoint")
    tGrid = np.asarray(tGrid, dtype=np.float64)
    hGrid = np.asarray(hGrid, dtype=np.float64)
    _check_lattice(tGrid, hGrid)
    _, ls = spec.level_logs()
    logQ = np.concatenate(([0.0], np.cumsum(ls)))
    finest_diam = UNIT_DIAMETER[spec.family] * math.exp(-logQ[-1])
    t_h_max = -math.log(2.0 * finest_diam)
    bad = tGrid[:, None] + hGrid[None, :] > t_h_max + GRID_TOL
    if bad.any():
        raise GridRangeError(
            f"resolution below finest level: need t+h <= {t_h_max:.6f} "
            f"(usable t in [{tGrid[0]:.6f}, {min(tGrid[-1], t_h_max - hGrid[0]):.6f}])"
        )
    counter = _CellCounter(spec, budget)
    M = len(hGrid)
    vals = np.zeros((len(tGrid), M))
    lo = np.zeros_like(vals)
    hi = np.zeros_like(vals)
    for i, t in enumerate(tGrid):
        radius = math.exp(-t)
        by_level = {}
        for m, h in enumerate(hGrid):
            lev = int(np.argmin(np.abs(logQ - (t + h))))
            if lev not in by_level:
                by_level[lev] = counter.counts(radius, lev)
            inside, meets = by_level[lev]
            inside = max(inside, 1)  # origin is always in the set
            lo[i, m] = math.log(inside)
            hi[i, m] = math.log(meets)
            vals[i, m] = 0.5 * (lo[i, m] + hi[i, m])
    # cell counts can dip across a level boundary even though the covering
    # number cannot; snap to the running max to keep the table monotone
    lo = np.maximum.accumulate(lo, axis=1)
    hi = np.maximum.accumulate(hi, axis=1)
    vals = 0.5 * (lo + hi)
    return GFunction(tGrid, values=vals, lower=lo, upper=hi,
                     backend="geometric", basepoint="origin")


def _check_lattice(tGrid, hGrid):
    if len(tGrid) < 2:
        raise InputError("tGrid needs at least two points")
    kappa = tGrid[1] - tGrid[0]
    if not np.allclose(np.diff(tGrid), kappa, atol=GRID_TOL, rtol=0.0):
        raise InputError("tGrid must be an arithmetic progression")
    mult = hGrid / kappa
    if not np.allclose(mult, np.round(mult), atol=1e-6):
        raise InputError(f"hGrid must be multiples of the t step {kappa}")
    if not np.allclose(np.round(mult), np.arange(1, len(hGrid) + 1)):
        raise InputError("hGrid must be kappa, 2*kappa, ... in order")


def g_finite(space, tGrid, hGrid, budget: int = 0, kind=metric.OPEN) -> GFunction:
    """Covering-number table on a finite pointed metric space; brackets are
    the certified covering brackets, empty balls recorded as 0 and flagged."""
    if not isinstance(space, metric.PointedSpace):
        raise InputError("g_finite needs a PointedSpace")
    tGrid = np.asarray(tGrid, dtype=np.float64)
    hGrid = np.asarray(hGrid, dtype=np.float64)
    _check_lattice(tGrid, hGrid)
    M = len(hGrid)
    vals = np.zeros((len(tGrid), M))
    lo = np.zeros_like(vals)
    hi = np.zeros_like(vals)
    empty = []
    for i, t in enumerate(tGrid):
        E = metric.ball(space.space, space.base_index, math.exp(-t), kind=kind)
        if len(E) == 0:
            empty.append(float(t))
            continue
        for m, h in enumerate(hGrid):
            cb = metric.covering_number(
                space.space, E, math.exp(-(t + h)), kind=kind, budget=budget
            )
            lo[i, m] = math.log(cb.lower)
            hi[i, m] = math.log(cb.upper)
            vals[i, m] = cb.log_mid()
    return GFunction(tGrid, values=vals, lower=lo, upper=hi,
                     backend="finite", basepoint=str(space.base),
                     flags={"empty_balls": empty})
