"""Translation fractals (level-varying Sierpinski triangles and chessboard
squares) as exact cell trees, plus the spherical-shell counterexample cloud
kept in log-radius arithmetic."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

SIERPINSKI = "sierpinski"
CHESSBOARD = "chessboard"

SQRT3_2 = math.sqrt(3.0) / 2.0


def schedule_sierpinski(j: int) -> int:
    """Value in {2,3}: 2 on the intervals ((k-1)(2k-1), (2k-1)k], 3 on
    (k(2k-1), k(2k+1)], k = 1, 2, ..."""
    if j < 1:
        raise InputError(f"level index must be >= 1, got {j}")
    k = 1
    while True:
        if (k - 1) * (2 * k - 1) < j <= (2 * k - 1) * k:
            return 2
        if k * (2 * k - 1) < j <= k * (2 * k + 1):
            return 3
        k += 1


def schedule_vicsek(j: int) -> int:
    """Value in {1,2}: 2 on (k(2k+1), (2k+1)(k+1)], 1 on (k(2k-1), k(2k+1)],
    k = 0, 1, 2, ..."""
    if j < 1:
        raise InputError(f"level index must be >= 1, got {j}")
    k = 0
    while True:
        if k * (2 * k + 1) < j <= (2 * k + 1) * (k + 1):
            return 2
        if k * (2 * k - 1) < j <= k * (2 * k + 1):
            return 1
        k += 1


def schedule_vicsek_caption(j: int) -> int:
    """Figure-caption variant: first three steps are 1, 2, 1, then the formula
    schedule; the tail (hence every limit quantity) is unchanged."""
    if j < 1:
        raise InputError(f"level index must be >= 1, got {j}")
    if j <= 3:
        return (1, 2, 1)[j - 1]
    return schedule_vicsek(j)


NAMED_SCHEDULES = {
    "sierpinski-23": schedule_sierpinski,
    "vicsek-12": schedule_vicsek,
    "vicsek-caption": schedule_vicsek_caption,
}


def _named_runs(name):
    """Yield (value, run length) pairs; the interval formulas collapse to
    alternating runs of linearly growing length."""
    if name == "sierpinski-23":
        k = 1
        while True:
            yield 2, 2 * k - 1
            yield 3, 2 * k
            k += 1
    elif name == "vicsek-12":
        yield 2, 1
        k = 1
        while True:
            yield 1, 2 * k
            yield 2, 2 * k + 1
            k += 1
    elif name == "vicsek-caption":
        # first three steps 1,2,1, then the formula's tail from level 4 on
        yield 1, 1
        yield 2, 1
        yield 1, 1
        k = 1
        while True:
            yield 2, 2 * k + 1
            yield 1, 2 * (k + 1)
            k += 1
    else:
        raise InputError(f"unknown named schedule {name!r}")


def named_values(name, depth):
    out = np.empty(depth, dtype=np.int64)
    pos = 0
    for v, length in _named_runs(name):
        take = min(length, depth - pos)
        out[pos:pos + take] = v
        pos += take
        if pos >= depth:
            return out


def child_count(family: str, q: int) -> int:
    if family == SIERPINSKI:
        if q < 2:
            raise InputError(f"sierpinski subdivision needs q >= 2, got {q}")
        return q * (q + 1) // 2
    if family == CHESSBOARD:
        if q < 1:
            raise InputError(f"chessboard subdivision needs q >= 1, got {q}")
        return 2 * q * q + 2 * q + 1
    raise InputError(f"unknown family {family!r}")


def side_factor(family: str, q: int) -> int:
    return q if family == SIERPINSKI else 2 * q + 1


def child_offsets(family: str, q: int):
    """Lattice offsets of kept children, corner child (0,0) first."""
    if family == SIERPINSKI:
        return [(c, row) for row in range(q) for c in range(q - row)]
    s = 2 * q + 1
    return [(u, v) for v in range(s) for u in range(s) if (u + v) % 2 == 0]


@dataclass
class FractalSpec:
    family: str
    schedule: object  # name in NAMED_SCHEDULES or explicit sequence of ints
    depth: int

    def __post_init__(self):
        if self.family not in (SIERPINSKI, CHESSBOARD):
            raise InputError(f"unknown family {self.family!r}")
        if self.depth < 1:
            raise InputError(f"depth must be >= 1, got {self.depth}")
        if isinstance(self.schedule, str):
            if self.schedule not in NAMED_SCHEDULES:
                raise InputError(f"unknown named schedule {self.schedule!r}")
            self._fn = NAMED_SCHEDULES[self.schedule]
            self._explicit = None
        else:
            vals = [int(v) for v in self.schedule]
            if len(vals) < self.depth:
                raise InputError(
                    f"explicit schedule has {len(vals)} values, depth is {self.depth}"
                )
            self._fn = None
            self._explicit = vals
        self._values = None
        qmin = 2 if self.family == SIERPINSKI else 1
        vs = self.values()
        if vs.min() < qmin:
            j = int(np.argmax(vs < qmin)) + 1
            raise InputError(
                f"schedule value {vs[j - 1]} at level {j} invalid for {self.family}"
            )

    def q(self, j: int) -> int:
        if not 1 <= j <= self.depth:
            raise InputError(f"level {j} outside depth {self.depth}")
        return int(self.values()[j - 1])

    def values(self) -> np.ndarray:
        if self._values is None:
            if self._explicit is not None:
                self._values = np.array(self._explicit[:self.depth], dtype=np.int64)
            else:
                self._values = named_values(self.schedule, self.depth)
        return self._values

    def level_logs(self):
        """(log a_i, log s_i) per level, i = 1..depth."""
        qs = self.values()
        if self.family == SIERPINSKI:
            a, s = qs * (qs + 1) // 2, qs
        else:
            a, s = 2 * qs * qs + 2 * qs + 1, 2 * qs + 1
        return np.log(a.astype(np.float64)), np.log(s.astype(np.float64))

    def to_json(self) -> dict:
        sched = (
            {"named": self.schedule}
            if isinstance(self.schedule, str)
            else {"explicit": [int(v) for v in self.schedule]}
        )
        return {"family": self.family, "schedule": sched, "depth": int(self.depth)}

    @classmethod
    def from_json(cls, obj) -> "FractalSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            sched = obj["schedule"]
            if "named" in sched:
                schedule = sched["named"]
            else:
                schedule = sched["explicit"]
            return cls(obj["family"], schedule, int(obj["depth"]))
        except (KeyError, TypeError) as e:
            raise InputError(f"bad fractal spec JSON: {e}") from None


class CellSet:
    """Kept cells of one subdivision level, as integer lattice corners over
    the common denominator Q_level."""

    def __init__(self, spec: FractalSpec, level: int, addresses, corners):
        self.spec = spec
        self.level = level
        self.addresses = list(addresses)
        self.corners = np.asarray(corners, dtype=np.int64).reshape(len(self.addresses), 2)

    @classmethod
    def root(cls, spec: FractalSpec) -> "CellSet":
        return cls(spec, 0, [()], np.zeros((1, 2), dtype=np.int64))

    def __len__(self):
        return len(self.addresses)

    @property
    def side_lengths(self):
        return [side_factor(self.spec.family, self.spec.q(j))
                for j in range(1, self.level + 1)]

    @property
    def Q(self) -> int:
        out = 1
        for s in self.side_lengths:
            out *= s
        return out

    def cell_size(self) -> float:
        return 1.0 / self.Q


def refine(cells: CellSet, within: float | None = None) -> CellSet:
    """One subdivision step. With `within`, only children whose distance to
    the origin is below that radius (unit coordinates) are kept."""
    spec = cells.spec
    j = cells.level + 1
    if j > spec.depth:
        raise InputError(f"depth {spec.depth} exceeded at level {j}")
    q = spec.q(j)
    s = side_factor(spec.family, q)
    offsets = child_offsets(spec.family, q)
    Q = cells.Q * s
    addrs = []
    corners = []
    for (addr, (a, b)) in zip(cells.addresses, cells.corners):
        for idx, (da, db) in enumerate(offsets):
            ca, cb = int(a) * s + da, int(b) * s + db
            if within is not None and _cell_min_dist(spec.family, ca, cb, Q) >= within:
                continue
            addrs.append(addr + (idx,))
            corners.append((ca, cb))
    return CellSet(spec, j, addrs, corners)


def build(spec: FractalSpec, level: int | None = None, within: float | None = None) -> CellSet:
    cells = CellSet.root(spec)
    for _ in range(spec.depth if level is None else level):
        cells = refine(cells, within=within)
    return cells


def _tri_vertices(a, b, Q):
    x0 = (a + 0.5 * b) / Q
    y0 = (SQRT3_2 * b) / Q
    return np.array([
        [x0, y0],
        [x0 + 1.0 / Q, y0],
        [x0 + 0.5 / Q, y0 + SQRT3_2 / Q],
    ])


def _sq_vertices(a, b, Q):
    x0, y0 = a / Q, b / Q
    e = 1.0 / Q
    return np.array([[x0, y0], [x0 + e, y0], [x0 + e, y0 + e], [x0, y0 + e]])


def cell_vertices(family, a, b, Q):
    return _tri_vertices(a, b, Q) if family == SIERPINSKI else _sq_vertices(a, b, Q)


def _seg_dist(p, u, v):
    d = v - u
    t = float(np.dot(p - u, d)) / float(np.dot(d, d))
    t = min(1.0, max(0.0, t))
    return float(np.hypot(*(u + t * d - p)))


def _cell_min_dist(family, a, b, Q):
    """Distance from the origin to the cell (0 for the corner cell)."""
    if family == CHESSBOARD:
        return math.hypot(a, b) / Q
    if a == 0 and b == 0:
        return 0.0
    verts = _tri_vertices(a, b, Q)
    o = np.zeros(2)
    return min(_seg_dist(o, verts[i], verts[(i + 1) % 3]) for i in range(3))


def _cell_max_dist(family, a, b, Q):
    verts = cell_vertices(family, a, b, Q)
    return float(np.hypot(verts[:, 0], verts[:, 1]).max())


def cell_min_dist(cells: CellSet):
    Q = cells.Q
    return np.array([
        _cell_min_dist(cells.spec.family, a, b, Q) for a, b in cells.corners
    ])


def geometry(cells: CellSet):
    """(address string, vertex array) per cell, distinguished vertex at origin
    for the all-zeros address."""
    Q = cells.Q
    out = []
    for addr, (a, b) in zip(cells.addresses, cells.corners):
        out.append((".".join(map(str, addr)), cell_vertices(cells.spec.family, a, b, Q)))
    return out


def sample_points(cells: CellSet, per_cell: int = 1, seed: int = 0) -> np.ndarray:
    """Deterministic points inside each cell; the vertex nearest the origin is
    always included."""
    if per_cell < 1:
        raise InputError(f"per_cell must be >= 1, got {per_cell}")
    rng = np.random.default_rng(seed)
    Q = cells.Q
    fam = cells.spec.family
    pts = []
    for (a, b) in cells.corners:
        verts = cell_vertices(fam, a, b, Q)
        norms = np.hypot(verts[:, 0], verts[:, 1])
        pts.append(verts[int(np.argmin(norms))])
        for _ in range(per_cell - 1):
            if fam == SIERPINSKI:
                u, v = rng.random(2)
                if u + v > 1.0:
                    u, v = 1.0 - u, 1.0 - v
                p = verts[0] + u * (verts[1] - verts[0]) + v * (verts[2] - verts[0])
            else:
                u, v = rng.random(2)
                p = verts[0] + np.array([u, v]) / Q
            pts.append(p)
    return np.array(pts)


def cells_to_csv(cells: CellSet, path):
    Q = cells.Q
    with open(path, "w") as f:
        f.write("address,level,corner_x,corner_y\n")
        for addr, (a, b) in zip(cells.addresses, cells.corners):
            x = (a + 0.5 * b) / Q if cells.spec.family == SIERPINSKI else a / Q
            y = SQRT3_2 * b / Q if cells.spec.family == SIERPINSKI else b / Q
            f.write(f"{'.'.join(map(str, addr))},{cells.level},{float(x)!r},{float(y)!r}\n")


# ---------------------------------------------------------------------------
# Counterexample set: shells S_k at radii exp(-((n+k)(n+k+1)/2 + k)^2).


def shell_log_radius(k: int, n: int) -> float:
    m = (n + k) * (n + k + 1) // 2 + k
    return -float(m * m)


def _cap_points(k: int) -> np.ndarray:
    """k x k tangent-plane grid projected to the unit sphere; projection
    shrinks chords by O(1/k^4) relative, so the spacing is padded by that
    much to keep chordal distances >= 1/k^3."""
    theta = 3.0 / k
    c = np.array([math.sin(theta), 0.0, math.cos(theta)])
    e1 = np.array([math.cos(theta), 0.0, -math.sin(theta)])
    e2 = np.array([0.0, 1.0, 0.0])
    s = (1.0 + 1.0 / k**4) / k**3
    idx = np.arange(k) - (k - 1) / 2.0
    pts = []
    for u in idx:
        for w in idx:
            p = c + (u * s) * e1 + (w * s) * e2
            pts.append(p / np.linalg.norm(p))
    return np.array(pts)


class LogRadiusCloud:
    """Shell structure of the counterexample set: unit-sphere caps S_k and
    log radii; no radius below e^-700 is ever materialized."""

    def __init__(self, K: int, N: int):
        if K < 1 or N < 1:
            raise InputError("K and N must be >= 1")
        self.K = K
        self.N = N
        self.v_inf = np.array([0.0, 0.0, 1.0])
        self.caps = {k: _cap_points(k) for k in range(1, K + 1)}
        self.shells = [
            (k, n, shell_log_radius(k, n))
            for k in range(1, K + 1)
            for n in range(1, N + 1)
        ]
        self.verify()

    def entries(self):
        for k, n, logr in self.shells:
            for v in self.caps[k]:
                yield k, n, v, logr

    def verify(self):
        seen = set()
        for k, n, logr in self.shells:
            assert (k, n) not in seen
            seen.add((k, n))
            assert logr == shell_log_radius(k, n)
        for k, cap in self.caps.items():
            assert cap.shape == (k * k, 3)
            assert np.allclose(np.linalg.norm(cap, axis=1), 1.0, atol=1e-12)
            if k > 1:
                d = np.linalg.norm(cap[:, None, :] - cap[None, :, :], axis=2)
                np.fill_diagonal(d, np.inf)
                assert d.min() >= 1.0 / k**3, f"spacing violated for k={k}"
                diam = d[np.isfinite(d)].max()
                assert 0.5 / k**2 <= diam <= 2.0 / k**2, f"diameter off for k={k}"
        ks = sorted(self.caps)
        for i, k in enumerate(ks):
            for h in ks[i + 1:]:
                d = np.linalg.norm(
                    self.caps[k][:, None, :] - self.caps[h][None, :, :], axis=2
                )
                assert d.min() >= 1.0 / k**3, f"cap separation violated ({k},{h})"
        # Hausdorff convergence of the caps to {v_inf}
        h = [np.linalg.norm(self.caps[k] - self.v_inf, axis=1).max() for k in ks]
        assert all(x > y for x, y in zip(h, h[1:])) and h[-1] < h[0]

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("k,n,logRadius,vx,vy,vz\n")
            for k, n, v, logr in self.entries():
                f.write(f"{k},{n},{logr!r},{float(v[0])!r},{float(v[1])!r},{float(v[2])!r}\n")


def counterexample_points(K: int, N: int) -> LogRadiusCloud:
    return LogRadiusCloud(K, N)
