"""Grid geometry on ``[n]^d``: points, boxes, boundaries, folded segments, windows.

Points are plain tuples of ints, 1-based by default. Bulk operations take and
return ``(N, d)`` int64 arrays. A grid whose coordinates start somewhere other
than 1 (the padded Brouwer grid starts at 0) passes ``origin=``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

Point = tuple[int, ...]

MAX_SIDE = 1 << 20


class GridDomainError(ValueError):
    """A point, box, or parameter falls outside the grid it is used with."""


def validate_point(p: Sequence[int], n: int, origin: int = 1) -> Point:
    p = tuple(int(c) for c in p)
    if not p:
        raise GridDomainError("point must have at least one coordinate")
    hi = origin + n - 1
    for c in p:
        if c < origin or c > hi:
            raise GridDomainError(f"point {p} outside [{origin}, {hi}]^{len(p)}")
    return p


def check_points(points: np.ndarray, n: int, origin: int = 1) -> np.ndarray:
    """Validate an ``(N, d)`` array of points; returns it as int64."""
    arr = np.asarray(points, dtype=np.int64)
    if arr.ndim != 2:
        raise GridDomainError(f"expected an (N, d) array, got shape {arr.shape}")
    if arr.size and (arr.min() < origin or arr.max() > origin + n - 1):
        raise GridDomainError(f"batch has points outside [{origin}, {origin + n - 1}]^d")
    return arr


def as_points(points: Iterable[Sequence[int]] | np.ndarray, d: int) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = points.astype(np.int64, copy=False)
    else:
        arr = np.array(list(points), dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, d), dtype=np.int64)
    return arr.reshape(-1, d)


def linear_keys(points: np.ndarray, n: int, origin: int = 1) -> np.ndarray:
    """Mixed-radix keys for an ``(N, d)`` point array; requires ``n**d < 2**63``."""
    d = points.shape[1]
    if n**d >= 1 << 63:
        raise GridDomainError(f"n^d = {n}^{d} does not fit a 64-bit key")
    keys = np.zeros(points.shape[0], dtype=np.int64)
    for j in range(d):
        keys = keys * n + (points[:, j] - origin)
    return keys


def keys_to_points(keys: np.ndarray, n: int, d: int, origin: int = 1) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    out = np.empty((keys.shape[0], d), dtype=np.int64)
    rest = keys.copy()
    for j in range(d - 1, -1, -1):
        out[:, j] = rest % n + origin
        rest //= n
    return out


def lex_argmin(values: np.ndarray, points: np.ndarray) -> int:
    """Index of the smallest value; ties go to the lexicographically smallest point."""
    if len(values) == 0:
        raise ValueError("argmin of an empty batch")
    vmin = values.min()
    cand = np.flatnonzero(values == vmin)
    if len(cand) == 1:
        return int(cand[0])
    sub = points[cand]
    order = np.lexsort(sub.T[::-1])
    return int(cand[order[0]])


def l1(p: Sequence[int], q: Sequence[int]) -> int:
    return sum(abs(a - b) for a, b in zip(p, q))


def neighbors(p: Sequence[int], n: int, origin: int = 1) -> list[Point]:
    """All grid points at L1 distance 1 from ``p``."""
    p = validate_point(p, n, origin)
    hi = origin + n - 1
    out: list[Point] = []
    for j, c in enumerate(p):
        if c - 1 >= origin:
            out.append(p[:j] + (c - 1,) + p[j + 1 :])
        if c + 1 <= hi:
            out.append(p[:j] + (c + 1,) + p[j + 1 :])
    return out


def neighbor_array(p: Sequence[int], n: int, origin: int = 1) -> np.ndarray:
    return as_points(neighbors(p, n, origin), len(p))


@dataclass(frozen=True)
class Cube:
    """Axis-aligned box ``low .. low + extent - 1`` (inclusive on every axis)."""

    low: Point
    extent: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.low) != len(self.extent):
            raise GridDomainError("low and extent differ in dimension")
        if any(e < 1 for e in self.extent):
            raise GridDomainError(f"extent {self.extent} must be positive")

    @classmethod
    def full(cls, n: int, d: int, origin: int = 1) -> Cube:
        return cls((origin,) * d, (n,) * d)

    @classmethod
    def from_bounds(cls, low: Sequence[int], high: Sequence[int]) -> Cube:
        return cls(tuple(low), tuple(h - lo + 1 for lo, h in zip(low, high)))

    @property
    def d(self) -> int:
        return len(self.low)

    @property
    def high(self) -> Point:
        return tuple(lo + e - 1 for lo, e in zip(self.low, self.extent))

    @property
    def volume(self) -> int:
        v = 1
        for e in self.extent:
            v *= e
        return v

    def is_point(self) -> bool:
        return all(e == 1 for e in self.extent)

    def within(self, n: int, origin: int = 1) -> bool:
        return all(lo >= origin and h <= origin + n - 1 for lo, h in zip(self.low, self.high))

    def __contains__(self, p: Sequence[int]) -> bool:
        return all(lo <= c <= h for c, lo, h in zip(p, self.low, self.high))

    def contains_array(self, points: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.low)
        hi = np.asarray(self.high)
        return np.all((points >= lo) & (points <= hi), axis=1)

    def points(self) -> np.ndarray:
        axes = [np.arange(lo, lo + e, dtype=np.int64) for lo, e in zip(self.low, self.extent)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def iter_points(self) -> Iterator[Point]:
        return itertools.product(*(range(lo, lo + e) for lo, e in zip(self.low, self.extent)))


def cube_around(x: Sequence[int], s: int, n: int, origin: int = 1) -> Cube:
    """``C(x, s)``: points within L-infinity distance ``s`` of ``x``, clipped to the grid."""
    lo = [max(origin, c - s) for c in x]
    hi = [min(origin + n - 1, c + s) for c in x]
    return Cube.from_bounds(lo, hi)


def cube_boundary(c: Cube) -> set[Point]:
    """Points of ``c`` with fewer than ``2d`` neighbours inside ``c``."""
    return {tuple(int(v) for v in p) for p in box_boundary_points(c)}


def box_boundary_points(c: Cube) -> np.ndarray:
    """Boundary of a box as an ``(N, d)`` array in lexicographic order."""
    edges = [sorted({lo, lo + e - 1}) for lo, e in zip(c.low, c.extent)]
    spans = [(lo, lo + e - 1) for lo, e in zip(c.low, c.extent)]
    return edge_union(spans, edges)


def edge_union(spans: Sequence[tuple[int, int]], edges: Sequence[Sequence[int]]) -> np.ndarray:
    """Points of the box ``spans`` having at least one coordinate in ``edges[axis]``.

    Each point is produced once: it is attributed to the first axis on which it
    sits on an edge.
    """
    d = len(spans)
    parts = []
    for j in range(d):
        axes = []
        empty = False
        for i, (lo, hi) in enumerate(spans):
            full = np.arange(lo, hi + 1, dtype=np.int64)
            e = np.asarray(sorted(edges[i]), dtype=np.int64)
            if i < j:
                ax = full[~np.isin(full, e)]
            elif i == j:
                ax = e
            else:
                ax = full
            if ax.size == 0:
                empty = True
                break
            axes.append(ax)
        if empty:
            continue
        grids = np.meshgrid(*axes, indexing="ij")
        parts.append(np.stack([g.ravel() for g in grids], axis=1))
    if not parts:
        return np.zeros((0, d), dtype=np.int64)
    pts = np.concatenate(parts)
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def partition_cube(c: Cube, side: int) -> list[Cube]:
    """Tile ``c`` by sub-cubes of ``side``; trailing blocks on each axis may be shorter."""
    if side < 1:
        raise GridDomainError(f"side must be >= 1, got {side}")
    per_axis = [
        [(lo + t, min(side, e - t)) for t in range(0, e, side)] for lo, e in zip(c.low, c.extent)
    ]
    return [
        Cube(tuple(b[0] for b in combo), tuple(b[1] for b in combo))
        for combo in itertools.product(*per_axis)
    ]


def even_splits(lo: int, extent: int, parts: int) -> list[tuple[int, int]]:
    """Split ``lo .. lo+extent-1`` into ``parts`` consecutive runs of near-equal length.

    Longer runs come first. Returns ``(start, length)`` pairs.
    """
    parts = max(1, min(parts, extent))
    base, extra = divmod(extent, parts)
    out = []
    start = lo
    for t in range(parts):
        length = base + (1 if t < extra else 0)
        out.append((start, length))
        start += length
    return out


@dataclass(frozen=True)
class BlockPartition:
    """A product partition of a box: per-axis runs of ``(start, length)``."""

    runs: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def d(self) -> int:
        return len(self.runs)

    def blocks(self) -> list[Cube]:
        return [
            Cube(tuple(r[0] for r in combo), tuple(r[1] for r in combo))
            for combo in itertools.product(*self.runs)
        ]

    def block_of(self, p: Sequence[int]) -> Cube:
        low, ext = [], []
        for c, runs in zip(p, self.runs):
            for start, length in runs:
                if start <= c < start + length:
                    low.append(start)
                    ext.append(length)
                    break
            else:
                raise GridDomainError(f"{p} not inside the partitioned box")
        return Cube(tuple(low), tuple(ext))

    def boundary_union(self) -> np.ndarray:
        """Union of all block boundaries, lexicographically ordered."""
        spans = [(runs[0][0], runs[-1][0] + runs[-1][1] - 1) for runs in self.runs]
        edges = [{s for s, _ in runs} | {s + length - 1 for s, length in runs} for runs in self.runs]
        return edge_union(spans, edges)


def balanced_partition(c: Cube, target_side: float) -> BlockPartition:
    """Cut each axis of ``c`` into ``max(1, floor(extent / target_side))`` near-equal runs."""
    runs = []
    for lo, e in zip(c.low, c.extent):
        parts = max(1, int(e // target_side)) if target_side > 0 else e
        runs.append(tuple(even_splits(lo, e, parts)))
    return BlockPartition(tuple(runs))


def fs_axis_runs(x: Sequence[int], y: Sequence[int]) -> list[tuple[int, int, int]]:
    """``(axis, start, stop)`` for each non-trivial run of the folded segment x -> y."""
    return [(i, x[i], y[i]) for i in range(len(x)) if x[i] != y[i]]


@dataclass(frozen=True)
class FoldedSegment:
    """Axis-by-axis monotone lattice path from ``origin`` (excluded) to ``target``."""

    origin: Point
    target: Point
    _cache: list = field(default_factory=list, repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return l1(self.origin, self.target)

    def __contains__(self, z: Sequence[int]) -> bool:
        return fs_contains(self.origin, self.target, z)

    @property
    def points(self) -> list[Point]:
        if not self._cache:
            self._cache.append(list(_trace(self.origin, self.target)))
        return self._cache[0]

    def as_array(self) -> np.ndarray:
        return as_points(self.points, len(self.origin))


def _trace(x: Sequence[int], y: Sequence[int]) -> Iterator[Point]:
    cur = list(x)
    for i in range(len(x)):
        step = 1 if y[i] > cur[i] else -1
        while cur[i] != y[i]:
            cur[i] += step
            yield tuple(cur)


def folded_segment(x: Sequence[int], y: Sequence[int], n: int | None = None) -> FoldedSegment:
    """The folded segment FS(x, y): change axis 1 toward ``y``, then axis 2, and so on."""
    x, y = tuple(int(c) for c in x), tuple(int(c) for c in y)
    if len(x) != len(y):
        raise GridDomainError("points differ in dimension")
    if n is not None:
        validate_point(x, n)
        validate_point(y, n)
    return FoldedSegment(x, y)


def fs_contains(x: Sequence[int], y: Sequence[int], z: Sequence[int]) -> bool:
    """Membership of ``z`` in FS(x, y) without building the path."""
    d = len(x)
    if tuple(z) == tuple(x):
        return False
    for i in range(d):
        if all(z[j] == y[j] for j in range(i)) and all(z[j] == x[j] for j in range(i + 1, d)):
            lo, hi = (x[i], y[i]) if x[i] <= y[i] else (y[i], x[i])
            if lo <= z[i] <= hi:
                return True
    return False


def fs_contains_many(x: Sequence[int], targets: np.ndarray, z: Sequence[int]) -> np.ndarray:
    """For each row ``y`` of ``targets``: is ``z`` in FS(x, y)?"""
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    ys = np.asarray(targets, dtype=np.int64)
    d = x.shape[0]
    hit = np.zeros(ys.shape[0], dtype=bool)
    if np.array_equal(x, z):
        return hit
    for i in range(d):
        ok = np.ones(ys.shape[0], dtype=bool)
        for j in range(i):
            ok &= ys[:, j] == z[j]
        if any(z[j] != x[j] for j in range(i + 1, d)):
            continue
        lo = np.minimum(ys[:, i], x[i])
        hi = np.maximum(ys[:, i], x[i])
        ok &= (lo <= z[i]) & (z[i] <= hi)
        hit |= ok
    return hit


# --- wrap-around windows used by the polynomial-round walk -------------------


def window1(x: int, ell: int, n: int) -> list[int]:
    """The ``ell`` points after ``x`` on the cycle ``1..n`` (``x`` itself excluded)."""
    if not 1 <= ell < n:
        raise GridDomainError(f"window length must satisfy 1 <= ell < n, got ell={ell}, n={n}")
    return [(x + t - 1) % n + 1 for t in range(1, ell + 1)]


def in_window1(y: int, x: int, ell: int, n: int) -> bool:
    return 1 <= (y - x) % n <= ell


@dataclass(frozen=True)
class WindowSets:
    w1: tuple[frozenset[int], ...]
    w: frozenset[Point]
    w_inv: tuple[frozenset[Point], ...]
    w_b: tuple[frozenset[Point], ...]

    @property
    def w_inv_all(self) -> frozenset[Point]:
        return frozenset().union(*self.w_inv)

    @property
    def w_b_all(self) -> frozenset[Point]:
        return frozenset().union(*self.w_b)

    @property
    def w_r(self) -> frozenset[Point]:
        return self.w_inv_all | self.w_b_all


def window_sets(x: Sequence[int], ell: int, n: int) -> WindowSets:
    """Forward windows around ``x`` and the sets of walk positions that can reach ``x``.

    ``w_inv[i]`` holds points whose axis-``i`` run reaches ``x`` moving up without
    wrapping; ``w_b[i]`` holds those whose run wraps past ``n`` and comes back down
    onto ``x``; the wrapped set is taken generously, every axis-``i`` start
    above ``max(n - ell, x_i)``. Together they cover every ``y`` with
    ``x in FS(y, z)`` for some ``z`` in ``W(y)``, and the two families are disjoint.
    """
    x = validate_point(x, n)
    if not 1 <= ell < n:
        raise GridDomainError(f"window length must satisfy 1 <= ell < n, got ell={ell}, n={n}")
    d = len(x)
    w1 = tuple(frozenset(window1(c, ell, n)) for c in x)
    w = frozenset(itertools.product(*(sorted(s) for s in w1)))
    behind = [[y for y in range(1, n + 1) if in_window1(c, y, ell, n)] for c in x]
    w_inv, w_b = [], []
    for i in range(d):
        prefix = [behind[j] for j in range(i)]
        suffix = [[x[j]] for j in range(i + 1, d)]
        up = [y for y in range(1, n + 1) if y < x[i] <= y + ell]
        down = [y for y in range(max(n - ell, x[i]) + 1, n + 1)]
        w_inv.append(frozenset(itertools.product(*prefix, up, *suffix)))
        w_b.append(frozenset(itertools.product(*prefix, down, *suffix)))
    return WindowSets(w1, w, tuple(w_inv), tuple(w_b))
