"""Instance families: staircases, 1D hard functions, direction fields, path graphs.

All random draws go through ``numpy.random.Generator(Philox(seed))``. A staircase
is fully determined by its connecting points, and those come from per-step window
offsets, so every staircase of a toy schedule can be enumerated directly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import (
    GridDomainError,
    Point,
    as_points,
    folded_segment,
    linear_keys,
    neighbor_array,
    validate_point,
)

EXHAUSTIVE_LIMIT = 1 << 62

CONST = "const_round"
POLY = "poly_round"


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def ell_schedule(n: int, d: int, k: int) -> list[int]:
    """Block sides ``round(n ** ((d^k - d^i) / (d^k - 1)))`` for ``i < k``, clamped to ``[1, n]``."""
    if n < 2:
        raise GridDomainError(f"n must be >= 2, got {n}")
    if d < 1 or k < 1:
        raise GridDomainError("d and k must be positive")
    if d == 1:
        # The exponent tends to (k - i) / k as d -> 1.
        exps = [(k - i) / k for i in range(k)]
    else:
        top = d**k - 1
        exps = [(d**k - d**i) / top for i in range(k)]
    out = []
    for e in exps:
        v = _round_power(n, e)
        out.append(min(n, max(1, v)))
    out[0] = n
    return out


def _round_power(n: int, e: float) -> int:
    v = round(n**e)
    # Guard against float drift on exact powers, e.g. 4096 ** (2/3).
    for cand in (v - 1, v, v + 1):
        if cand > 0 and abs(math.log(cand) - e * math.log(n)) < 1e-12:
            return cand
    return v


def const_grid_side(n: int, d: int, k: int) -> int:
    return sum(ell_schedule(n, d, k))


def _trace_index(points: list[Point], n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted keys and the largest sequence index of each distinct trace point."""
    if not points:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    arr = as_points(points, d)
    keys = linear_keys(arr, n)
    idx = np.arange(len(points), dtype=np.int64)
    order = np.lexsort((-idx, keys))
    keys_s, idx_s = keys[order], idx[order]
    first = np.ones(len(keys_s), dtype=bool)
    first[1:] = keys_s[1:] != keys_s[:-1]
    return keys_s[first], idx_s[first]


@dataclass(frozen=True)
class StaircaseInstance:
    """A staircase and the value function it induces.

    ``n`` is the side of the grid the values live on: the block-schedule side
    ``m`` for constant-round staircases and the torus side for poly-round ones.
    ``param`` is ``k`` or ``alpha``; ``source_n`` is the requested size.
    """

    kind: str
    d: int
    n: int
    source_n: int
    param: float
    seed: int
    end_sign: str
    connecting: tuple[Point, ...]
    trace: tuple[Point, ...] = field(repr=False)
    keys: np.ndarray = field(repr=False, compare=False)
    index: np.ndarray = field(repr=False, compare=False)
    origin: int = 1
    value_kind: str = "value"

    @property
    def start(self) -> Point:
        return self.connecting[0]

    @property
    def end(self) -> Point:
        return self.trace[-1]

    @property
    def path_length(self) -> int:
        return len(self.trace) - 1

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.d)
        vals = np.abs(pts - np.asarray(self.start)).sum(axis=1)
        if pts.shape[0] == 0 or self.keys.size == 0:
            return vals
        k = linear_keys(pts, self.n)
        pos = np.searchsorted(self.keys, k)
        pos_c = np.minimum(pos, self.keys.size - 1)
        hit = self.keys[pos_c] == k
        on = -self.index[pos_c]
        vals = np.where(hit, on, vals)
        t = self.path_length
        if self.end_sign == "+" and t > 0:
            end_val = sum(abs(a - b) for a, b in zip(self.end, self.start))
            vals = np.where(hit & (self.index[pos_c] == t), end_val, vals)
        return vals

    def value_at(self, p: Sequence[int]) -> int:
        p = validate_point(p, self.n)
        return int(self.evaluate(as_points([p], self.d))[0])

    def expected_solution(self) -> Point:
        """The end point, or the one before it when the end value is flipped positive."""
        if self.end_sign == "-" or self.path_length == 0:
            return self.end
        return self.trace[-2]

    def to_text(self) -> str:
        head = f"{self.kind} {self.d} {self.source_n} {_fmt_param(self.param)} {self.seed} {self.end_sign}"
        lines = [head] + [" ".join(str(c) for c in p) for p in self.connecting]
        return "\n".join(lines) + "\n"


def _fmt_param(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def _build(kind, d, n, source_n, param, seed, end_sign, connecting) -> StaircaseInstance:
    trace: list[Point] = [connecting[0]]
    for a, b in zip(connecting, connecting[1:]):
        trace.extend(folded_segment(a, b).points)
    keys, index = _trace_index(trace, n, d)
    return StaircaseInstance(
        kind, d, n, source_n, param, seed, end_sign, tuple(connecting), tuple(trace), keys, index
    )


def const_staircase_from_offsets(
    n: int, d: int, k: int, offsets: Sequence[Sequence[int]], end_sign: str = "-", seed: int = 0,
    schedule: Sequence[int] | None = None,
) -> StaircaseInstance:
    """Build a constant-round staircase from explicit window offsets.

    ``offsets[j]`` lies in ``[0, ell_j)^d`` and moves ``x_j`` to ``x_{j+1}``.
    Passing ``schedule`` overrides the computed block sides (toy schedules).
    """
    ells = list(schedule) if schedule is not None else ell_schedule(n, d, k)
    m = sum(ells)
    if m**d >= EXHAUSTIVE_LIMIT:
        raise GridDomainError(f"grid side {m} in dimension {d} overflows the point count")
    if len(offsets) > len(ells):
        raise GridDomainError("more offsets than schedule entries")
    cur = (1,) * d
    pts = [cur]
    for j, off in enumerate(offsets):
        off = tuple(int(o) for o in off)
        if len(off) != d or any(o < 0 or o >= ells[j] for o in off):
            raise GridDomainError(f"offset {off} outside window of side {ells[j]}")
        cur = tuple(c + o for c, o in zip(cur, off))
        pts.append(cur)
    return _build(CONST, d, m, n, k, seed, end_sign, pts)


def gen_const_staircase(n: int, d: int, k: int, seed: int, schedule: Sequence[int] | None = None) -> StaircaseInstance:
    """Random length-``k`` staircase on the side-``m`` grid with ``m = sum(ell_i)``."""
    ells = list(schedule) if schedule is not None else ell_schedule(n, d, k)
    rng = rng_for(seed)
    offsets = [rng.integers(0, ell, size=d) for ell in ells[:k]]
    end_sign = "-" if rng.integers(0, 2) == 0 else "+"
    return const_staircase_from_offsets(n, d, k, offsets, end_sign, seed, ells)


@dataclass(frozen=True)
class PolyParams:
    n: int
    d: int
    alpha: float
    ell: int
    m: int
    k: int

    @property
    def K(self) -> int:
        return 2 * self.k


def poly_params(n: int, d: int, alpha: float) -> PolyParams:
    if d < 3:
        raise GridDomainError("poly-round staircases need d >= 3")
    if not 0 < alpha < d / 2:
        raise GridDomainError(f"alpha must lie in (0, d/2), got {alpha}")
    ell = _round_power(n, 1 - 2 * alpha / d)
    if ell < 2 or ell >= n:
        raise GridDomainError(f"window length {ell} degenerate for n={n}, alpha={alpha}")
    m = max(1, round(n / ell))
    k = int(math.floor(n**alpha + 1e-9))
    return PolyParams(n, d, alpha, ell, m, k)


def poly_staircase_from_points(
    n: int, d: int, alpha: float, connecting: Sequence[Sequence[int]], end_sign: str = "-", seed: int = 0
) -> StaircaseInstance:
    pts = [validate_point(p, n) for p in connecting]
    return _build(POLY, d, n, n, alpha, seed, end_sign, pts)


def gen_poly_staircase(n: int, d: int, alpha: float, seed: int) -> StaircaseInstance:
    """Wrap-around random walk of ``K = 2 floor(n^alpha)`` window steps, restarted every ``m`` steps."""
    pp = poly_params(n, d, alpha)
    rng = rng_for(seed)
    cur = np.ones(d, dtype=np.int64)
    pts = [tuple(int(c) for c in cur)]
    for j in range(1, pp.K + 1):
        if j % pp.m != 0:
            step = rng.integers(1, pp.ell + 1, size=d)
            cur = (cur - 1 + step) % n + 1
        else:
            cur = rng.integers(1, n + 1, size=d)
        pts.append(tuple(int(c) for c in cur))
    end_sign = "-" if rng.integers(0, 2) == 0 else "+"
    return poly_staircase_from_points(n, d, alpha, pts, end_sign, seed)


def instance_from_text(text: str) -> StaircaseInstance:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    kind, d, n, param, seed, end_sign = lines[0].split()
    d, n, seed = int(d), int(n), int(seed)
    pts = [tuple(int(c) for c in ln.split()) for ln in lines[1:]]
    if kind == CONST:
        k = int(param)
        offsets = [tuple(b - a for a, b in zip(p, q)) for p, q in zip(pts, pts[1:])]
        return const_staircase_from_offsets(n, d, k, offsets, end_sign, seed)
    if kind == POLY:
        return poly_staircase_from_points(n, d, float(param), pts, end_sign, seed)
    raise ValueError(f"unknown instance kind {kind!r}")


# --- one-dimensional hard families ------------------------------------------------


@dataclass(frozen=True)
class OneDHardInstance:
    """Valley (local search) or sign step (Brouwer) with its solution at ``i``."""

    n: int
    i: int
    problem: str = "local_search"
    d: int = 1
    origin: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.i <= self.n:
            raise GridDomainError(f"i={self.i} outside [1, {self.n}]")
        if self.problem not in ("local_search", "brouwer"):
            raise ValueError(f"unknown problem {self.problem!r}")

    @property
    def kind(self) -> str:
        return "value" if self.problem == "local_search" else "direction"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        j = np.asarray(points, dtype=np.int64).reshape(-1)
        if self.problem == "local_search":
            return np.where(j == self.i, 0, np.where(j > self.i, j, self.n - j + 1))
        return np.where(j == self.i, 0, np.where(j > self.i, -1, 1)).astype(np.int64)

    def values(self) -> list[int]:
        return [int(v) for v in self.evaluate(np.arange(1, self.n + 1))]


def gen_1d_hard(n: int, i: int, kind: str) -> OneDHardInstance:
    return OneDHardInstance(n, i, kind)


# --- direction fields -------------------------------------------------------------
#
# Directions are encoded as integers: 0 for the zero vector, +i / -i for +e^i / -e^i.


def code_to_vector(code: int, d: int) -> tuple[int, ...]:
    v = [0] * d
    if code:
        v[abs(code) - 1] = 1 if code > 0 else -1
    return tuple(v)


def vector_to_code(v: Sequence[int]) -> int:
    nz = [(i, c) for i, c in enumerate(v) if c]
    if not nz:
        return 0
    if len(nz) != 1 or abs(nz[0][1]) != 1:
        raise ValueError(f"{tuple(v)} is not a signed unit vector")
    i, c = nz[0]
    return (i + 1) * c


@dataclass(frozen=True)
class SinkField:
    """Points move toward ``target`` along the first differing axis of ``axis_order``."""

    n: int
    d: int
    target: Point
    axis_order: tuple[int, ...] | None = None
    origin: int = 1
    kind: str = "direction"

    def __post_init__(self) -> None:
        validate_point(self.target, self.n, self.origin)
        if self.axis_order is not None and sorted(self.axis_order) != list(range(self.d)):
            raise ValueError("axis_order must be a permutation of 0..d-1")

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.d)
        out = np.zeros(pts.shape[0], dtype=np.int64)
        done = np.zeros(pts.shape[0], dtype=bool)
        order = self.axis_order if self.axis_order is not None else range(self.d)
        for a in order:
            diff = pts[:, a] - self.target[a]
            pick = ~done & (diff != 0)
            out[pick] = np.where(diff[pick] < 0, a + 1, -(a + 1))
            done |= pick
        return out


def gen_sink_field(n: int, d: int, target: Sequence[int], axis_order: Sequence[int] | None = None) -> SinkField:
    return SinkField(n, d, tuple(int(c) for c in target), tuple(axis_order) if axis_order is not None else None)


def random_sink_field(n: int, d: int, seed: int) -> SinkField:
    rng = rng_for(seed)
    target = tuple(int(c) for c in rng.integers(1, n + 1, size=d))
    order = tuple(int(a) for a in rng.permutation(d))
    return SinkField(n, d, target, order)


@dataclass(frozen=True)
class PaddedField:
    """Extends a field on ``[n]^d`` to ``{0..n+1}^d`` by pointing the shell inward."""

    inner: object
    kind: str = "direction"

    @property
    def d(self) -> int:
        return self.inner.d

    @property
    def n(self) -> int:
        return self.inner.n + 2

    @property
    def origin(self) -> int:
        return 0

    @property
    def inner_n(self) -> int:
        return self.inner.n

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.d)
        nin = self.inner.n
        out = np.zeros(pts.shape[0], dtype=np.int64)
        low = pts == 0
        high = pts == nin + 1
        edge = low | high
        on_shell = edge.any(axis=1)
        if on_shell.any():
            # Largest boundary axis: last True along each row.
            rev = edge[:, ::-1]
            last = self.d - 1 - np.argmax(rev, axis=1)
            rows = np.flatnonzero(on_shell)
            ax = last[rows]
            sign = np.where(low[rows, ax], 1, -1)
            out[rows] = sign * (ax + 1)
        inside = ~on_shell
        if inside.any():
            out[inside] = self.inner.evaluate(pts[inside])
        return out


def pad_brouwer(f) -> PaddedField:
    return PaddedField(f)


def field_table(f) -> np.ndarray:
    """Direction codes on the whole grid as a ``(side,)*d`` array (axis order = coordinate order)."""
    side = f.n
    axes = [np.arange(f.origin, f.origin + side, dtype=np.int64)] * f.d
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return f.evaluate(pts).reshape((side,) * f.d)


def check_bounded(f) -> bool:
    """``x + f(x)`` stays on the grid everywhere (exhaustive)."""
    tab = field_table(f)
    side = f.n
    for a in range(f.d):
        idx = [slice(None)] * f.d
        idx[a] = 0
        if np.any(tab[tuple(idx)] == -(a + 1)):
            return False
        idx[a] = side - 1
        if np.any(tab[tuple(idx)] == a + 1):
            return False
    return True


def check_direction_preserving(f) -> bool:
    """No two Linf-adjacent points carry opposite unit vectors (exhaustive)."""
    tab = field_table(f)
    d = f.d
    side = f.n
    for off in itertools.product((-1, 0, 1), repeat=d):
        if all(o == 0 for o in off):
            continue
        if next(o for o in off if o != 0) < 0:
            continue
        src = tuple(slice(max(0, -o), side - max(0, o)) for o in off)
        dst = tuple(slice(max(0, o), side - max(0, -o)) for o in off)
        a, b = tab[src], tab[dst]
        if np.any((a != 0) & (a == -b)):
            return False
    return True


def zero_points(f) -> list[Point]:
    tab = field_table(f)
    return [tuple(int(c) + f.origin for c in idx) for idx in zip(*np.nonzero(tab == 0))]


# --- local search to end-of-path --------------------------------------------------

NO = "no"


@dataclass(frozen=True)
class GPInstance:
    """Predecessor/successor oracle for the directed path hidden in a staircase.

    Each answer is computed from the staircase values at ``x`` and its
    neighbours, so one path query costs at most ``2d + 1`` value queries and
    can be served inside the same round.
    """

    staircase: StaircaseInstance
    kind: str = "gp"

    @property
    def d(self) -> int:
        return self.staircase.d

    @property
    def n(self) -> int:
        return self.staircase.n

    @property
    def origin(self) -> int:
        return 1

    def source_queries(self, points: np.ndarray) -> int:
        pts = as_points(points, self.d)
        return sum(1 + len(neighbor_array(tuple(p), self.n)) for p in pts.tolist())

    def answer(self, p: Sequence[int]) -> tuple:
        p = tuple(int(c) for c in p)
        s = self.staircase
        fx = s.value_at(p)
        if fx > 0:
            return (NO, NO)
        nb = neighbor_array(p, self.n)
        vals = s.evaluate(nb)
        succ_i = np.flatnonzero(vals == fx - 1)
        succ = tuple(int(c) for c in nb[succ_i[0]]) if succ_i.size else NO
        if fx == 0:
            if p != s.start or succ == NO:
                return (NO, NO)
            return (NO, succ)
        pred_i = np.flatnonzero(vals == fx + 1)
        pred = tuple(int(c) for c in nb[pred_i[0]]) if pred_i.size else NO
        if pred == NO:
            return (NO, NO)
        return (pred, succ)

    def evaluate(self, points: np.ndarray) -> list[tuple]:
        return [self.answer(p) for p in as_points(points, self.d).tolist()]


def ls_to_gp(inst: StaircaseInstance) -> GPInstance:
    if inst.kind != CONST:
        raise ValueError("path reduction is defined for constant-round staircases")
    return GPInstance(inst)
