"""Zero points of direction-preserving fields via bad-cube parity.

Direction values are integer codes: 0 for the zero vector, ``+i`` / ``-i`` for
``+e^i`` / ``-e^i``. A 0-cube is bad when its value is ``+e^1``; an ``i``-cube is
bad when its corner values are exactly ``{+e^1, ..., +e^(i+1)}`` and it has an
odd number of bad ``(i-1)``-faces. A box whose boundary carries an odd number of
bad ``(d-1)``-cubes contains a zero point, and cutting the box into blocks keeps
the parity: the blocks' counts add up to the outer count modulo 2, since every
shared face is counted twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constant import block_target
from .grid import Cube, edge_union, lex_argmin
from .oracle import OracleSession
from .report import RunReport


class NoOddSubcube(AssertionError):
    """No block with odd boundary parity: the field is not a valid padded instance."""


@dataclass(frozen=True)
class UnitCube:
    """``base`` plus every 0/1 offset on the axes in ``dims`` (0-based axis indices)."""

    base: tuple[int, ...]
    dims: tuple[int, ...]

    def corners(self) -> list[tuple[int, ...]]:
        out = []
        for bits in range(1 << len(self.dims)):
            p = list(self.base)
            for t, a in enumerate(self.dims):
                if bits >> t & 1:
                    p[a] += 1
            out.append(tuple(p))
        return out

    def faces(self) -> list[UnitCube]:
        out = []
        for a in self.dims:
            rest = tuple(b for b in self.dims if b != a)
            out.append(UnitCube(self.base, rest))
            shifted = list(self.base)
            shifted[a] += 1
            out.append(UnitCube(tuple(shifted), rest))
        return out


def _value(f, p: Sequence[int]) -> int:
    return int(f.evaluate(np.asarray([p], dtype=np.int64))[0])


def _value_set_ok(f, c: UnitCube) -> bool:
    vals = {_value(f, p) for p in c.corners()}
    return vals == set(range(1, len(c.dims) + 2))


def is_bad_cube(c: UnitCube, f, _memo: dict | None = None) -> bool:
    """Bad-cube test with memoization over faces shared between sub-cubes."""
    memo = {} if _memo is None else _memo
    key = (c.base, c.dims)
    if key in memo:
        return memo[key]
    if not c.dims:
        res = _value(f, c.base) == 1
    else:
        res = _value_set_ok(f, c) and sum(is_bad_cube(g, f, memo) for g in c.faces()) % 2 == 1
    memo[key] = res
    return res


def is_bad_cube_naive(c: UnitCube, f) -> bool:
    if not c.dims:
        return _value(f, c.base) == 1
    return _value_set_ok(f, c) and sum(is_bad_cube_naive(g, f) for g in c.faces()) % 2 == 1


def bad_cube_table(codes: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Bad flags for every unit cube spanning ``dims`` inside a block of direction codes.

    ``codes`` has one entry per grid point of the block. The result is indexed by
    the cube's base corner, so it is one shorter along each axis in ``dims``.
    """
    d = codes.ndim
    # Bit d + 1 marks non-positive codes; no cube's target set reaches it.
    other = np.int64(1) << (d + 1)
    pos = codes > 0
    mask0 = np.where(pos, np.left_shift(np.int64(1), np.maximum(codes, 1) - 1), other)
    memo: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {(): (mask0, codes == 1)}

    def lo_hi(arr: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        return arr[tuple(lo)], arr[tuple(hi)]

    def table(S: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        if S in memo:
            return memo[S]
        sub_mask, _ = table(S[:-1])
        a, b = lo_hi(sub_mask, S[-1])
        mask = a | b
        parity = np.zeros(mask.shape, dtype=np.int64)
        for ax in S:
            _, sub_bad = table(tuple(x for x in S if x != ax))
            p, q = lo_hi(sub_bad, ax)
            parity += p.astype(np.int64) + q.astype(np.int64)
        full = (1 << (len(S) + 1)) - 1
        bad = (mask == full) & (parity % 2 == 1)
        memo[S] = (mask, bad)
        return mask, bad

    S = tuple(sorted(dims))
    if any(codes.shape[a] < 2 for a in S):
        shape = tuple(codes.shape[a] - 1 if a in S else codes.shape[a] for a in range(d))
        return np.zeros(tuple(max(0, x) for x in shape), dtype=bool)
    return table(S)[1]


def boundary_bad_count_codes(codes: np.ndarray) -> int:
    """Number of bad ``(d-1)``-cubes lying on the facets of a block of codes."""
    d = codes.ndim
    total = 0
    for j in range(d):
        dims = tuple(a for a in range(d) if a != j)
        for end in (0, codes.shape[j] - 1):
            idx = [slice(None)] * d
            idx[j] = slice(end, end + 1)
            total += int(bad_cube_table(codes[tuple(idx)], dims).sum())
        if codes.shape[j] == 1:
            # Both facets coincide; count it once.
            idx = [slice(None)] * d
            idx[j] = slice(0, 1)
            total -= int(bad_cube_table(codes[tuple(idx)], dims).sum())
    return total


def codes_on(f, cube: Cube) -> np.ndarray:
    return np.asarray(f.evaluate(cube.points())).reshape(cube.extent)


def boundary_bad_count(C: Cube, f) -> int:
    return boundary_bad_count_codes(codes_on(f, C))


def boundary_bad_parity(C: Cube, f) -> int:
    return boundary_bad_count(C, f) % 2


def verify_zero(f, x: Sequence[int]) -> bool:
    return _value(f, x) == 0


def cut_points(lo: int, hi: int, parts: int) -> list[int]:
    """``parts + 1`` increasing cut coordinates from ``lo`` to ``hi`` (closed intervals share ends)."""
    span = hi - lo
    parts = max(1, min(parts, span)) if span > 0 else 1
    return sorted({lo + round(t * span / parts) for t in range(parts + 1)})


def _scan_zero(session: OracleSession, cube: Cube) -> tuple[int, ...] | None:
    pts = cube.points()
    return _first_zero(pts, np.asarray(session.submit_round(pts)))


def _first_zero(pts: np.ndarray, vals: np.ndarray) -> tuple[int, ...] | None:
    zeros = np.flatnonzero(vals == 0)
    if zeros.size == 0:
        return None
    j = zeros[lex_argmin(np.zeros(zeros.size), pts[zeros])]
    return tuple(int(c) for c in pts[j])


def const_rounds_brouwer(session: OracleSession, k: int) -> RunReport:
    """Find a zero point of a padded field in at most ``k`` rounds.

    Blocks are closed boxes between consecutive cut coordinates, so neighbouring
    blocks share their cut faces. Each round but the last reads all cut faces and
    keeps the lexicographically first block with odd boundary parity. A queried
    zero ends the run early.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    d, side, lo = session.d, session.n, session.origin
    cube = Cube.full(side, d, lo)
    for i in range(1, k):
        if cube.volume <= 1 or min(cube.extent) < 2:
            break
        target = block_target(side, d, k, i)
        cuts = [cut_points(a, b, max(1, math.floor((b - a) / target))) for a, b in zip(cube.low, cube.high)]
        spans = list(zip(cube.low, cube.high))
        pts = edge_union(spans, cuts)
        vals = np.asarray(session.submit_round(pts))
        z = _first_zero(pts, vals)
        if z is not None:
            return RunReport(z, session.rounds_used, session.queries_used, "zero_found")
        dense = np.full(cube.extent, 127, dtype=np.int64)
        dense[tuple((pts - np.asarray(cube.low)).T)] = vals
        chosen = None
        for combo in np.ndindex(*[len(c) - 1 for c in cuts]):
            low = [cuts[a][t] for a, t in enumerate(combo)]
            high = [cuts[a][t + 1] for a, t in enumerate(combo)]
            sl = tuple(slice(l - c0, h - c0 + 1) for l, h, c0 in zip(low, high, cube.low))
            if boundary_bad_count_codes(dense[sl]) % 2 == 1:
                chosen = Cube.from_bounds(low, high)
                break
        if chosen is None:
            raise NoOddSubcube(f"no block of {cube} has odd boundary parity")
        cube = chosen
    z = _scan_zero(session, cube)
    if z is None:
        raise NoOddSubcube(f"final block {cube} holds no zero point")
    return RunReport(z, session.rounds_used, session.queries_used, "normal")


def one_d_brouwer(session: OracleSession, k: int) -> RunReport:
    """Interval search on a line: keep a sub-interval whose ends point inward."""
    if session.d != 1:
        raise ValueError("one_d_brouwer needs a one-dimensional field")
    if k < 1:
        raise ValueError("k must be >= 1")
    lo, hi = session.origin, session.origin + session.n - 1
    parts = max(1, math.ceil(session.n ** (1 / k) - 1e-9))
    for _ in range(1, k):
        if hi - lo < 2:
            break
        cuts = cut_points(lo, hi, parts)
        pts = np.asarray(cuts, dtype=np.int64).reshape(-1, 1)
        vals = np.asarray(session.submit_round(pts))
        z = _first_zero(pts, vals)
        if z is not None:
            return RunReport(z, session.rounds_used, session.queries_used, "zero_found")
        for t in range(len(cuts) - 1):
            if vals[t] > 0 and vals[t + 1] < 0:
                lo, hi = cuts[t], cuts[t + 1]
                break
        else:
            raise NoOddSubcube("no interval with inward-pointing ends")
    z = _scan_zero(session, Cube((lo,), (hi - lo + 1,)))
    if z is None:
        raise NoOddSubcube(f"interval [{lo}, {hi}] holds no zero point")
    return RunReport(z, session.rounds_used, session.queries_used, "normal")
