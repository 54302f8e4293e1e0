"""Local search in a fixed number of rounds by shrinking blocks.

Each round but the last queries every block boundary of a product partition of
the current box and keeps the block holding the smallest boundary value. The
last round reads the whole surviving block. Any point just outside the kept
block sits on a neighbouring block's boundary, so its value is already known and
no smaller than the kept minimum; this is what makes the final minimum a local
minimum of the whole grid.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import BlockPartition, Cube, balanced_partition, even_splits, lex_argmin
from .oracle import OracleSession
from .report import RunReport


def block_target(side: int, d: int, k: int, i: int) -> float:
    """Real-valued block side for round ``i`` (1-based) of a ``k``-round search."""
    if d == 1:
        return side ** ((k - i) / k)
    return side ** ((d**k - d**i) / (d**k - 1))


def _point(p: np.ndarray) -> tuple[int, ...]:
    return tuple(int(c) for c in p)


def _shrink(session: OracleSession, cube: Cube, part: BlockPartition) -> tuple[Cube, np.ndarray, int]:
    pts = part.boundary_union()
    vals = np.asarray(session.submit_round(pts))
    j = lex_argmin(vals, pts)
    return part.block_of(pts[j]), pts[j], int(vals[j])


def _finish(session: OracleSession, cube: Cube) -> tuple[tuple[int, ...], int]:
    pts = cube.points()
    vals = np.asarray(session.submit_round(pts))
    j = lex_argmin(vals, pts)
    return _point(pts[j]), int(vals[j])


def const_rounds_ls(session: OracleSession, k: int) -> RunReport:
    """Find a local minimum in at most ``k`` rounds.

    Blocks are near-equal: each axis of the current box is cut into
    ``max(1, floor(extent / target))`` runs, ``target`` being the real block
    side for that round. The realized block sides are reported in
    ``extras["block_sides"]``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if session.round_limit is not None and session.round_limit < k:
        raise ValueError(f"session allows {session.round_limit} rounds, algorithm needs {k}")
    d, side = session.d, session.n
    cube = Cube.full(side, d, session.origin)
    sides: list[tuple[int, ...]] = []
    per_round: list[int] = []
    for i in range(1, k):
        if cube.is_point():
            break
        before = session.queries_used
        part = balanced_partition(cube, block_target(side, d, k, i))
        cube, _, _ = _shrink(session, cube, part)
        sides.append(cube.extent)
        per_round.append(session.queries_used - before)
    if cube.is_point():
        sol = cube.low
    else:
        before = session.queries_used
        sol, _ = _finish(session, cube)
        per_round.append(session.queries_used - before)
    return RunReport(
        sol,
        session.rounds_used,
        session.queries_used,
        "normal",
        {"block_sides": sides, "per_round_charged": per_round},
    )


def one_d_ls(session: OracleSession, k: int) -> RunReport:
    """Interval version on a line: ``ceil(n^(1/k))`` blocks per round, both ends of each queried."""
    if session.d != 1:
        raise ValueError("one_d_ls needs a one-dimensional instance")
    if k < 1:
        raise ValueError("k must be >= 1")
    n = session.n
    parts = max(1, math.ceil(n ** (1 / k) - 1e-9))
    lo, length = session.origin, n
    for _ in range(1, k):
        if length == 1:
            break
        runs = even_splits(lo, length, parts)
        part = BlockPartition((tuple(runs),))
        cube, _, _ = _shrink(session, Cube((lo,), (length,)), part)
        lo, length = cube.low[0], cube.extent[0]
    if length == 1:
        sol = (lo,)
    else:
        sol, _ = _finish(session, Cube((lo,), (length,)))
    return RunReport(sol, session.rounds_used, session.queries_used, "normal", {"blocks_per_round": parts})
