"""Reference algorithms: sampled steepest descent and wall-splitting divide and conquer."""

from __future__ import annotations

import numpy as np

from .grid import Cube, lex_argmin, neighbor_array
from .instances import rng_for
from .oracle import OracleSession
from .report import RunReport


def baseline_warm_start(session: OracleSession, t: int, seed: int = 0) -> RunReport:
    """Query ``t`` uniform points, then take one steepest-descent step per round until stuck."""
    if t < 1:
        raise ValueError("warm start needs at least one sample")
    d, n, lo = session.d, session.n, session.origin
    rng = rng_for(seed)
    pts = rng.integers(lo, lo + n, size=(t, d))
    vals = np.asarray(session.submit_round(pts))
    j = lex_argmin(vals, pts)
    cur, fcur = tuple(int(c) for c in pts[j]), int(vals[j])
    steps = 0
    while True:
        nb = neighbor_array(cur, n, lo)
        if nb.shape[0] == 0:
            break
        vals = np.asarray(session.submit_round(nb))
        j = lex_argmin(vals, nb)
        if vals[j] >= fcur:
            break
        cur, fcur = tuple(int(c) for c in nb[j]), int(vals[j])
        steps += 1
    return RunReport(cur, session.rounds_used, session.queries_used, "steepest_descent_fixpoint", {"steps": steps})


def _halves(box: Cube, axis: int, at: int) -> list[Cube]:
    """The two parts of ``box`` left after removing the slab ``x[axis] == at`` (empty parts dropped)."""
    out = []
    lo, e = box.low[axis], box.extent[axis]
    for a, b in ((lo, at - 1), (at + 1, lo + e - 1)):
        if a <= b:
            low = list(box.low)
            ext = list(box.extent)
            low[axis], ext[axis] = a, b - a + 1
            out.append(Cube(tuple(low), tuple(ext)))
    return out


def _wall(box: Cube) -> tuple[int, int, np.ndarray]:
    axis = max(range(box.d), key=lambda a: (box.extent[a], -a))
    at = box.low[axis] + (box.extent[axis] - 1) // 2
    low = list(box.low)
    ext = list(box.extent)
    low[axis], ext[axis] = at, 1
    return axis, at, Cube(tuple(low), tuple(ext)).points()


def _decide(box, z, fz, axis, at, wall, vals):
    """Shrink ``box`` toward ``z`` if it beats the wall, else promote the best wall point."""
    j = lex_argmin(vals, wall)
    if z is not None and fz <= vals[j]:
        if z[axis] == at:
            return box, z, fz, (axis, at)
        return next(h for h in _halves(box, axis, at) if z in h), z, fz, None
    return box, tuple(int(c) for c in wall[j]), int(vals[j]), (axis, at)


def baseline_log_rounds_dnc(session: OracleSession) -> RunReport:
    """Divide and conquer with median walls across the longest axis.

    Invariant: the incumbent ``z`` lies in the box ``B`` and every point outside
    ``B`` next to it is known with value at least ``f(z)``. A round queries the
    wall splitting ``B``. If the incumbent beats the wall, ``B`` shrinks to the
    side holding it. Otherwise the best wall point becomes the incumbent; the
    next round queries its neighbours together with the walls of both sides, so
    the side holding the improving neighbour can be split again without an
    extra round.
    """
    d, n, lo = session.d, session.n, session.origin
    if d < 2:
        raise ValueError("wall splitting needs d >= 2")
    box = Cube.full(n, d, lo)
    z: tuple[int, ...] | None = None
    fz = 0
    on_wall: tuple[int, int] | None = None
    while True:
        if z is not None and box.is_point():
            return RunReport(z, session.rounds_used, session.queries_used, "normal")
        if on_wall is None:
            axis, at, wall = _wall(box)
            vals = np.asarray(session.submit_round(wall))
            box, z, fz, on_wall = _decide(box, z, fz, axis, at, wall, vals)
            continue
        axis, at = on_wall
        sides = _halves(box, axis, at)
        side_walls = {h: _wall(h) for h in sides if not h.is_point()}
        nb = neighbor_array(z, n, lo)
        batch = np.concatenate([nb] + [w[2] for w in side_walls.values()])
        vals = np.asarray(session.submit_round(batch))
        nv = vals[: nb.shape[0]]
        if nb.shape[0] == 0 or nv.min() >= fz:
            return RunReport(z, session.rounds_used, session.queries_used, "normal")
        j = lex_argmin(nv, nb)
        z, fz = tuple(int(c) for c in nb[j]), int(nv[j])
        box = next(h for h in sides if z in h)
        on_wall = None
        if box in side_walls:
            axis, at, wall = side_walls[box]
            box, z, fz, on_wall = _decide(box, z, fz, axis, at, wall, _lookup(batch, vals, wall))


def _lookup(batch: np.ndarray, vals: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Values of ``pts`` taken from an answered batch."""
    index = {tuple(p): v for p, v in zip(batch.tolist(), vals.tolist())}
    return np.asarray([index[tuple(p)] for p in pts.tolist()], dtype=np.int64)
