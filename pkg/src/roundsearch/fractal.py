"""Local search in a polynomial number of rounds: random warm start plus fractal descent.

Round 1 samples uniformly and keeps the best sample. From there a recursive
descent runs: a depth-``D`` call makes ``k~`` giant steps (each reads the
boundary of a cube around the current point and jumps to its minimum) while a
depth-``D-1`` call started at the same point checks, a few rounds later, that the
giant step really made progress. When a check fails the cube must contain a
local minimum, and a halving search pins it down. Depth-1 calls are plain
steepest descent, one step per round.

The concurrent calls are generator coroutines driven by :class:`RoundScheduler`.
A coroutine yields :class:`Query` to spend a round and :class:`Wait` to block
on a child. All queries issued in the same round travel to the oracle as one
batch.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Sequence

import numpy as np

from .grid import (
    BlockPartition,
    Cube,
    box_boundary_points,
    cube_around,
    even_splits,
    lex_argmin,
    linear_keys,
    neighbor_array,
)
from .instances import rng_for
from .oracle import OracleSession, RoundLimitExceeded
from .report import RunReport


@dataclass(frozen=True)
class Query:
    points: np.ndarray


@dataclass(frozen=True)
class Wait:
    child: int


@dataclass(frozen=True)
class FractalParams:
    n: int
    d: int
    alpha: float
    k: int
    h: int
    beta: float
    k_tilde: int
    s: int

    def sample_count(self, sample_const: float) -> int:
        return int(math.floor(sample_const * self.h * math.ceil(self.n**self.beta - 1e-9)))

    def auto_sample_const(self, cap: float = 100.0) -> int:
        """Largest integer constant keeping round-1 samples within a quarter of the grid."""
        per = self.h * math.ceil(self.n**self.beta - 1e-9)
        return int(max(1, min(cap, (self.n**self.d // 4) // per)))


def fractal_params(n: int, d: int, alpha: float) -> FractalParams:
    if d < 3:
        raise ValueError("the fractal descent is defined for d >= 3")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    k = int(math.floor(n**alpha + 1e-9))
    h = int(math.floor(1 / alpha + (d - 2) / d + 1e-12)) + 1
    beta = (d - 1) - alpha * (d - 2) / d
    k_tilde = max(1, k // h)
    s = int(math.floor(n ** (1 + alpha * (d - 2) / d) / h + 1e-9))
    return FractalParams(n, d, alpha, k, h, beta, k_tilde, s)


def split_steps(s: int, parts: int) -> list[int]:
    """``s`` cut into ``parts`` near-equal integers, larger ones first."""
    return [length for _, length in even_splits(0, s, parts)] if s >= parts else [1] * s + [0] * (parts - s)


@dataclass
class Procedure:
    pid: int
    kind: str
    params: dict[str, Any]
    parent: int | None
    gen: Generator | None = None
    start_round: int = 0
    finish_round: int | None = None
    result: Any = None
    done: bool = False
    waiter: int | None = None
    requested: int = 0
    children: list[int] = field(default_factory=list)


class KnownValues:
    """Every point the algorithm has seen, with its value, sorted by key."""

    def __init__(self, n: int, d: int, origin: int = 1) -> None:
        self.n, self.d, self.origin = n, d, origin
        self.keys = np.zeros(0, dtype=np.int64)
        self.points = np.zeros((0, d), dtype=np.int64)
        self.values = np.zeros(0, dtype=np.int64)

    def add(self, pts: np.ndarray, vals: np.ndarray) -> None:
        if pts.shape[0] == 0:
            return
        keys = np.concatenate([self.keys, linear_keys(pts, self.n, self.origin)])
        allp = np.concatenate([self.points, pts])
        allv = np.concatenate([self.values, np.asarray(vals, dtype=np.int64)])
        uk, idx = np.unique(keys, return_index=True)
        self.keys, self.points, self.values = uk, allp[idx], allv[idx]

    def value(self, p: Sequence[int]) -> int:
        key = linear_keys(np.asarray([p], dtype=np.int64), self.n, self.origin)[0]
        i = np.searchsorted(self.keys, key)
        if i >= self.keys.size or self.keys[i] != key:
            raise KeyError(f"value of {tuple(p)} was never queried")
        return int(self.values[i])

    def argmin_in(self, cube: Cube | None = None) -> tuple[tuple[int, ...], int]:
        if cube is None:
            pts, vals = self.points, self.values
        else:
            mask = cube.contains_array(self.points)
            pts, vals = self.points[mask], self.values[mask]
        j = lex_argmin(vals, pts)
        return tuple(int(c) for c in pts[j]), int(vals[j])


class RoundScheduler:
    """Round-synchronized driver for cooperating coroutines.

    Within a round, runnable coroutines are resumed in creation order until each
    one has either yielded a query, blocked on a child, or finished. The queries
    are then sent as a single batch. A call to :meth:`halt` stops everything at
    once; queries gathered for the round under construction are dropped.
    """

    def __init__(self, session: OracleSession, known: KnownValues) -> None:
        self.session = session
        self.known = known
        self.procs: list[Procedure] = []
        self._ready: list[tuple[int, Any]] = []
        self.halted: tuple[tuple[int, ...], str] | None = None
        self.trace: list[dict[str, Any]] = []

    @property
    def current_round(self) -> int:
        return self.session.rounds_used + 1

    def spawn(self, kind: str, factory: Callable[..., Generator], parent: int | None, **params: Any) -> int:
        pid = len(self.procs)
        proc = Procedure(pid, kind, params, parent, start_round=self.current_round)
        self.procs.append(proc)
        proc.gen = factory(self, pid, **params)
        if parent is not None:
            self.procs[parent].children.append(pid)
        heapq.heappush(self._ready, (pid, None))
        return pid

    def halt(self, point: Sequence[int], reason: str) -> None:
        if self.halted is None:
            self.halted = (tuple(int(c) for c in point), reason)

    def _step(self, pid: int, value: Any, pending: list[tuple[int, np.ndarray]]) -> None:
        proc = self.procs[pid]
        try:
            item = proc.gen.send(value)
        except StopIteration as stop:
            proc.done = True
            proc.result = stop.value
            proc.finish_round = self.current_round
            if proc.waiter is not None:
                heapq.heappush(self._ready, (proc.waiter, stop.value))
            return
        if isinstance(item, Query):
            pts = np.asarray(item.points, dtype=np.int64).reshape(-1, self.session.d)
            proc.requested += int(np.unique(linear_keys(pts, self.session.n, self.session.origin)).size)
            pending.append((pid, pts))
        elif isinstance(item, Wait):
            child = self.procs[item.child]
            if child.done:
                heapq.heappush(self._ready, (pid, child.result))
            else:
                child.waiter = pid
        else:
            raise TypeError(f"coroutine yielded {item!r}")

    def run(self, root: int) -> str:
        """Drive all coroutines until a halt, the root finishing, or the round limit."""
        while True:
            pending: list[tuple[int, np.ndarray]] = []
            while self._ready and self.halted is None:
                pid, value = heapq.heappop(self._ready)
                self._step(pid, value, pending)
            if self.halted is not None:
                return "halted"
            if self.procs[root].done:
                return "returned"
            if not pending:
                raise AssertionError("scheduler deadlock: no runnable coroutine and no pending query")
            batch = np.concatenate([p for _, p in pending])
            try:
                answers = np.asarray(self.session.submit_round(batch))
            except RoundLimitExceeded:
                return "round_limit"
            self.known.add(batch, answers)
            offset = 0
            for pid, pts in pending:
                m = pts.shape[0]
                heapq.heappush(self._ready, (pid, (pts, answers[offset : offset + m])))
                offset += m

    def subtree_requested(self, pid: int) -> int:
        proc = self.procs[pid]
        return proc.requested + sum(self.subtree_requested(c) for c in proc.children)


def dacs(sched: RoundScheduler, cube: Cube) -> Generator:
    """Halving search inside ``cube``; each round reads the boundaries of all ``2^d`` halves.

    The next cube is the half holding the best point ever seen inside the
    current cube. Used via ``yield from`` by the calling descent.
    """
    cur = cube
    while not cur.is_point():
        part = BlockPartition(tuple(tuple(even_splits(lo, e, 2)) for lo, e in zip(cur.low, cur.extent)))
        yield Query(part.boundary_union())
        best, _ = sched.known.argmin_in(cur)
        cur = part.block_of(best)
    return cur.low


def flsd(sched: RoundScheduler, pid: int, s: int, depth: int, x: tuple[int, ...], k_tilde: int) -> Generator:
    """Fractal descent of size ``s`` and depth ``depth`` from ``x``."""
    n = sched.session.n
    if depth == 1:
        cur, fcur = x, sched.known.value(x)
        for _ in range(s):
            pts, vals = yield Query(neighbor_array(cur, n))
            j = lex_argmin(vals, pts)
            if vals[j] < fcur:
                cur, fcur = tuple(int(c) for c in pts[j]), int(vals[j])
            else:
                sched.halt(cur, "steepest_descent_fixpoint")
                return cur
        sched.trace.append({"pid": pid, "x": x, "s": s, "depth": depth, "out": cur})
        return cur

    steps = split_steps(s, k_tilde)
    xs = [x]
    fx = [sched.known.value(x)]
    kids = []
    for i in range(k_tilde):
        kids.append(
            sched.spawn("flsd", flsd, pid, s=steps[i], depth=depth - 1, x=xs[i], k_tilde=k_tilde)
        )
        pts, vals = yield Query(box_boundary_points(cube_around(xs[i], steps[i], n)))
        j = lex_argmin(vals, pts)
        xs.append(tuple(int(c) for c in pts[j]))
        fx.append(int(vals[j]))
    for i in range(k_tilde):
        child = sched.procs[kids[i]]
        y = yield Wait(kids[i])
        assert sched.current_round >= child.finish_round, "comparison ran before the child finished"
        if sched.known.value(y) < fx[i + 1]:
            found = yield from dacs(sched, cube_around(xs[i], steps[i], n))
            sched.halt(found, "dacs")
            return found
    sched.trace.append({"pid": pid, "x": x, "s": s, "depth": depth, "out": xs[-1]})
    return xs[-1]


def poly_rounds_ls(
    session: OracleSession,
    alpha: float,
    sample_const: float | str = 100,
    seed: int = 0,
    restart: bool = True,
) -> RunReport:
    """Warm start followed by fractal descent.

    If the top-level descent returns without having found a local minimum and
    rounds remain, a fresh descent starts from the returned point (``restart``).
    When the session's round limit cuts the run short, the best point seen so
    far is reported with ``halted_by="round_limit"``.
    """
    d, n = session.d, session.n
    fp = fractal_params(n, d, alpha)
    const = fp.auto_sample_const() if sample_const == "auto" else float(sample_const)
    count = max(1, fp.sample_count(const))
    rng = rng_for(seed)
    samples = rng.integers(1, n + 1, size=(count, d))
    vals = np.asarray(session.submit_round(samples))
    known = KnownValues(n, d, session.origin)
    known.add(samples, vals)
    j = lex_argmin(vals, samples)
    start = tuple(int(c) for c in samples[j])

    sched = RoundScheduler(session, known)
    extras: dict[str, Any] = {"params": fp, "sample_const": const, "samples": count, "x1": start}
    while True:
        root = sched.spawn("flsd", flsd, None, s=fp.s, depth=fp.h, x=start, k_tilde=fp.k_tilde)
        outcome = sched.run(root)
        if outcome == "returned" and restart and fp.s > 0:
            start = sched.procs[root].result
            continue
        break
    extras["scheduler"] = sched
    if outcome == "halted":
        sol, reason = sched.halted
    elif outcome == "returned":
        sol, reason = sched.procs[root].result, "normal"
    else:
        sol, reason = known.argmin_in()[0], "round_limit"
    return RunReport(tuple(sol), session.rounds_used, session.queries_used, reason, extras)


def flsd_query_records(sched: RoundScheduler) -> list[dict[str, Any]]:
    """Per-call requested-query totals (including descendants) for every descent call."""
    out = []
    for p in sched.procs:
        if p.kind == "flsd":
            out.append(
                {
                    "pid": p.pid,
                    "s": p.params["s"],
                    "depth": p.params["depth"],
                    "k_tilde": p.params["k_tilde"],
                    "total": sched.subtree_requested(p.pid),
                }
            )
    return out
