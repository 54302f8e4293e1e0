"""Brute-force checks of the staircase counting machinery at toy scale.

A deterministic round strategy is replayed against constant-round staircases,
with the location of ``x_j`` handed to it after round ``j``. A staircase is good
for the strategy when, for every ``0 < j < length``, no point of the segment
``FS(x_j, x_{j+1})`` is queried in rounds ``1..j``. Scores and costs are kept as
exact fractions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Protocol, Sequence

import numpy as np

from .grid import (
    BlockPartition,
    Cube,
    Point,
    as_points,
    balanced_partition,
    folded_segment,
    fs_contains_many,
    keys_to_points,
    lex_argmin,
    linear_keys,
)
from .instances import StaircaseInstance, const_staircase_from_offsets, rng_for


class ScaleGuardExceeded(RuntimeError):
    pass


History = Sequence[tuple[np.ndarray, np.ndarray]]


class AlgorithmUnderTest(Protocol):
    """Deterministic strategy: the same history and revealed points give the same batch."""

    name: str

    def next_batch(self, history: History, revealed: Sequence[Point]) -> np.ndarray: ...


@dataclass(frozen=True)
class ZeroQuery:
    d: int
    name: str = "zero"

    def next_batch(self, history: History, revealed: Sequence[Point]) -> np.ndarray:
        return np.zeros((0, self.d), dtype=np.int64)


@dataclass(frozen=True)
class FullGridFirstRound:
    m: int
    d: int
    name: str = "full_grid"

    def next_batch(self, history: History, revealed: Sequence[Point]) -> np.ndarray:
        if history:
            return np.zeros((0, self.d), dtype=np.int64)
        return Cube.full(self.m, self.d).points()


@dataclass(frozen=True)
class UniformBoundaryDnC:
    """Block-boundary search with block sides taken from ``schedule``.

    Round ``r`` reads every block boundary of the current box (blocks of side
    about ``schedule[r]``); round ``len(schedule)`` reads the whole box.
    """

    m: int
    d: int
    schedule: tuple[int, ...]
    name: str = "uniform_boundary"

    def _partition(self, cube: Cube, r: int) -> BlockPartition:
        return balanced_partition(cube, self.schedule[r])

    def next_batch(self, history: History, revealed: Sequence[Point]) -> np.ndarray:
        k = len(self.schedule)
        cube = Cube.full(self.m, self.d)
        for r, (batch, answers) in enumerate(history, start=1):
            if r >= k or batch.shape[0] == 0:
                return np.zeros((0, self.d), dtype=np.int64)
            part = self._partition(cube, r)
            cube = part.block_of(batch[lex_argmin(np.asarray(answers), batch)])
        r = len(history) + 1
        if r > k:
            return np.zeros((0, self.d), dtype=np.int64)
        if r == k:
            return cube.points()
        return self._partition(cube, r).boundary_union()


@dataclass(frozen=True)
class Budgeted:
    """Caps another strategy at ``budget`` distinct queries in total (earliest points kept)."""

    inner: AlgorithmUnderTest
    budget: int

    @property
    def name(self) -> str:
        return f"{self.inner.name}@{self.budget}"

    def next_batch(self, history: History, revealed: Sequence[Point]) -> np.ndarray:
        used = set()
        for b, _ in history:
            used.update(map(tuple, b.tolist()))
        batch = self.inner.next_batch(history, revealed)
        out = []
        for p in batch.tolist():
            if len(used) >= self.budget:
                break
            if tuple(p) not in used:
                used.add(tuple(p))
                out.append(p)
        d = batch.shape[1] if batch.ndim == 2 else 1
        return as_points(out, d)


# --- simulation -------------------------------------------------------------------


def toy_staircase(schedule: Sequence[int], d: int, offsets: Sequence[Sequence[int]]) -> StaircaseInstance:
    """Staircase on the side-``sum(schedule)`` grid with its end value fixed negative."""
    return const_staircase_from_offsets(
        sum(schedule), d, len(schedule), offsets, end_sign="-", seed=0, schedule=schedule
    )


def run_transcript(alg: AlgorithmUnderTest, inst: StaircaseInstance, rounds: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Replay ``rounds`` rounds; ``x_r`` is revealed after round ``r``."""
    history: list[tuple[np.ndarray, np.ndarray]] = []
    for r in range(1, rounds + 1):
        revealed = list(inst.connecting[1:r])
        batch = as_points(alg.next_batch(history, revealed), inst.d)
        history.append((batch, inst.evaluate(batch)))
    return history


def _segment_keys(inst: StaircaseInstance, j: int) -> np.ndarray:
    seg = folded_segment(inst.connecting[j], inst.connecting[j + 1]).as_array()
    return linear_keys(seg, inst.n) if seg.size else np.zeros(0, dtype=np.int64)


def classify_good(alg: AlgorithmUnderTest, inst: StaircaseInstance) -> bool:
    """Direct check of the goodness condition by replaying the strategy on this staircase."""
    length = len(inst.connecting) - 1
    if length <= 1:
        return True
    history = run_transcript(alg, inst, length - 1)
    seen = np.zeros(0, dtype=np.int64)
    for j in range(1, length):
        batch = history[j - 1][0]
        if batch.size:
            seen = np.union1d(seen, linear_keys(batch, inst.n))
        if np.isin(_segment_keys(inst, j), seen).any():
            return False
    return True


def all_offsets(schedule: Sequence[int], d: int, length: int) -> Iterable[tuple[tuple[int, ...], ...]]:
    per_step = [list(itertools.product(range(ell), repeat=d)) for ell in schedule[:length]]
    return itertools.product(*per_step)


def staircase_count(schedule: Sequence[int], d: int, length: int) -> int:
    return math.prod(ell**d for ell in schedule[:length])


# --- window blocking ---------------------------------------------------------------


def blocked_windows(x: Sequence[int], queried: np.ndarray, ell: int) -> np.ndarray:
    """Boolean array over offsets ``[0, ell)^d``: True where ``FS(x, x + offset)`` meets ``queried``.

    A queried point ``y`` blocks exactly the targets that agree with ``y`` on the
    axes before the last axis where ``y`` differs from ``x``, reach at least
    ``y`` on that axis, and are free afterwards.
    """
    d = len(x)
    blocked = np.zeros((ell,) * d, dtype=bool)
    if queried.shape[0] == 0:
        return blocked
    xa = np.asarray(x, dtype=np.int64)
    off = np.asarray(queried, dtype=np.int64) - xa
    keep = np.all((off >= 0) & (off < ell), axis=1) & np.any(off != 0, axis=1)
    for o in off[keep].tolist():
        t = max(a for a in range(d) if o[a] != 0)
        idx = tuple(o[:t]) + (slice(o[t], None),)
        blocked[idx] = True
    return blocked


def probability_score(x: Sequence[int], queried: np.ndarray | Iterable[Sequence[int]], ell: int) -> Fraction:
    """Share of window targets ``z`` whose segment ``FS(x, z)`` avoids every queried point."""
    q = as_points(queried, len(x)) if not isinstance(queried, np.ndarray) else queried
    blocked = blocked_windows(x, q, ell)
    return Fraction(int(blocked.size - blocked.sum()), ell ** len(x))


def probability_score_direct(x: Sequence[int], queried: Iterable[Sequence[int]], ell: int) -> Fraction:
    """Same score by materializing every segment; slow reference."""
    qs = {tuple(int(c) for c in p) for p in queried}
    free = 0
    for off in itertools.product(range(ell), repeat=len(x)):
        z = tuple(a + o for a, o in zip(x, off))
        if not qs.intersection(folded_segment(x, z).points):
            free += 1
    return Fraction(free, ell ** len(x))


# --- counting good staircases ---------------------------------------------------------


@dataclass(frozen=True)
class GoodnessReport:
    schedule: tuple[int, ...]
    d: int
    totals: tuple[int, ...]
    good: tuple[int, ...]
    max_queries: tuple[int, ...]
    score_sums: tuple[Fraction, ...] = field(default=())

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(g / t for g, t in zip(self.good, self.totals))

    def to_csv(self) -> str:
        rows = ["length,total,good,fraction"]
        for i, (t, g) in enumerate(zip(self.totals, self.good)):
            rows.append(f"{i},{t},{g},{g / t:.6f}")
        return "\n".join(rows) + "\n"

    def recursion_slack(self) -> list[float]:
        """``R(i+2) - (R(i+1) - R(i) * Q d ell_{i+1} / ell_i^d)`` for each ``i``; never negative."""
        R = self.fractions
        out = []
        for i in range(len(self.schedule) - 1):
            if i + 2 >= len(R):
                break
            q = self.max_queries[i + 1]
            bound = R[i + 1] - R[i] * q * self.d * self.schedule[i + 1] / self.schedule[i] ** self.d
            out.append(R[i + 2] - bound)
        return out


def enumerate_goodness(
    alg: AlgorithmUnderTest,
    schedule: Sequence[int],
    d: int,
    limit: int = 10**7,
) -> GoodnessReport:
    """Count good staircases of every length by walking prefixes depth first.

    For a good prefix, the strategy's queries through its last round do not
    depend on how the staircase continues, so each prefix is simulated once.
    ``max_queries[i]`` is the largest number of distinct points queried in
    rounds ``1..i`` over good prefixes of length ``i``.
    """
    schedule = tuple(int(v) for v in schedule)
    k = len(schedule)
    if staircase_count(schedule, d, k) > limit:
        raise ScaleGuardExceeded(f"{staircase_count(schedule, d, k)} staircases exceed the limit {limit}")
    good = [0] * (k + 1)
    maxq = [0] * (k + 1)
    score_sums = [Fraction(0)] * (k + 1)
    good[0] = 1
    m = sum(schedule)

    def visit(offsets: list, history: list, seen: np.ndarray) -> None:
        j = len(offsets)
        good[j] += 1 if j > 0 else 0
        if j == k:
            return
        inst = toy_staircase(schedule, d, offsets)
        x = inst.connecting[-1]
        if j == 0:
            hist, q = history, seen
        else:
            batch = as_points(alg.next_batch(history, list(inst.connecting[1:j])), d)
            hist = history + [(batch, inst.evaluate(batch))]
            q = np.union1d(seen, linear_keys(batch, m)) if batch.size else seen
            maxq[j] = max(maxq[j], int(q.size))
        blocked = blocked_windows(x, keys_to_points(q, m, d), schedule[j])
        score_sums[j] += Fraction(int(blocked.size - blocked.sum()), schedule[j] ** d)
        for off in itertools.product(range(schedule[j]), repeat=d):
            if not blocked[off]:
                visit(offsets + [off], hist, q)

    visit([], [], np.zeros(0, dtype=np.int64))
    totals = tuple(staircase_count(schedule, d, i) for i in range(k + 1))
    return GoodnessReport(schedule, d, totals, tuple(good), tuple(maxq), tuple(score_sums))


def enumerate_goodness_direct(alg: AlgorithmUnderTest, schedule: Sequence[int], d: int, length: int) -> int:
    """Number of good staircases of ``length`` by classifying each one independently."""
    return sum(
        classify_good(alg, toy_staircase(schedule, d, offs)) for offs in all_offsets(schedule, d, length)
    )


# --- cost of a single query ---------------------------------------------------------


@dataclass(frozen=True)
class CostCheck:
    y: Point
    total: Fraction
    bound: int

    @property
    def passed(self) -> bool:
        return self.total <= self.bound


def verify_cost_lemma(y: Sequence[int], ell: int, m: int, d: int, limit: int = 10**7) -> CostCheck:
    """Total score lost across all window origins when ``y`` is queried, against ``d * ell``."""
    if m**d > limit:
        raise ScaleGuardExceeded(f"m^d = {m**d} exceeds {limit}")
    y = tuple(int(c) for c in y)
    offs = np.asarray(list(itertools.product(range(ell), repeat=d)), dtype=np.int64)
    total = 0
    lows = [range(max(1, c - ell + 1), c + 1) for c in y]
    for x in itertools.product(*lows):
        targets = np.asarray(x, dtype=np.int64) + offs
        total += int(fs_contains_many(x, targets, y).sum())
    return CostCheck(y, Fraction(total, ell**d), d * ell)


def cost_lemma_sweep(ell: int, m: int, d: int) -> list[CostCheck]:
    return [verify_cost_lemma(y, ell, m, d) for y in itertools.product(range(1, m + 1), repeat=d)]


# --- walk statistics -------------------------------------------------------------------


def _fs_hits(a: np.ndarray, b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise: does ``y`` lie on ``FS(a[r], b[r])``?"""
    d = a.shape[1]
    hit = np.zeros(a.shape[0], dtype=bool)
    not_start = np.any(a != y, axis=1)
    for i in range(d):
        ok = np.ones(a.shape[0], dtype=bool)
        for j in range(i):
            ok &= b[:, j] == y[j]
        for j in range(i + 1, d):
            ok &= a[:, j] == y[j]
        lo = np.minimum(a[:, i], b[:, i])
        hi = np.maximum(a[:, i], b[:, i])
        ok &= (lo <= y[i]) & (y[i] <= hi)
        hit |= ok
    return hit & not_start


@dataclass(frozen=True)
class WalkSample:
    """Simulated walk positions ``x_{i+t}`` for ``t = 0..horizon`` across many samples."""

    n: int
    d: int
    i: int
    positions: np.ndarray

    @property
    def samples(self) -> int:
        return self.positions.shape[1]

    def q_hat(self, y: Sequence[int], t: int) -> tuple[float, float]:
        hits = np.all(self.positions[t] == np.asarray(y), axis=1)
        return _mean_se(hits)

    def p_hat(self, y: Sequence[int], t: int) -> tuple[float, float]:
        hits = _fs_hits(self.positions[t - 1], self.positions[t], np.asarray(y))
        return _mean_se(hits)

    def weighted_hits(self, y: Sequence[int]) -> np.ndarray:
        """Per-sample ``sum_t (t - 1) * [y on the t-th segment]``."""
        ya = np.asarray(y)
        acc = np.zeros(self.samples, dtype=np.float64)
        for t in range(2, self.positions.shape[0]):
            acc += (t - 1) * _fs_hits(self.positions[t - 1], self.positions[t], ya)
        return acc


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = x.astype(np.float64)
    n = x.size
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def simulate_walk(
    x: Sequence[int], i: int, ell: int, m: int, n: int, horizon: int, samples: int, seed: int
) -> WalkSample:
    """Walk from ``x_i = x`` for ``horizon`` steps: window steps, uniform restart when the step index is a multiple of ``m``."""
    d = len(x)
    rng = rng_for(seed)
    pos = np.empty((horizon + 1, samples, d), dtype=np.int64)
    pos[0] = np.asarray(x, dtype=np.int64)
    for t in range(1, horizon + 1):
        j = i + t
        if j % m != 0:
            step = rng.integers(1, ell + 1, size=(samples, d))
            pos[t] = (pos[t - 1] - 1 + step) % n + 1
        else:
            pos[t] = rng.integers(1, n + 1, size=(samples, d))
    return WalkSample(n, d, i, pos)


@dataclass(frozen=True)
class GammaEstimate:
    value: float
    stderr: float
    argmax: Point
    per_candidate: dict = field(default_factory=dict, compare=False)


def estimate_gamma(
    i: int,
    ell: int,
    m: int,
    K: int,
    samples: int,
    n: int,
    d: int,
    candidates: Sequence[Sequence[int]] | None = None,
    x: Sequence[int] | None = None,
    seed: int = 0,
) -> GammaEstimate:
    """Monte Carlo estimate of ``max_y sum_t (t - 1) p(x, y, i, t)`` over a candidate set of ``y``.

    The maximum is taken over the given candidates only, so the result is an
    estimate with a standard error, not a certified maximum.
    """
    x = tuple(x) if x is not None else (1,) * d
    walk = simulate_walk(x, i, ell, m, n, max(0, K - i), samples, seed)
    if candidates is None:
        offs = itertools.product(range(0, min(n, ell + 2)), repeat=d)
        candidates = [tuple((a - 1 + o) % n + 1 for a, o in zip(x, off)) for off in offs]
    per = {}
    best = None
    for y in candidates:
        y = tuple(int(c) for c in y)
        mean, se = _mean_se(walk.weighted_hits(y))
        per[y] = (mean, se)
        if best is None or mean > per[best][0]:
            best = y
    return GammaEstimate(per[best][0], per[best][1], best, per)
