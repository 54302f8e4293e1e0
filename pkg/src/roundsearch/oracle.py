"""Round-batched query oracle with exact accounting.

An algorithm hands the session one batch of points per round and gets every
answer back at once. The session keeps a ledger of rounds and charged queries
and enforces optional round and query limits.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

import numpy as np

from .grid import GridDomainError, as_points, check_points, linear_keys, neighbor_array


class RoundLimitExceeded(RuntimeError):
    pass


class QueryBudgetExceeded(RuntimeError):
    pass


class Instance(Protocol):
    """Anything the oracle can answer queries about.

    ``kind`` is ``"value"`` (integer values), ``"direction"`` (direction codes:
    0, +i or -i for the unit vector on axis i) or ``"gp"`` (pred/succ pairs).
    """

    d: int
    n: int
    origin: int
    kind: str

    def evaluate(self, points: np.ndarray) -> Any: ...


@dataclass
class RoundRecord:
    batch: np.ndarray
    answers: Any
    charged: int


@dataclass
class RoundLedger:
    rounds: list[RoundRecord] = field(default_factory=list)
    total_queries: int = 0

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    def per_round_charged(self) -> list[int]:
        return [r.charged for r in self.rounds]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "batch_size", "charged", "cumulative_queries"])
        total = 0
        for i, r in enumerate(self.rounds, start=1):
            total += r.charged
            w.writerow([i, len(r.batch), r.charged, total])
        return buf.getvalue()


class OracleSession:
    """Single-owner session over an immutable instance.

    With ``free_recall`` (the default) a point answered in an earlier round is
    not charged again; duplicates inside one batch are always charged once.
    """

    def __init__(
        self,
        instance: Instance,
        round_limit: int | None = None,
        query_budget: int | None = None,
        free_recall: bool = True,
        keep_batches: bool = True,
    ) -> None:
        self.instance = instance
        self.round_limit = round_limit
        self.query_budget = query_budget
        self.free_recall = free_recall
        self.keep_batches = keep_batches
        self.ledger = RoundLedger()
        self._seen = np.zeros(0, dtype=np.int64)

    @property
    def d(self) -> int:
        return self.instance.d

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def origin(self) -> int:
        return self.instance.origin

    @property
    def rounds_used(self) -> int:
        return self.ledger.round_count

    @property
    def queries_used(self) -> int:
        return self.ledger.total_queries

    def submit_round(self, points: Sequence[Sequence[int]] | np.ndarray) -> Any:
        """Answer one batch; consumes exactly one round whatever the batch size."""
        if self.round_limit is not None and self.ledger.round_count >= self.round_limit:
            raise RoundLimitExceeded(f"round limit {self.round_limit} reached")
        batch = check_points(as_points(points, self.d), self.n, self.origin)
        keys = np.unique(linear_keys(batch, self.n, self.origin))
        if self.free_recall:
            fresh = keys[~np.isin(keys, self._seen, assume_unique=True)]
        else:
            fresh = keys
        charged = int(fresh.size)
        if self.query_budget is not None and self.ledger.total_queries + charged > self.query_budget:
            raise QueryBudgetExceeded(
                f"batch of {charged} new queries exceeds budget {self.query_budget} "
                f"(used {self.ledger.total_queries})"
            )
        answers = self.instance.evaluate(batch)
        if self.free_recall and charged:
            self._seen = np.union1d(self._seen, fresh)
        self.ledger.total_queries += charged
        stored = batch if self.keep_batches else batch[:0]
        self.ledger.rounds.append(RoundRecord(stored, answers if self.keep_batches else None, charged))
        return answers


def open_session(
    instance: Instance,
    round_limit: int | None = None,
    query_budget: int | None = None,
    free_recall: bool = True,
) -> OracleSession:
    return OracleSession(instance, round_limit, query_budget, free_recall)


def submit_round(session: OracleSession, points: Sequence[Sequence[int]] | np.ndarray) -> Any:
    return session.submit_round(points)


def is_local_min(instance: Instance, p: Sequence[int]) -> bool:
    """Check ``p`` against all its neighbours by direct evaluation."""
    p = tuple(int(c) for c in p)
    try:
        nb = neighbor_array(p, instance.n, instance.origin)
    except GridDomainError:
        return False
    here = instance.evaluate(as_points([p], instance.d))[0]
    if nb.shape[0] == 0:
        return True
    return bool(np.all(instance.evaluate(nb) >= here))


def verify_local_min(session: OracleSession, p: Sequence[int]) -> bool:
    """Audit ``p`` without touching the session ledger."""
    return is_local_min(session.instance, p)
