from __future__ import annotations

import numpy as np
import pytest

from roundsearch.grid import GridDomainError
from roundsearch.instances import gen_const_staircase, gen_1d_hard
from roundsearch.oracle import (
    QueryBudgetExceeded,
    RoundLimitExceeded,
    is_local_min,
    open_session,
    verify_local_min,
)


def _session(**kw):
    return open_session(gen_1d_hard(20, 7, "local_search"), **kw)


def test_round_counts_one_per_batch_and_duplicates_charged_once():
    s = _session()
    s.submit_round([[1], [2], [2], [3]])
    assert s.rounds_used == 1
    assert s.queries_used == 3


def test_free_recall_skips_known_points():
    s = _session()
    s.submit_round([[1], [2]])
    s.submit_round([[2], [3]])
    assert s.ledger.per_round_charged() == [2, 1]
    t = _session(free_recall=False)
    t.submit_round([[1], [2]])
    t.submit_round([[2], [3]])
    assert t.ledger.per_round_charged() == [2, 2]


def test_empty_batch_still_costs_a_round():
    s = _session()
    s.submit_round(np.zeros((0, 1), dtype=np.int64))
    assert s.rounds_used == 1 and s.queries_used == 0


def test_round_limit_is_enforced():
    s = _session(round_limit=1)
    s.submit_round([[1]])
    with pytest.raises(RoundLimitExceeded):
        s.submit_round([[2]])
    assert s.rounds_used == 1


def test_budget_rejection_is_atomic():
    s = _session(query_budget=3)
    s.submit_round([[1], [2]])
    with pytest.raises(QueryBudgetExceeded):
        s.submit_round([[3], [4]])
    assert s.rounds_used == 1 and s.queries_used == 2
    s.submit_round([[3], [1]])
    assert s.queries_used == 3


def test_out_of_range_query_rejected():
    s = _session()
    with pytest.raises(GridDomainError):
        s.submit_round([[0]])
    assert s.rounds_used == 0


def test_answers_follow_batch_order():
    inst = gen_1d_hard(10, 4, "local_search")
    s = open_session(inst)
    vals = s.submit_round([[5], [4], [1]])
    assert list(vals) == [5, 0, 10]


def test_verify_local_min_leaves_ledger_alone():
    inst = gen_const_staircase(27, 2, 2, seed=3)
    s = open_session(inst)
    assert verify_local_min(s, inst.expected_solution())
    assert s.rounds_used == 0 and s.queries_used == 0


def test_is_local_min_on_corner_and_interior():
    inst = gen_1d_hard(10, 4, "local_search")
    assert is_local_min(inst, (4,))
    assert not is_local_min(inst, (5,))
    assert not is_local_min(inst, (11,))


def test_ledger_csv_cumulative():
    s = _session()
    s.submit_round([[1], [2]])
    s.submit_round([[2], [3], [4]])
    assert s.ledger.to_csv().splitlines() == [
        "round,batch_size,charged,cumulative_queries",
        "1,2,2,2",
        "2,3,2,4",
    ]
