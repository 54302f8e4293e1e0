from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from roundsearch.instances import ell_schedule
from roundsearch.lowerbound import (
    Budgeted,
    FullGridFirstRound,
    ScaleGuardExceeded,
    UniformBoundaryDnC,
    ZeroQuery,
    all_offsets,
    classify_good,
    cost_lemma_sweep,
    enumerate_goodness,
    enumerate_goodness_direct,
    estimate_gamma,
    probability_score,
    probability_score_direct,
    run_transcript,
    simulate_walk,
    staircase_count,
    toy_staircase,
    verify_cost_lemma,
)

SCHEDULE = (4, 2, 2)


def _algs(schedule, d):
    m = sum(schedule)
    return [ZeroQuery(d), FullGridFirstRound(m, d), UniformBoundaryDnC(m, d, tuple(schedule))]


def test_staircase_count_formula():
    assert staircase_count((4, 2), 2, 2) == 64
    assert staircase_count((64, 16), 2, 2) == 2**20


def test_probability_score_examples():
    assert probability_score((2, 2), [], 3) == 1
    # One queried point next to x on axis 1 blocks the targets that leave along axis 1.
    assert probability_score((1, 1), [(2, 1)], 2) == Fraction(2, 4)


def test_probability_score_matches_direct_and_is_monotone():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        ell = int(rng.integers(1, 5))
        x = tuple(int(c) for c in rng.integers(1, 4, size=d))
        q = [tuple(int(c) for c in rng.integers(1, 8, size=d)) for _ in range(int(rng.integers(0, 6)))]
        score = probability_score(x, q, ell)
        assert score == probability_score_direct(x, q, ell)
        if q:
            assert probability_score(x, q[:-1], ell) >= score


def test_cost_lemma_examples():
    checks = cost_lemma_sweep(3, 7, 1)
    assert all(c.passed for c in checks)
    assert max(c.total for c in checks) <= 3
    interior = verify_cost_lemma((3, 3), 2, 5, 2)
    assert interior.passed and interior.total == 1
    with pytest.raises(ScaleGuardExceeded):
        verify_cost_lemma((1, 1, 1), 2, 300, 3)


def test_zero_query_all_good_and_full_grid_only_length_one():
    zero = enumerate_goodness(ZeroQuery(2), SCHEDULE, 2)
    assert zero.fractions == (1.0,) * 4
    full = enumerate_goodness(FullGridFirstRound(8, 2), SCHEDULE, 2)
    assert full.fractions[1] == 1.0 and full.fractions[2] < 1
    # Only the staircases whose second step is empty survive.
    assert full.good[2] == 16


def test_enumeration_matches_direct_classification():
    for schedule in ((4, 2), (3, 2, 2)):
        for alg in _algs(schedule, 2):
            rep = enumerate_goodness(alg, schedule, 2)
            for length in range(1, len(schedule) + 1):
                assert rep.good[length] == enumerate_goodness_direct(alg, schedule, 2, length)


def test_prefix_property():
    for alg in _algs(SCHEDULE, 2):
        for offs in all_offsets(SCHEDULE, 2, 3):
            if classify_good(alg, toy_staircase(SCHEDULE, 2, offs)):
                for cut in (1, 2):
                    assert classify_good(alg, toy_staircase(SCHEDULE, 2, offs[:cut]))


def test_transcript_replay_for_shared_prefix():
    alg = UniformBoundaryDnC(8, 2, SCHEDULE)
    rng = np.random.default_rng(0)
    offsets = list(all_offsets(SCHEDULE, 2, 3))
    for _ in range(200):
        a = offsets[rng.integers(len(offsets))]
        b = (a[0], a[1], tuple(int(c) for c in rng.integers(0, 2, size=2)))
        sa, sb = toy_staircase(SCHEDULE, 2, a), toy_staircase(SCHEDULE, 2, b)
        if not (classify_good(alg, sa) and classify_good(alg, sb)):
            continue
        ta, tb = run_transcript(alg, sa, 2), run_transcript(alg, sb, 2)
        for (qa, _), (qb, _) in zip(ta, tb):
            assert np.array_equal(qa, qb)


def test_recursion_slack_non_negative():
    for alg in _algs(SCHEDULE, 2):
        assert all(s >= 0 for s in enumerate_goodness(alg, SCHEDULE, 2).recursion_slack())


def test_budgeted_uniform_boundary_keeps_most_staircases_good():
    d, k = 2, 2
    schedule = tuple(ell_schedule(27, d, k))
    m = sum(schedule)
    budget = math.floor(m ** ((d ** (k + 1) - d**k) / (d**k - 1)) / (10 * d * k))
    rep = enumerate_goodness(Budgeted(UniformBoundaryDnC(m, d, schedule), budget), schedule, d)
    assert rep.fractions[k] >= 0.9


def test_enumeration_scale_guard():
    with pytest.raises(ScaleGuardExceeded):
        enumerate_goodness(ZeroQuery(2), (64, 16), 2, limit=10**5)


def test_walk_start_and_first_weight_zero():
    w = simulate_walk((1, 1, 1), 0, 4, 3, 12, 1, 2000, seed=1)
    assert np.all(w.positions[0] == 1)
    # A one-step horizon has only the t = 1 term, whose weight (t - 1) is zero.
    for y in set(map(tuple, w.positions[1].tolist())):
        assert not w.weighted_hits(y).any()
    longer = simulate_walk((1, 1, 1), 0, 4, 3, 12, 4, 2000, seed=1)
    y = tuple(int(c) for c in longer.positions[2, 0])
    assert longer.weighted_hits(y)[0] >= 1


def test_walk_translation_and_period_invariance():
    n, ell, m, t = 9, 3, 3, 2
    a = simulate_walk((1, 1, 1), 1, ell, m, n, t, 20000, seed=2)
    b = simulate_walk((4, 2, 7), 1, ell, m, n, t, 20000, seed=3)
    for off in itertools.product(range(1, 4), repeat=3):
        y_a = tuple((1 - 1 + 2 * o) % n + 1 for o in off)
        y_b = tuple((x - 1 + 2 * o) % n + 1 for x, o in zip((4, 2, 7), off))
        (pa, sa), (pb, sb) = a.q_hat(y_a, t), b.q_hat(y_b, t)
        assert abs(pa - pb) <= 3 * math.hypot(sa, sb) + 1e-12
    c = simulate_walk((1, 1, 1), 1 + m, ell, m, n, t, 20000, seed=4)
    for y in itertools.product(range(1, n + 1, 2), repeat=3):
        (pa, sa), (pc, sc) = a.q_hat(y, t), c.q_hat(y, t)
        assert abs(pa - pc) <= 3 * math.hypot(sa, sc) + 1e-12


def test_estimate_gamma_reports_candidate_maximum():
    est = estimate_gamma(0, 3, 3, 6, 2000, 9, 3, seed=0)
    assert est.value >= 0 and est.stderr >= 0
    assert est.value == max(v for v, _ in est.per_candidate.values())
