from __future__ import annotations

import math

import numpy as np
import pytest

from roundsearch.baselines import baseline_log_rounds_dnc, baseline_warm_start
from roundsearch.constant import const_rounds_ls, one_d_ls
from roundsearch.fractal import (
    KnownValues,
    RoundScheduler,
    dacs,
    flsd_query_records,
    fractal_params,
    poly_rounds_ls,
    split_steps,
)
from roundsearch.grid import Cube
from roundsearch.instances import gen_1d_hard, gen_const_staircase, gen_poly_staircase
from roundsearch.oracle import open_session, verify_local_min


def test_const_ls_two_rounds_and_correct():
    for seed in range(15):
        inst = gen_const_staircase(64, 2, 2, seed)
        s = open_session(inst)
        rep = const_rounds_ls(s, 2)
        assert rep.rounds_used == 2
        assert rep.solution == inst.expected_solution()
        assert verify_local_min(s, rep.solution)


def test_const_ls_k1_scans_full_grid():
    inst = gen_const_staircase(8, 2, 1, 0)
    s = open_session(inst)
    rep = const_rounds_ls(s, 1)
    assert rep.rounds_used == 1 and rep.queries_used == inst.n**2


def test_const_ls_three_rounds_three_dims():
    for seed in range(5):
        inst = gen_const_staircase(26, 3, 3, seed)
        s = open_session(inst)
        rep = const_rounds_ls(s, 3)
        assert rep.rounds_used == 3 and verify_local_min(s, rep.solution)


def test_const_ls_per_round_accounting():
    inst = gen_const_staircase(64, 2, 2, 1)
    s = open_session(inst)
    rep = const_rounds_ls(s, 2)
    (block,) = rep.extras["block_sides"]
    r1, r2 = s.ledger.per_round_charged()
    assert r1 <= 2 * 2 * inst.n ** (4 / 3)
    assert r2 <= math.prod(block)


def test_const_ls_refuses_too_few_rounds():
    s = open_session(gen_const_staircase(27, 2, 2, 0), round_limit=1)
    with pytest.raises(ValueError):
        const_rounds_ls(s, 2)


def test_one_d_ls_scaling_and_correctness():
    q = {}
    for n in (100, 10_000):
        total = 0
        for i in np.linspace(1, n, 25).astype(int):
            s = open_session(gen_1d_hard(n, int(i), "local_search"))
            rep = one_d_ls(s, 2)
            assert rep.solution == (int(i),) and rep.rounds_used == 2
            total += rep.queries_used
        q[n] = total / 25
    assert 7 < q[10_000] / q[100] < 13


def test_one_d_ls_k1_queries_everything():
    s = open_session(gen_1d_hard(40, 17, "local_search"))
    rep = one_d_ls(s, 1)
    assert rep.queries_used == 40 and rep.solution == (17,)


def test_warm_start_finds_local_min():
    for seed in range(10):
        inst = gen_const_staircase(20, 2, 2, seed)
        s = open_session(inst)
        rep = baseline_warm_start(s, 10, seed)
        assert verify_local_min(s, rep.solution)
    with pytest.raises(ValueError):
        baseline_warm_start(open_session(inst), 0)


def test_log_dnc_round_bound_and_correctness():
    for seed in range(20):
        for n in (20, 64):
            inst = gen_const_staircase(n, 2, 2, seed)
            s = open_session(inst)
            rep = baseline_log_rounds_dnc(s)
            assert verify_local_min(s, rep.solution)
            assert rep.rounds_used <= 2 * math.ceil(math.log2(inst.n))


def test_log_dnc_rejects_one_dimension():
    inst = gen_1d_hard(4, 1, "local_search")
    with pytest.raises(ValueError):
        baseline_log_rounds_dnc(open_session(inst))


def test_fractal_params_example():
    fp = fractal_params(64, 3, 0.5)
    assert fp.h == 3 and fp.k == 8 and fp.k_tilde == 2
    assert fp.beta == pytest.approx(2 - 1 / 6)


def test_split_steps():
    assert split_steps(10, 3) == [4, 3, 3]
    assert split_steps(2, 3) == [1, 1, 0]


def test_poly_ls_always_correct_without_round_limit():
    for seed in range(25):
        inst = gen_poly_staircase(27, 3, 0.5, seed)
        s = open_session(inst)
        rep = poly_rounds_ls(s, 0.5, "auto", seed=seed)
        assert verify_local_min(s, rep.solution)


def test_poly_ls_respects_round_limit():
    inst = gen_poly_staircase(64, 3, 0.5, 3)
    s = open_session(inst, round_limit=8)
    rep = poly_rounds_ls(s, 0.5, "auto", seed=3)
    assert rep.rounds_used <= 8


def test_flsd_rank_contract_on_returns():
    for seed in range(10):
        inst = gen_poly_staircase(27, 3, 0.5, seed)
        vals = np.sort(inst.evaluate(Cube.full(27, 3).points()))
        s = open_session(inst)
        rep = poly_rounds_ls(s, 0.5, "auto", seed=seed)
        sched = rep.extras["scheduler"]
        for rec in sched.trace:
            rank_x = np.searchsorted(vals, inst.value_at(rec["x"]), side="left")
            rank_out = np.searchsorted(vals, inst.value_at(rec["out"]), side="left")
            assert rank_out <= rank_x - rec["s"]


def test_flsd_query_records_cover_every_call():
    inst = gen_poly_staircase(64, 3, 0.5, 1)
    rep = poly_rounds_ls(open_session(inst), 0.5, "auto", seed=1)
    recs = flsd_query_records(rep.extras["scheduler"])
    assert recs and all(r["total"] >= 0 for r in recs)


def test_dacs_returns_local_min_from_a_point_cube_and_a_box():
    inst = gen_const_staircase(27, 3, 2, 2)
    s = open_session(inst)
    known = KnownValues(inst.n, 3)
    sched = RoundScheduler(s, known)
    pts = Cube.full(inst.n, 3).points()
    known.add(pts[:1], inst.evaluate(pts[:1]))

    def root(sched, pid, cube):
        return (yield from dacs(sched, cube))

    cube = Cube.full(inst.n, 3)
    pid = sched.spawn("dacs", root, None, cube=cube)
    assert sched.run(pid) == "returned"
    assert verify_local_min(s, sched.procs[pid].result)
    assert s.rounds_used <= math.ceil(math.log2(inst.n))

    single = RoundScheduler(open_session(inst), KnownValues(inst.n, 3))
    pid = single.spawn("dacs", root, None, cube=Cube((4, 4, 4), (1, 1, 1)))
    single.run(pid)
    assert single.procs[pid].result == (4, 4, 4)
