from __future__ import annotations

import itertools

import numpy as np
import pytest

from roundsearch.grid import Cube, GridDomainError, folded_segment
from roundsearch.instances import (
    NO,
    code_to_vector,
    check_bounded,
    check_direction_preserving,
    const_staircase_from_offsets,
    ell_schedule,
    gen_1d_hard,
    gen_const_staircase,
    gen_poly_staircase,
    gen_sink_field,
    instance_from_text,
    ls_to_gp,
    poly_staircase_from_points,
    pad_brouwer,
    poly_params,
    random_sink_field,
    vector_to_code,
    zero_points,
)
from roundsearch.oracle import is_local_min


def _local_minima(inst):
    pts = Cube.full(inst.n, inst.d).points()
    return [tuple(p) for p in pts.tolist() if is_local_min(inst, p)]


def test_ell_schedule_examples():
    assert ell_schedule(64, 2, 2) == [64, 16]
    assert ell_schedule(256, 3, 2) == [256, 64]
    assert ell_schedule(4096, 2, 2) == [4096, 256]
    assert ell_schedule(100, 1, 2) == [100, 10]
    for n, d, k in itertools.product((8, 50, 300), (1, 2, 3), (1, 2, 3)):
        ells = ell_schedule(n, d, k)
        assert ells[0] == n and all(a >= b for a, b in zip(ells, ells[1:]))


def test_const_staircase_windows_and_start():
    inst = gen_const_staircase(64, 2, 2, seed=7)
    assert inst.n == 80
    x0, x1, x2 = inst.connecting
    assert x0 == (1, 1)
    assert all(0 <= b - a < 64 for a, b in zip(x0, x1))
    assert all(0 <= b - a < 16 for a, b in zip(x1, x2))


def test_const_staircase_is_deterministic():
    a = gen_const_staircase(27, 2, 2, seed=11)
    b = gen_const_staircase(27, 2, 2, seed=11)
    assert a.connecting == b.connecting and a.end_sign == b.end_sign


def test_value_function_basics():
    inst = const_staircase_from_offsets(8, 2, 1, [(3, 2)], end_sign="-")
    assert inst.value_at((1, 1)) == 0
    assert inst.value_at((1, 2)) == 1
    assert inst.value_at((2, 1)) == -1
    vals = [inst.value_at(p) for p in inst.trace]
    assert vals == [-t for t in range(len(inst.trace))]


def test_end_sign_plus_moves_solution_back_one():
    inst = const_staircase_from_offsets(8, 2, 1, [(3, 2)], end_sign="+")
    assert inst.value_at(inst.end) == 5
    assert _local_minima(inst) == [inst.trace[-2]]


def test_unique_local_min_exhaustive():
    for seed in range(30):
        for d, n in ((1, 30), (2, 27), (3, 8)):
            inst = gen_const_staircase(n, d, 2, seed)
            assert _local_minima(inst) == [inst.expected_solution()]


def test_staircase_count_at_tiny_scale():
    schedule = (3, 2)
    seen = set()
    for offs in itertools.product(itertools.product(range(3), repeat=2), itertools.product(range(2), repeat=2)):
        inst = const_staircase_from_offsets(5, 2, 2, offs, schedule=schedule)
        seen.add(inst.connecting)
    assert len(seen) == 3**2 * 2**2


def test_offsets_outside_window_rejected():
    with pytest.raises(GridDomainError):
        const_staircase_from_offsets(64, 2, 2, [(0, 0), (16, 0)])


def test_poly_params_and_walk():
    pp = poly_params(64, 3, 0.5)
    assert (pp.ell, pp.m, pp.k, pp.K) == (16, 4, 8, 16)
    inst = gen_poly_staircase(64, 3, 0.5, seed=2)
    assert inst.connecting[0] == (1, 1, 1)
    assert len(inst.connecting) == pp.K + 1
    for j in range(1, pp.K + 1):
        if j % pp.m:
            a, b = inst.connecting[j - 1], inst.connecting[j]
            assert all(1 <= (y - x) % 64 <= 16 for x, y in zip(a, b))


def test_poly_self_intersection_keeps_largest_index():
    inst = poly_staircase_from_points(6, 3, 0.5, [(1, 1, 1), (4, 1, 1), (4, 2, 1), (2, 2, 1), (2, 1, 1), (5, 1, 1)])
    # (3,1,1) is visited on the first and the last segment.
    first = 2
    last = max(i for i, p in enumerate(inst.trace) if p == (3, 1, 1))
    assert last > first
    assert inst.value_at((3, 1, 1)) == -last


def test_poly_rejects_degenerate_parameters():
    with pytest.raises(GridDomainError):
        poly_params(8, 2, 0.5)
    with pytest.raises(GridDomainError):
        poly_params(8, 3, 2.0)


def test_text_round_trip():
    for inst in (gen_const_staircase(27, 2, 2, 5), gen_poly_staircase(27, 3, 0.5, 5)):
        back = instance_from_text(inst.to_text())
        assert back.connecting == inst.connecting
        assert back.trace == inst.trace
        assert back.end_sign == inst.end_sign
        pts = Cube.full(inst.n, inst.d).points()
        assert np.array_equal(back.evaluate(pts), inst.evaluate(pts))


def test_one_d_hard_values():
    assert gen_1d_hard(5, 3, "local_search").values() == [5, 4, 0, 4, 5]
    assert gen_1d_hard(5, 1, "local_search").values() == [0, 2, 3, 4, 5]
    assert gen_1d_hard(5, 3, "brouwer").values() == [1, 1, 0, -1, -1]
    with pytest.raises(GridDomainError):
        gen_1d_hard(5, 6, "local_search")


def test_direction_codes_round_trip():
    for d in (1, 2, 3):
        for code in range(-d, d + 1):
            assert vector_to_code(code_to_vector(code, d)) == code
    with pytest.raises(ValueError):
        vector_to_code((1, 1))


def test_sink_field_examples():
    f = gen_sink_field(4, 2, (2, 2))
    assert list(f.evaluate(np.array([[2, 2], [1, 2], [3, 1]]))) == [0, 1, -1]


def test_sink_fields_bounded_and_direction_preserving():
    for seed in range(20):
        f = random_sink_field(6, 2 + seed % 2, seed)
        assert check_bounded(f) and check_direction_preserving(f)
        assert zero_points(f) == [f.target]


def test_padding_examples_and_invariants():
    f = gen_sink_field(4, 2, (3, 1))
    g = pad_brouwer(f)
    assert list(g.evaluate(np.array([[0, 3], [2, 5], [2, 2]]))) == [1, -2, f.evaluate(np.array([[2, 2]]))[0]]
    assert check_bounded(g) and check_direction_preserving(g)
    assert zero_points(g) == zero_points(f)


def test_gp_reduction_follows_path():
    for seed in range(10):
        inst = gen_const_staircase(27, 2, 2, seed)
        gp = ls_to_gp(inst)
        assert gp.answer(inst.start)[0] == NO
        cur, steps = inst.start, 0
        while True:
            succ = gp.answer(cur)[1]
            if succ == NO:
                break
            cur, steps = succ, steps + 1
        assert cur == inst.expected_solution()
        assert steps == inst.path_length - (inst.end_sign == "+")
        assert gp.answer((27, 1)) == (NO, NO) or (27, 1) in inst.trace
        assert gp.source_queries(np.array([list(inst.start)])) <= 2 * inst.d + 1


def test_gp_rejects_poly_kind():
    with pytest.raises(ValueError):
        ls_to_gp(gen_poly_staircase(27, 3, 0.5, 0))


def test_folded_segment_trace_covers_connecting_points():
    inst = gen_const_staircase(64, 3, 2, 4)
    for a, b in zip(inst.connecting, inst.connecting[1:]):
        seg = folded_segment(a, b).points
        if seg:
            assert seg[-1] == b
