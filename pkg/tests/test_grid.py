from __future__ import annotations

import itertools

import numpy as np
import pytest

from roundsearch.grid import (
    Cube,
    GridDomainError,
    balanced_partition,
    box_boundary_points,
    cube_around,
    cube_boundary,
    edge_union,
    even_splits,
    folded_segment,
    fs_contains,
    fs_contains_many,
    keys_to_points,
    lex_argmin,
    linear_keys,
    neighbors,
    partition_cube,
    validate_point,
    window_sets,
)


def test_validate_point_rejects_outside():
    assert validate_point((1, 5), 5) == (1, 5)
    with pytest.raises(GridDomainError):
        validate_point((0, 3), 5)
    with pytest.raises(GridDomainError):
        validate_point((6, 3), 5)


def test_neighbors_corner_and_interior():
    assert sorted(neighbors((1, 1), 5)) == [(1, 2), (2, 1)]
    assert len(neighbors((3, 3, 3), 5)) == 6


def test_keys_round_trip():
    pts = Cube.full(4, 3).points()
    keys = linear_keys(pts, 4)
    assert len(set(keys.tolist())) == 64
    assert np.array_equal(keys_to_points(keys, 4, 3), pts)


def test_lex_argmin_breaks_ties_lexicographically():
    pts = np.array([[3, 1], [1, 2], [1, 1], [2, 0]])
    vals = np.array([0, 0, 0, 1])
    assert tuple(pts[lex_argmin(vals, pts)]) == (1, 1)


def test_cube_around_clips_to_grid():
    c = cube_around((2, 9), 3, 10)
    assert c.low == (1, 6) and c.high == (5, 10)


def test_boundary_of_small_cubes():
    c = Cube((1, 1), (3, 3))
    assert len(cube_boundary(c)) == 8
    assert len(box_boundary_points(c)) == 8
    assert len(cube_boundary(Cube((2, 2), (1, 1)))) == 1


def test_partition_cube_covers_disjointly():
    c = Cube.full(10, 2)
    blocks = partition_cube(c, 4)
    seen = set()
    for b in blocks:
        pts = set(b.iter_points())
        assert not (pts & seen)
        seen |= pts
    assert seen == set(c.iter_points())


def test_even_splits_long_runs_first():
    assert even_splits(1, 10, 3) == [(1, 4), (5, 3), (8, 3)]


def test_balanced_partition_block_lookup_and_boundary():
    part = balanced_partition(Cube.full(12, 2), 4)
    assert len(part.blocks()) == 9
    b = part.block_of((5, 12))
    assert (5, 12) in b
    bu = {tuple(p) for p in part.boundary_union().tolist()}
    expected = set()
    for blk in part.blocks():
        expected |= cube_boundary(blk)
    assert bu == expected


def test_edge_union_matches_brute_force():
    spans = [(1, 7), (1, 5)]
    edges = [[1, 4, 7], [1, 5]]
    got = {tuple(p) for p in edge_union(spans, edges).tolist()}
    want = {p for p in itertools.product(range(1, 8), range(1, 6)) if p[0] in (1, 4, 7) or p[1] in (1, 5)}
    assert got == want


def test_folded_segment_axis_order_and_length():
    seg = folded_segment((1, 1), (3, 2))
    assert seg.points == [(2, 1), (3, 1), (3, 2)]
    assert len(seg) == 3
    assert len(folded_segment((2, 2), (2, 2))) == 0


def test_fs_contains_agrees_with_materialized_segment():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = tuple(int(c) for c in rng.integers(1, 5, size=3))
        y = tuple(int(a + b) for a, b in zip(x, rng.integers(0, 4, size=3)))
        z = tuple(int(c) for c in rng.integers(1, 9, size=3))
        assert fs_contains(x, y, z) == (z in folded_segment(x, y).points)


def test_fs_contains_many_vectorized():
    x = (2, 2)
    targets = np.array([[2 + a, 2 + b] for a in range(4) for b in range(4)])
    z = (4, 2)
    got = fs_contains_many(x, targets, z)
    want = [z in folded_segment(x, tuple(t)).points for t in targets.tolist()]
    assert got.tolist() == want


def test_window_sets_inverse_and_boundary_disjoint():
    ws = window_sets((3, 3), 2, 4)
    assert not (ws.w_inv_all & ws.w_b_all)
    assert (3, 3) not in ws.w
    assert len(ws.w) == 2**2


def test_window_reachability_matches_segments():
    n, ell, x = 5, 2, (2, 4)
    ws = window_sets(x, ell, n)
    reach = set()
    for y in itertools.product(range(1, n + 1), repeat=2):
        for off in itertools.product(range(1, ell + 1), repeat=2):
            # Walk coordinates up without wrapping, then wrap the trace back onto the torus.
            z = tuple(a + o for a, o in zip(y, off))
            trace = {tuple((c - 1) % n + 1 for c in p) for p in folded_segment(y, z).points}
            if x in trace:
                reach.add(y)
    assert frozenset(reach) <= ws.w_r
    assert (4, 4) in ws.w_r and (4, 4) not in reach


def test_window_sets_sizes_bounded():
    ws = window_sets((3, 2, 5), 3, 7)
    for i in range(3):
        assert len(ws.w_inv[i]) <= 3 ** (i + 1)
        assert len(ws.w_b[i]) <= 3 ** (i + 1)


def test_cube_rejects_empty_extent():
    with pytest.raises(GridDomainError):
        Cube((1,), (0,))
