import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpfq.errors import MixedAmbient
from gpfq.field import field_new
from gpfq.geometry import (
    Point, PointSet, affine_span, enumerate_flats, flat_count, gaussian_binomial, greedy_gp_set,
    hyperplanes_containing, is_evasive, is_general_position, moment_curve, read_point_sets, space,
)

from oracles import affine_rank, coords, is_gp, lines_by_pairs, naive_field


def gbinom_sum(d, k, q):
    # oracle: count k-subspaces as (ordered independent k-tuples) / |GL_k|
    num = den = 1
    for i in range(k):
        num *= q ** d - q ** i
        den *= q ** k - q ** i
    return num // den


def test_gaussian_binomial_examples():
    assert gaussian_binomial(2, 1, 3) == 4
    assert gaussian_binomial(5, 0, 7) == 1
    assert gaussian_binomial(3, 1, 2) == 7


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_gaussian_binomial_against_basis_count(q, d):
    for k in range(d + 1):
        assert gaussian_binomial(d, k, q) == gbinom_sum(d, k, q)
        assert gaussian_binomial(d, k, q) == gaussian_binomial(d, d - k, q)


def test_lines_through_origin_of_f2_cubed():
    F = naive_field(2)
    lines = lines_by_pairs(F, 2, 3)
    assert sum((0, 0, 0) in ln for ln in lines) == 7


def test_line_counts_match_pair_span_dedupe():
    for q, d in [(3, 2), (2, 2), (4, 2), (3, 3)]:
        ref = lines_by_pairs(naive_field(q), q, d)
        got = {frozenset(coords(q, d, i) for i in f.points()) for f in enumerate_flats(q, d, 1)}
        assert got == ref


def test_enumeration_examples():
    assert len(enumerate_flats(3, 2, 1)) == 12
    assert len(enumerate_flats(2, 2, 1)) == 6
    assert len(enumerate_flats(4, 3, 0)) == 64


@pytest.mark.parametrize("q", [2, 3, 4, 5])
@pytest.mark.parametrize("d", [2, 3])
def test_flat_census(q, d):
    sp = space(q, d)
    for k in range(d + 1):
        flats = enumerate_flats(q, d, k)
        assert len(flats) == q ** (d - k) * gaussian_binomial(d, k, q) == flat_count(q, d, k)
        assert len(set(flats)) == len(flats)
        keys = [(f.basis, f.base) for f in flats]
        assert keys == sorted(keys)
        M = sp.flat_matrix(k)
        assert M.shape == (len(flats), q ** k)
        assert len({tuple(r) for r in M.tolist()}) == len(flats)
        per_point = np.bincount(M.ravel(), minlength=q ** d)
        assert np.all(per_point == gaussian_binomial(d, k, q))


def test_flat_canonical_form():
    for f in enumerate_flats(5, 3, 2):
        pts = f.points()
        assert len(pts) == 25
        assert space(5, 3).coords_of(int(pts[0])) == f.base  # base is the least point
        assert affine_span([Point.from_index(5, 3, int(i)) for i in pts]) == f


def test_hyperplane_rows_come_in_parallel_classes():
    for q, d in [(3, 2), (4, 3), (5, 2)]:
        M = space(q, d).flat_matrix(d - 1)
        for c in range(M.shape[0] // q):
            block = M[c * q:(c + 1) * q]
            assert sorted(block.ravel().tolist()) == list(range(q ** d))


def test_affine_span_examples():
    f = affine_span([Point(3, 2, (0, 0))])
    assert f.dim == 0 and f.base == (0, 0)
    f = affine_span([Point(3, 2, c) for c in [(0, 0), (1, 1), (2, 2)]])
    assert (f.dim, f.base, f.basis) == (1, (0, 0), ((1, 1),))
    f = affine_span([Point(5, 3, c) for c in [(0, 0, 0), (1, 0, 0), (0, 1, 0)]])
    assert f.dim == 2 and f.base == (0, 0, 0) and f.basis == ((1, 0, 0), (0, 1, 0))
    with pytest.raises(MixedAmbient):
        affine_span([Point(3, 2, (0, 0)), Point(5, 2, (0, 0))])


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([(3, 2), (4, 2), (5, 3), (4, 3), (2, 4), (9, 2)]), st.data())
def test_span_matches_rank_oracle_and_is_idempotent(qd, data):
    q, d = qd
    n = data.draw(st.integers(1, d + 2))
    idx = data.draw(st.lists(st.integers(0, q ** d - 1), min_size=n, max_size=n))
    pts = [Point.from_index(q, d, i) for i in idx]
    f = affine_span(pts)
    assert f.dim == affine_rank(naive_field(q), [p.coords for p in pts]) - 1
    assert all(f.contains(p.coords) for p in pts)
    again = affine_span([Point.from_index(q, d, int(i)) for i in f.points()])
    assert again == f


def test_hyperplanes_containing_examples():
    assert len(hyperplanes_containing(affine_span([Point(3, 2, (1, 2))]))) == 4
    line = affine_span([Point(5, 3, (0, 0, 0)), Point(5, 3, (1, 2, 3))])
    hs = hyperplanes_containing(line)
    assert len(hs) == 6
    ref = [h for h in enumerate_flats(5, 3, 2) if set(line.points()) <= set(h.points())]
    assert hs == ref
    h = enumerate_flats(4, 3, 2)[17]
    assert hyperplanes_containing(h) == [h]


@pytest.mark.parametrize("q,d", [(3, 3), (4, 3), (2, 4)])
def test_codim_two_flats_lie_in_q_plus_one_hyperplanes(q, d):
    for f in enumerate_flats(q, d, d - 2)[:: max(1, flat_count(q, d, d - 2) // 20)]:
        assert len(hyperplanes_containing(f)) == q + 1


def test_general_position_examples():
    assert is_general_position(moment_curve(5, 2))
    assert not is_general_position(PointSet.from_coords(5, 3, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (2, 3, 0)]))
    assert is_general_position(PointSet.empty(7, 3))


def test_moment_curve_examples():
    F = field_new(5)
    mc = moment_curve(5, 2)
    assert mc == PointSet.from_coords(5, 2, [(x, F.mul(x, x)) for x in range(5)])
    assert len(moment_curve(3, 3)) == 3
    assert is_general_position(moment_curve(7, 3))
    N = naive_field(7)
    assert is_gp(N, 3, [coords(7, 3, i) for i in moment_curve(7, 3)])


def test_evasive_examples():
    assert is_evasive(moment_curve(5, 2), 1, 2)
    assert not is_evasive(PointSet.from_coords(3, 2, [(0, 0), (0, 1), (0, 2)]), 1, 2)
    assert is_evasive(PointSet.full(4, 2), 0, 1)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([(3, 2), (4, 2), (5, 2), (3, 3)]), st.data())
def test_general_position_matches_rank_oracle(qd, data):
    q, d = qd
    idx = data.draw(st.sets(st.integers(0, q ** d - 1), max_size=min(q ** d, 2 * d + 3)))
    P = PointSet.from_indices(q, d, idx)
    N = naive_field(q)
    ref = is_gp(N, d, [coords(q, d, i) for i in sorted(idx)])
    assert is_general_position(P) == ref == is_evasive(P, d - 1, d)
    if ref:
        assert len(P) <= d * q


def test_pointset_text_roundtrip():
    P = PointSet.from_indices(5, 3, [0, 7, 124, 63])
    assert P.to_text().splitlines()[0] == "5 3"
    assert PointSet.from_text(P.to_text()) == P
    both = read_point_sets(P.to_text() + PointSet.full(2, 2).to_text())
    assert both == [P, PointSet.full(2, 2)]
    assert PointSet.from_mask(5, 3, P.mask) == P
    assert len(P) == P.cardinality == int(P.bitmap.sum())


def test_pointset_is_immutable():
    P = PointSet.full(3, 2)
    with pytest.raises(ValueError):
        P.bitmap[0] = False


def test_point_encoding_is_base_q():
    sp = space(4, 3)
    for i in range(64):
        p = Point.from_index(4, 3, i)
        assert p.coords == coords(4, 3, i)
        assert p.index == i


def test_greedy_gp_sets_are_maximal():
    rng = np.random.default_rng(3)
    for q, d in [(5, 2), (7, 2), (4, 3)]:
        for _ in range(5):
            order = rng.permutation(q ** d)
            S = greedy_gp_set(q, d, order)
            assert is_general_position(S)
            for x in range(q ** d):
                if x not in S:
                    assert not is_general_position(PointSet.from_indices(q, d, list(S) + [x]))
