import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpfq.errors import EmptyHypergraph, WrongDimension
from gpfq.geometry import Point, PointSet, enumerate_flats, moment_curve, space
from gpfq.lab import sample_subset
from gpfq.supersat import (
    UniformHypergraph, balanced_triples, balanced_triples_report, build_coplanar_hypergraph,
    build_critical_hypergraph, check_bounded, count_coplanar, count_critical, critical_per_plane,
    delta_tau, find_critical, is_critical, span_dimension_counts, tau_coplanar, tau_critical,
    triples_bounds, tuple_census_bruteforce,
)

from oracles import affine_rank, coords, coplanar_and_critical, naive_field


def line(q, *pts):
    return PointSet.from_coords(q, len(pts[0]), pts)


def oracle_counts(P):
    F = naive_field(P.q)
    return coplanar_and_critical(F, P.d, [coords(P.q, P.d, i) for i in P])


# -- balanced triples ---------------------------------------------------------

def test_full_plane_triples():
    P = PointSet.full(11, 2)
    S = balanced_triples(P)
    assert len(S) == 132 * math.comb(11, 3) == 21780
    rep = balanced_triples_report(P, S)
    assert rep["size_lower"] == pytest.approx(635.25)
    assert rep["delta2"] == 9 <= rep["delta2_upper"] == 22
    assert rep["ok_size"] and rep["ok_delta1"] and rep["ok_delta2"]


def test_moment_curve_has_no_triples():
    assert len(balanced_triples(moment_curve(11, 2))) == 0


def test_triples_need_the_plane():
    with pytest.raises(WrongDimension):
        balanced_triples(PointSet.full(3, 3))


def test_triples_oracle():
    # every collinear triple on a line whose count lies in [n/2q, 2n/q]
    P = sample_subset(7, 2, 30, 11)
    n, q = len(P), 7
    S = balanced_triples(P)
    ref = set()
    for f in enumerate_flats(7, 2, 1):
        on = [i for i in f.points() if i in P]
        if n / (2 * q) <= len(on) <= 2 * n / q:
            ref.update(itertools.combinations(on, 3))
    assert {tuple(e) for e in S.edge_points().tolist()} == ref


# -- coplanar and critical ----------------------------------------------------

def test_coplanar_examples():
    assert count_coplanar(line(5, *[(x, 2) for x in range(5)])) == 10
    assert count_coplanar(moment_curve(5, 2)) == 0
    assert count_coplanar(moment_curve(7, 3)) == 0


def test_coplanar_hypergraph_examples():
    H = build_coplanar_hypergraph(line(5, (0, 0), (1, 1), (2, 2), (3, 3)))
    assert H.r == 3 and len(H) == 4
    assert len(build_coplanar_hypergraph(moment_curve(5, 2))) == 0
    assert len(build_coplanar_hypergraph(PointSet.full(3, 2))) == 12


def test_is_critical_examples():
    pts = [Point(5, 3, c) for c in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]]
    assert is_critical(pts)
    assert not is_critical([Point(5, 3, (x, 0, 0)) for x in range(4)])
    assert is_critical([Point(7, 2, (x, 2 * x % 7)) for x in (0, 1, 5)])


def test_count_critical_examples():
    P = line(11, *[(x, 3) for x in range(11)])
    assert count_critical(P) == count_coplanar(P) == 165
    assert count_critical(line(5, *[(x, x, 0) for x in range(4)])) == 0
    plane = PointSet.from_coords(5, 3, [(x, y, 0) for x in range(5) for y in range(5)])
    cl = [(x, y) for x in range(5) for y in range(5)]
    F = naive_field(5)
    ref = sum(1 for t in itertools.combinations(cl, 4)
              if all(affine_rank(F, list(s)) == 3 for s in itertools.combinations(t, 3)))
    assert count_critical(plane) == ref == 6500


def test_find_critical_examples():
    P = PointSet.full(2, 3)
    t = find_critical(P)
    assert [p.coords for p in t] == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)]
    assert is_critical(list(t))
    lineflat = enumerate_flats(4, 3, 1)[3].point_set()  # a (d-2)-flat
    assert find_critical(lineflat) is None and count_critical(lineflat) == 0
    assert find_critical(PointSet.from_indices(5, 3, [1, 2, 3])) is None


def test_find_critical_is_lex_first():
    P = sample_subset(3, 3, 12, 4)
    found = find_critical(P)
    idx = P.indices.tolist()
    first = next(t for t in itertools.combinations(idx, 4)
                 if is_critical([Point.from_index(3, 3, i) for i in t]))
    assert tuple(p.index for p in found) == first


@pytest.mark.parametrize("q,d", [(5, 2), (7, 2), (4, 2), (3, 3), (4, 3)])
def test_counts_match_rank_oracle(q, d):
    for s in range(12):
        P = sample_subset(q, d, min(q ** d, 6 + s), 100 + s)
        cop, crit = oracle_counts(P)
        assert count_coplanar(P) == cop
        assert count_critical(P) == crit
        assert tuple_census_bruteforce(P) == (cop, crit)
        assert len(build_coplanar_hypergraph(P)) == cop
        assert len(build_critical_hypergraph(P)) == crit


def test_higher_dimension_census():
    P = sample_subset(2, 4, 11, 9)
    cop, crit = oracle_counts(P)
    assert count_coplanar(P) == cop
    assert count_critical(P) == crit


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(5, 2), (7, 2), (9, 2)]), st.data())
def test_critical_equals_coplanar_in_the_plane(qd, data):
    q, d = qd
    idx = data.draw(st.sets(st.integers(0, q * q - 1)))
    P = PointSet.from_indices(q, d, idx)
    assert count_critical(P) == count_coplanar(P)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 3), (4, 3), (5, 3)]), st.data())
def test_per_plane_census_matches_bruteforce(qd, data):
    q, d = qd
    idx = data.draw(st.sets(st.integers(0, q ** 3 - 1), max_size=30))
    P = PointSet.from_indices(q, d, idx)
    assert critical_per_plane(P) == tuple_census_bruteforce(P)[1]


def test_span_dimension_counts_partition_all_tuples():
    P = sample_subset(4, 3, 30, 2)
    a = span_dimension_counts(P)
    assert sum(a) == math.comb(30, 4)


def test_two_collinear_triples_in_a_four_set_share_a_line():
    F = naive_field(3)
    pts = [coords(3, 3, i) for i in range(27)]
    for t in itertools.combinations(pts, 4):
        col = [s for s in itertools.combinations(t, 3) if affine_rank(F, list(s)) == 2]
        if len(col) >= 2:
            assert affine_rank(F, list(t)) == 2  # all four on one line


# -- hypergraph machinery -----------------------------------------------------

def test_hypergraph_invariants():
    P = sample_subset(5, 3, 40, 1)
    H = build_coplanar_hypergraph(P)
    E = H.edges
    assert np.all(E[:, 1:] > E[:, :-1])
    assert len({tuple(e) for e in E.tolist()}) == len(H)
    prof = H.degree_profile()
    assert prof[-1] <= 1
    assert all(a >= b for a, b in zip(prof, prof[1:]))
    assert prof[0] == H.degrees().max()


def delta_tau_oracle(H, tau):
    r = H.r
    prof = H.degree_profile()
    total = 0.0
    for i in range(2, r + 1):
        total += prof[i - 1] / (2 ** math.comb(i - 1, 2) * tau ** (i - 1))
    return 2 ** (math.comb(r, 2) - 1) * H.n_vertices / (r * len(H)) * total


def test_delta_tau_examples():
    H = UniformHypergraph.from_edges(3, [0, 1, 2], [[0, 1, 2]])
    assert delta_tau(H, 0.5) == pytest.approx(16)
    G = build_coplanar_hypergraph(PointSet.full(3, 2))
    assert delta_tau(G, 1.0) == pytest.approx(delta_tau_oracle(G, 1.0))
    vals = [delta_tau(G, t) for t in (1, 10, 100, 1e4, 1e8)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-6
    with pytest.raises(EmptyHypergraph):
        delta_tau(UniformHypergraph.from_edges(3, [0, 1, 2], []), 1.0)


def test_check_bounded_examples():
    H = UniformHypergraph.from_edges(3, [0, 1, 2], [[0, 1, 2]])
    rep = check_bounded(H, 1.0, 1.0)
    assert rep.c_required == pytest.approx(3)
    assert not rep.bounded
    P = sample_subset(7, 2, 21, 5)
    rep = check_bounded(build_coplanar_hypergraph(P), None, tau_coplanar(7, 2, 21))
    assert 0 < rep.c_required < math.inf
    P = sample_subset(5, 3, 60, 5)
    rep = check_bounded(build_critical_hypergraph(P), None, tau_critical(5, 3, 60))
    assert 0 < rep.c_required < math.inf
    with pytest.raises(EmptyHypergraph):
        check_bounded(UniformHypergraph.from_edges(3, [0, 1, 2], []), 1.0, 1.0)


def test_triples_bounds_values():
    b = triples_bounds(11, 121)
    assert b["delta1_upper"] == pytest.approx(12 * 22 * 21 / 2)
    assert b["delta2_upper"] == pytest.approx(22)
