"""Tuple systems over point sets: collinear triples on typical lines, coplanar
and critical (d+1)-tuples, degree profiles and (c, tau)-boundedness.

Coplanarity of a (d+1)-tuple is decided as affine rank <= d everywhere; the
flat-census counters below are exact rewritings of that definition.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import BudgetExceeded, EmptyHypergraph, WrongDimension
from .geometry import Point, PointSet, affine_rank_coords, gaussian_binomial, space

EDGE_BUDGET = 5 * 10 ** 6
TUPLE_BUDGET = 2 * 10 ** 8


# -- hypergraphs --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UniformHypergraph:
    """An r-uniform hypergraph on a list of point indices.

    ``edges`` holds positions into ``vertices`` (not point indices); rows are
    strictly increasing and the row list is sorted and duplicate-free.
    """
    r: int
    vertices: np.ndarray
    edges: np.ndarray
    q: Optional[int] = None
    d: Optional[int] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_edges(cls, r: int, vertices, edges, q=None, d=None) -> "UniformHypergraph":
        vertices = np.asarray(vertices, dtype=np.int64)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, r)
        if e.size:
            e = np.sort(e, axis=1)
            if r > 1 and np.any(e[:, 1:] == e[:, :-1]):
                raise ValueError("an edge repeats a vertex")
            if e.min() < 0 or e.max() >= len(vertices):
                raise ValueError("edge refers to a missing vertex")
            e = np.unique(e, axis=0)
        e.setflags(write=False)
        vertices.setflags(write=False)
        return cls(r, vertices, e, q, d)

    def __len__(self):
        return int(self.edges.shape[0])

    @property
    def n_vertices(self) -> int:
        return int(len(self.vertices))

    def edge_points(self) -> np.ndarray:
        return self.vertices[self.edges]

    def degree_profile(self) -> List[int]:
        """[Delta_1, ..., Delta_r]: max number of edges through an i-set of vertices."""
        if "profile" in self._cache:
            return self._cache["profile"]
        out = []
        E = self.edges
        n = max(self.n_vertices, 1)
        for i in range(1, self.r + 1):
            if len(E) == 0:
                out.append(0)
                continue
            combos = list(itertools.combinations(range(self.r), i))
            if n ** i < 2 ** 62:
                w = n ** np.arange(i - 1, -1, -1, dtype=np.int64)
                keys = np.concatenate([E[:, list(c)] @ w for c in combos])
                _, counts = np.unique(keys, return_counts=True)
            else:
                keys = np.concatenate([E[:, list(c)] for c in combos])
                _, counts = np.unique(keys, axis=0, return_counts=True)
            out.append(int(counts.max()))
        self._cache["profile"] = out
        return out

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def induced_size(self, keep) -> int:
        """Number of edges inside the vertex positions flagged by ``keep`` (bool array)."""
        keep = np.asarray(keep, dtype=bool)
        if len(self) == 0:
            return 0
        return int(np.count_nonzero(keep[self.edges].all(axis=1)))

    def incidence_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        """(ptr, edge ids) listing the edges through each vertex, in edge order."""
        flat = self.edges.ravel()
        owner = np.repeat(np.arange(len(self)), self.r)
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=self.n_vertices)
        ptr = np.concatenate([[0], np.cumsum(counts)])
        return ptr, owner[order]


# -- generalized binomials and bound constants --------------------------------

def gbinom3(x: float) -> float:
    return x * (x - 1) * (x - 2) / 6


def gbinom2(x: float) -> float:
    return x * (x - 1) / 2


def triples_bounds(q: int, size: int) -> Dict[str, float]:
    """Right-hand sides of the three balanced-triple guarantees for |P| = size."""
    return {
        "size_lower": (q * (q + 1) - 8 * q ** 3 / size) * gbinom3(size / (2 * q)),
        "delta1_upper": (q + 1) * gbinom2(2 * size / q),
        "delta2_upper": 2 * size / q,
    }


def coplanar_bound_applies(q: int, d: int, size: int) -> bool:
    return q >= 2 * (d + 1) and size >= q + 2 * (d + 1)


def coplanar_lower_bound(q: int, d: int, size: int) -> float:
    """Averaged per-(d-1)-tuple count: C(n,d-1)/C(d+1,d-1) * min(n/q-1,1) * n^2/(32q)."""
    n = size
    return math.comb(n, d - 1) / math.comb(d + 1, d - 1) * min(n / q - 1, 1) * n * n / (32 * q)


def critical_bound_applies(q: int, d: int, size: int) -> bool:
    return size >= 4 * d * q ** (d - 1)


def critical_lower_bound(q: int, d: int, size: int) -> float:
    return size ** (d + 1) / (4 ** (d + 1) * math.factorial(d + 1) * q)


# -- balanced collinear triples -----------------------------------------------

@lru_cache(maxsize=64)
def _combos(m: int, r: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(m), r)), dtype=np.int64).reshape(-1, r)


def _positions(P: PointSet) -> np.ndarray:
    pos = np.full(P.q ** P.d, -1, dtype=np.int64)
    pos[P.indices] = np.arange(len(P))
    return pos


def _flat_tuples(P: PointSet, k: int, r: int, rows=None) -> np.ndarray:
    """All r-subsets (as vertex positions) of F ∩ P for the selected k-flats F."""
    sp = space(P.q, P.d)
    M = sp.flat_matrix(k)
    if rows is not None:
        M = M[rows]
    mem = P.bitmap[M]
    m = mem.sum(axis=1)
    total = sum(math.comb(int(x), r) for x in m)
    if total > EDGE_BUDGET:
        raise BudgetExceeded(f"{total} candidate tuples exceed the edge budget {EDGE_BUDGET}")
    pos = _positions(P)
    out = []
    for i in np.flatnonzero(m >= r):
        pts = pos[M[i][mem[i]]]
        out.append(pts[_combos(len(pts), r)])
    if not out:
        return np.zeros((0, r), dtype=np.int64)
    return np.concatenate(out)


def typical_lines(P: PointSet) -> np.ndarray:
    """Ids of the lines meeting P in between |P|/(2q) and 2|P|/q points (inclusive)."""
    q = P.q
    m = space(q, 2).census(1, P.bitmap)
    n = len(P)
    return np.flatnonzero((2 * q * m >= n) & (q * m <= 2 * n))


def balanced_triples(P: PointSet) -> UniformHypergraph:
    """All collinear triples of P lying on typical lines."""
    if P.d != 2:
        raise WrongDimension("balanced triples are defined in the plane (d = 2)")
    if len(P) < 1:
        raise ValueError("P must be nonempty")
    edges = _flat_tuples(P, 1, 3, typical_lines(P))
    return UniformHypergraph.from_edges(3, P.indices, edges, P.q, P.d)


def balanced_triples_report(P: PointSet, S: Optional[UniformHypergraph] = None) -> dict:
    if S is None:
        S = balanced_triples(P)
    b = triples_bounds(P.q, len(P))
    prof = S.degree_profile()
    return {
        "size": len(S), "delta1": prof[0], "delta2": prof[1], **b,
        "ok_size": len(S) >= b["size_lower"],
        "ok_delta1": prof[0] <= b["delta1_upper"],
        "ok_delta2": prof[1] <= b["delta2_upper"],
    }


# -- coplanar tuples ----------------------------------------------------------

def _comb_sum(m: np.ndarray, r: int) -> int:
    vals, counts = np.unique(m, return_counts=True)
    return sum(math.comb(int(v), r) * int(c) for v, c in zip(vals, counts))


def span_dimension_counts(P: PointSet, r: Optional[int] = None) -> List[int]:
    """a_j = number of r-subsets of P whose affine span has dimension exactly j.

    Moebius inversion over the flat lattice: sum over j-flats of C(|F ∩ P|, r)
    counts each r-subset once for every j-flat above its span, and an i-flat
    lies in [d-i, j-i]_q j-flats.
    """
    q, d = P.q, P.d
    r = d + 1 if r is None else r
    sp = space(q, d)
    a = [0] * (d + 1)
    for j in range(1, d + 1):
        if j == d:
            total = math.comb(len(P), r)
        else:
            total = _comb_sum(sp.census(j, P.bitmap), r)
        for i in range(1, j):
            total -= gaussian_binomial(d - i, j - i, q) * a[i]
        a[j] = total
    return a


def count_coplanar(P: PointSet) -> int:
    """Number of (d+1)-subsets of P contained in a hyperplane."""
    if len(P) <= P.d:
        return 0
    if P.d == 1:
        return 0
    return sum(span_dimension_counts(P)[1:P.d])


def _tables(q: int):
    from .field import field_new
    F = field_new(q)
    return F.add_table, F.mul_table, F.neg_table, F.inv_table


def tuple_census_bruteforce(P: PointSet, budget: int = TUPLE_BUDGET) -> Tuple[int, int]:
    """(coplanar, critical) by a rank test on every (d+1)-subset."""
    r = P.d + 1
    if math.comb(len(P), r) > budget:
        raise BudgetExceeded(f"C({len(P)},{r}) rank tests exceed the budget {budget}")
    coords = space(P.q, P.d).coords[P.indices]
    dep, crit, _, _ = kernels.tuple_census(coords, *_tables(P.q), r, -1)
    return dep, crit


def critical_per_plane(P: PointSet) -> int:
    """Critical 4-tuples in F_q^3 by a per-plane census.

    Inside a plane with m points, the 4-sets that are not critical are those
    with a collinear triple; two collinear triples inside one 4-set share a
    line, so each such 4-set is counted once by its line.
    """
    if P.d != 3:
        raise WrongDimension("the per-plane census is for d = 3")
    sp = space(P.q, 3)
    m_plane = sp.census(2, P.bitmap).astype(object)
    m_line = sp.census(1, P.bitmap).astype(object)
    lines_in = sp.containing(1, 2)  # line -> planes through it
    c3 = np.array([math.comb(int(x), 3) for x in m_line], dtype=object)
    c4 = np.array([math.comb(int(x), 4) for x in m_line], dtype=object)
    total = 0
    per_plane_lines = [[] for _ in range(len(m_plane))]
    for ell, planes in enumerate(lines_in.tolist()):
        if m_line[ell] >= 3:
            for pi in planes:
                per_plane_lines[pi].append(ell)
    for pi, mp in enumerate(m_plane.tolist()):
        if mp < 4:
            continue
        t = math.comb(mp, 4)
        for ell in per_plane_lines[pi]:
            t -= c3[ell] * (mp - m_line[ell]) + c4[ell]
        total += t
    return int(total)


def count_critical(P: PointSet, budget: int = TUPLE_BUDGET) -> int:
    """Number of coplanar (d+1)-subsets of P whose proper subsets are affinely independent."""
    if len(P) <= P.d:
        return 0
    if P.d == 2:
        return count_coplanar(P)
    if P.d == 3:
        return critical_per_plane(P)
    return tuple_census_bruteforce(P, budget)[1]


def _coords_of(points) -> Tuple[int, int, List[Tuple[int, ...]]]:
    pts = list(points)
    if not pts:
        raise ValueError("empty tuple")
    if isinstance(pts[0], Point):
        q, d = pts[0].q, pts[0].d
        return q, d, [p.coords for p in pts]
    raise TypeError("expected Point values")


def is_critical(points: Sequence[Point]) -> bool:
    q, d, coords = _coords_of(points)
    if len(coords) != d + 1 or len(set(coords)) != d + 1:
        raise ValueError("need d+1 distinct points")
    from .field import field_new
    F = field_new(q)
    if affine_rank_coords(F, coords) > d:
        return False
    return all(affine_rank_coords(F, coords[:i] + coords[i + 1:]) == d for i in range(d + 1))


def find_critical(P: PointSet, budget: int = TUPLE_BUDGET) -> Optional[Tuple[Point, ...]]:
    """Lexicographically first critical tuple of P (by point index), or None."""
    d = P.d
    if len(P) <= d:
        return None
    sp = space(P.q, d)
    F = sp.field
    cl = sp.coords_list
    idx = P.indices.tolist()
    nodes = 0

    def rank(sel):
        return affine_rank_coords(F, [cl[i] for i in sel])

    def rec(start, sel):
        nonlocal nodes
        for t in range(start, len(idx)):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("critical tuple search exceeded its budget")
            cand = sel + [idx[t]]
            if len(cand) <= d:
                # every proper subset must be independent, in particular each prefix
                if rank(cand) < len(cand):
                    continue
                found = rec(t + 1, cand)
                if found:
                    return found
            elif rank(cand) <= d and all(rank(cand[:i] + cand[i + 1:]) == d for i in range(d)):
                # the d-subset omitting the last point is the independent prefix
                return cand
        return None

    found = rec(0, [])
    return None if found is None else tuple(Point(P.q, d, cl[i]) for i in found)


def build_coplanar_hypergraph(P: PointSet) -> UniformHypergraph:
    """Edges are the (d+1)-subsets of P lying in a hyperplane."""
    d = P.d
    r = d + 1
    if d == 1:
        edges = np.zeros((0, r), dtype=np.int64)
    else:
        # a tuple of span dimension j < d-1 sits in several hyperplanes; from_edges dedupes
        edges = _flat_tuples(P, d - 1, r)
    return UniformHypergraph.from_edges(r, P.indices, edges, P.q, d)


def build_critical_hypergraph(P: PointSet, budget: int = TUPLE_BUDGET) -> UniformHypergraph:
    d = P.d
    r = d + 1
    if d == 2:
        H = build_coplanar_hypergraph(P)
        return UniformHypergraph.from_edges(r, H.vertices, H.edges, P.q, d)
    if d == 3:
        sp = space(P.q, 3)
        cand = _flat_tuples(P, 2, 4)
        if len(cand) == 0:
            return UniformHypergraph.from_edges(4, P.indices, cand, P.q, 3)
        # pair -> line id lookup among the points of P
        idx = P.indices
        inc = sp.incidence(1)[idx]  # lines through each point of P
        n = len(idx)
        line_of = np.full((n, n), -1, dtype=np.int64)
        mem = sp.member(1)
        for a in range(n):
            for ell in inc[a]:
                on = np.flatnonzero(mem[ell, idx])
                line_of[a, on] = ell
        ok = np.ones(len(cand), dtype=bool)
        for x, y, z in itertools.combinations(range(4), 3):
            ok &= line_of[cand[:, x], cand[:, y]] != line_of[cand[:, x], cand[:, z]]
        return UniformHypergraph.from_edges(4, idx, cand[ok], P.q, 3)
    # general d: rank test on every coplanar candidate
    H = build_coplanar_hypergraph(P)
    sp = space(P.q, d)
    cl = sp.coords_list
    pts = H.edge_points()
    if len(pts) * r > budget:
        raise BudgetExceeded("critical filter exceeds budget")
    keep = [i for i, e in enumerate(pts.tolist())
            if all(affine_rank_coords(sp.field, [cl[v] for j, v in enumerate(e) if j != s]) == d
                   for s in range(r))]
    return UniformHypergraph.from_edges(r, H.vertices, H.edges[keep], P.q, d)


# -- container-lemma functionals ---------------------------------------------

def delta_tau(H: UniformHypergraph, tau: float) -> float:
    """The weighted codegree functional of the container lemma."""
    if len(H) == 0:
        raise EmptyHypergraph("the functional is undefined for an empty hypergraph")
    if tau <= 0:
        raise ValueError("tau must be positive")
    r = H.r
    prof = H.degree_profile()
    pre = 2 ** (math.comb(r, 2) - 1) * H.n_vertices / (r * len(H))
    return pre * sum(prof[i - 1] / (2 ** math.comb(i - 1, 2) * tau ** (i - 1)) for i in range(2, r + 1))


@dataclass
class BoundednessReport:
    c_required: float
    tau: float
    slack: Dict[int, float]  # i -> Delta_i / ((|H|/|V|) tau^(i-1))
    c: Optional[float] = None

    @property
    def bounded(self) -> bool:
        return self.c is not None and self.c_required <= self.c


def check_bounded(H: UniformHypergraph, c: Optional[float], tau: float) -> BoundednessReport:
    if len(H) == 0:
        raise EmptyHypergraph("boundedness is undefined for an empty hypergraph")
    prof = H.degree_profile()
    avg = len(H) / H.n_vertices
    slack = {i: prof[i - 1] / (avg * tau ** (i - 1)) for i in range(2, H.r + 1)}
    return BoundednessReport(max(slack.values()), tau, slack, c)


def tau_coplanar(q: int, d: int, size: int) -> float:
    k = size / q
    if k <= 1:
        raise ValueError("needs |P| > q")
    return min(k - 1, 1) ** (-d / (d + 1)) / k * q ** (-1 / (d + 1))


def tau_critical(q: int, d: int, size: int) -> float:
    k = size / q
    return max(q ** (1 / d - 1) / k, q ** (d - 2) / k ** 2)
