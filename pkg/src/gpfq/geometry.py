"""Affine geometry of F_q^d.

Points are integers in ``[0, q^d)``; the coordinates of a point are its
base-q digits with the first coordinate most significant, so index order is
lexicographic order on coordinates.

A k-flat is stored canonically: its direction space as a reduced row-echelon
basis and its base point as the lexicographically least point of the flat
(zero in every pivot column).  Two ``Flat`` records compare equal exactly
when they describe the same point set.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, MixedAmbient
from .field import FieldSpec, field_new

ENUMERATION_BUDGET = 10 ** 6


def gaussian_binomial(d: int, k: int, q: int) -> int:
    """Number of k-dimensional linear subspaces of F_q^d.

    Exact product formula ``prod (1 - q^{d-i}) / (1 - q^{i+1})`` over
    ``i < k``; raises BudgetExceeded past 128-bit range.
    """
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    num = 1
    den = 1
    for i in range(k):
        num *= 1 - q ** (d - i)
        den *= 1 - q ** (i + 1)
    value = num // den
    if value >= 1 << 128:
        raise BudgetExceeded(f"gaussian_binomial({d},{k},{q}) exceeds 128 bits")
    return value


def flat_count(q: int, d: int, k: int) -> int:
    """Number of k-flats in F_q^d."""
    return q ** (d - k) * gaussian_binomial(d, k, q)


class Space:
    """Coordinate tables for F_q^d.  Use :func:`space` for the shared instance."""

    def __init__(self, q: int, d: int):
        if d < 1:
            raise ValueError("dimension must be at least 1")
        if q ** d > ENUMERATION_BUDGET:
            raise BudgetExceeded(f"q^d = {q ** d} exceeds the enumeration budget {ENUMERATION_BUDGET}")
        self.q = q
        self.d = d
        self.field: FieldSpec = field_new(q)
        self.n = q ** d
        self.weights = q ** np.arange(d - 1, -1, -1, dtype=np.int64)
        idx = np.arange(self.n, dtype=np.int64)
        self.coords = ((idx[:, None] // self.weights[None, :]) % q).astype(np.int32)
        self.coords.setflags(write=False)

    def __repr__(self):
        return f"Space(q={self.q}, d={self.d})"

    def index(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=np.int64) @ self.weights

    def index_of(self, coords: Sequence[int]) -> int:
        x = 0
        for c in coords:
            x = x * self.q + int(c)
        return x

    def coords_of(self, index: int) -> Tuple[int, ...]:
        return tuple(int(c) for c in self.coords[index])

    @cached_property
    def coords_list(self) -> List[Tuple[int, ...]]:
        return [tuple(r) for r in self.coords.tolist()]

    # -- flats ----------------------------------------------------------------
    @lru_cache(maxsize=None)
    def flat_matrix(self, k: int) -> np.ndarray:
        """Point indices of every k-flat, one row per flat in canonical order."""
        flats = self.flats(k)
        if not flats:
            return np.zeros((0, self.q ** k), dtype=np.int64)
        F = self.field
        add, mul = F.add_table, F.mul_table
        rows = []
        for basis, group in itertools.groupby(flats, key=lambda f: f.basis):
            offs = _span_coords(self, basis)
            bases = np.array([f.base for f in group], dtype=np.int64)
            pts = add[bases[:, None, :], offs[None, :, :]]
            rows.append(np.sort(self.index(pts), axis=1))
        out = np.concatenate(rows, axis=0)
        out.setflags(write=False)
        return out

    @lru_cache(maxsize=None)
    def flats(self, k: int) -> Tuple["Flat", ...]:
        q, d = self.q, self.d
        if not 0 <= k <= d:
            raise ValueError(f"need 0 <= k <= d, got {k}")
        total = flat_count(q, d, k)
        if total * q ** k > 50 * ENUMERATION_BUDGET:
            raise BudgetExceeded(f"{total} {k}-flats of F_{q}^{d} exceed the enumeration budget")
        out = []
        for basis in _rref_bases(q, d, k):
            pivots = [row.index(next(x for x in row if x)) for row in basis]
            free = [j for j in range(d) if j not in pivots]
            for vals in itertools.product(range(q), repeat=len(free)):
                base = [0] * d
                for j, v in zip(free, vals):
                    base[j] = v
                out.append(Flat(q, d, k, tuple(base), basis))
        out.sort(key=lambda f: (f.basis, f.base))
        return tuple(out)

    @lru_cache(maxsize=None)
    def incidence(self, k: int) -> np.ndarray:
        """For every point, the ids (rows of flat_matrix(k)) of the k-flats through it."""
        M = self.flat_matrix(k)
        per = gaussian_binomial(self.d, k, self.q)
        flat_ids = np.repeat(np.arange(M.shape[0]), M.shape[1])
        order = np.argsort(M.ravel(), kind="stable")
        inc = flat_ids[order].reshape(self.n, per)
        inc.setflags(write=False)
        return inc

    @lru_cache(maxsize=None)
    def member(self, k: int) -> np.ndarray:
        """Boolean (k-flats x points) membership matrix."""
        M = self.flat_matrix(k)
        out = np.zeros((M.shape[0], self.n), dtype=bool)
        out[np.arange(M.shape[0])[:, None], M] = True
        out.setflags(write=False)
        return out

    @lru_cache(maxsize=None)
    def containing(self, j: int, k: int) -> np.ndarray:
        """For every j-flat, the ids of the k-flats (k >= j) that contain it."""
        Mj = self.flat_matrix(j)
        cand = self.incidence(k)[Mj[:, 0]]
        if Mj.shape[1] > 1:
            mem = self.member(k)
            ok = mem[cand[:, :, None], Mj[:, None, 1:]].all(axis=2)
        else:
            ok = np.ones(cand.shape, dtype=bool)
        per = gaussian_binomial(self.d - j, k - j, self.q)
        out = cand[ok].reshape(Mj.shape[0], per)
        out.setflags(write=False)
        return out

    def census(self, k: int, bitmap: np.ndarray) -> np.ndarray:
        """|F ∩ P| for every k-flat F, in flat_matrix order."""
        return bitmap[self.flat_matrix(k)].sum(axis=1)


@lru_cache(maxsize=None)
def space(q: int, d: int) -> Space:
    return Space(q, d)


def _rref_bases(q: int, d: int, k: int):
    """Every k x d reduced row-echelon matrix of rank k over GF(q), as tuples."""
    for pivots in itertools.combinations(range(d), k):
        free = [(i, j) for i in range(k) for j in range(pivots[i] + 1, d) if j not in pivots]
        for vals in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * d for _ in range(k)]
            for i, pc in enumerate(pivots):
                rows[i][pc] = 1
            for (i, j), v in zip(free, vals):
                rows[i][j] = v
            yield tuple(tuple(r) for r in rows)


def _span_coords(sp: Space, basis) -> np.ndarray:
    """Coordinates of every vector in the linear span of basis (q^k x d)."""
    F = sp.field
    add, mul = F.add_table, F.mul_table
    vecs = np.zeros((1, sp.d), dtype=np.int64)
    scal = np.arange(sp.q, dtype=np.int64)
    for b in basis:
        b = np.asarray(b, dtype=np.int64)
        step = mul[scal[:, None], b[None, :]]
        vecs = add[vecs[:, None, :], step[None, :, :]].reshape(-1, sp.d)
    return vecs


# -- linear algebra over GF(q) -----------------------------------------------

def rref(F: FieldSpec, rows: Iterable[Sequence[int]]) -> List[List[int]]:
    """Reduced row-echelon form of the nonzero row space (zero rows dropped)."""
    addt, mult, negt, invt = F.lists
    m = [list(r) for r in rows]
    if not m:
        return []
    ncol = len(m[0])
    out = []
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        iv = invt[m[r][c]]
        m[r] = [mult[iv][x] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = negt[m[i][c]]
                row_r = m[r]
                m[i] = [addt[x][mult[f][y]] for x, y in zip(m[i], row_r)]
        r += 1
        if r == len(m):
            break
    return [row for row in m[:r]]


def linear_rank(F: FieldSpec, rows: Sequence[Sequence[int]]) -> int:
    addt, mult, negt, invt = F.lists
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncol = len(m[0])
    rank = 0
    for c in range(ncol):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        pv = pr[c]
        # fraction-free: row_i <- pv*row_i - m_ic*pivot_row
        for i in range(rank + 1, len(m)):
            a = m[i][c]
            if a:
                na = negt[a]
                m[i] = [addt[mult[pv][x]][mult[na][y]] for x, y in zip(m[i], pr)]
        rank += 1
        if rank == len(m):
            break
    return rank


def affine_rank_coords(F: FieldSpec, pts: Sequence[Sequence[int]]) -> int:
    """Affine rank (= 1 + dim of affine span) of a nonempty list of coordinate tuples."""
    if not pts:
        return 0
    subt = F.sub_table.tolist() if F.q <= 64 else None
    p0 = pts[0]
    if subt is not None:
        diffs = [[subt[a][b] for a, b in zip(p, p0)] for p in pts[1:]]
    else:
        diffs = [[F.sub(a, b) for a, b in zip(p, p0)] for p in pts[1:]]
    return 1 + linear_rank(F, diffs)


def affine_rank(sp: Space, indices: Sequence[int]) -> int:
    cl = sp.coords_list
    return affine_rank_coords(sp.field, [cl[i] for i in indices])


# -- domain types -------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    q: int
    d: int
    coords: Tuple[int, ...]

    @property
    def index(self) -> int:
        return space(self.q, self.d).index_of(self.coords)

    @classmethod
    def from_index(cls, q: int, d: int, index: int) -> "Point":
        return cls(q, d, space(q, d).coords_of(index))


@dataclass(frozen=True)
class Flat:
    q: int
    d: int
    dim: int
    base: Tuple[int, ...]
    basis: Tuple[Tuple[int, ...], ...]

    def __len__(self):
        return self.q ** self.dim

    def points(self) -> np.ndarray:
        sp = space(self.q, self.d)
        F = sp.field
        offs = _span_coords(sp, self.basis)
        pts = F.add_table[np.asarray(self.base, dtype=np.int64)[None, :], offs]
        return np.sort(sp.index(pts))

    def point_set(self) -> "PointSet":
        return PointSet.from_indices(self.q, self.d, self.points())

    def contains(self, coords: Sequence[int]) -> bool:
        F = field_new(self.q)
        diff = [F.sub(int(a), int(b)) for a, b in zip(coords, self.base)]
        return linear_rank(F, list(self.basis) + [diff]) == self.dim


def _canonical_flat(sp: Space, base: Sequence[int], directions: Sequence[Sequence[int]]) -> Flat:
    F = sp.field
    basis = rref(F, directions)
    base = list(base)
    for row in basis:
        pc = next(j for j, x in enumerate(row) if x)
        c = base[pc]
        if c:
            nc = F.neg(c)
            base = [F.add(x, F.mul(nc, y)) for x, y in zip(base, row)]
    return Flat(sp.q, sp.d, len(basis), tuple(base), tuple(tuple(r) for r in basis))


def affine_span(points: Sequence[Point]) -> Flat:
    """Smallest flat containing every point (dim = affine rank - 1)."""
    points = list(points)
    if not points:
        raise ValueError("affine_span needs at least one point")
    q, d = points[0].q, points[0].d
    if any((pt.q, pt.d) != (q, d) for pt in points):
        raise MixedAmbient("points live in different ambient spaces")
    sp = space(q, d)
    F = sp.field
    p0 = points[0].coords
    dirs = [[F.sub(a, b) for a, b in zip(pt.coords, p0)] for pt in points[1:]]
    dirs = [v for v in dirs if any(v)]
    return _canonical_flat(sp, p0, dirs)


def enumerate_flats(q: int, d: int, k: int) -> List[Flat]:
    return list(space(q, d).flats(k))


def hyperplanes_containing(flat: Flat) -> List[Flat]:
    sp = space(flat.q, flat.d)
    if flat.dim > sp.d - 1:
        raise ValueError("a flat of full dimension lies in no hyperplane")
    inc = sp.incidence(sp.d - 1)
    pts = flat.points()
    mem = sp.member(sp.d - 1)
    ids = [h for h in inc[pts[0]].tolist() if mem[h, pts].all()]
    hyper = sp.flats(sp.d - 1)
    return [hyper[i] for i in sorted(ids)]


class PointSet:
    """A subset of F_q^d held as a read-only membership bitmap."""

    __slots__ = ("q", "d", "bitmap", "_size", "_mask")

    def __init__(self, q: int, d: int, bitmap):
        bm = np.asarray(bitmap, dtype=bool)
        if bm.shape != (q ** d,):
            raise ValueError(f"bitmap must have length q^d = {q ** d}")
        if bm.flags.writeable:
            bm = bm.copy()
            bm.setflags(write=False)
        self.q = q
        self.d = d
        self.bitmap = bm
        self._size = int(bm.sum())
        self._mask = None

    @classmethod
    def from_indices(cls, q: int, d: int, indices: Iterable[int]) -> "PointSet":
        bm = np.zeros(q ** d, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= q ** d):
            raise ValueError("point index out of range")
        bm[idx] = True
        return cls(q, d, bm)

    @classmethod
    def from_coords(cls, q: int, d: int, coords: Iterable[Sequence[int]]) -> "PointSet":
        sp = space(q, d)
        return cls.from_indices(q, d, [sp.index_of(c) for c in coords])

    @classmethod
    def full(cls, q: int, d: int) -> "PointSet":
        return cls(q, d, np.ones(q ** d, dtype=bool))

    @classmethod
    def empty(cls, q: int, d: int) -> "PointSet":
        return cls(q, d, np.zeros(q ** d, dtype=bool))

    @classmethod
    def from_mask(cls, q: int, d: int, mask: int) -> "PointSet":
        n = q ** d
        raw = mask.to_bytes((n + 7) // 8, "little")
        bm = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n].astype(bool)
        return cls(q, d, bm)

    def __len__(self):
        return self._size

    @property
    def cardinality(self) -> int:
        return self._size

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bitmap)

    def __iter__(self):
        return iter(self.indices.tolist())

    def __contains__(self, index) -> bool:
        return bool(self.bitmap[int(index)])

    @property
    def mask(self) -> int:
        """The set as a Python integer, bit i set iff point i is a member."""
        if self._mask is None:
            packed = np.packbits(self.bitmap, bitorder="little")
            self._mask = int.from_bytes(packed.tobytes(), "little")
        return self._mask

    def issubset(self, other: "PointSet") -> bool:
        return (self.q, self.d) == (other.q, other.d) and not np.any(self.bitmap & ~other.bitmap)

    def points(self) -> List[Point]:
        sp = space(self.q, self.d)
        return [Point(self.q, self.d, sp.coords_list[i]) for i in self]

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (self.q, self.d) == (other.q, other.d) and np.array_equal(self.bitmap, other.bitmap)

    def __hash__(self):
        return hash((self.q, self.d, self.mask))

    def __repr__(self):
        return f"PointSet(q={self.q}, d={self.d}, size={self._size})"

    # -- text format: "q d" line, then the bitmap as a hex integer ------------
    def to_text(self) -> str:
        n = self.q ** self.d
        width = (n + 3) // 4
        return f"{self.q} {self.d}\n{self.mask:0{width}x}\n"

    @classmethod
    def from_text(cls, text: str) -> "PointSet":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        q, d = (int(x) for x in lines[0].split())
        mask = int(lines[1], 16) if len(lines) > 1 else 0
        if mask >> (q ** d):
            raise ValueError("bitmap has bits beyond q^d")
        return cls.from_mask(q, d, mask)


def read_point_sets(text: str) -> List[PointSet]:
    """Parse consecutive two-line PointSet records."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return [PointSet.from_text("\n".join(lines[i:i + 2])) for i in range(0, len(lines), 2)]


def moment_curve(q: int, d: int) -> PointSet:
    """The q points (x, x^2, ..., x^d)."""
    if d < 1:
        raise ValueError("d must be at least 1")
    F = field_new(q)
    pts = []
    for x in range(q):
        c, cur = [], 1
        for _ in range(d):
            cur = F.mul(cur, x)
            c.append(cur)
        pts.append(c)
    return PointSet.from_coords(q, d, pts)


def greedy_gp_set(q: int, d: int, order: Iterable[int], within: Optional[PointSet] = None) -> PointSet:
    """Scan points in ``order`` and keep each one that leaves the set in general position.

    The result is maximal inside ``within`` (default: all of F_q^d) when
    ``order`` lists every point of it.
    """
    sp = space(q, d)
    inc = sp.incidence(d - 1)
    cnt = np.zeros(sp.flat_matrix(d - 1).shape[0], dtype=np.int64)
    keep = []
    allowed = None if within is None else within.bitmap
    for x in order:
        x = int(x)
        if allowed is not None and not allowed[x]:
            continue
        hs = inc[x]
        if np.all(cnt[hs] < d):
            cnt[hs] += 1
            keep.append(x)
    return PointSet.from_indices(q, d, keep)


def is_evasive(P: PointSet, k: int, c: int) -> bool:
    """True iff every k-flat meets P in at most c points."""
    if not 0 <= k <= P.d - 1:
        raise ValueError(f"need 0 <= k <= d-1, got k={k}")
    if len(P) <= c:
        return True
    if k == 0:
        return c >= 1
    return int(space(P.q, P.d).census(k, P.bitmap).max()) <= c


def is_general_position(P: PointSet) -> bool:
    """No d+1 points of P lie on a common hyperplane."""
    if len(P) <= P.d:
        return True
    return is_evasive(P, P.d - 1, P.d)
