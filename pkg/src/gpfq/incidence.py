"""The point-hyperplane incidence graph of F_q^d and its spectral checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sps

from .errors import IdentityFailed
from .geometry import PointSet, space

# dense n x H integer blocks above this many bytes are verified by sampling
MEMORY_CAP = 2 * 1024 ** 3
SAMPLED_ENTRIES = 10 ** 6  # checked as whole random columns of M M^T M


@dataclass(frozen=True, eq=False)
class IncidenceGraph:
    """Bipartite graph points x hyperplanes.

    ``hyperplanes[h]`` lists the points on hyperplane h (rows are in canonical
    flat order, so parallel classes are consecutive blocks of q rows).
    ``delta1``/``delta2`` are the nominal degrees of the full geometry; a
    tampered graph keeps them so identity checks can detect the damage.
    """
    q: int
    d: int
    hyperplanes: tuple  # tuple of int arrays
    delta1: int
    delta2: int
    _matrix: Optional[sps.csr_matrix] = field(default=None, repr=False, compare=False)

    @property
    def n_points(self) -> int:
        return self.q ** self.d

    @property
    def n_hyperplanes(self) -> int:
        return len(self.hyperplanes)

    @property
    def matrix(self) -> sps.csr_matrix:
        """Point x hyperplane 0/1 incidence matrix (int64)."""
        if self._matrix is None:
            rows = np.concatenate([np.asarray(h, dtype=np.int64) for h in self.hyperplanes])
            cols = np.repeat(np.arange(self.n_hyperplanes), [len(h) for h in self.hyperplanes])
            m = sps.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)),
                               shape=(self.n_points, self.n_hyperplanes))
            object.__setattr__(self, "_matrix", m)
        return self._matrix

    def point_degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def hyperplane_degrees(self) -> np.ndarray:
        return np.array([len(h) for h in self.hyperplanes])

    def without_incidence(self, point: int, hyperplane: int) -> "IncidenceGraph":
        hs = list(self.hyperplanes)
        hs[hyperplane] = np.array([x for x in hs[hyperplane] if x != point], dtype=np.int64)
        return IncidenceGraph(self.q, self.d, tuple(hs), self.delta1, self.delta2)

    @property
    def lambda2_closed(self) -> float:
        return self.q ** ((self.d - 1) / 2)


def build_incidence(q: int, d: int) -> IncidenceGraph:
    sp = space(q, d)
    M = sp.flat_matrix(d - 1)
    return IncidenceGraph(q, d, tuple(np.asarray(r) for r in M),
                          (q ** d - 1) // (q - 1), q ** (d - 1))


@dataclass
class IdentityReport:
    ok: bool
    sampled: bool
    checked_entries: int
    first_violation: Optional[tuple] = None  # (point, hyperplane, got, expected)


def cube_identity_report(G: IncidenceGraph, *, memory_cap: int = MEMORY_CAP,
                         seed: int = 0) -> IdentityReport:
    """Check A^3 = (delta1-1) q^(d-2) [[0,J],[J^T,0]] + delta2 A exactly.

    The point-point and hyperplane-hyperplane blocks of A^3 vanish for any
    bipartite graph, and the hyperplane-point block is the transpose of the
    point-hyperplane block, so only X = M M^T M needs checking.
    """
    M = G.matrix
    n, H = M.shape
    a = (G.delta1 - 1) * G.q ** (G.d - 2)
    b = G.delta2
    MT = M.T.tocsr()
    if n * H * 8 <= memory_cap:
        checked = 0
        chunk = max(1, min(H, memory_cap // (8 * max(n, 1) * 4)))
        for c0 in range(0, H, chunk):
            cols = slice(c0, min(H, c0 + chunk))
            X = (M @ (MT @ M[:, cols])).toarray()
            expect = a + b * M[:, cols].toarray()
            bad = np.argwhere(X != expect)
            checked += X.size
            if bad.size:
                i, j = bad[0]
                return IdentityReport(False, False, checked,
                                      (int(i), int(c0 + j), int(X[i, j]), int(expect[i, j])))
        return IdentityReport(True, False, checked)
    # sampled fallback: whole random columns of X, exactly, until 10^6 entries are covered
    rng = np.random.default_rng(seed)
    ncols = min(H, -(-SAMPLED_ENTRIES // n))
    cols = np.sort(rng.choice(H, size=ncols, replace=False))
    checked = 0
    step = max(1, memory_cap // (8 * n * 4)) if memory_cap >= 8 * n * 4 else 1
    for c0 in range(0, ncols, step):
        cs = cols[c0:c0 + step]
        X = (M @ (MT @ M[:, cs])).toarray()
        expect = a + b * M[:, cs].toarray()
        bad = np.argwhere(X != expect)
        checked += X.size
        if bad.size:
            i, j = bad[0]
            return IdentityReport(False, True, checked, (int(i), int(cs[j]), int(X[i, j]), int(expect[i, j])))
    return IdentityReport(True, True, checked)


def verify_cube_identity(G: IncidenceGraph) -> bool:
    return cube_identity_report(G).ok


def second_eigenvalue(G: IncidenceGraph) -> float:
    """q^((d-1)/2), returned only after the cube identity has been verified."""
    if not verify_cube_identity(G):
        raise IdentityFailed(f"cube identity fails for I_{{{G.q},{G.d}}}")
    return G.lambda2_closed


def second_eigenvalue_numeric(G: IncidenceGraph) -> float:
    """Second largest adjacency eigenvalue = second singular value of M.

    Dense SVD for small graphs, ARPACK otherwise.
    """
    M = G.matrix.astype(np.float64)
    if min(M.shape) <= 2000:
        s = np.linalg.svd(M.toarray(), compute_uv=False)
    else:
        from scipy.sparse.linalg import svds
        s = np.sort(svds(M, k=3, return_singular_vectors=False, random_state=0))[::-1]
    return float(s[1])


def _as_indices(S, size: int) -> np.ndarray:
    if isinstance(S, PointSet):
        return S.indices
    idx = np.unique(np.asarray(list(S), dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= size):
        raise ValueError("subset index out of range")
    return idx


def mixing_deviation(G: IncidenceGraph, S, T):
    """(e(S,T), |e(S,T) - delta2 |S||T| / q^d|, lambda2 sqrt(|S||T|)) for the full geometry."""
    s = _as_indices(S, G.n_points)
    t = _as_indices(T, G.n_hyperplanes)
    indicator = np.zeros(G.n_points, dtype=np.int64)
    indicator[s] = 1
    e = int(sum(int(indicator[G.hyperplanes[h]].sum()) for h in t.tolist()))
    expected = G.delta2 * len(s) * len(t) / G.n_points
    deviation = abs(e - expected)
    bound = G.lambda2_closed * math.sqrt(len(s) * len(t))
    return e, deviation, bound


def hyperplane_census(P: PointSet) -> np.ndarray:
    return space(P.q, P.d).census(P.d - 1, P.bitmap)


def atypical_hyperplanes(G: IncidenceGraph, P: PointSet) -> int:
    """Hyperplanes meeting P in fewer than |P|/(2q) or more than 2|P|/q points."""
    if (P.q, P.d) != (G.q, G.d):
        raise ValueError("point set and graph live in different spaces")
    if len(P) < 1:
        raise ValueError("P must be nonempty")
    m = hyperplane_census(P)
    n, q = len(P), G.q
    # exact integer form of m < n/(2q) or m > 2n/q
    return int(np.count_nonzero((2 * q * m < n) | (q * m > 2 * n)))


def atypical_bound(q: int, d: int, size: int) -> float:
    return 8 * q ** (d + 1) / size
