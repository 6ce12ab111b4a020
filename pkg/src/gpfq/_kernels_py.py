"""Pure-Python kernels.  ``_kernels.pyx`` is a line-for-line port; both must
visit search nodes in the same order so that results and node counts agree.

Vertex-set problems here are phrased over a *capacity system*: a list of
blocks (hyperplanes restricted to the point set) each of which may hold at
most ``cap`` chosen vertices.  A set is general position iff it respects
every block capacity with ``cap = d``.
"""
import sys

import numpy as np


def _csr(ptr, idx):
    ptr = list(map(int, ptr))
    idx = list(map(int, idx))
    return [idx[ptr[i]:ptr[i + 1]] for i in range(len(ptr) - 1)]


class _CapState:
    def __init__(self, n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, cand0):
        self.blocks = _csr(blk_ptr, blk_pts)
        self.pblk = _csr(pt_ptr, pt_blk)
        self.cap = cap
        nb = len(self.blocks)
        self.cnt = [0] * nb
        self.cand = [bool(x) for x in cand0]
        self.rem = [sum(1 for u in b if self.cand[u]) for b in self.blocks]
        self.ncand = sum(self.cand)
        self.chosen = []
        self.log = []

    def kill(self, u):
        self.cand[u] = False
        self.ncand -= 1
        self.log.append(u)
        rem = self.rem
        for h in self.pblk[u]:
            rem[h] -= 1

    def add(self, v):
        self.kill(v)
        self.chosen.append(v)
        cap, cnt, cand, blocks = self.cap, self.cnt, self.cand, self.blocks
        for h in self.pblk[v]:
            cnt[h] += 1
            if cnt[h] == cap:
                for u in blocks[h]:
                    if cand[u]:
                        self.kill(u)

    def undo_to(self, mark):
        log, rem, cand, pblk = self.log, self.rem, self.cand, self.pblk
        while len(log) > mark:
            u = log.pop()
            cand[u] = True
            self.ncand += 1
            for h in pblk[u]:
                rem[h] += 1

    def unadd(self, v, mark):
        self.chosen.pop()
        cnt = self.cnt
        for h in self.pblk[v]:
            cnt[h] -= 1
        self.undo_to(mark)


def _intersect_sorted(lists):
    out = lists[0]
    for other in lists[1:]:
        s = set(other)
        out = [x for x in out if x in s]
    return out


def mis_search(n, blk_ptr, blk_pts, pt_ptr, pt_blk, cls_ptr, cls_blk, cap,
               cand0, forced, warm, node_limit):
    """Maximum capacity-respecting subset by branch and bound.

    Returns ``(best_size, best_vertices, nodes, complete)``.  ``forced``
    vertices are committed before the search (symmetry breaking); ``warm``
    is a known feasible set used as the incumbent.
    """
    st = _CapState(n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, cand0)
    classes = _csr(cls_ptr, cls_blk)
    best = list(map(int, warm))
    nodes = 0
    aborted = False
    pencils = []  # one block list per completed window of cap-1 chosen vertices

    def push_pencil():
        k = len(st.chosen)
        if cap >= 2 and k >= cap - 1:
            win = st.chosen[k - (cap - 1):]
            pencils.append(_intersect_sorted([st.pblk[w] for w in win]) if win else [])
            return True
        return False

    def bound():
        cnt, rem = st.cnt, st.rem
        b = len(st.chosen) + st.ncand
        for cl in classes:
            s = 0
            for h in cl:
                c = cnt[h]
                r = rem[h]
                s += c + (r if r < cap - c else cap - c)
            if s < b:
                b = s
        base = cap - 1
        for pen in pencils:
            s = base
            for h in pen:
                extra = cnt[h] - base
                if extra > 0 or rem[h] > 0:
                    s += 1
            if s < cap:
                s = cap
            if s < b:
                b = s
        return b

    def pick():
        cnt, rem, base = st.cnt, st.rem, cap - 1
        bh, br = -1, n + 1
        for pen in pencils:
            for h in pen:
                if cnt[h] == base:
                    r = rem[h]
                    if 0 < r < br:
                        br = r
                        bh = h
        cand = st.cand
        if bh >= 0:
            for u in st.blocks[bh]:
                if cand[u]:
                    return u
        for u in range(n):
            if cand[u]:
                return u
        return -1

    def rec():
        nonlocal nodes, best, aborted
        nodes += 1
        if node_limit >= 0 and nodes > node_limit:
            aborted = True
            return
        if len(st.chosen) > len(best):
            best = list(st.chosen)
        if st.ncand == 0:
            return
        if bound() <= len(best):
            return
        v = pick()
        mark = len(st.log)
        st.add(v)
        pushed = push_pencil()
        rec()
        if pushed:
            pencils.pop()
        st.unadd(v, mark)
        if aborted:
            return
        mark = len(st.log)
        st.kill(v)
        rec()
        st.undo_to(mark)

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * n + 1000))
    try:
        for v in forced:
            v = int(v)
            if not st.cand[v]:
                raise ValueError("forced vertex is not a feasible candidate")
            st.add(v)
            push_pencil()
        rec()
    finally:
        sys.setrecursionlimit(old)
    return len(best), np.array(sorted(best), dtype=np.int64), nodes, not aborted


def count_independent(n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, cand0, max_size, node_limit):
    """Number of capacity-respecting subsets of each size 0..max_size.

    Returns ``(counts, nodes, complete)``.
    """
    st = _CapState(n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, cand0)
    counts = [0] * (max_size + 1)
    nodes = 0
    aborted = False

    def rec(start):
        nonlocal nodes, aborted
        nodes += 1
        if node_limit >= 0 and nodes > node_limit:
            aborted = True
            return
        counts[len(st.chosen)] += 1
        if len(st.chosen) == max_size:
            return
        outer = len(st.log)
        for u in range(start, n):
            if not st.cand[u]:
                continue
            mark = len(st.log)
            st.add(u)
            rec(u + 1)
            st.unadd(u, mark)
            if aborted:
                break
            st.kill(u)
        st.undo_to(outer)

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * n + 1000))
    try:
        rec(0)
    finally:
        sys.setrecursionlimit(old)
    return np.array(counts, dtype=object), nodes, not aborted


def container_tree(n, r, edges, inc_ptr, inc_edges, limit, size_target, max_leaves):
    """Enumerate the fingerprint container family of an r-uniform hypergraph.

    Every independent set I follows one root-to-leaf path: the current
    maximum-degree vertex v (ties to the lowest id) of the available set A
    is either in I (moved to the fingerprint S, and every vertex completing
    an edge with S is discarded) or not in I (discarded).  A leaf is reached
    once the induced edge count of A ∪ S is at most ``limit`` and
    ``|A ∪ S| <= size_target``, or A is exhausted.

    Returns ``(members, fingerprint_sizes, leaf_edges, nodes, complete)``
    where ``members`` is a (leaves x n) uint8 matrix of A ∪ S.
    """
    edges = [list(map(int, e)) for e in np.asarray(edges).reshape(-1, r)] if r else []
    inc = _csr(inc_ptr, inc_edges)
    E = len(edges)
    dead = [0] * E
    scount = [0] * E
    deg = [len(inc[v]) for v in range(n)]
    inA = [True] * n
    inS = [False] * n
    alive = E
    size = n
    fp = []
    leaves, fps, leaf_edges = [], [], []
    nodes = 0
    aborted = False
    log = []

    def remove(u):
        nonlocal alive, size
        inA[u] = False
        size -= 1
        log.append(u)
        for e in inc[u]:
            if dead[e] == 0:
                alive -= 1
                for w in edges[e]:
                    deg[w] -= 1
            dead[e] += 1

    def restore_to(mark):
        nonlocal alive, size
        while len(log) > mark:
            u = log.pop()
            for e in inc[u]:
                dead[e] -= 1
                if dead[e] == 0:
                    alive += 1
                    for w in edges[e]:
                        deg[w] += 1
            inA[u] = True
            size += 1

    def rec():
        nonlocal nodes, aborted
        nodes += 1
        v = -1
        best = -1
        for u in range(n):
            if inA[u] and deg[u] > best:
                best = deg[u]
                v = u
        if v < 0 or (alive <= limit and size <= size_target):
            if len(leaves) >= max_leaves:
                aborted = True
                return
            row = np.zeros(n, dtype=np.uint8)
            for u in range(n):
                if inA[u] or inS[u]:
                    row[u] = 1
            leaves.append(row)
            fps.append(len(fp))
            leaf_edges.append(alive)
            return
        # v not in I
        mark = len(log)
        remove(v)
        rec()
        restore_to(mark)
        if aborted:
            return
        # v in I
        mark = len(log)
        inA[v] = False
        inS[v] = True
        fp.append(v)
        for e in inc[v]:
            scount[e] += 1
            if scount[e] == r - 1 and dead[e] == 0:
                for w in edges[e]:
                    if not inS[w]:
                        if inA[w]:
                            remove(w)
                        break
        rec()
        fp.pop()
        for e in inc[v]:
            scount[e] -= 1
        restore_to(mark)
        inS[v] = False
        inA[v] = True

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * n + 1000))
    try:
        rec()
    finally:
        sys.setrecursionlimit(old)
    members = np.array(leaves, dtype=np.uint8).reshape(len(leaves), n)
    return members, np.array(fps, dtype=np.int64), np.array(leaf_edges, dtype=np.int64), nodes, not aborted


def _rank(rows, d, add, mul, neg, inv):
    m = [list(x) for x in rows]
    rank = 0
    for c in range(d):
        piv = -1
        for i in range(rank, len(m)):
            if m[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        iv = inv[pr[c]]
        for i in range(rank + 1, len(m)):
            a = m[i][c]
            if a:
                f = neg[mul[a][iv]]
                m[i] = [add[x][mul[f][y]] for x, y in zip(m[i], pr)]
        rank += 1
    return rank


def tuple_census(coords, add_t, mul_t, neg_t, inv_t, r, node_limit):
    """Brute-force count of r-subsets with affine rank < r (dependent) and of
    dependent r-subsets whose proper subsets are all independent (critical).

    Returns ``(dependent, critical, visited, complete)``.
    """
    pts = [tuple(map(int, p)) for p in np.asarray(coords)]
    N = len(pts)
    d = len(pts[0]) if N else 0
    add, mul, neg, inv = (t.tolist() for t in (add_t, mul_t, neg_t, inv_t))
    sub = [[add[a][neg[b]] for b in range(len(neg))] for a in range(len(neg))]

    def arank(idx):
        p0 = pts[idx[0]]
        rows = [[sub[x][y] for x, y in zip(pts[i], p0)] for i in idx[1:]]
        return 1 + _rank(rows, d, add, mul, neg, inv)

    dependent = critical = visited = 0
    aborted = False
    stack = []

    def rec(start):
        nonlocal dependent, critical, visited, aborted
        for i in range(start, N):
            stack.append(i)
            if len(stack) == r:
                visited += 1
                if node_limit >= 0 and visited > node_limit:
                    aborted = True
                    stack.pop()
                    return
                if arank(stack) < r:
                    dependent += 1
                    ok = True
                    for j in range(r):
                        sub_idx = stack[:j] + stack[j + 1:]
                        if arank(sub_idx) < r - 1:
                            ok = False
                            break
                    if ok:
                        critical += 1
            else:
                rec(i + 1)
            stack.pop()
            if aborted:
                return

    if r >= 1:
        rec(0)
    return dependent, critical, visited, not aborted
