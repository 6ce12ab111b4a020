# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; a port of ``_kernels_py`` with identical traversal order."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64


def _i32(a):
    a = np.ascontiguousarray(a, dtype=np.int32)
    return a if a.flags.writeable else a.copy()


cdef class _Cap:
    cdef int n, nb, cap, ncand, nchosen, nlog
    cdef i32[::1] bptr, bpts, pptr, pblk, cnt, rem, log, chosen
    cdef cnp.uint8_t[::1] cand

    def __init__(self, int n, blk_ptr, blk_pts, pt_ptr, pt_blk, int cap, cand0):
        cdef int h, j
        self.n = n
        self.cap = cap
        self.bptr = _i32(blk_ptr)
        self.bpts = _i32(blk_pts)
        self.pptr = _i32(pt_ptr)
        self.pblk = _i32(pt_blk)
        self.nb = self.bptr.shape[0] - 1
        self.cnt = np.zeros(self.nb, dtype=np.int32)
        self.rem = np.zeros(self.nb, dtype=np.int32)
        self.cand = np.ascontiguousarray(cand0, dtype=np.uint8).copy()
        self.log = np.zeros(n + 1, dtype=np.int32)
        self.chosen = np.zeros(n + 1, dtype=np.int32)
        self.ncand = 0
        for j in range(n):
            if self.cand[j]:
                self.ncand += 1
        for h in range(self.nb):
            for j in range(self.bptr[h], self.bptr[h + 1]):
                if self.cand[self.bpts[j]]:
                    self.rem[h] += 1
        self.nchosen = 0
        self.nlog = 0

    cdef inline void kill(self, int u) nogil:
        cdef int j
        self.cand[u] = 0
        self.ncand -= 1
        self.log[self.nlog] = u
        self.nlog += 1
        for j in range(self.pptr[u], self.pptr[u + 1]):
            self.rem[self.pblk[j]] -= 1

    cdef inline void add(self, int v) nogil:
        cdef int j, h, t, u
        self.kill(v)
        self.chosen[self.nchosen] = v
        self.nchosen += 1
        for j in range(self.pptr[v], self.pptr[v + 1]):
            h = self.pblk[j]
            self.cnt[h] += 1
            if self.cnt[h] == self.cap:
                for t in range(self.bptr[h], self.bptr[h + 1]):
                    u = self.bpts[t]
                    if self.cand[u]:
                        self.kill(u)

    cdef inline void undo_to(self, int mark) nogil:
        cdef int u, j
        while self.nlog > mark:
            self.nlog -= 1
            u = self.log[self.nlog]
            self.cand[u] = 1
            self.ncand += 1
            for j in range(self.pptr[u], self.pptr[u + 1]):
                self.rem[self.pblk[j]] += 1

    cdef inline void unadd(self, int v, int mark) nogil:
        cdef int j
        self.nchosen -= 1
        for j in range(self.pptr[v], self.pptr[v + 1]):
            self.cnt[self.pblk[j]] -= 1
        self.undo_to(mark)


cdef class _Mis:
    cdef _Cap st
    cdef int n, cap, nbest, aborted
    cdef i64 nodes, node_limit
    cdef i32[::1] cptr, cblk, best, pen_buf, pen_ptr, mark
    cdef int npen

    cdef int push_pencil(self):
        cdef _Cap st = self.st
        cdef int k = st.nchosen, w0, j, t, h, start, cap = self.cap
        if cap < 2 or k < cap - 1:
            return 0
        start = self.pen_ptr[self.npen]
        for t in range(k - (cap - 1) + 1, k):
            w0 = st.chosen[t]
            for j in range(st.pptr[w0], st.pptr[w0 + 1]):
                self.mark[st.pblk[j]] += 1
        w0 = st.chosen[k - (cap - 1)]
        for j in range(st.pptr[w0], st.pptr[w0 + 1]):
            h = st.pblk[j]
            if self.mark[h] == cap - 2:
                self.pen_buf[start] = h
                start += 1
        for t in range(k - (cap - 1) + 1, k):
            w0 = st.chosen[t]
            for j in range(st.pptr[w0], st.pptr[w0 + 1]):
                self.mark[st.pblk[j]] = 0
        self.npen += 1
        self.pen_ptr[self.npen] = start
        return 1

    cdef int bound(self):
        cdef _Cap st = self.st
        cdef int b = st.nchosen + st.ncand, s, c, r, i, j, h, cap = self.cap, base = cap - 1
        for i in range(self.cptr.shape[0] - 1):
            s = 0
            for j in range(self.cptr[i], self.cptr[i + 1]):
                h = self.cblk[j]
                c = st.cnt[h]
                r = st.rem[h]
                s += c + (r if r < cap - c else cap - c)
            if s < b:
                b = s
        for i in range(self.npen):
            s = base
            for j in range(self.pen_ptr[i], self.pen_ptr[i + 1]):
                h = self.pen_buf[j]
                if st.cnt[h] - base > 0 or st.rem[h] > 0:
                    s += 1
            if s < cap:
                s = cap
            if s < b:
                b = s
        return b

    cdef int pick(self):
        cdef _Cap st = self.st
        cdef int bh = -1, br = self.n + 1, i, j, h, r, u, base = self.cap - 1
        for i in range(self.npen):
            for j in range(self.pen_ptr[i], self.pen_ptr[i + 1]):
                h = self.pen_buf[j]
                if st.cnt[h] == base:
                    r = st.rem[h]
                    if 0 < r < br:
                        br = r
                        bh = h
        if bh >= 0:
            for j in range(st.bptr[bh], st.bptr[bh + 1]):
                u = st.bpts[j]
                if st.cand[u]:
                    return u
        for u in range(self.n):
            if st.cand[u]:
                return u
        return -1

    cdef void rec(self):
        cdef _Cap st = self.st
        cdef int v, mark, pushed, i
        self.nodes += 1
        if self.node_limit >= 0 and self.nodes > self.node_limit:
            self.aborted = 1
            return
        if st.nchosen > self.nbest:
            self.nbest = st.nchosen
            for i in range(st.nchosen):
                self.best[i] = st.chosen[i]
        if st.ncand == 0:
            return
        if self.bound() <= self.nbest:
            return
        v = self.pick()
        mark = st.nlog
        st.add(v)
        pushed = self.push_pencil()
        self.rec()
        if pushed:
            self.npen -= 1
        st.unadd(v, mark)
        if self.aborted:
            return
        mark = st.nlog
        st.kill(v)
        self.rec()
        st.undo_to(mark)


def mis_search(int n, blk_ptr, blk_pts, pt_ptr, pt_blk, cls_ptr, cls_blk, int cap,
               cand0, forced, warm, long long node_limit):
    cdef _Mis m = _Mis.__new__(_Mis)
    cdef int v, maxdeg, i
    m.st = _Cap(n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, cand0)
    m.n = n
    m.cap = cap
    m.cptr = _i32(cls_ptr)
    m.cblk = _i32(cls_blk)
    warm = [int(x) for x in warm]
    m.best = np.zeros(n + 1, dtype=np.int32)
    for i, v in enumerate(warm):
        m.best[i] = v
    m.nbest = len(warm)
    pp = np.asarray(pt_ptr, dtype=np.int64)
    maxdeg = int((pp[1:] - pp[:-1]).max()) if n else 0
    m.pen_buf = np.zeros((n + 2) * (maxdeg + 1), dtype=np.int32)
    m.pen_ptr = np.zeros(n + 3, dtype=np.int32)
    m.mark = np.zeros(max(m.st.nb, 1), dtype=np.int32)
    m.npen = 0
    m.nodes = 0
    m.node_limit = node_limit
    m.aborted = 0
    for v in forced:
        if not m.st.cand[v]:
            raise ValueError("forced vertex is not a feasible candidate")
        m.st.add(v)
        m.push_pencil()
    m.rec()
    best = np.sort(np.asarray(m.best[:m.nbest], dtype=np.int64))
    return m.nbest, best, m.nodes, not m.aborted


cdef class _Count:
    cdef _Cap st
    cdef int n, max_size, aborted
    cdef i64 nodes, node_limit
    cdef i64[::1] counts

    cdef void rec(self, int start):
        cdef _Cap st = self.st
        cdef int outer, mark, u
        self.nodes += 1
        if self.node_limit >= 0 and self.nodes > self.node_limit:
            self.aborted = 1
            return
        self.counts[st.nchosen] += 1
        if st.nchosen == self.max_size:
            return
        outer = st.nlog
        for u in range(start, self.n):
            if not st.cand[u]:
                continue
            mark = st.nlog
            st.add(u)
            self.rec(u + 1)
            st.unadd(u, mark)
            if self.aborted:
                break
            st.kill(u)
        st.undo_to(outer)


def count_independent(int n, blk_ptr, blk_pts, pt_ptr, pt_blk, int cap, cand0, int max_size,
                      long long node_limit):
    cdef _Count c = _Count.__new__(_Count)
    c.st = _Cap(n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, cand0)
    c.n = n
    c.max_size = max_size
    c.counts = np.zeros(max_size + 1, dtype=np.int64)
    c.nodes = 0
    c.node_limit = node_limit
    c.aborted = 0
    c.rec(0)
    counts = np.array([int(x) for x in c.counts], dtype=object)
    return counts, c.nodes, not c.aborted


cdef class _Tree:
    cdef int n, r, size, size_target, nfp, nlog, aborted
    cdef i64 alive, limit, nodes, max_leaves
    cdef i32[::1] edges, iptr, iedge, dead, scount, log
    cdef i64[::1] deg
    cdef cnp.uint8_t[::1] inA, inS
    cdef list leaves, fps, leaf_edges

    cdef void remove(self, int u):
        cdef int j, e, t
        self.inA[u] = 0
        self.size -= 1
        self.log[self.nlog] = u
        self.nlog += 1
        for j in range(self.iptr[u], self.iptr[u + 1]):
            e = self.iedge[j]
            if self.dead[e] == 0:
                self.alive -= 1
                for t in range(e * self.r, e * self.r + self.r):
                    self.deg[self.edges[t]] -= 1
            self.dead[e] += 1

    cdef void restore_to(self, int mark):
        cdef int u, j, e, t
        while self.nlog > mark:
            self.nlog -= 1
            u = self.log[self.nlog]
            for j in range(self.iptr[u], self.iptr[u + 1]):
                e = self.iedge[j]
                self.dead[e] -= 1
                if self.dead[e] == 0:
                    self.alive += 1
                    for t in range(e * self.r, e * self.r + self.r):
                        self.deg[self.edges[t]] += 1
            self.inA[u] = 1
            self.size += 1

    cdef void rec(self):
        cdef int v = -1, u, mark, j, e, t, w
        cdef i64 best = -1
        self.nodes += 1
        for u in range(self.n):
            if self.inA[u] and self.deg[u] > best:
                best = self.deg[u]
                v = u
        if v < 0 or (self.alive <= self.limit and self.size <= self.size_target):
            if len(self.leaves) >= self.max_leaves:
                self.aborted = 1
                return
            row = np.zeros(self.n, dtype=np.uint8)
            for u in range(self.n):
                if self.inA[u] or self.inS[u]:
                    row[u] = 1
            self.leaves.append(row)
            self.fps.append(self.nfp)
            self.leaf_edges.append(self.alive)
            return
        mark = self.nlog
        self.remove(v)
        self.rec()
        self.restore_to(mark)
        if self.aborted:
            return
        mark = self.nlog
        self.inA[v] = 0
        self.inS[v] = 1
        self.nfp += 1
        for j in range(self.iptr[v], self.iptr[v + 1]):
            e = self.iedge[j]
            self.scount[e] += 1
            if self.scount[e] == self.r - 1 and self.dead[e] == 0:
                for t in range(e * self.r, e * self.r + self.r):
                    w = self.edges[t]
                    if not self.inS[w]:
                        if self.inA[w]:
                            self.remove(w)
                        break
        self.rec()
        self.nfp -= 1
        for j in range(self.iptr[v], self.iptr[v + 1]):
            self.scount[self.iedge[j]] -= 1
        self.restore_to(mark)
        self.inS[v] = 0
        self.inA[v] = 1


def container_tree(int n, int r, edges, inc_ptr, inc_edges, long long limit, int size_target,
                   long long max_leaves):
    cdef _Tree t = _Tree.__new__(_Tree)
    cdef int E
    t.n = n
    t.r = r
    t.edges = _i32(np.asarray(edges).reshape(-1))
    E = t.edges.shape[0] // r if r else 0
    t.iptr = _i32(inc_ptr)
    t.iedge = _i32(inc_edges)
    t.dead = np.zeros(max(E, 1), dtype=np.int32)
    t.scount = np.zeros(max(E, 1), dtype=np.int32)
    ip = np.asarray(inc_ptr, dtype=np.int64)
    t.deg = (ip[1:] - ip[:-1]).astype(np.int64)
    t.inA = np.ones(n, dtype=np.uint8)
    t.inS = np.zeros(n, dtype=np.uint8)
    t.log = np.zeros(n + 1, dtype=np.int32)
    t.alive = E
    t.size = n
    t.size_target = size_target
    t.limit = limit
    t.max_leaves = max_leaves
    t.nfp = 0
    t.nlog = 0
    t.nodes = 0
    t.aborted = 0
    t.leaves, t.fps, t.leaf_edges = [], [], []
    t.rec()
    members = np.array(t.leaves, dtype=np.uint8).reshape(len(t.leaves), n)
    return (members, np.array(t.fps, dtype=np.int64), np.array(t.leaf_edges, dtype=np.int64),
            t.nodes, not t.aborted)


cdef int _rank(int[:, ::1] m, int nrows, int d, i32[:, ::1] add, i32[:, ::1] mul,
               i32[::1] neg, i32[::1] inv) nogil:
    cdef int rank = 0, c, i, piv, j, tmp, a, f, iv
    for c in range(d):
        piv = -1
        for i in range(rank, nrows):
            if m[i, c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(d):
                tmp = m[rank, j]
                m[rank, j] = m[piv, j]
                m[piv, j] = tmp
        iv = inv[m[rank, c]]
        for i in range(rank + 1, nrows):
            a = m[i, c]
            if a:
                f = neg[mul[a, iv]]
                for j in range(d):
                    m[i, j] = add[m[i, j], mul[f, m[rank, j]]]
        rank += 1
    return rank


cdef class _Census:
    cdef int N, d, r, aborted
    cdef i64 dependent, critical, visited, node_limit
    cdef i32[:, ::1] pts, add, mul
    cdef i32[::1] neg, inv
    cdef int[::1] stack
    cdef int[:, ::1] work
    cdef int[::1] sel

    cdef int arank(self, int skip):
        # affine rank of the stack with position ``skip`` left out (-1: none)
        cdef int k = 0, i, j, p0 = -1, nrows = 0
        for i in range(self.r):
            if i == skip:
                continue
            if p0 < 0:
                p0 = self.stack[i]
                continue
            for j in range(self.d):
                self.work[nrows, j] = self.add[self.pts[self.stack[i], j], self.neg[self.pts[p0, j]]]
            nrows += 1
        return 1 + _rank(self.work, nrows, self.d, self.add, self.mul, self.neg, self.inv)

    cdef void rec(self, int start, int depth):
        cdef int i, j, ok
        for i in range(start, self.N):
            self.stack[depth] = i
            if depth + 1 == self.r:
                self.visited += 1
                if self.node_limit >= 0 and self.visited > self.node_limit:
                    self.aborted = 1
                    return
                if self.arank(-1) < self.r:
                    self.dependent += 1
                    ok = 1
                    for j in range(self.r):
                        if self.arank(j) < self.r - 1:
                            ok = 0
                            break
                    if ok:
                        self.critical += 1
            else:
                self.rec(i + 1, depth + 1)
            if self.aborted:
                return


def tuple_census(coords, add_t, mul_t, neg_t, inv_t, int r, long long node_limit):
    cdef _Census c = _Census.__new__(_Census)
    pts = np.ascontiguousarray(coords, dtype=np.int32)
    c.N = pts.shape[0]
    c.d = pts.shape[1] if pts.ndim == 2 and c.N else 0
    if c.N == 0:
        pts = np.zeros((0, 1), dtype=np.int32)
    c.pts = pts
    c.r = r
    c.add = _i32(add_t)
    c.mul = _i32(mul_t)
    c.neg = _i32(neg_t)
    c.inv = _i32(inv_t)
    c.stack = np.zeros(max(r, 1), dtype=np.intc)
    c.work = np.zeros((max(r, 1), max(c.d, 1)), dtype=np.intc)
    c.dependent = c.critical = c.visited = 0
    c.node_limit = node_limit
    c.aborted = 0
    if r >= 1:
        c.rec(0, 0)
    return int(c.dependent), int(c.critical), int(c.visited), not c.aborted
