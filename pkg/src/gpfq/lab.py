"""Random Turán experiments: p-random samples, exact and bounded alpha,
phase sweeps, exhaustive counts of general position sets, and first-moment
bounds from container families.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import BudgetExceeded
from .geometry import PointSet, is_general_position, moment_curve, space
from .parallel import pmap
from .supersat import build_coplanar_hypergraph, count_coplanar

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_BUDGET = 10 ** 7


# -- randomness ---------------------------------------------------------------

def splitmix64(x: int) -> int:
    """Scalar reference of the per-point mixer (finalizer of SplitMix64)."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def uniform_scalar(seed: int, i: int) -> float:
    return (splitmix64((seed & MASK64) + (i + 1) * GOLDEN) >> 11) * 2.0 ** -53


def uniforms(seed: int, n: int) -> np.ndarray:
    """U(seed, i) for i < n: splitmix64 of seed + (i+1)*golden, top 53 bits."""
    i = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + i * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def sample_random_set(q: int, d: int, p: float, seed: int) -> PointSet:
    """S_p: point i is kept iff U(seed, i) < p.

    One seed gives nested samples across p, so sweeps are monotonically coupled.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return PointSet(q, d, uniforms(seed, q ** d) < p)


def sample_subset(q: int, d: int, size: int, seed: int) -> PointSet:
    """A uniformly random subset of exactly ``size`` points (the smallest U values)."""
    n = q ** d
    if not 0 <= size <= n:
        raise ValueError(f"size must lie in [0, {n}]")
    order = np.argsort(uniforms(seed, n), kind="stable")
    return PointSet.from_indices(q, d, order[:size])


# -- capacity system shared by the solvers -----------------------------------

def _capacity_system(P: PointSet):
    """Hyperplanes restricted to P, as CSR arrays over local point ids."""
    q, d = P.q, P.d
    sp = space(q, d)
    M = sp.flat_matrix(d - 1)
    idx = P.indices
    pos = np.full(sp.n, -1, dtype=np.int64)
    pos[idx] = np.arange(len(idx))
    loc = pos[M]
    sizes = (loc >= 0).sum(axis=1)
    blk_ptr = np.concatenate([[0], np.cumsum(sizes)])
    blk_pts = loc[loc >= 0]
    inc = sp.incidence(d - 1)[idx]
    pt_ptr = np.arange(0, inc.size + 1, inc.shape[1]) if len(idx) else np.zeros(1, dtype=np.int64)
    pt_blk = inc.ravel()
    H = M.shape[0]
    cls_ptr = np.arange(0, H + 1, q)
    cls_blk = np.arange(H)
    return blk_ptr, blk_pts, pt_ptr, pt_blk, cls_ptr, cls_blk, sizes


def cover_upper_bound(P: PointSet) -> int:
    """min(|P|, min over parallel classes of sum_h min(d, |h ∩ P|))."""
    if len(P) == 0:
        return 0
    m = space(P.q, P.d).census(P.d - 1, P.bitmap)
    per_class = np.minimum(m, P.d).reshape(-1, P.q).sum(axis=1)
    return int(min(len(P), per_class.min()))


@dataclass
class AlphaResult:
    lower: int
    upper: int
    exact: bool
    witness: PointSet
    nodes: int


def _frame(q: int, d: int) -> List[int]:
    """Origin and unit vectors; any general position set of size > d maps onto them."""
    return [0] + [q ** (d - i) for i in range(1, d + 1)]


def alpha_search(P: PointSet, budget: Optional[int] = None, warm: Optional[PointSet] = None) -> AlphaResult:
    """Branch and bound for the largest general position subset of P."""
    q, d = P.q, P.d
    n = len(P)
    if n <= d:
        return AlphaResult(n, n, True, P, 0)
    blk_ptr, blk_pts, pt_ptr, pt_blk, cls_ptr, cls_blk, _ = _capacity_system(P)
    idx = P.indices
    pos = {int(v): i for i, v in enumerate(idx)}
    full = n == q ** d
    forced = [pos[v] for v in _frame(q, d)] if full else []
    warm_local: List[int] = []
    candidates = [warm] if warm is not None else []
    if full:
        candidates.append(moment_curve(q, d))
    for W in candidates:
        if W is not None and W.issubset(P) and is_general_position(W) and len(W) > len(warm_local):
            warm_local = [pos[int(v)] for v in W.indices]
    limit = -1 if budget is None else int(budget)
    size, best, nodes, complete = kernels.mis_search(
        n, blk_ptr, blk_pts, pt_ptr, pt_blk, cls_ptr, cls_blk, d,
        np.ones(n, dtype=np.uint8), forced, warm_local, limit)
    witness = PointSet.from_indices(q, d, idx[best])
    upper = size if complete else max(size, cover_upper_bound(P))
    return AlphaResult(size, upper, complete, witness, int(nodes))


def alpha_exact(P: PointSet, budget: Optional[int] = None) -> int:
    res = alpha_search(P, budget)
    if not res.exact:
        raise BudgetExceeded(f"alpha search exceeded {budget} nodes", partial=res)
    return res.lower


def alpha_deletion_lower(P: PointSet) -> int:
    """|P| minus a greedy hitting set of the coplanar tuples (max degree first, lowest index on ties)."""
    H = build_coplanar_hypergraph(P)
    if len(H) == 0:
        return len(P)
    deg = H.degrees().astype(np.int64)
    alive = np.ones(len(H), dtype=bool)
    ptr, inc = H.incidence_csr()
    left = len(H)
    deleted = 0
    while left:
        v = int(np.argmax(deg))
        e = inc[ptr[v]:ptr[v + 1]]
        e = e[alive[e]]
        alive[e] = False
        left -= len(e)
        np.subtract.at(deg, H.edges[e].ravel(), 1)
        deg[v] = -1
        deleted += 1
    return len(P) - deleted


# -- phase sweep --------------------------------------------------------------

@dataclass
class TrialRecord:
    q: int
    d: int
    p: float
    seed: int
    trial: int
    sample_size: int
    alpha_lower: int
    alpha_upper: int
    alpha_exact_flag: bool
    coplanar_count: int
    nodes: int
    runtime_ms: float

    @property
    def alpha_hat(self) -> int:
        return self.alpha_lower


def parse_grid(spec: str) -> List[float]:
    """Comma-separated tokens: a number, ``log:lo:hi:n`` (n values of p log-spaced
    from 10^lo to 10^hi) or ``qexp:lo:hi:n`` (exponents of q, resolved by
    :func:`resolve_grid`).  Returns sorted unique values; qexp tokens are kept
    as strings."""
    out: list = []
    for tok in (t.strip() for t in spec.split(",") if t.strip()):
        if tok.startswith("log:") or tok.startswith("qexp:"):
            kind, lo, hi, n = tok.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if n < 1:
                raise ValueError(f"bad grid token {tok!r}")
            exps = [lo] if n == 1 else [lo + (hi - lo) * i / (n - 1) for i in range(n)]
            out.extend((kind, e) for e in exps)
        else:
            out.append(("p", float(tok)))
    return out


def resolve_grid(spec, q: int) -> List[float]:
    """Grid values for field size q, sorted ascending and deduplicated."""
    items = parse_grid(spec) if isinstance(spec, str) else [("p", float(x)) for x in spec]
    vals = set()
    for kind, v in items:
        if kind == "p":
            p = v
        elif kind == "log":
            p = 10.0 ** v
        else:
            p = float(q) ** v
        if not 0 <= p <= 1:
            raise ValueError(f"grid value {p} outside [0, 1]")
        vals.add(p)
    return sorted(vals)


def _sweep_trial(job):
    q, d, grid, seed, trial, budget, timings = job
    out = []
    warm = None
    for p in grid:
        t0 = time.perf_counter()
        S = sample_random_set(q, d, p, seed)
        res = alpha_search(S, budget, warm)
        lower = res.lower
        if not res.exact:
            lower = max(lower, alpha_deletion_lower(S))
        warm = res.witness
        cop = count_coplanar(S)
        ms = (time.perf_counter() - t0) * 1000 if timings else 0.0
        out.append(TrialRecord(q, d, p, seed, trial, len(S), lower, res.upper, res.exact,
                               cop, res.nodes, ms))
    return out


def phase_sweep(q: int, d: int, p_grid, trials: int, seed: int, budget: Optional[int] = DEFAULT_BUDGET,
                workers=None, timings: bool = False) -> List[TrialRecord]:
    """alpha of S_p across a grid of p, ``trials`` samples per grid point.

    Trial t uses seed ^ t at every p, so samples are nested in p and the
    previous optimum warm-starts the next search.  Records are ordered by
    (p, trial) independently of the worker count.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    grid = resolve_grid(p_grid, q)
    jobs = [(q, d, grid, (seed ^ t) & MASK64, t, budget, timings) for t in range(trials)]
    per_trial = pmap(_sweep_trial, jobs, workers)
    recs = [r for rows in per_trial for r in rows]
    recs.sort(key=lambda r: (r.p, r.trial))
    return recs


def median_by_p(records: Sequence[TrialRecord], attr: str = "alpha_hat") -> List[tuple]:
    groups = {}
    for r in records:
        groups.setdefault(r.p, []).append(getattr(r, attr))
    return [(p, statistics.median(v)) for p, v in sorted(groups.items())]


def slope_report(records: Sequence[TrialRecord]) -> List[dict]:
    """log-log slopes of median alpha between consecutive positive grid points."""
    med = [(p, a) for p, a in median_by_p(records) if p > 0 and a > 0]
    out = []
    for (p0, a0), (p1, a1) in zip(med, med[1:]):
        if p1 > p0:
            out.append({"p_lo": p0, "p_hi": p1, "alpha_lo": a0, "alpha_hi": a1,
                        "slope": (math.log(a1) - math.log(a0)) / (math.log(p1) - math.log(p0))})
    return out


def sweep_audit(records: Sequence[TrialRecord]) -> dict:
    """Monotone medians, endpoint values and binomial concentration of |S_p|."""
    if not records:
        raise ValueError("no records")
    q, d = records[0].q, records[0].d
    n = q ** d
    med = median_by_p(records)
    sizes = dict(median_by_p(records, "sample_size"))
    monotone = all(b[1] >= a[1] for a, b in zip(med, med[1:]))
    conc = []
    for p, m in sizes.items():
        sigma = math.sqrt(n * p * (1 - p))
        conc.append({"p": p, "median_size": m, "mean": n * p, "sigma": sigma,
                     "ok": abs(m - n * p) <= 3 * sigma})
    return {"monotone": monotone, "medians": med, "concentration": conc,
            "concentration_ok": all(c["ok"] for c in conc),
            "all_exact": all(r.alpha_exact_flag for r in records)}


# -- counting -----------------------------------------------------------------

@dataclass
class CountRecord:
    q: int
    d: int
    m: Optional[int]  # None for the all-sizes total
    count: int


def gp_counts_by_size(P: PointSet, max_size: Optional[int] = None, budget: Optional[int] = None) -> List[int]:
    """Number of general position subsets of P of each size 0..max_size."""
    n = len(P)
    cap = P.d
    if max_size is None:
        max_size = min(n, P.d * P.q)
    blk_ptr, blk_pts, pt_ptr, pt_blk, _, _, _ = _capacity_system(P)
    limit = -1 if budget is None else int(budget)
    counts, nodes, complete = kernels.count_independent(
        n, blk_ptr, blk_pts, pt_ptr, pt_blk, cap, np.ones(n, dtype=np.uint8), max_size, limit)
    if not complete:
        raise BudgetExceeded(f"subset enumeration exceeded {budget} nodes",
                             partial=[int(c) for c in counts])
    return [int(c) for c in counts]


def count_gp_sets(q: int, d: int, by_size: bool = True, budget: Optional[int] = None) -> List[CountRecord]:
    """Exact counts of general position sets in F_q^d (by size, up to the first empty size)."""
    counts = gp_counts_by_size(PointSet.full(q, d), budget=budget)
    while len(counts) > 1 and counts[-1] == 0 and counts[-2] == 0:
        counts.pop()
    if counts[-1] != 0 and len(counts) <= q ** d:
        counts.append(0)  # alpha <= dq, so sizes past the enumerated range are empty
    if not by_size:
        return [CountRecord(q, d, None, sum(counts))]
    return [CountRecord(q, d, m, c) for m, c in enumerate(counts)]


def first_moment_bound(family, p, m: int) -> Fraction:
    """sum over containers C of C(|C|, m) p^m, exact."""
    if m < 0:
        raise ValueError("m must be non-negative")
    pf = Fraction(p) if not isinstance(p, str) else Fraction(p)
    if not 0 <= pf <= 1:
        raise ValueError("p must lie in [0, 1]")
    sizes = family.sizes() if hasattr(family, "sizes") else list(family)
    return sum((math.comb(s, m) for s in sizes), 0) * pf ** m


def monte_carlo_xm(q: int, d: int, p: float, m: int, samples: int, seed: int,
                   budget: Optional[int] = None, workers=None) -> dict:
    """Sample mean and standard error of X_m(p), the number of m-point
    general position subsets of S_p."""
    jobs = [(q, d, p, m, (seed ^ i) & MASK64, budget) for i in range(samples)]
    vals = pmap(_xm_one, jobs, workers)
    mean = statistics.fmean(vals)
    sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return {"mean": mean, "stderr": sd / math.sqrt(len(vals)), "values": vals}


def _xm_one(job):
    q, d, p, m, s, budget = job
    S = sample_random_set(q, d, p, s)
    if len(S) < m:
        return 0
    return gp_counts_by_size(S, m, budget)[m]


# -- persistence --------------------------------------------------------------

TRIAL_SCHEMA = "gpfq.trials/1"


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(rows: Iterable, out, schema: str, columns: Optional[Sequence[str]] = None) -> None:
    """Schema comment line, header row, then one row per record (dataclass or dict)."""
    rows = list(rows)
    dicts = [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]
    if columns is None:
        columns = list(dicts[0]) if dicts else []
    close = False
    if isinstance(out, str):
        out = open(out, "w", newline="")
        close = True
    try:
        out.write(f"# schema: {schema}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for d in dicts:
            w.writerow([_fmt(d.get(c, "")) for c in columns])
    finally:
        if close:
            out.close()


def trial_columns(timings: bool = False) -> List[str]:
    cols = [f.name for f in fields(TrialRecord)]
    if not timings:
        cols.remove("runtime_ms")
    return cols


def records_to_csv(records: Sequence[TrialRecord], timings: bool = False) -> str:
    buf = io.StringIO()
    write_csv(records, buf, TRIAL_SCHEMA, trial_columns(timings))
    return buf.getvalue()


def read_csv(path_or_text: str) -> List[dict]:
    """Rows of a CSV written by :func:`write_csv` (comment lines skipped)."""
    if "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
