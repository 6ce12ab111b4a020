"""Hypergraph containers by the fingerprint tree, and the iterated container
schemes for general position sets.

``container_step`` realizes the container lemma for one hypergraph: each
independent set I determines a unique root-to-leaf path (branch on the
current maximum-degree vertex of the available set: in I, or not), so the
leaves jointly cover every independent set.  Leaves stop once the candidate
container induces at most epsilon |H| edges.

``iterate_containers`` applies the step round by round to every container
above the size threshold, rebuilding the supersaturation hypergraph of the
container each time.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceeded, EmptyHypergraph, RoundLimit, WrongDimension
from .geometry import PointSet, read_point_sets, space
from .parallel import pmap
from .supersat import (UniformHypergraph, balanced_triples, build_coplanar_hypergraph,
                       build_critical_hypergraph, delta_tau)

STRATEGIES = ("balanced_triples", "coplanar", "critical")
MAX_LEAVES = 2 * 10 ** 6
DIAGNOSTIC_EDGE_LIMIT = 10 ** 6


@dataclass(frozen=True)
class ContainerParams:
    """Settings for one container scheme.

    ``size_threshold`` None picks the scheme default (9q for triples, 2q for
    coplanar, 4d q^(d-1) for critical).  With ``fused`` set, a step keeps
    refining an epsilon-sparse container until it also fits the threshold;
    otherwise it stops at the first epsilon-sparse node.

    tau only feeds logged diagnostics (the functional and the family-size
    bound of the container lemma); the tree itself never reads it.
    ``tau_constant`` None means the default constant for the strategy.
    """
    strategy: str = "balanced_triples"
    epsilon: float = 1 / math.e
    tau: Optional[float] = None
    tau_scale: float = 1.0
    tau_constant: Optional[float] = None
    size_threshold: Optional[int] = None
    max_rounds: Optional[int] = None
    fused: bool = True
    max_leaves: int = MAX_LEAVES
    diagnostics: bool = True

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.tau_scale <= 0:
            raise ValueError("tau scale must be positive")
        if self.size_threshold is not None and self.size_threshold < 1:
            raise ValueError("size threshold must be at least 1")

    def threshold(self, q: int, d: int) -> int:
        if self.size_threshold is not None:
            return self.size_threshold
        if self.strategy == "balanced_triples":
            return 9 * q
        if self.strategy == "coplanar":
            return 2 * q
        return 4 * d * q ** (d - 1)

    def rounds(self, q: int, d: int) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        return max(1, math.ceil(d * (d + 1) * math.log2(q)))

    def tau_for(self, q: int, d: int, size: int) -> float:
        """tau used for a container of ``size`` points."""
        if self.tau is not None:
            return self.tau * self.tau_scale
        k = size / q
        r = d + 1
        if self.strategy == "balanced_triples":
            const = 1e8 if self.tau_constant is None else self.tau_constant
            return self.tau_scale * const / k * q ** -0.5
        const = (2 ** math.comb(r, 2) * 12 * math.factorial(r)
                 if self.tau_constant is None else self.tau_constant)
        if self.strategy == "coplanar":
            if k <= 1:
                return math.inf
            base = min(k - 1, 1) ** (-d / (d + 1)) / k * q ** (-1 / (d + 1))
        else:
            base = max(q ** (1 / d - 1) / k, q ** (d - 2) / k ** 2)
        return self.tau_scale * const * base


def desk_params(strategy: str, **kw) -> ContainerParams:
    """Preset with unit tau constants, keeping the q-dependence of tau."""
    kw.setdefault("tau_constant", 1.0)
    return ContainerParams(strategy=strategy, **kw)


@dataclass
class ContainerFamily:
    q: int
    d: int
    containers: List[PointSet]
    log: List[dict] = field(default_factory=list)
    complete: bool = True

    def __len__(self):
        return len(self.containers)

    def sizes(self) -> List[int]:
        return [len(c) for c in self.containers]

    def to_text(self) -> str:
        return "".join(c.to_text() for c in self.containers)

    @classmethod
    def from_text(cls, text: str) -> "ContainerFamily":
        sets = read_point_sets(text)
        if not sets:
            raise ValueError("no containers in input")
        return cls(sets[0].q, sets[0].d, sets)

    def log_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.log)


def _canonical(q: int, d: int, sets: Sequence[PointSet]) -> List[PointSet]:
    seen = {}
    for s in sets:
        seen.setdefault(s.mask, s)
    return [seen[m] for m in sorted(seen)]


def supersaturation_hypergraph(C: PointSet, strategy: str) -> UniformHypergraph:
    if strategy == "balanced_triples":
        if C.d != 2:
            raise WrongDimension("balanced_triples requires d = 2")
        return balanced_triples(C)
    if strategy == "coplanar":
        return build_coplanar_hypergraph(C)
    if strategy == "critical":
        return build_critical_hypergraph(C)
    raise ValueError(f"unknown strategy {strategy!r}")


def _log_count_bound(r: int, n: int, tau: float, eps: float) -> float:
    """Right-hand side of the container lemma's bound on log(number of containers)."""
    if not 0 < tau < 1:
        return math.nan
    return 1000 * r * math.factorial(r) ** 3 * n * tau * math.log(1 / eps) * math.log(1 / tau)


def container_step(H: UniformHypergraph, params: ContainerParams,
                   size_target: Optional[int] = None) -> ContainerFamily:
    """One application of the container lemma to H via the fingerprint tree."""
    n = H.n_vertices
    if n == 0:
        raise EmptyHypergraph("hypergraph has no vertices")
    q, d = H.q, H.d
    if q is None or d is None:
        raise ValueError("hypergraph must carry its ambient (q, d)")
    if len(H) == 0:
        C = PointSet.from_indices(q, d, H.vertices)
        rec = {"vertices": n, "edges": 0, "containers": 1, "max_size": n, "min_size": n,
               "fingerprint_max": 0, "max_induced_fraction": 0.0, "eps_ok": True, "nodes": 1}
        return ContainerFamily(q, d, [C], [rec])
    limit = math.floor(params.epsilon * len(H))
    ptr, inc = H.incidence_csr()
    target = n if size_target is None else int(size_target)
    members, fps, leaf_edges, nodes, complete = kernels.container_tree(
        n, H.r, H.edges, ptr, inc, limit, target, params.max_leaves)
    sets = [PointSet.from_indices(q, d, H.vertices[row.astype(bool)]) for row in members]
    sizes = members.sum(axis=1)
    rec = {
        "vertices": n, "edges": len(H), "containers": len(sets),
        "max_size": int(sizes.max()), "min_size": int(sizes.min()),
        "fingerprint_max": int(fps.max()), "fingerprint_mean": float(fps.mean()),
        "max_induced_fraction": float(leaf_edges.max() / len(H)),
        "eps_ok": bool(leaf_edges.max() <= params.epsilon * len(H)),
        "nodes": int(nodes),
    }
    if params.diagnostics and len(H) <= DIAGNOSTIC_EDGE_LIMIT:
        tau = params.tau_for(q, d, n)
        rec["tau"] = tau
        rec["delta_tau"] = delta_tau(H, tau) if math.isfinite(tau) else math.nan
        rec["log_containers"] = math.log(len(sets))
        rec["log_count_bound"] = _log_count_bound(H.r, n, tau, params.epsilon)
    fam = ContainerFamily(q, d, _canonical(q, d, sets), [rec], complete)
    if not complete:
        raise BudgetExceeded(f"fingerprint tree exceeded {params.max_leaves} leaves", partial=fam)
    return fam


def _refine(job):
    C, params, target = job
    H = supersaturation_hypergraph(C, params.strategy)
    fam = container_step(H, params, target)
    return [c.bitmap for c in fam.containers], fam.log[0]


def iterate_containers(q: int, d: int, params: ContainerParams, workers=None) -> ContainerFamily:
    """Refine {F_q^d} until every container has at most the threshold number of points."""
    if params.strategy == "balanced_triples" and d != 2:
        raise WrongDimension("balanced_triples requires d = 2")
    threshold = params.threshold(q, d)
    max_rounds = params.rounds(q, d)
    containers = [PointSet.full(q, d)]
    log: List[dict] = []
    rnd = 0
    while True:
        big = [C for C in containers if len(C) > threshold]
        if not big:
            break
        if rnd >= max_rounds:
            fam = ContainerFamily(q, d, containers, log, complete=False)
            raise RoundLimit(f"{len(big)} containers still exceed {threshold} after {rnd} rounds",
                             partial=fam)
        small = [C for C in containers if len(C) <= threshold]
        target = threshold if params.fused else None
        results = pmap(_refine, [(C, params, target) for C in big], workers)
        out = list(small)
        stuck = 0
        steps = []
        for C, (bitmaps, rec) in zip(big, results):
            kids = [PointSet(q, d, b) for b in bitmaps]
            if len(kids) == 1 and kids[0] == C:
                stuck += 1
            out.extend(kids)
            steps.append(rec)
        containers = _canonical(q, d, out)
        rnd += 1
        sizes = [len(c) for c in containers]
        fps = Counter()
        for s in steps:
            fps[s["fingerprint_max"]] += 1
        log.append({
            "round": rnd, "refined": len(big), "containers": len(containers),
            "max_size": max(sizes), "steps": len(steps),
            "max_induced_fraction": max(s["max_induced_fraction"] for s in steps),
            "eps_ok": all(s["eps_ok"] for s in steps),
            "max_fingerprint": max(s["fingerprint_max"] for s in steps),
            "nodes": sum(s["nodes"] for s in steps),
            "shrink_ok": all(s["max_size"] <= s["vertices"] for s in steps),
            "first_step": steps[0],
        })
        if stuck:
            fam = ContainerFamily(q, d, containers, log, complete=False)
            raise RoundLimit(f"{stuck} containers above the threshold induce no edges and cannot shrink",
                             partial=fam)
    if not log:
        log.append({"round": 0, "refined": 0, "containers": 1, "max_size": q ** d, "eps_ok": True})
    return ContainerFamily(q, d, containers, log)


# -- audits -------------------------------------------------------------------

def _packed(bitmaps) -> np.ndarray:
    return np.packbits(np.asarray(bitmaps, dtype=bool), axis=-1, bitorder="little")


def covering_container(family: ContainerFamily, sample: PointSet, packed=None) -> int:
    """Index of the first container holding ``sample``, or -1."""
    if packed is None:
        packed = _packed([c.bitmap for c in family.containers])
    s = _packed(sample.bitmap)
    hit = np.flatnonzero(((packed & s) == s).all(axis=1))
    return int(hit[0]) if hit.size else -1


def induced_coplanar_counts(family: ContainerFamily) -> np.ndarray:
    """Number of coplanar (d+1)-tuples inside each container."""
    from .supersat import count_coplanar
    q, d = family.q, family.d
    if d == 2:
        M = space(q, 2).flat_matrix(1)
        B = np.array([c.bitmap for c in family.containers], dtype=np.int64)
        m = np.stack([B[:, M[:, j]] for j in range(M.shape[1])]).sum(axis=0)
        return (m * (m - 1) * (m - 2) // 6).sum(axis=1)
    return np.array([count_coplanar(c) for c in family.containers], dtype=object)


def verify_family(family: ContainerFamily, samples: Sequence[PointSet], induced: bool = True) -> dict:
    """Coverage of general position samples, size histogram, induced-edge maxima."""
    packed = _packed([c.bitmap for c in family.containers])
    uncovered = [i for i, s in enumerate(samples) if covering_container(family, s, packed) < 0]
    n = len(samples)
    report = {
        "samples": n,
        "covered_fraction": 1.0 if n == 0 else (n - len(uncovered)) / n,
        "uncovered": uncovered,
        "containers": len(family),
        "size_histogram": dict(sorted(Counter(family.sizes()).items())),
    }
    if induced and len(family):
        report["max_induced_edges"] = int(max(induced_coplanar_counts(family)))
    report["ok"] = not uncovered
    return report
