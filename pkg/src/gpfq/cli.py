"""Command line runner.

Exit codes: 0 success, 2 invalid arguments, 3 budget exceeded (partial output written).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Dict, List, Optional

from . import lab
from .containers import ContainerParams, iterate_containers, verify_family
from .errors import BudgetExceeded, GPFQError, RoundLimit
from .geometry import greedy_gp_set
from .incidence import build_incidence, cube_identity_report, second_eigenvalue_numeric
from .parallel import thread_count
from .supersat import (
    balanced_triples_report, build_coplanar_hypergraph, build_critical_hypergraph, check_bounded,
    coplanar_bound_applies, coplanar_lower_bound, count_coplanar,
    count_critical, critical_bound_applies, critical_lower_bound, tau_coplanar, tau_critical,
)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3
COUNT_BUDGET = 10 ** 8


class UsageError(Exception):
    pass


def read_config(path: str) -> Dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment.  Keys use flag names with - or _."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}")
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def _out(path: Optional[str]):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit_csv(rows, path, schema, columns=None):
    fh = _out(path)
    try:
        lab.write_csv(rows, fh, schema, columns)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _common(p: argparse.ArgumentParser, *names):
    if "q" in names:
        p.add_argument("--q", type=int, help="field size (prime power)")
    if "d" in names:
        p.add_argument("--d", type=int, help="dimension")
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0)
    if "trials" in names:
        p.add_argument("--trials", type=int, default=1)
    p.add_argument("--threads", type=int, default=None, help="worker processes (capped by GPFQ_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gpfq", description="General position sets over finite fields.")
    ap.add_argument("--config", help="key = value file; command line flags win")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("spectra", help="cube identity and second eigenvalue of the incidence graph")
    _common(p, "q", "d")
    p.add_argument("--out")

    p = sub.add_parser("supersat", help="supersaturation counts against their lower bounds")
    _common(p, "q", "d", "seed", "trials")
    p.add_argument("--mode", choices=["triples", "coplanar", "critical", "bounded"], default="coplanar")
    p.add_argument("--size", type=int)
    p.add_argument("--out")

    p = sub.add_parser("containers", help="iterate containers and audit coverage")
    _common(p, "q", "d", "seed")
    p.add_argument("--strategy", choices=["balanced_triples", "coplanar", "critical"], default="balanced_triples")
    p.add_argument("--epsilon", type=float, default=1 / math.e)
    p.add_argument("--tau-scale", type=float, default=1.0)
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--audit-samples", type=int, default=100)
    p.add_argument("--max-leaves", type=int, default=None)
    p.add_argument("--literal", action="store_true", default=False,
                   help="stop each step at the first sparse node instead of refining to the threshold")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("simulate", help="phase sweep of alpha over a grid of p")
    _common(p, "q", "d", "seed", "trials")
    p.add_argument("--p-grid", default="0,qexp:-2:0:15",
                   help="comma list of numbers, log:lo:hi:n or qexp:lo:hi:n")
    p.add_argument("--budget", type=int, default=lab.DEFAULT_BUDGET, help="node limit per search")
    p.add_argument("--timings", action="store_true", default=False, help="include runtime_ms column")
    p.add_argument("--slopes", help="write the log-log slope report here (CSV)")
    p.add_argument("--out")

    p = sub.add_parser("count", help="count general position sets of F_q^d")
    _common(p, "q", "d")
    p.add_argument("--by-size", action="store_true", default=False)
    p.add_argument("--budget", type=int, default=COUNT_BUDGET, help="node limit; 0 for none")
    p.add_argument("--out")

    p = sub.add_parser("plot", help="render sweep CSVs as log p vs log alpha")
    p.add_argument("--in", dest="inp", action="append", help="sweep CSV (repeatable)")
    p.add_argument("--out")
    return ap


BOOL_KEYS = {"literal", "timings", "by_size"}


def parse(argv: List[str]) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_usage(sys.stderr)
        raise UsageError("a command is required")
    if args.config:
        cfg = read_config(args.config)
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        cfg.pop("command", None)
        if "in" in cfg:
            cfg["inp"] = cfg.pop("in")
        for k in cfg:
            if k not in known or k == "help":
                raise UsageError(f"config key {k!r} is not an option of {args.command}")
        defaults = {}
        for k, v in cfg.items():
            a = known[k]
            if k in BOOL_KEYS:
                defaults[k] = _bool(v)
            elif isinstance(a, argparse._AppendAction):
                defaults[k] = [s.strip() for s in v.split(";") if s.strip()]
            else:
                defaults[k] = v
        sub.set_defaults(**defaults)
        args = ap.parse_args(argv)
        for k in defaults:  # argparse converts string defaults only for typed options
            a = known[k]
            if isinstance(getattr(args, k), str) and a.type is not None:
                try:
                    setattr(args, k, a.type(getattr(args, k)))
                except ValueError:
                    raise UsageError(f"config value for {k!r} is invalid: {cfg[k]!r}")
            if a.choices and getattr(args, k) not in a.choices:
                raise UsageError(f"config value for {k!r} must be one of {list(a.choices)}")
    return args


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")
    if getattr(args, "q", None) is not None and args.q < 2:
        raise UsageError("--q must be at least 2")
    if getattr(args, "d", None) is not None and args.d < 1:
        raise UsageError("--d must be at least 1")


# -- commands -----------------------------------------------------------------

def cmd_spectra(args) -> int:
    _need(args, "q", "d")
    G = build_incidence(args.q, args.d)
    rep = cube_identity_report(G)
    lam = second_eigenvalue_numeric(G)
    closed = G.lambda2_closed
    row = {"q": args.q, "d": args.d, "points": G.n_points, "hyperplanes": G.n_hyperplanes,
           "delta1": G.delta1, "delta2": G.delta2, "identity_ok": rep.ok, "sampled": rep.sampled,
           "checked_entries": rep.checked_entries, "lambda2_closed": closed,
           "lambda2_numeric": lam, "relative_error": abs(lam - closed) / closed}
    _emit_csv([row], args.out, "gpfq.spectra/1")
    return EXIT_OK


def _supersat_row(mode, P, q, d, trial, seed):
    n = len(P)
    row = {"q": q, "d": d, "mode": mode, "trial": trial, "seed": seed, "size": n}
    if mode == "triples":
        rep = balanced_triples_report(P)
        row.update({k: rep[k] for k in ("size", "delta1", "delta2", "size_lower",
                                        "delta1_upper", "delta2_upper")})
        row["size"] = n
        row["triples"] = rep["size"]
        row["applies"] = n >= 9 * q
        row["ok"] = rep["ok_size"] and rep["ok_delta1"] and rep["ok_delta2"]
        return row
    if mode == "bounded":
        # coplanar tuples with the coplanar tau; critical tuples with theirs once |P| >= 4d q^(d-1)
        crit = d >= 3 and critical_bound_applies(q, d, n)
        H = build_critical_hypergraph(P) if crit else build_coplanar_hypergraph(P)
        tau = tau_critical(q, d, n) if crit else tau_coplanar(q, d, n)
        row.update({"hypergraph": "critical" if crit else "coplanar", "edges": len(H), "tau": tau})
        if len(H):
            rep = check_bounded(H, None, tau)
            row["c_required"] = rep.c_required
            row.update({f"slack_{i}": v for i, v in sorted(rep.slack.items())})
        return row
    if mode == "coplanar":
        count, bound, applies = count_coplanar(P), coplanar_lower_bound(q, d, n), coplanar_bound_applies(q, d, n)
    else:
        count, bound, applies = count_critical(P), critical_lower_bound(q, d, n), critical_bound_applies(q, d, n)
    row.update({"count": count, "lower_bound": bound, "applies": applies,
                "ok": (count >= bound) if applies else True})
    return row


def cmd_supersat(args) -> int:
    _need(args, "q", "d", "size")
    if args.mode == "triples" and args.d != 2:
        raise UsageError("--mode triples requires --d 2")
    if args.mode == "bounded" and args.size <= args.q:
        raise UsageError("--mode bounded needs --size larger than --q")
    rows = []
    for t in range(args.trials):
        s = (args.seed ^ t) & lab.MASK64
        P = lab.sample_subset(args.q, args.d, args.size, s)
        rows.append(_supersat_row(args.mode, P, args.q, args.d, t, s))
    cols = None if args.mode not in ("triples", "bounded") else [
        "q", "d", "mode", "trial", "seed", "size", "triples", "delta1", "delta2",
        "size_lower", "delta1_upper", "delta2_upper", "applies", "ok"]
    if args.mode == "bounded":
        cols = ["q", "d", "mode", "trial", "seed", "size", "hypergraph", "edges", "tau", "c_required"]
        cols += [f"slack_{i}" for i in range(2, args.d + 2)]
    _emit_csv(rows, args.out, "gpfq.supersat/1", cols)
    return EXIT_OK


def _write_family(out_dir, fam, audit):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "containers.txt"), "w") as fh:
        fh.write(fam.to_text())
    with open(os.path.join(out_dir, "log.jsonl"), "w") as fh:
        fh.write(fam.log_jsonl())
    if audit is not None:
        with open(os.path.join(out_dir, "audit.json"), "w") as fh:
            json.dump(audit, fh, sort_keys=True, indent=1)


def cmd_containers(args) -> int:
    _need(args, "q", "d")
    kw = dict(strategy=args.strategy, epsilon=args.epsilon, tau_scale=args.tau_scale,
              size_threshold=args.threshold, fused=not args.literal)
    if args.max_leaves is not None:
        kw["max_leaves"] = args.max_leaves
    params = ContainerParams(**kw)
    workers = thread_count(args.threads)
    code = EXIT_OK
    try:
        fam = iterate_containers(args.q, args.d, params, workers)
    except (RoundLimit, BudgetExceeded) as e:
        fam, code = e.partial, EXIT_BUDGET
        print(f"gpfq: {e}", file=sys.stderr)
    audit = None
    if fam is not None and args.audit_samples:
        n = args.q ** args.d
        samples = [greedy_gp_set(args.q, args.d,
                                 lab.uniforms((args.seed ^ i) & lab.MASK64, n).argsort(kind="stable"))
                   for i in range(args.audit_samples)]
        audit = verify_family(fam, samples, induced=args.d == 2)
        audit["complete"] = code == EXIT_OK
    if args.out and fam is not None:
        _write_family(args.out, fam, audit)
    summary = {"containers": len(fam) if fam else 0,
               "max_size": max(fam.sizes()) if fam and len(fam) else 0,
               "rounds": len(fam.log) if fam else 0}
    if audit:
        summary["covered_fraction"] = audit["covered_fraction"]
    print(json.dumps(summary, sort_keys=True))
    return code


def cmd_simulate(args) -> int:
    _need(args, "q", "d")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.budget is not None and args.budget < 1:
        raise UsageError("--budget must be positive")
    recs = lab.phase_sweep(args.q, args.d, args.p_grid, args.trials, args.seed, args.budget,
                           thread_count(args.threads), args.timings)
    _emit_csv(recs, args.out, lab.TRIAL_SCHEMA, lab.trial_columns(args.timings))
    if args.slopes:
        _emit_csv(lab.slope_report(recs), args.slopes, "gpfq.slopes/1",
                  ["p_lo", "p_hi", "alpha_lo", "alpha_hi", "slope"])
    if not all(r.alpha_exact_flag for r in recs):
        print("gpfq: some searches hit the budget; those rows carry bounds", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_count(args) -> int:
    _need(args, "q", "d")
    if args.budget is not None and args.budget < 0:
        raise UsageError("--budget must be non-negative")
    code = EXIT_OK
    try:
        recs = lab.count_gp_sets(args.q, args.d, args.by_size, args.budget or None)
    except BudgetExceeded as e:
        code = EXIT_BUDGET
        print(f"gpfq: {e}; counts are lower bounds", file=sys.stderr)
        recs = [lab.CountRecord(args.q, args.d, m, c) for m, c in enumerate(e.partial)]
        if not args.by_size:
            recs = [lab.CountRecord(args.q, args.d, None, sum(e.partial))]
    rows = [{"q": r.q, "d": r.d, "m": "all" if r.m is None else r.m, "count": r.count,
             "complete": code == EXIT_OK} for r in recs]
    _emit_csv(rows, args.out, "gpfq.counts/1")
    return code


def cmd_plot(args) -> int:
    if not args.inp:
        raise UsageError("--in is required")
    if not args.out:
        raise UsageError("--out is required")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "gpfq"
    series = {}
    for path in args.inp:
        for row in lab.read_csv(path):
            key = (int(row["q"]), int(row["d"]))
            series.setdefault(key, []).append(row)
    if not series:
        raise UsageError("no rows in input")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (q, d), rows in sorted(series.items()):
        recs = [lab.TrialRecord(q, d, float(r["p"]), 0, int(r["trial"]), int(r["sample_size"]),
                                int(r["alpha_lower"]), int(r["alpha_upper"]), r["alpha_exact_flag"] == "1",
                                0, 0, 0.0) for r in rows]
        pts = [(p, a) for p, a in lab.median_by_p(recs) if p > 0 and a > 0]
        if not pts:
            continue
        xs = [math.log(p, q) for p, _ in pts]
        ys = [math.log(a, q) for _, a in pts]
        ax.plot(xs, ys, marker="o", label=f"q={q}, d={d}")
    ax.set_xlabel("log_q p")
    ax.set_ylabel("log_q median alpha")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fmt = "png" if str(args.out).lower().endswith(".png") else "svg"
    fig.savefig(args.out, format=fmt, metadata={"Software": None} if fmt == "png" else {"Date": None})
    plt.close(fig)
    return EXIT_OK


COMMANDS = {"spectra": cmd_spectra, "supersat": cmd_supersat, "containers": cmd_containers,
            "simulate": cmd_simulate, "count": cmd_count, "plot": cmd_plot}


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        thread_count(getattr(args, "threads", None))
        return COMMANDS[args.command](args)
    except SystemExit as e:  # argparse
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    except UsageError as e:
        print(f"gpfq: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, RoundLimit) as e:
        print(f"gpfq: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, GPFQError) as e:
        print(f"gpfq: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
