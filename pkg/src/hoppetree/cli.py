"""Command-line front end.

Every output file is a pure function of the command and its flags, seed
included, so reruns are byte-identical. Timing and progress go to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from contextlib import contextmanager

from . import formulas, limitdist, montecarlo, verify

SCHEMA = "hoppetree/1"
STAT_FLAGS = {
    "depth": "depth_last",
    "height": "height",
    "ipl": "ipl",
    "leaves": "leaves",
    "subtree": "subtree2",
}


class UsageError(Exception):
    """Flag values that parse but make no sense; exit status 2."""


def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, int) else str(x)


@contextmanager
def _sink(path, stdout):
    if path is None or path == "-":
        yield stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _header_lines(fh, header: dict):
    fh.write("# " + json.dumps(header, sort_keys=True) + "\n")


def cmd_simulate(args, stdout):
    stat = STAT_FLAGS[args.stat]
    if stat == "subtree2" and args.nodes < 2:
        raise UsageError("the node-2 subtree needs --nodes >= 2")
    try:
        cfg = montecarlo.ExperimentConfig(args.theta, args.nodes, args.replicates, args.seed, (stat,))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    started = time.perf_counter()
    summary = montecarlo.run_experiment(cfg, args.workers)
    values = summary.samples[stat]
    s = summary[stat]
    params = {"theta": args.theta, "nodes": args.nodes, "replicates": args.replicates, "seed": args.seed, "stat": args.stat}
    summ = {"count": s.count, "mean": s.mean, "variance": s.variance, "min": s.min, "max": s.max, "se": s.se}
    with _sink(args.out, stdout) as fh:
        if args.format == "json":
            doc = {
                "schema": SCHEMA,
                "command": "simulate",
                "params": params,
                "summary": summ,
                "records": [{"replicate": r, "value": int(v)} for r, v in enumerate(values)],
            }
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
        else:
            _header_lines(fh, {"schema": SCHEMA, "command": "simulate", "params": params, "summary": summ})
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate", "value"])
            for r, v in enumerate(values):
                w.writerow([r, int(v)])
    print(f"simulate: {args.replicates} trees in {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return 0


def _exact_quantities(stat, theta, n):
    """(name, value, kind) rows and an optional pmf."""
    if stat == "depth_last":
        if n == 1:
            return [("mean", 0.0, "exact"), ("variance", 0.0, "exact")]
        m = formulas.depth_moments(theta, n)
        return [("mean", m.mean, "exact"), ("variance", m.variance, "exact")]
    if stat == "leaves":
        if n < 2:
            raise UsageError("leaf-count formulas need --nodes >= 2")
        m = formulas.leaf_moments(theta, n)
        return [("mean", m.mean, "exact"), ("variance", m.variance, "exact")]
    if stat == "ipl":
        return [
            ("mean", formulas.ipl_mean_exact(theta, n), "exact"),
            ("variance_coefficient", formulas.ipl_var_coefficient(theta), "asymptotic"),
        ]
    if stat == "subtree2":
        law = formulas.subtree_pmf_exact(theta, n)
        return [("mean", law.mean(), "exact"), ("variance", law.variance(), "exact")]
    if n < 3:
        raise UsageError("the height band needs --nodes >= 3")
    return [("band_centre", formulas.height_band(n), "asymptotic")]


def cmd_exact(args, stdout):
    stat = STAT_FLAGS[args.stat]
    if not args.theta > 0 or args.nodes < 1:
        raise UsageError("need --theta > 0 and --nodes >= 1")
    if stat == "subtree2" and args.nodes < 2:
        raise UsageError("the node-2 subtree needs --nodes >= 2")
    if args.pmf and stat not in ("depth_last", "subtree2"):
        raise UsageError("--pmf is available for --stat depth and --stat subtree")
    if args.pmf and stat == "depth_last" and args.nodes < 2:
        raise UsageError("the depth law needs --nodes >= 2")
    try:
        rows = _exact_quantities(stat, args.theta, args.nodes)
        law = None
        if args.pmf:
            law = (formulas.depth_pmf_exact if stat == "depth_last" else formulas.subtree_pmf_exact)(args.theta, args.nodes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    params = {"theta": args.theta, "nodes": args.nodes, "stat": args.stat, "pmf": bool(args.pmf)}
    with _sink(args.out, stdout) as fh:
        if args.format == "json":
            doc = {
                "schema": SCHEMA,
                "command": "exact",
                "params": params,
                "quantities": [{"name": k, "value": v, "kind": kind} for k, v, kind in rows],
            }
            if law is not None:
                doc["pmf"] = [{"value": int(k), "probability": float(p)} for k, p in zip(law.support, law.pmf)]
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            _header_lines(fh, {"schema": SCHEMA, "command": "exact", "params": params})
            if law is None:
                w.writerow(["quantity", "value", "kind"])
                for k, v, kind in rows:
                    w.writerow([k, _fmt(v), kind])
            else:
                for k, v, kind in rows:
                    fh.write(f"# {k}={_fmt(v)} ({kind})\n")
                w.writerow(["value", "probability"])
                for k, p in zip(law.support, law.pmf):
                    w.writerow([int(k), _fmt(p)])
    return 0


def cmd_verify(args, stdout):
    started = time.perf_counter()

    def report(c):
        stdout.write(c.line() + "\n")
        stdout.flush()

    checks = verify.run_tier(args.tier, args.seed, args.workers, report)
    failed = [c for c in checks if not c.passed]
    stdout.write(f"{len(checks) - len(failed)}/{len(checks)} checks passed\n")
    print(f"verify: {time.perf_counter() - started:.1f}s", file=sys.stderr)
    return 0 if not failed else 1


def cmd_limit(args, stdout):
    try:
        pop = limitdist.picard(args.theta, args.population, args.iterations, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    stages = [pop.base, pop] if pop.base is not None else [pop]
    header = {
        "schema": SCHEMA,
        "command": "limit",
        "params": {"theta": args.theta, "population": args.population, "iterations": args.iterations, "seed": args.seed},
        "stages": [
            {
                "theta": st.theta,
                "generations": st.generation,
                "converged": st.converged,
                "mean": st.mean,
                "variance": st.variance,
                "target_mean": limitdist.limit_moments(st.theta)[0],
                "target_variance": limitdist.limit_moments(st.theta)[1],
            }
            for st in stages
        ],
    }
    with _sink(args.out, stdout) as fh:
        if args.format == "json":
            doc = dict(header, values=[float(v) for v in pop.values])
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
        else:
            _header_lines(fh, header)
            fh.write("value\n")
            for v in pop.values:
                fh.write(_fmt(v) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hoppetree", description="Hoppe tree simulation and verification toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    workers = os.cpu_count() or 1

    s = sub.add_parser("simulate", help="grow trees and record one statistic per replicate")
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--nodes", type=int, required=True)
    s.add_argument("--replicates", type=int, required=True)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--stat", choices=sorted(STAT_FLAGS), required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=workers)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("exact", help="closed-form moments and laws")
    e.add_argument("--theta", type=float, default=1.0)
    e.add_argument("--nodes", type=int, required=True)
    e.add_argument("--stat", choices=sorted(STAT_FLAGS), required=True)
    e.add_argument("--pmf", action="store_true")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--out")
    e.set_defaults(func=cmd_exact)

    v = sub.add_parser("verify", help="run the verification checks")
    v.add_argument("--tier", choices=("exact", "statistical", "all"), default="all")
    v.add_argument("--seed", type=int, default=11)
    v.add_argument("--workers", type=int, default=workers)
    v.set_defaults(func=cmd_verify)

    lim = sub.add_parser("limit", help="build the path-length limit law by Picard iteration")
    lim.add_argument("--theta", type=float, required=True)
    lim.add_argument("--population", type=int, default=100_000)
    lim.add_argument("--iterations", type=int, default=40)
    lim.add_argument("--seed", type=int, default=1)
    lim.add_argument("--format", choices=("csv", "json"), default="json")
    lim.add_argument("--out")
    lim.set_defaults(func=cmd_limit)
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, stdout)
    except UsageError as exc:
        print(f"hoppetree: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"hoppetree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
