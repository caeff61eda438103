"""Command-line front door: gen | pack | verify | oracle | sweep."""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .graph import MalformedEmbedding, verify_packing
from .profiles import DESK, FAITHFUL, make_profile
from .trees import TREE_FAMILIES
from .oracle import consecutive_suite
from .pipeline import (
    HypothesisViolated,
    make_instance,
    pack_consecutive_trees,
    packing_to_text,
    parse_packing_text,
    read_instance,
    write_instance,
)


def _cmd_gen(args) -> int:
    inst = make_instance(args.n, args.k, args.family, args.seed, args.degree)
    write_instance(args.out, inst)
    print(f"wrote {args.out}: n={inst.n} k={inst.k} family={args.family} seed={args.seed}")
    return 0


def _profile_for(args, n: int, k: int):
    profile = make_profile(n, k, args.profile)
    if getattr(args, "retries", None) is not None:
        object.__setattr__(profile, "retry_budget", args.retries)
    return profile


def _cmd_pack(args) -> int:
    inst = read_instance(args.instance)
    profile = _profile_for(args, inst.n, inst.k)
    try:
        result = pack_consecutive_trees(inst, profile, seed=args.seed)
    except HypothesisViolated as exc:
        print(exc)
        return 1
    sys.stdout.write(result.report.to_text())
    if args.trace:
        with open(args.trace, "w") as fh:
            for i, tr in enumerate(result.traces):
                fh.write(f"# trace {i}\n")
                fh.write(tr.to_text())
    if not result.ok:
        return 1
    with open(args.out, "w") as fh:
        fh.write(packing_to_text(result.embeddings))
    return 0


def _cmd_verify(args) -> int:
    inst = read_instance(args.instance)
    with open(args.packing) as fh:
        text = fh.read()
    try:
        embs = parse_packing_text(text, inst)
        res = verify_packing(list(zip(inst.trees, embs)), inst.n)
    except (MalformedEmbedding, KeyError, ValueError) as exc:
        print(f"Malformed: {exc}")
        return 1
    if res.ok:
        print("Valid")
        return 0
    i, j, edge = res.first_conflict
    print(f"Conflict: trees {i} and {j} share host edge {edge}")
    return 1


def _cmd_oracle(args) -> int:
    report = consecutive_suite(
        args.nmax, args.k, sample=args.sample, seed=args.seed,
        time_budget=args.time_budget,
    )
    sys.stdout.write(report.to_text())
    return 0 if report.failed == 0 and report.timeout == 0 else 1


def _sweep_task(task):
    n, k, family, seed, preset = task
    inst = make_instance(n, k, family, seed)
    profile = make_profile(n, k, preset)
    t0 = time.perf_counter()
    result = pack_consecutive_trees(inst, profile, seed=seed)
    millis = int((time.perf_counter() - t0) * 1000)
    return {
        "n": n,
        "k": k,
        "seed": seed,
        "family": family,
        "outcome": result.report.outcome,
        "fallback_level": result.report.fallback_level,
        "retries": result.report.retries,
        "millis": millis,
    }


def run_sweep(ns, ks, families, per_cell, seed, preset=DESK, jobs=1):
    """Grid of seeded pipeline runs; returns rows sorted by instance key."""
    tasks = [
        (n, k, family, seed + i, preset)
        for n in ns
        for k in ks
        for family in families
        for i in range(per_cell)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_task, tasks, chunksize=4))
    else:
        rows = [_sweep_task(t) for t in tasks]
    rows.sort(key=lambda r: (r["n"], r["k"], r["family"], r["seed"]))
    return rows


def _cmd_sweep(args) -> int:
    ns = [int(x) for x in args.ns.split(",")]
    ks = [int(x) for x in args.ks.split(",")]
    families = args.families.split(",")
    for fam in families:
        if fam not in TREE_FAMILIES:
            print(f"unknown family {fam!r}", file=sys.stderr)
            return 2
    rows = run_sweep(ns, ks, families, args.per, args.seed, args.profile, args.jobs)
    fields = ["n", "k", "seed", "family", "outcome", "fallback_level", "retries", "millis"]
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    solved = sum(1 for r in rows if r["outcome"] == "ok")
    print(f"sweep: {solved}/{len(rows)} solved -> {args.out}")
    return 0 if solved == len(rows) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="treepack",
        description="Pack trees of consecutive orders into a complete graph.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random eligible instance file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--family", choices=TREE_FAMILIES, default="uniform")
    g.add_argument("--degree", type=int, default=10, help="bound for bounded-degree family")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("pack", help="run the packing pipeline on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--profile", choices=[FAITHFUL, DESK], default=DESK)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--retries", type=int, default=None, help="override engine retry budget")
    p.add_argument("--trace", default=None, help="write stage traces to this path")
    p.set_defaults(fn=_cmd_pack)

    v = sub.add_parser("verify", help="check a packing file against its instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--packing", required=True)
    v.set_defaults(fn=_cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive consecutive-orders suite")
    o.add_argument("--nmax", type=int, required=True)
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--sample", type=int, default=None)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--time-budget", type=float, default=30.0)
    o.set_defaults(fn=_cmd_oracle)

    s = sub.add_parser("sweep", help="seeded pipeline grid, CSV output")
    s.add_argument("--ns", default="50,100,200")
    s.add_argument("--ks", default="2,3,4,5")
    s.add_argument("--families", default=",".join(TREE_FAMILIES))
    s.add_argument("--per", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--profile", choices=[FAITHFUL, DESK], default=DESK)
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_sweep)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
