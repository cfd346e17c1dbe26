"""Command-line front end: ``gifw {solve,gen,presolve,bench}``.

``solve`` exits with 0 (isomorphic), 1 (non-isomorphic) or 2 (inconclusive);
usage errors exit with 3 and unreadable inputs with 4.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import networkx as nx
import numpy as np

from . import __version__
from .bnb import SolveConfig, solve
from .graph import (
    Graph,
    GraphFormatError,
    apply_permutation,
    choose_flip_pairs,
    read_graph,
    write_graph6,
)
from .heuristics import DcConfig, solve_dc
from .presolve import STAGES, PresolveConfig, run_presolve
from .results import EXIT_CODES, RunRecord, result_document, summarize

log = logging.getLogger("gifw")

EXIT_USAGE = 3
EXIT_IO = 4

METHODS = {
    "boscia-dfs": (),
    "boscia-star": ("degree", "star"),
    "boscia-clique-star": ("degree", "clique", "star"),
    "boscia-obbt": ("obbt",),
    "dc-fw": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    pass


def _load(path) -> Graph:
    try:
        return read_graph(path)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except (GraphFormatError, OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _stages(spec: str | None, method: str) -> tuple[str, ...]:
    if spec is None:
        return METHODS[method] or ()
    stages = tuple(s for s in (t.strip() for t in spec.split(",")) if s and s != "none")
    bad = [s for s in stages if s not in STAGES]
    if bad:
        raise ValueError(f"unknown presolve stage(s): {', '.join(bad)}")
    return stages


def _presolve_config(args, stages) -> PresolveConfig:
    return PresolveConfig(
        stages=stages,
        clique_k=args.clique_k,
        star_cap=args.star_cap,
        obbt_budget=args.obbt_budget,
        obbt_time_ms=args.obbt_time_ms,
    )


def _solve_config(args, stages) -> SolveConfig:
    return SolveConfig(
        presolve=_presolve_config(args, stages) if stages else None,
        fw=args.fw,
        node_strategy=args.node_strategy,
        max_node_iters=args.max_node_iters,
        gap_tol=args.gap_tol,
        prune_tol=args.prune_tol,
        time_limit_ms=args.time_limit_ms,
    )


def run_method(A: Graph, B: Graph, method: str, args, stages) -> dict:
    """Run one method and return the result document."""
    echo = {
        "method": method,
        "presolve": list(stages),
        "clique_k": args.clique_k,
        "star_cap": args.star_cap,
        "node_strategy": args.node_strategy,
        "fw": args.fw,
        "max_node_iters": args.max_node_iters,
        "gap_tol": args.gap_tol,
        "prune_tol": args.prune_tol,
        "time_limit_ms": args.time_limit_ms,
    }
    if method == "dc-fw":
        t0 = time.perf_counter()
        if A.n != B.n or A.m_directed != B.m_directed:
            return result_document("non_isomorphic", certificate={"kind": "size_mismatch"},
                                   config_echo=echo, seed=args.seed)
        dc = solve_dc(A, B, DcConfig(lam=args.dc_lambda, seed=args.seed))
        return result_document(dc.status, permutation=dc.permutation, fw_iters=dc.fw_iters,
                               wall_ms=(time.perf_counter() - t0) * 1e3, config_echo=echo,
                               seed=args.seed)
    res = solve(A, B, _solve_config(args, stages))
    if getattr(args, "trace", None):
        with open(args.trace, "w") as fh:
            for row in res.trace:
                fh.write(json.dumps(_finite(row), sort_keys=True) + "\n")
    return result_document(res.status, permutation=res.permutation, certificate=res.certificate,
                           nodes=res.nodes, fw_iters=res.fw_iters, wall_ms=res.wall_ms,
                           presolve=res.presolve, config_echo=echo, seed=args.seed,
                           reason=res.reason)


def _finite(row: dict) -> dict:
    return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in row.items()}


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    A, B = _load(args.graph_a), _load(args.graph_b)
    stages = _stages(args.presolve, args.method)
    doc = run_method(A, B, args.method, args, stages)
    if args.format == "csv":
        rec = _record_from_doc(doc, Path(args.graph_a).stem, "", A, args.method, args.seed)
        _write_csv(sys.stdout, [rec.as_dict()])
    else:
        print(json.dumps(doc, sort_keys=True))
    return EXIT_CODES[doc["status"]]


def cmd_presolve(args) -> int:
    A, B = _load(args.graph_a), _load(args.graph_b)
    stages = _stages(args.presolve, "boscia-clique-star") or ("degree",)
    doc: dict = {"n": A.n}
    if A.n != B.n or A.m_directed != B.m_directed:
        doc.update(verdict="non_isomorphic", stage="size", fixings_fraction=1.0,
                   stage_times_ms={}, obbt_iters_avg=0.0)
    else:
        _, stats = run_presolve(A, B, _presolve_config(args, stages))
        doc.update(stats.to_dict())
        doc["verdict"] = "non_isomorphic" if stats.infeasible_stage else "undecided"
        doc["stage"] = stats.infeasible_stage
        doc["obbt_trials"] = stats.obbt_trials
        doc["obbt_fixed"] = stats.obbt_fixed
    print(json.dumps(doc, sort_keys=True))
    return 1 if doc["verdict"] == "non_isomorphic" else 2


def cmd_gen(args) -> int:
    if args.base:
        A = _load(args.base)
        family = args.family or Path(args.base).stem
    elif args.regular:
        n, d = args.regular
        if n < 1 or d < 0 or d >= n or (n * d) % 2:
            raise ValueError(f"no {d}-regular graph on {n} vertices")
        g = nx.random_regular_graph(d, n, seed=args.seed)
        A = Graph.from_edges(n, g.edges())
        family = args.family or f"regular_{n}_{d}"
    else:
        raise ValueError("one of --base or --regular is required")
    rng = np.random.default_rng(args.seed)
    perm = rng.permutation(A.n) if args.permute else np.arange(A.n)
    B = apply_permutation(A, perm)
    flips: list = []
    if args.mode == "noniso":
        if args.flips < 1:
            raise ValueError("--flips must be positive in noniso mode")
        flips = choose_flip_pairs(A.n, args.flips, args.seed)
        b = B.adj.copy()
        for u, v in flips:
            b[u, v] = b[v, u] = 1 - b[u, v]
        B = Graph(b)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    a_path = prefix.with_name(prefix.name + "_A.g6")
    b_path = prefix.with_name(prefix.name + "_B.g6")
    a_path.write_text(write_graph6(A) + "\n")
    b_path.write_text(write_graph6(B) + "\n")
    meta = {
        "id": args.id or prefix.name,
        "family": family,
        "mode": args.mode,
        "n": A.n,
        "m": A.num_edges,
        "seed": args.seed,
        "permutation": perm.tolist(),
        "flips": [list(p) for p in flips],
        "expected": "isomorphic" if args.mode == "iso" else "non_isomorphic",
        "a": a_path.name,
        "b": b_path.name,
    }
    meta_path = prefix.with_name(prefix.name + ".json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(json.dumps({"a": str(a_path), "b": str(b_path), "meta": str(meta_path)}))
    return 0


def _record_from_doc(doc, instance, family, A, method, seed, expected=None) -> RunRecord:
    st = doc["stats"]
    return RunRecord(
        instance=instance, family=family, n=A.n, m=A.num_edges, method=method,
        status=doc["status"], wall_ms=st["wall_ms"], nodes=st["nodes"], fw_iters=st["fw_iters"],
        fixings_fraction=st["fixings_fraction"], obbt_iters=st["obbt_iters_avg"], seed=seed,
        expected=expected,
    )


def _bench_one(task):
    meta_path, method, args = task
    meta = json.loads(Path(meta_path).read_text())
    base = Path(meta_path).parent
    A = read_graph(base / meta["a"])
    B = read_graph(base / meta["b"])
    stages = _stages(args.presolve, method)
    try:
        doc = run_method(A, B, method, args, stages)
    except Exception as exc:  # recorded, never fatal
        log.warning("instance %s failed with %s: %s", meta["id"], method, exc)
        doc = result_document("inconclusive", wall_ms=args.time_limit_ms, seed=args.seed)
    return _record_from_doc(doc, meta["id"], meta.get("family", ""), A, method, args.seed,
                            meta.get("expected"))


def cmd_bench(args) -> int:
    directory = Path(args.directory)
    metas = sorted(p for p in directory.glob("*.json"))
    if not metas:
        raise InputError(f"no instance metadata (*.json) in {directory}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown method(s): {', '.join(bad)}")
    args.trace = None
    tasks = [(str(p), m, args) for p in metas for m in methods]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            records = list(ex.map(_bench_one, tasks))
    else:
        records = [_bench_one(t) for t in tasks]
    records.sort(key=lambda r: (r.instance, methods.index(r.method)))
    summary = summarize(records, args.time_limit_ms, args.shift_s)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "json":
            json.dump({"records": [r.as_dict() for r in records], "summary": summary},
                      out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            _write_csv(out, [r.as_dict() for r in records])
            out.write("\n")
            _write_csv(out, summary)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _write_csv(fh, rows: list[dict]):
    if not rows:
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    fh.write(buf.getvalue())


# ---------------------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", choices=sorted(METHODS), default="boscia-clique-star")
    p.add_argument("--presolve", help="comma list of stages: degree,clique,star,obbt (or 'none')")
    p.add_argument("--clique-k", type=int, default=4)
    p.add_argument("--star-cap", type=int, default=4)
    p.add_argument("--obbt-budget", type=int, default=50)
    p.add_argument("--obbt-time-ms", type=float, default=60_000.0)
    p.add_argument("--node-strategy", choices=["best-bound", "dfs-up", "dfs-down"], default="dfs-up")
    p.add_argument("--fw", choices=["fw", "bpcg", "dicg"], default="dicg")
    p.add_argument("--max-node-iters", type=int, default=5000)
    p.add_argument("--gap-tol", type=float, default=1e-7)
    p.add_argument("--prune-tol", type=float, default=1e-6)
    p.add_argument("--time-limit-ms", type=float, default=3_600_000.0)
    p.add_argument("--dc-lambda", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gifw", description="Graph isomorphism by Frank-Wolfe branch-and-bound.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="decide isomorphism of two graph files")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    _add_solver_flags(p)
    p.add_argument("--trace", help="write one JSON line per processed node")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("presolve", help="run variable fixing only")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_presolve)

    p = sub.add_parser("gen", help="generate an isomorphic or non-isomorphic pair")
    p.add_argument("--mode", choices=["iso", "noniso"], default="iso")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--base", help="graph file for the first graph")
    src.add_argument("--regular", type=int, nargs=2, metavar=("N", "D"),
                     help="random D-regular graph on N vertices")
    p.add_argument("--flips", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--permute", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--family")
    p.add_argument("--id")
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run methods over a directory of generated pairs")
    p.add_argument("directory")
    p.add_argument("--methods", default="boscia-clique-star")
    _add_solver_flags(p)
    p.add_argument("--shift-s", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"gifw: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"gifw: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
