"""Command-line experiment runner: gen, run, verify, report, sweep.

Exit codes: 0 ok, 1 validator failure, 2 usage error. Options may also come from
a ``key = value`` file passed with ``--config``; command-line flags win.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import UsageError
from .graph import MODELS, generate
from .io import (
    read_bipartition,
    read_coloring,
    read_digraph,
    read_graph,
    read_lists,
    read_tokens,
    write_bipartition,
    write_coloring,
    write_graph,
    write_lists,
)
from .runner import (
    ALGORITHMS,
    Instance,
    RunReport,
    build_instance,
    degree_lists,
    reports_csv,
    rounds_table,
    run_algorithm,
    run_cell,
    sweep_cells,
)
from .sim import ExecutionMode
from .verify import check_proper_edge_coloring

log = logging.getLogger("ecsim")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ecsim", description="Distributed edge coloring simulator")
    p.add_argument("--config", help="key = value file of option defaults")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a seeded graph (and lists)")
    g.add_argument("--model", choices=MODELS, default="random_general")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--delta", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--bip-out", help="bipartition file (bipartite models)")
    g.add_argument("--lists-out", help="write deg+1 lists drawn from a space of size 4*Delta^2")

    r = sub.add_parser("run", help="run one algorithm and validate its output")
    r.add_argument("--alg", choices=ALGORITHMS, required=True)
    r.add_argument("--graph")
    r.add_argument("--bip")
    r.add_argument("--lists")
    r.add_argument("--tokens", help="token file; the graph file's lines are read as arcs")
    r.add_argument("--model", choices=MODELS, help="generate instead of reading --graph")
    r.add_argument("--n", type=int)
    r.add_argument("--delta", type=int)
    r.add_argument("--eps", default="1/2")
    r.add_argument("--mode", default="local")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--k", type=int, help="token game capacity (default: max edge degree)")
    r.add_argument("--quantum", type=int, help="token game delta (default 1)")
    r.add_argument("--beta-conf", type=float)
    r.add_argument("--amplify-mode", choices=("reference", "fast"), default="reference")
    r.add_argument("--out", help="JSON report path (default: stdout)")
    r.add_argument("--coloring-out")

    v = sub.add_parser("verify", help="check a coloring file")
    v.add_argument("--graph", required=True)
    v.add_argument("--coloring", required=True)
    v.add_argument("--lists")
    v.add_argument("--palette", type=int)

    rp = sub.add_parser("report", help="summarize JSON reports or a sweep CSV")
    rp.add_argument("inputs", nargs="+")
    rp.add_argument("--out")

    s = sub.add_parser("sweep", help="run a grid of seeded cells and write CSV")
    s.add_argument("--algs", default=",".join(ALGORITHMS))
    s.add_argument("--deltas", default="8,16,32,64")
    s.add_argument("--eps", default="1/4,1/2,1")
    s.add_argument("--seeds", type=int, default=5)
    s.add_argument("--seed-base", type=int, default=0)
    s.add_argument("--n", type=int, help="node count per cell (default 8*Delta)")
    s.add_argument("--model", choices=MODELS)
    s.add_argument("--mode", default="local")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True)
    s.add_argument("--reports-dir")
    return p


def _parse(argv):
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        cfg = read_config(known.config)
        subs = parser._subparsers._group_actions[0].choices
        used = set()
        for sub in subs.values():
            dests = {a.dest for a in sub._actions}
            hits = {k: v for k, v in cfg.items() if k in dests}
            for a in sub._actions:
                if a.dest in hits:
                    a.required = False
            sub.set_defaults(**{k: _convert(sub, k, v) for k, v in hits.items()})
            used |= set(hits)
        unknown = sorted(set(cfg) - used)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return parser.parse_args(argv)


def _convert(sub, key, value):
    for a in sub._actions:
        if a.dest == key and a.type is not None:
            return a.type(value)
    return value


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    g, bip = generate(args.model, args.n, args.delta, args.seed)
    write_graph(g, args.out)
    if args.bip_out:
        if bip is None:
            raise UsageError(f"model {args.model} has no bipartition")
        write_bipartition(bip, args.bip_out)
    if args.lists_out:
        write_lists(degree_lists(g, max(4 * g.max_degree**2, 1), args.seed), args.lists_out)
    log.info("wrote %s (n=%d, m=%d)", args.out, g.n, g.m)
    return 0


def _load_instance(args) -> Instance:
    if args.graph:
        if args.tokens:
            dg = read_digraph(args.graph)
            tokens, alpha = read_tokens(args.tokens, dg.n)
            return Instance(dg.base, tokens=(dg, tokens, tuple(alpha)))
        g = read_graph(args.graph)
        bip = read_bipartition(args.bip, g.n) if args.bip else None
        lists = read_lists(args.lists, g.m) if args.lists else None
        return Instance(g, bip, lists)
    if args.n is None or args.delta is None:
        raise UsageError("give --graph or --n and --delta")
    return build_instance(args.alg, args.model, args.n, args.delta, args.seed)


def cmd_run(args) -> int:
    inst = _load_instance(args)
    mode = ExecutionMode.parse(args.mode)
    out = run_algorithm(args.alg, inst, args.eps, mode, seed=args.seed, k=args.k, quantum=args.quantum,
                        beta_conf=args.beta_conf, amplify_mode=args.amplify_mode)
    _emit(out.report.to_json(), args.out)
    if args.coloring_out and out.coloring is not None:
        write_coloring(out.coloring, args.coloring_out)
    for check, entity, lhs, rhs in out.violations[:10]:
        log.warning("%s at %s: %s vs %s", check, entity, lhs, rhs)
    return 0 if out.report.ok else 1


def cmd_verify(args) -> int:
    g = read_graph(args.graph)
    col = read_coloring(args.coloring, g.m)
    lists = read_lists(args.lists, g.m) if args.lists else None
    v = check_proper_edge_coloring(g, col, lists=lists, palette=args.palette)
    sys.stdout.write(json.dumps(v.as_dict(), indent=2) + "\n")
    return 0 if v.ok else 1


def cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        text = Path(path).read_text()
        if path.endswith(".csv"):
            rows.extend(csv.DictReader(text.splitlines()))
        else:
            r = RunReport.from_json(text)
            rows.append(dict(zip(("alg", "n", "m", "delta", "eps", "seed", "rounds", "oracle_rounds", "colors", "ok"),
                                 r.csv_row())))
    if not rows:
        raise UsageError("no rows to report")
    _emit(rounds_table(rows), args.out)
    return 0 if all(int(r["ok"]) for r in rows) else 1


def cmd_sweep(args) -> int:
    algs = [a for a in args.algs.split(",") if a]
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad:
        raise UsageError(f"unknown algorithms: {', '.join(bad)}")
    deltas = [int(d) for d in args.deltas.split(",") if d]
    epss = [e for e in args.eps.split(",") if e]
    seeds = range(args.seed_base, args.seed_base + args.seeds)
    cells = sweep_cells(algs, deltas, epss, seeds, args.n, args.model, args.mode)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            reports = list(ex.map(run_cell, cells))
    else:
        reports = [run_cell(c) for c in cells]
    Path(args.out).write_text(reports_csv(reports))
    if args.reports_dir:
        d = Path(args.reports_dir)
        d.mkdir(parents=True, exist_ok=True)
        for c, r in zip(cells, reports):
            (d / f"{c['alg']}_d{c['delta']}_e{c['eps'].replace('/', '-')}_s{c['seed']}.json").write_text(r.to_json())
    failed = sum(not r.ok for r in reports)
    log.info("%d cells, %d failed", len(reports), failed)
    return 0 if failed == 0 else 1


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "verify": cmd_verify, "report": cmd_report, "sweep": cmd_sweep}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ECSIM_LOG", "WARNING").upper(), format="%(levelname)s %(message)s")
    try:
        args = _parse(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"ecsim: error: {exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
