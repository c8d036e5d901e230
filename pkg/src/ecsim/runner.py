"""Instance construction and per-algorithm runs producing fixed-schema reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .congest import K_EPS, bipartite_2plus_eps, general_8plus_eps
from .defective import defective_2ec
from .errors import EcsimError, UsageError
from .graph import Bipartition, Graph, compute_stats, generate
from .lists import ListAssignment
from .listcolor import degree_plus_one_list_ec
from .orientation import check_phase_lemmas, compute_balanced_orientation
from .sim import LOCAL, ExecutionMode, RoundMetrics
from .tokengame import DiGraph, TokenGameConfig, run_token_game, validate_token_run
from .verify import (
    check_defective_2ec,
    check_orientation_balance,
    check_proper_edge_coloring,
    colors_used,
    red_blue_neighbors,
)

ALGORITHMS = ("token", "orient", "defective", "cong-bip", "cong-gen", "list-d1")
BIPARTITE_ALGS = ("orient", "defective", "cong-bip")
CSV_HEADER = ("alg", "n", "m", "delta", "eps", "seed", "rounds", "oracle_rounds", "colors", "ok")


@dataclass
class RunReport:
    algorithm: str
    n: int
    m: int
    delta: int
    bar_delta: int
    eps: float | None
    rounds: int
    oracle_rounds: int
    colors_used: int
    max_defect: int | None
    max_message_bits: int
    seed: int | None
    beta_used: float | None
    fallback_triggered: bool
    ok: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))

    def csv_row(self) -> list:
        return [self.algorithm, self.n, self.m, self.delta, self.eps, self.seed, self.rounds, self.oracle_rounds,
                self.colors_used, int(self.ok)]


@dataclass
class Instance:
    g: Graph
    bip: Bipartition | None = None
    lists: ListAssignment | None = None
    tokens: tuple | None = None  # (DiGraph, init tokens, alpha)


@dataclass
class RunOutcome:
    report: RunReport
    coloring: np.ndarray | None
    violations: list


def parse_eps(text) -> Fraction:
    try:
        eps = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad eps {text!r}") from None
    if not (0 < eps <= 1):
        raise UsageError("eps must lie in (0, 1]")
    return eps


def degree_lists(g: Graph, space: int, seed: int) -> ListAssignment:
    """Lists of ``deg(e) + 1`` distinct colors drawn from ``[1, space]``."""
    rng = np.random.default_rng(seed)
    deg_e = g.edge_degrees()
    if g.m and space < int(deg_e.max()) + 1:
        raise UsageError("color space smaller than max edge degree + 1")
    lists = [tuple(sorted((rng.choice(space, int(d) + 1, replace=False) + 1).tolist())) for d in deg_e]
    return ListAssignment((1, space), tuple(lists))


def random_token_instance(g: Graph, seed: int, k: int | None = None, quantum: int | None = None):
    """Random arc directions, uniform alpha = quantum, random initial tokens in [0, k]."""
    rng = np.random.default_rng(seed)
    flip = rng.random(g.m) < 0.5
    tail = np.where(flip, g.edges[:, 1], g.edges[:, 0])
    head = np.where(flip, g.edges[:, 0], g.edges[:, 1])
    dg = DiGraph(g, tail, head)
    bar = compute_stats(g).bar_delta
    k = max(1, bar) if k is None else k
    quantum = 1 if quantum is None else quantum
    x0 = rng.integers(0, k + 1, size=g.n)
    return dg, x0, tuple([quantum] * g.n), k, quantum


def default_model(alg: str) -> str:
    return "random_bipartite" if alg in BIPARTITE_ALGS else "random_general"


def build_instance(alg: str, model: str | None, n: int, delta: int, seed: int) -> Instance:
    model = model or default_model(alg)
    g, bip = generate(model, n, delta, seed)
    if alg in BIPARTITE_ALGS and bip is None:
        raise UsageError(f"{alg} needs a bipartite model")
    inst = Instance(g, bip)
    if alg == "list-d1":
        inst.lists = degree_lists(g, max(4 * g.max_degree**2, 1), seed)
    return inst


def run_algorithm(
    alg: str,
    inst: Instance,
    eps=Fraction(1, 2),
    mode: ExecutionMode = LOCAL,
    seed: int | None = None,
    k: int | None = None,
    quantum: int | None = None,
    beta_conf=None,
    amplify_mode: str = "reference",
    lam=Fraction(1, 2),
) -> RunOutcome:
    if alg not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {alg!r}; expected one of {', '.join(ALGORITHMS)}")
    g = inst.g
    stats = compute_stats(g)
    eps = parse_eps(eps)
    met = RoundMetrics()
    coloring = None
    violations = []
    beta_used = None
    max_defect = None
    fallback = False
    n_colors = 0
    try:
        if alg == "token":
            if inst.tokens is not None:
                dg, x0, alpha = inst.tokens
                k = k or max(1, stats.bar_delta)
                quantum = quantum or 1
            else:
                dg, x0, alpha, k, quantum = random_token_instance(g, seed or 0, k, quantum)
            cfg = TokenGameConfig(k, quantum, alpha)
            run = run_token_game(dg, x0, cfg, mode=mode, metrics=met)
            v = validate_token_run(dg, x0, cfg, run.state, run.records)
            if met.rounds > 6 * (k // quantum):
                v.add("round_budget", None, met.rounds, 6 * (k // quantum))
            violations = v.violations
        elif alg == "orient":
            bip = _need_bip(inst)
            eta = list(inst.lists.eta) if inst.lists is not None and inst.lists.eta is not None else [0] * g.m
            res = compute_balanced_orientation(g, bip, eta, eps, metrics=met)
            beta_used = res.beta
            v = check_orientation_balance(g, bip, res.u_to_v, eta, eps, res.beta)
            v.extend(check_phase_lemmas(res.trace))
            violations = v.violations
        elif alg == "defective":
            bip = _need_bip(inst)
            lam_v = [Fraction(lam)] * g.m
            res = defective_2ec(g, bip, lam_v, eps, metrics=met)
            beta_used = 2 * res.beta
            coloring = np.where(res.red, 1, 2)
            n_colors = colors_used(coloring)
            rn, bn = red_blue_neighbors(g, res.red)
            max_defect = int(np.where(res.red, rn, bn).max()) if g.m else 0
            violations = check_defective_2ec(g, lam_v, eps, 2 * res.beta, res.red).violations
        elif alg == "cong-bip":
            bip = _need_bip(inst)
            res = bipartite_2plus_eps(g, bip, eps, mode=mode, metrics=met)
            coloring, fallback = res.color, res.fallback
            n_colors = colors_used(coloring)
            v = check_proper_edge_coloring(g, coloring)
            cap = math.floor((2 + eps) * stats.delta)
            if n_colors > cap:
                v.add("palette_bound", None, n_colors, cap)
            violations = v.violations
        elif alg == "cong-gen":
            res = general_8plus_eps(g, eps, mode=mode, metrics=met)
            coloring, fallback = res.color, res.fallback
            n_colors = colors_used(coloring)
            v = check_proper_edge_coloring(g, coloring)
            cap = math.floor((8 + K_EPS * eps) * stats.delta)
            if n_colors > cap:
                v.add("palette_bound", None, n_colors, cap)
            violations = v.violations
        else:
            if inst.lists is None:
                raise UsageError("list-d1 needs lists")
            res = degree_plus_one_list_ec(g, inst.lists, amplify_mode=amplify_mode, beta_conf=beta_conf, metrics=met)
            coloring = res.color
            n_colors = colors_used(coloring)
            violations = check_proper_edge_coloring(g, coloring, lists=inst.lists).violations
    except (AssertionError, EcsimError) as exc:
        if isinstance(exc, UsageError):
            raise
        violations = [("failure", None, type(exc).__name__, str(exc))]
        coloring = None
    if alg in ("cong-bip", "cong-gen"):
        bw = mode.bandwidth(g.n)
        if bw is not None and met.max_message_bits > bw:
            violations.append(("bandwidth", None, met.max_message_bits, bw))
    report = RunReport(
        algorithm=alg,
        n=g.n,
        m=g.m,
        delta=stats.delta,
        bar_delta=stats.bar_delta,
        eps=None if alg == "token" else float(eps),
        rounds=met.rounds,
        oracle_rounds=met.oracle_rounds,
        colors_used=n_colors,
        max_defect=max_defect,
        max_message_bits=met.max_message_bits,
        seed=seed,
        beta_used=None if beta_used is None else float(beta_used),
        fallback_triggered=bool(fallback),
        ok=not violations,
    )
    return RunOutcome(report, coloring, violations)


def _need_bip(inst: Instance) -> Bipartition:
    if inst.bip is None:
        raise UsageError("this algorithm needs a bipartition")
    inst.bip.require(inst.g)
    return inst.bip


def run_cell(cell: dict) -> RunReport:
    """One sweep cell; a pure function of its arguments."""
    alg = cell["alg"]
    inst = build_instance(alg, cell.get("model"), cell["n"], cell["delta"], cell["seed"])
    mode = ExecutionMode.parse(cell.get("mode", "local"))
    return run_algorithm(alg, inst, cell.get("eps", "1/2"), mode, seed=cell["seed"],
                         beta_conf=cell.get("beta_conf"), amplify_mode=cell.get("amplify_mode", "reference")).report


def sweep_cells(algs, deltas, epss, seeds, n=None, model=None, mode="local") -> list[dict]:
    cells = []
    for alg in algs:
        for d in deltas:
            for e in (["1"] if alg == "token" else epss):
                for s in seeds:
                    cells.append({"alg": alg, "delta": int(d), "eps": str(e), "seed": int(s),
                                  "n": int(n) if n else 8 * int(d), "model": model, "mode": mode})
    return cells


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def rounds_table(rows) -> str:
    """Aggregate CSV rows into a rounds-vs-(delta, eps) table per algorithm."""
    groups = {}
    for r in rows:
        key = (r["alg"], int(r["delta"]), r["eps"])
        groups.setdefault(key, []).append(r)
    lines = ["alg       delta  eps    runs  rounds_min  rounds_max  rounds_mean  oracle  ok"]
    for (alg, d, e), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]))):
        rounds = [int(r["rounds"]) for r in rs]
        oracle = sum(int(r["oracle_rounds"]) for r in rs)
        ok = sum(int(r["ok"]) for r in rs)
        lines.append(f"{alg:<9} {d:>5}  {str(e):<5} {len(rs):>5}  {min(rounds):>10}  {max(rounds):>10}  "
                     f"{sum(rounds) / len(rounds):>11.1f}  {oracle:>6}  {ok}/{len(rs)}")
    return "\n".join(lines) + "\n"
