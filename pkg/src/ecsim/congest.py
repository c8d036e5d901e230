"""CONGEST edge coloring: (2+eps)Delta on 2-colored bipartite graphs, (8+6eps)Delta in general.

Bipartite: recursively split with lambda = 1/2 defective 2-edge colorings for
``depth`` levels, then color each leaf subgraph greedily with ``d_leaf + 1``
colors; edge color = ``vec * (d_leaf + 1) + col``. When the recursion parameters
are out of range (always at desk scale) a greedy ``bar_delta + 1`` coloring over
the port-pair schedule is used instead.

General: at each level 4-color the uncolored graph with small defect, color the
edges between {1,2} and {3,4}, then the remaining bichromatic edges between
{1,3} and {2,4}, each as a bipartite instance on its own palette range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .defective import defective_2ec
from .errors import ProtocolViolation, UsageError
from .graph import Bipartition, Graph, compute_stats
from .primitives import (
    VertexColoring,
    greedy_edge_coloring,
    line_graph_schedule,
    linial_coloring,
    port_pair_schedule,
    refine_threshold,
    refine_to_4,
)
from .sim import LOCAL, ExecutionMode, RoundMetrics, oracle_hook

K_EPS = 6
C_CHI = Fraction(1, 2)
C_PRIME = 1


@dataclass
class SplitPlan:
    chi: float | None
    depth: int
    fallback: bool
    color_vector: np.ndarray | None = None  # per edge, bits packed into an int (red = 1)
    leaf_palette: int = 0


@dataclass(frozen=True)
class CongestParams:
    eps: Fraction
    eps1: Fraction
    eps2: Fraction
    k_lvl: int

    @classmethod
    def build(cls, delta: int, eps) -> "CongestParams":
        eps = Fraction(eps)
        if not (0 < eps <= 1):
            raise UsageError("eps must lie in (0, 1]")
        k = max(0, int(math.floor(math.log2(delta))) - 1) if delta >= 1 else 0
        return cls(eps, Fraction(1, 2 * max(k, 1)), eps, k)


def chi_plan(delta: int, bar_delta: int, eps) -> SplitPlan:
    """Recursion step and depth; ``fallback`` when the formula leaves its range."""
    eps = float(eps)
    lg = math.log2(max(delta, 2))
    c = float(C_CHI)
    inner = (eps * bar_delta / 4) / (C_PRIME * lg**8 / (c**5 * eps**5))
    if inner <= 1:
        return SplitPlan(None, 0, True)
    chi = math.log2(1 + eps / 4) * math.log(2) / math.log2(inner)
    depth = math.floor(math.log(1 + eps / 4) / chi)
    if chi > 0.5 or depth < 1:
        return SplitPlan(chi, depth, True)
    return SplitPlan(chi, depth, False)


@dataclass
class CongestResult:
    color: np.ndarray
    palette: int
    metrics: RoundMetrics
    plan: SplitPlan | None = None
    levels: list = field(default_factory=list)  # general: per-level records

    @property
    def fallback(self) -> bool:
        if self.plan is not None:
            return self.plan.fallback
        return any(lv.get("fallback", False) for lv in self.levels)


def _check_bits(metrics: RoundMetrics, mode: ExecutionMode, n: int) -> None:
    bw = mode.bandwidth(n)
    if bw is not None and metrics.max_message_bits > bw:
        raise ProtocolViolation(
            f"message of {metrics.max_message_bits} bits exceeds bandwidth {bw}", size=metrics.max_message_bits
        )


def bipartite_2plus_eps(
    g: Graph,
    bip: Bipartition,
    eps,
    mode: ExecutionMode = LOCAL,
    depth: int | None = None,
    chi=None,
    metrics: RoundMetrics | None = None,
) -> CongestResult:
    """Proper edge coloring with at most ``floor((2+eps)Delta)`` colors.

    Passing ``depth`` (and optionally ``chi``) forces the recursive regime; the
    leaf palette width is then read off globally and the run is oracle-flagged.
    """
    bip.require(g)
    eps = Fraction(eps)
    if not (0 < eps <= 1):
        raise UsageError("eps must lie in (0, 1]")
    stats = compute_stats(g)
    met = RoundMetrics()
    if depth is None:
        plan = chi_plan(stats.delta, stats.bar_delta, eps)
    else:
        if depth < 0:
            raise UsageError("depth must be non-negative")
        plan = SplitPlan(float(chi if chi is not None else eps / 4), int(depth), False)
    if g.m == 0:
        return CongestResult(np.zeros(0, dtype=np.int64), 0, met, plan)
    if plan.fallback:
        sched = port_pair_schedule(g, bip, met)
        palette = stats.bar_delta + 1
        col = greedy_edge_coloring(g, palette, sched, met)
    else:
        col, palette = _recursive(g, bip, plan, Fraction(plan.chi), met)
    if metrics is not None:
        metrics.then(met)
    _check_bits(met, mode, g.n)
    return CongestResult(col, palette, met, plan)


def _recursive(g: Graph, bip: Bipartition, plan: SplitPlan, chi: Fraction, met: RoundMetrics):
    vec = np.zeros(g.m, dtype=np.int64)
    groups = [np.arange(g.m)]
    half = Fraction(1, 2)
    for _ in range(plan.depth):
        nxt, stage = [], []
        for ids in groups:
            if len(ids) == 0:
                continue
            sub, _ = g.edge_subgraph(ids)
            sm = RoundMetrics()
            res = defective_2ec(sub, bip, [half] * sub.m, min(chi, Fraction(1)), metrics=sm)
            stage.append(sm)
            red = res.red
            vec[ids] = 2 * vec[ids] + red
            nxt.extend([ids[red], ids[~red]])
        met.alongside(stage)
        groups = nxt
    plan.color_vector = vec.copy()

    def leaf_width():
        return max(int(g.edge_subgraph(ids)[0].edge_degrees().max()) for ids in groups if len(ids))

    d = oracle_hook(met, "leaf_degree", leaf_width)
    plan.leaf_palette = d + 1
    col = np.zeros(g.m, dtype=np.int64)
    stage = []
    for ids in groups:
        if len(ids) == 0:
            continue
        sub, _ = g.edge_subgraph(ids)
        sm = RoundMetrics()
        sched = port_pair_schedule(sub, bip, sm)
        col[ids] = greedy_edge_coloring(sub, d + 1, sched, sm)
        stage.append(sm)
    met.alongside(stage)
    color = vec * (d + 1) + col
    return color, (2**plan.depth) * (d + 1)


def general_8plus_eps(
    g: Graph,
    eps,
    base: VertexColoring | None = None,
    mode: ExecutionMode = LOCAL,
    metrics: RoundMetrics | None = None,
) -> CongestResult:
    """Proper edge coloring with at most ``floor((8 + 6 eps) Delta)`` colors."""
    eps = Fraction(eps)
    delta = g.max_degree
    params = CongestParams.build(max(delta, 1), eps)
    met = RoundMetrics()
    color = np.zeros(g.m, dtype=np.int64)
    if g.m == 0:
        return CongestResult(color, 0, met)
    if base is None:
        base = linial_coloring(g, metrics=met)
    eps1 = params.eps1
    offset = 0
    d_i = delta
    levels = []
    uncolored = np.arange(g.m)
    for i in range(params.k_lvl + 1):
        bound = delta * (Fraction(1, 2) + eps1) ** i
        h, ids = g.edge_subgraph(uncolored)
        if h.max_degree > d_i or d_i > bound:
            raise AssertionError(f"level {i}: degree {h.max_degree} exceeds {d_i} or {d_i} exceeds {float(bound)}")
        rec = {"level": i, "degree_bound": d_i, "max_degree": h.max_degree, "fallback": False}
        if len(ids) == 0:
            levels.append(rec)
            d_i = refine_threshold(d_i, eps1)
            continue
        vc = refine_to_4(h, eps1, base, degree_bound=max(d_i, 1), metrics=met)
        cu = vc.color[h.edges[:, 0]]
        cv = vc.color[h.edges[:, 1]]
        p = math.floor((2 + eps) * d_i)
        for low in ((1, 2), (1, 3)):
            in_low_u = np.isin(cu, low)
            in_low_v = np.isin(cv, low)
            sel = np.flatnonzero((in_low_u != in_low_v) & (cu != cv) & (color[ids] == 0))
            if len(sel) == 0:
                offset += p
                continue
            side = np.where(np.isin(vc.color, low), 0, 1)
            sub, _ = h.edge_subgraph(sel)
            res = bipartite_2plus_eps(sub, Bipartition(side), eps, metrics=met)
            if res.palette > p:
                raise AssertionError(f"level {i}: bipartite palette {res.palette} exceeds {p}")
            color[ids[sel]] = res.color + offset
            rec["fallback"] = rec["fallback"] or res.fallback
            offset += p
        levels.append(rec)
        d_i = refine_threshold(d_i, eps1)
        uncolored = np.flatnonzero(color == 0)
    h, ids = g.edge_subgraph(uncolored)
    if len(ids):
        bound = delta * (Fraction(1, 2) + eps1) ** (params.k_lvl + 1)
        if h.max_degree > d_i or d_i > bound:
            raise AssertionError(f"residual degree {h.max_degree} exceeds {d_i}")
        sched = line_graph_schedule(h, metrics=met)
        color[ids] = greedy_edge_coloring(h, 2 * d_i - 1, sched, met) + offset
        offset += 2 * d_i - 1
    cap = math.floor((8 + K_EPS * eps) * delta)
    if offset > cap:
        raise AssertionError(f"palette {offset} exceeds {cap}")
    if metrics is not None:
        metrics.then(met)
    _check_bits(met, mode, g.n)
    return CongestResult(color, offset, met, None, levels)
