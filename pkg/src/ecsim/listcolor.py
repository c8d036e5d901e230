"""LOCAL (degree+1)-list edge coloring.

``solve_slack`` handles instances with large slack by repeatedly halving the
color space and splitting the edges with a defective 2-edge coloring whose red
share matches the share of the list in the lower half. The driver
``degree_plus_one_list_ec`` peels the graph level by level: 4-color the nodes with
small defect, and for each pair of node colors partially color the bipartite
graph between them until its uncolored degree is small.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .defective import defective_2ec
from .errors import SlackFailure, UsageError
from .graph import Bipartition, Graph
from .lists import ListAssignment
from .orientation import beta_art
from .primitives import defective_const, line_graph_schedule, linial_coloring, port_pair_schedule
from .sim import RoundMetrics, oracle_hook

E2 = math.e**2
K_AMP = 64
R_LVL = Fraction(7, 8)
RESIDUAL_DEGREE = 8


@dataclass(frozen=True)
class SlackInstance:
    bar_delta: int
    slack: float
    space_size: int
    degree_bound: tuple

    @classmethod
    def of(cls, g: Graph, lists: ListAssignment, slack) -> "SlackInstance":
        deg_e = g.edge_degrees()
        return cls(int(deg_e.max()) if g.m else 0, float(slack), lists.space_size, tuple(deg_e.tolist()))

    def violations(self, lists) -> list[int]:
        return [e for e, d in enumerate(self.degree_bound) if not len(lists[e]) > self.slack * d]


def _count_in(lst, lo, hi) -> int:
    return bisect.bisect_right(lst, hi) - bisect.bisect_left(lst, lo)


def _slice(lst, lo, hi):
    return lst[bisect.bisect_left(lst, lo) : bisect.bisect_right(lst, hi)]


class _Painter:
    """Global coloring state with per-node used-color sets."""

    def __init__(self, g: Graph, color: np.ndarray):
        self.g = g
        self.color = color
        self.ends = g.edges.tolist()
        self.used = [set() for _ in range(g.n)]
        for e in np.flatnonzero(color).tolist():
            a, b = self.ends[e]
            self.used[a].add(int(color[e]))
            self.used[b].add(int(color[e]))

    def paint(self, ids, lists, phase=None) -> None:
        """Color a matching: each edge takes its smallest free list color."""
        for e in ids:
            if self.color[e]:
                continue
            a, b = self.ends[e]
            ua, ub = self.used[a], self.used[b]
            for c in lists[e]:
                if c not in ua and c not in ub:
                    break
            else:
                raise SlackFailure(f"edge {e} has no free color in its list", edge=e, phase=phase)
            self.color[e] = c
            ua.add(c)
            ub.add(c)

    def free(self, e, lst) -> int:
        a, b = self.ends[e]
        ua, ub = self.used[a], self.used[b]
        return sum(1 for c in lst if c not in ua and c not in ub)


def _classes(keys: np.ndarray, ids: np.ndarray) -> list[list[int]]:
    if len(ids) == 0:
        return []
    order = np.lexsort((ids, keys))
    k, i = keys[order], ids[order]
    cuts = np.flatnonzero(np.diff(k)) + 1
    return [c.tolist() for c in np.split(i, cuts)]


def _paint_by_ports(g: Graph, bip: Bipartition, painter: _Painter, ids, lists, phase, metrics):
    sub, _ = g.edge_subgraph(ids)
    sched = port_pair_schedule(sub, bip, metrics)
    classes = _classes(sched, np.asarray(ids, dtype=np.int64))
    for cls in classes:
        painter.paint(cls, lists, phase)
    metrics.charge(len(classes), bits=max(1, int(painter.color.max()).bit_length()), messages=2 * len(ids))


# --- slack-preserving split ------------------------------------------------------------


@dataclass
class SplitResult:
    red: np.ndarray  # over the given edge ids: True -> lower half of the space
    lam: list
    mid: int
    min_slack: tuple  # (lower, upper): min over edges of |L^i_e| / deg_{G_i}(e), inf if degree 0


def split_high_degree(
    g: Graph,
    bip: Bipartition,
    ids,
    lists,
    space: tuple[int, int],
    eps,
    beta_conf=None,
    degree_bound=None,
    metrics: RoundMetrics | None = None,
) -> SplitResult:
    """Split edges ``ids`` between the lower and upper halves of ``space``.

    ``degree_bound[j]`` is ``d(e)`` for the j-th edge and must be at least
    ``beta_conf / eps``; edges below that must be passivated by the caller.
    """
    ids = np.asarray(ids, dtype=np.int64)
    eps = Fraction(eps)
    sub, _ = g.edge_subgraph(ids)
    beta = Fraction(beta_art(int(sub.edge_degrees().max()) if sub.m else 0, eps) if beta_conf is None else beta_conf)
    d = sub.edge_degrees() if degree_bound is None else np.asarray(degree_bound)
    low = np.flatnonzero(d < beta / eps)
    if len(low):
        e = int(ids[low[0]])
        raise UsageError(f"edge {e} has degree {int(d[low[0]])} below beta/eps = {float(beta / eps):.3f}")
    lo, hi = space
    mid = (lo + hi) // 2
    lam = []
    for e in ids.tolist():
        total = _count_in(lists[e], lo, hi)
        if total == 0:
            raise SlackFailure(f"edge {e} has an empty list in [{lo}, {hi}]", edge=e)
        lam.append(Fraction(_count_in(lists[e], lo, mid), total))
    res = defective_2ec(sub, bip, lam, eps, eta_beta=beta, metrics=metrics)
    red = res.red
    out = []
    for mask, (a, b) in ((red, (lo, mid)), (~red, (mid + 1, hi))):
        part, _ = sub.edge_subgraph(np.flatnonzero(mask))
        dg = part.edge_degrees()
        best = math.inf
        for j, e in enumerate(ids[mask].tolist()):
            if dg[j]:
                best = min(best, _count_in(lists[e], a, b) / int(dg[j]))
        out.append(best)
    return SplitResult(red, lam, mid, tuple(out))


# --- large-slack solver ----------------------------------------------------------------


@dataclass
class PhaseRecord:
    phase: int
    active: int
    passive: int
    groups: int
    split: bool
    min_slack: float
    slack_target: float


@dataclass
class SlackResult:
    color: np.ndarray
    metrics: RoundMetrics
    phases: list = field(default_factory=list)
    eps: Fraction = Fraction(1)
    beta: Fraction = Fraction(0)
    leaf_rounds: int = 0

    @property
    def split_phases(self) -> int:
        return sum(1 for p in self.phases if p.split)

    @property
    def slack_ok(self) -> bool:
        return all(p.min_slack > p.slack_target for p in self.phases if p.split)


def solve_slack(
    g: Graph,
    bip: Bipartition,
    lists: ListAssignment,
    slack=E2,
    beta_conf=None,
    metrics: RoundMetrics | None = None,
    color: np.ndarray | None = None,
) -> SlackResult:
    """Complete list coloring of an instance with ``|L_e| > slack * deg(e)``.

    ``beta_conf`` defaults to the orientation's own constant, under which every
    split keeps the slack ledger; with a smaller value the ledger is only
    recorded and the run either succeeds or raises ``SlackFailure``.
    ``color`` holds colors of edges outside the instance (0 for instance edges).
    """
    bip.require(g)
    if float(slack) < E2 - 1e-12:
        raise UsageError(f"slack {float(slack)} is below e^2")
    inst = SlackInstance.of(g, lists, slack)
    bad = inst.violations(lists)
    if bad:
        raise SlackFailure(f"edge {bad[0]} violates the slack precondition", edge=bad[0], phase=0)
    lo, hi = lists.space
    C = max(hi - lo + 1, 1)
    k = int(math.floor(math.log2(C))) if C > 1 else 0
    eps = Fraction(1) / Fraction(math.log2(C)) if C > 2 else Fraction(1)
    bar = inst.bar_delta
    beta = Fraction(beta_art(bar, eps)) if beta_conf is None else Fraction(beta_conf)
    met = RoundMetrics()
    col = np.zeros(g.m, dtype=np.int64) if color is None else np.asarray(color, dtype=np.int64).copy()
    painter = _Painter(g, col)
    result = SlackResult(col, met, eps=eps, beta=beta)
    groups = [(np.flatnonzero(col == 0), lo, hi)]
    passive = []  # (phase, [(ids, lo, hi), ...])
    thr = beta / eps
    for i in range(1, k + 1):
        stage, nxt, here = [], [], []
        n_act = n_pas = 0
        split = False
        slack_seen = math.inf
        for ids, a, b in groups:
            if len(ids) == 0:
                continue
            sub, _ = g.edge_subgraph(ids)
            d = sub.edge_degrees()
            off = d < thr
            if off.any():
                here.append((ids[off], a, b))
                n_pas += int(off.sum())
            act = ids[~off]
            if len(act) == 0:
                continue
            n_act += len(act)
            sm = RoundMetrics()
            sp = split_high_degree(g, bip, act, lists, (a, b), eps, beta, metrics=sm)
            stage.append(sm)
            split = True
            slack_seen = min(slack_seen, *sp.min_slack)
            nxt.append((act[sp.red], a, sp.mid))
            nxt.append((act[~sp.red], sp.mid + 1, b))
        met.charge(1, bits=max(1, bar.bit_length()), messages=2 * g.m)
        met.alongside(stage)
        target = float(slack) / (1 + float(eps)) ** (2 * i)
        result.phases.append(PhaseRecord(i, n_act, n_pas, len(groups), split, slack_seen, target))
        if split and beta_conf is None and not slack_seen > target:
            raise AssertionError(f"phase {i}: slack {slack_seen} fell to {target} or below")
        passive.append((i, here))
        groups = nxt
    # leaves, then passive edges from the last phase back to the first
    stage = []
    for ids, a, b in groups:
        if len(ids):
            sm = RoundMetrics()
            _paint_by_ports(g, bip, painter, ids, _SpaceLists(lists, a, b), k + 1, sm)
            stage.append(sm)
    met.alongside(stage)
    result.leaf_rounds = max((s.rounds for s in stage), default=0)
    for i, here in reversed(passive):
        stage = []
        for ids, a, b in here:
            sm = RoundMetrics()
            _paint_by_ports(g, bip, painter, ids, _SpaceLists(lists, a, b), i, sm)
            stage.append(sm)
        met.alongside(stage)
    if metrics is not None:
        metrics.then(met)
    return result


class _SpaceLists:
    def __init__(self, lists, lo, hi):
        self.lists, self.lo, self.hi = lists, lo, hi

    def __getitem__(self, e):
        return _slice(self.lists[e], self.lo, self.hi)


# --- slack amplification ---------------------------------------------------------------


class _EffectiveLists:
    """Lists minus the colors already used around each edge."""

    def __init__(self, lists, painter: _Painter):
        self.lists, self.painter = lists, painter

    def __getitem__(self, e):
        a, b = self.painter.ends[e]
        ua, ub = self.painter.used[a], self.painter.used[b]
        return tuple(c for c in self.lists[e] if c not in ua and c not in ub)


def _uncolored_edge_degree(g: Graph, ids: np.ndarray, color: np.ndarray) -> np.ndarray:
    un = ids[color[ids] == 0]
    if len(un) == 0:
        return np.zeros(0, dtype=np.int64)
    a, b = g.edges[un, 0], g.edges[un, 1]
    cnt = np.bincount(np.concatenate([a, b]), minlength=g.n)
    return cnt[a] + cnt[b] - 2


@dataclass
class AmplifyResult:
    colored: int
    classes_used: int
    bound: float
    final_degree: int
    solver_colored: int = 0


def amplify_slack(
    g: Graph,
    bip: Bipartition,
    lists,
    painter: "_Painter",
    ids,
    k_amp: int = K_AMP,
    mode: str = "reference",
    slack=E2,
    beta_conf=None,
    metrics: RoundMetrics | None = None,
) -> AmplifyResult:
    """Partially color edges ``ids`` until their uncolored edge degree is at most ``bar_delta / k_amp``.

    Reference mode colors schedule classes greedily and asks a global oracle
    after each class whether the bound already holds. Fast mode first hands the
    edges that have slack ``slack`` on their own to ``solve_slack``.
    """
    if mode not in ("reference", "fast"):
        raise UsageError(f"unknown amplify mode {mode!r}")
    if k_amp < 1:
        raise UsageError("k_amp must be at least 1")
    met = RoundMetrics() if metrics is None else metrics
    ids = np.asarray(ids, dtype=np.int64)
    col = painter.color
    start = _uncolored_edge_degree(g, ids, col)
    bound = (int(start.max()) if len(start) else 0) / k_amp
    before = int((col[ids] == 0).sum())
    solved = 0
    if mode == "fast" and len(ids):
        solved = _fast_slack(g, bip, lists, painter, ids, slack, beta_conf, met)
    sub, _ = g.edge_subgraph(ids)
    sched = port_pair_schedule(sub, bip, met)
    eff = _EffectiveLists(lists, painter)

    def holds():
        d = _uncolored_edge_degree(g, ids, col)
        return (int(d.max()) if len(d) else 0) <= bound

    used = 0
    for cls in _classes(sched, ids):
        if oracle_hook(met, "amplify_stop", holds):
            break
        painter.paint(cls, eff)
        used += 1
        met.charge(1, bits=max(1, int(col.max()).bit_length()), messages=2 * len(cls))
    final = _uncolored_edge_degree(g, ids, col)
    fd = int(final.max()) if len(final) else 0
    if fd > bound:
        raise AssertionError(f"uncolored edge degree {fd} above {bound}")
    after = int((col[ids] == 0).sum())
    return AmplifyResult(before - after, used, bound, fd, solved)


def _fast_slack(g, bip, lists, painter, ids, slack, beta_conf, met) -> int:
    col = painter.color
    un = ids[col[ids] == 0]
    if len(un) == 0:
        return 0
    deg = _uncolored_edge_degree(g, un, col)
    eff = _EffectiveLists(lists, painter)
    eff_l = [eff[e] for e in un.tolist()]
    pick = [j for j, e in enumerate(un.tolist()) if len(eff_l[j]) > float(slack) * int(deg[j])]
    if not pick:
        return 0
    sel = un[pick]
    sub, _ = g.edge_subgraph(sel)
    sub_lists = [eff_l[j] for j in pick]
    space = (min(min(l) for l in sub_lists), max(max(l) for l in sub_lists))
    try:
        res = solve_slack(sub, bip, ListAssignment(space, tuple(sub_lists)), slack, beta_conf, metrics=met)
    except (SlackFailure, AssertionError):
        return 0
    painter.paint(sel.tolist(), _Fixed(dict(zip(sel.tolist(), res.color.tolist()))))
    return len(sel)


class _Fixed:
    def __init__(self, m):
        self.m = m

    def __getitem__(self, e):
        return (self.m[e],)


# --- degree+1 driver -------------------------------------------------------------------


@dataclass
class LevelRecord:
    level: int
    degree: int
    degree_after: int
    colored: int
    oracle_checks: int


@dataclass
class ListResult:
    color: np.ndarray
    metrics: RoundMetrics
    levels: list = field(default_factory=list)
    residual_colored: int = 0
    space: tuple = (1, 0)


def _slack_check(g: Graph, lists, painter: _Painter) -> None:
    col = painter.color
    un = np.flatnonzero(col == 0)
    if len(un) == 0:
        return
    deg = _uncolored_edge_degree(g, un, col)
    for j, e in enumerate(un.tolist()):
        if painter.free(e, lists[e]) <= int(deg[j]):
            raise AssertionError(f"edge {e} lost its slack")


def degree_plus_one_list_ec(
    g: Graph,
    lists: ListAssignment,
    amplify_mode: str = "reference",
    k_amp: int = K_AMP,
    beta_conf=None,
    metrics: RoundMetrics | None = None,
) -> ListResult:
    """Proper list edge coloring when every list has at least ``deg(e) + 1`` colors."""
    if len(lists) != g.m:
        raise UsageError("one list per edge")
    deg_e = g.edge_degrees()
    for e in range(g.m):
        if len(lists[e]) < int(deg_e[e]) + 1:
            raise UsageError(f"edge {e} has {len(lists[e])} colors, needs {int(deg_e[e]) + 1}")
    met = RoundMetrics()
    col = np.zeros(g.m, dtype=np.int64)
    painter = _Painter(g, col)
    result = ListResult(col, met, space=lists.space)
    if g.m == 0:
        return result
    base = linial_coloring(g, metrics=met)
    level = 0
    while True:
        ids = np.flatnonzero(col == 0)
        h, _ = g.edge_subgraph(ids)
        D = h.max_degree
        if D <= RESIDUAL_DEGREE:
            break
        vc = defective_const(h, base, degree_bound=D, metrics=met)
        cu, cv = vc.color[g.edges[ids, 0]], vc.color[g.edges[ids, 1]]
        colored = checks = 0
        for a, b in itertools.combinations(range(1, 5), 2):
            sel = ids[((cu == a) & (cv == b)) | ((cu == b) & (cv == a))]
            if len(sel) == 0:
                continue
            bip = Bipartition(np.where(vc.color == a, 0, 1))
            before = met.oracle_rounds
            ar = amplify_slack(g, bip, lists, painter, sel, k_amp, amplify_mode, beta_conf=beta_conf, metrics=met)
            checks += met.oracle_rounds - before
            colored += ar.colored
            _slack_check(g, lists, painter)
        after = g.edge_subgraph(np.flatnonzero(col == 0))[0].max_degree
        if after > math.floor(R_LVL * D):
            raise AssertionError(f"level {level}: degree {after} above {float(R_LVL)} * {D}")
        result.levels.append(LevelRecord(level, D, after, colored, checks))
        level += 1
    ids = np.flatnonzero(col == 0)
    if len(ids):
        h, _ = g.edge_subgraph(ids)
        sched = line_graph_schedule(h, metrics=met)
        classes = _classes(sched, ids)
        eff = _EffectiveLists(lists, painter)
        for cls in classes:
            painter.paint(cls, eff)
        met.charge(len(classes), bits=max(1, int(col.max()).bit_length()), messages=2 * len(ids))
        result.residual_colored = len(ids)
    if metrics is not None:
        metrics.then(met)
    return result
