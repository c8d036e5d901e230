"""Symmetry-breaking building blocks: Linial-type vertex coloring, defective vertex
colorings, edge schedules and greedy (list) edge coloring by schedule classes.

Every routine takes an optional ``metrics`` (a ``RoundMetrics``) and charges the
simulated rounds it would use in a synchronous network.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SlackFailure, UsageError
from .graph import Bipartition, Graph, U_SIDE
from .sim import RoundMetrics, oracle_hook

K_DEF = 4


@dataclass(frozen=True)
class VertexColoring:
    color: np.ndarray  # 1-based, one entry per node
    palette_size: int
    defect_bound: int = 0

    def __post_init__(self):
        c = np.asarray(self.color, dtype=np.int64)
        if c.size and (c.min() < 1 or c.max() > self.palette_size):
            raise UsageError("vertex colors must lie in [1, palette_size]")
        c.setflags(write=False)
        object.__setattr__(self, "color", c)


def k_lin(delta: int) -> int:
    """Palette bound of ``linial_coloring``; at delta = 1 the reduction bottoms out at 2 * 3 colors."""
    if delta <= 0:
        return 1
    return max(4 * delta * delta, 6)


def _charge(metrics, rounds, bits=0, messages=0):
    if metrics is not None:
        metrics.charge(rounds, bits, messages)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for f in range(2, math.isqrt(p) + 1):
        if p % f == 0:
            return False
    return True


def _next_prime(lo: int) -> int:
    p = max(2, lo)
    while not _is_prime(p):
        p += 1
    return p


def _iroot_ceil(m: int, k: int) -> int:
    """Smallest integer r with r**k >= m."""
    r = max(1, int(round(m ** (1.0 / k))))
    while r**k < m:
        r += 1
    while r > 1 and (r - 1) ** k >= m:
        r -= 1
    return r


def linial_schedule(n: int, delta: int) -> list[tuple[int, int, int]]:
    """Reduction steps ``(d, q, new_palette)`` starting from palette ``n``.

    A node whose color encodes a degree-``d`` polynomial over GF(q) picks the
    smallest point ``x`` in ``[0, delta*d]`` where it disagrees with every
    neighbor; the pair ``(x, f(x))`` is its new color. The schedule depends only
    on ``(n, delta)``, so all nodes run the same number of steps.
    """
    steps = []
    m = n
    while True:
        best = None
        for d in range(1, 64):
            q = _next_prime(max(delta * d + 1, _iroot_ceil(m, d + 1)))
            pal = (delta * d + 1) * q
            if best is None or pal < best[2]:
                best = (d, q, pal)
            if q == _next_prime(delta * d + 1):
                break
        if best is None or best[2] >= m:
            return steps
        steps.append(best)
        m = best[2]


def _poly_eval(digits: np.ndarray, x: int, q: int) -> np.ndarray:
    acc = np.zeros(digits.shape[0], dtype=np.int64)
    for j in range(digits.shape[1] - 1, -1, -1):
        acc = (acc * x + digits[:, j]) % q
    return acc


def linial_coloring(g: Graph, mode: str = "algorithmic", metrics: RoundMetrics | None = None) -> VertexColoring:
    """Proper coloring with at most ``k_lin(delta)`` colors."""
    delta = g.max_degree
    if mode == "oracle":
        col = oracle_hook(metrics if metrics is not None else RoundMetrics(), "greedy_vertex_coloring",
                          lambda: _greedy_vertex_coloring(g))
        return VertexColoring(col, delta + 1 if g.n else 1)
    if mode != "algorithmic":
        raise UsageError(f"unknown linial mode {mode!r}")
    if g.n == 0:
        return VertexColoring(np.zeros(0, dtype=np.int64), 1)
    if delta == 0:
        return VertexColoring(np.ones(g.n, dtype=np.int64), 1)
    col = np.arange(1, g.n + 1, dtype=np.int64)
    a, b = g.edges[:, 0], g.edges[:, 1]
    m_pal = g.n
    for d, q, pal in linial_schedule(g.n, delta):
        digits = np.zeros((g.n, d + 1), dtype=np.int64)
        rest = col - 1
        for j in range(d + 1):
            digits[:, j] = rest % q
            rest //= q
        chosen = np.full(g.n, -1, dtype=np.int64)
        value = np.zeros(g.n, dtype=np.int64)
        for x in range(delta * d + 1):
            open_ = chosen < 0
            if not open_.any():
                break
            f = _poly_eval(digits, x, q)
            eq = f[a] == f[b]
            bad = np.zeros(g.n, dtype=bool)
            bad[a[eq]] = True
            bad[b[eq]] = True
            take = open_ & ~bad
            chosen[take] = x
            value[take] = f[take]
        assert (chosen >= 0).all(), "polynomial reduction found no free point"
        col = chosen * q + value + 1
        _charge(metrics, 1, bits=max(1, int(m_pal).bit_length()), messages=2 * g.m)
        m_pal = pal
    out = VertexColoring(col, m_pal)
    assert m_pal <= k_lin(delta) or m_pal == g.n
    return out


def _greedy_vertex_coloring(g: Graph) -> np.ndarray:
    col = np.zeros(g.n, dtype=np.int64)
    for v in range(g.n):
        used = {int(col[w]) for w in g.neighbors(v)}
        c = 1
        while c in used:
            c += 1
        col[v] = c
    return col


def monochromatic_degree(g: Graph, color: np.ndarray) -> np.ndarray:
    if g.m == 0:
        return np.zeros(g.n, dtype=np.int64)
    a, b = g.edges[:, 0], g.edges[:, 1]
    same = color[a] == color[b]
    return np.bincount(np.concatenate([a[same], b[same]]), minlength=g.n)


def _local_search(g: Graph, color: np.ndarray, ncolors: int, threshold: int, key: np.ndarray, metrics) -> np.ndarray:
    """Move unhappy nodes (monochromatic degree > threshold) to their least-used color.

    Only unhappy nodes that beat every unhappy neighbor on ``key`` move in a round,
    so movers form an independent set and the number of monochromatic edges
    strictly drops. Two rounds per iteration: exchange colors, exchange happiness.
    """
    color = color.copy()
    if g.m == 0:
        return color
    a, b = g.edges[:, 0], g.edges[:, 1]
    bits = max(1, ncolors.bit_length())
    while True:
        mono = monochromatic_degree(g, color)
        unhappy = mono > threshold
        _charge(metrics, 2, bits=bits, messages=4 * g.m)
        if not unhappy.any():
            return color
        both = unhappy[a] & unhappy[b]
        loser = np.where(key[a] > key[b], a, b)[both]
        mover = unhappy.copy()
        mover[loser] = False
        movers = np.flatnonzero(mover)
        counts = np.zeros((len(movers), ncolors), dtype=np.int64)
        slot = np.full(g.n, -1, dtype=np.int64)
        slot[movers] = np.arange(len(movers))
        for x, y in ((a, b), (b, a)):
            sel = slot[x] >= 0
            np.add.at(counts, (slot[x[sel]], color[y[sel]] - 1), 1)
        color[movers] = counts.argmin(axis=1) + 1


def defective_coloring_p(g: Graph, p: int, base: VertexColoring, metrics: RoundMetrics | None = None) -> VertexColoring:
    """``p``-defective coloring with ``ceil((delta+1)/(p+1))`` colors."""
    if p <= 0:
        raise UsageError("p must be positive; use the base coloring for p = 0")
    delta = g.max_degree
    c = max(1, -(-(delta + 1) // (p + 1)))
    key = base.color * max(g.n, 1) + np.arange(g.n)
    start = (base.color - 1) % c + 1
    col = _local_search(g, start, c, p, key, metrics)
    assert c <= K_DEF * max(1, -(-delta // p)) ** 2
    return VertexColoring(col, c, p)


def refine_threshold(degree_bound: int, eps1) -> int:
    eps1 = Fraction(eps1)
    return degree_bound // 4 + math.floor(eps1 * degree_bound)


def refine_to_4(
    g: Graph,
    eps1,
    base: VertexColoring,
    degree_bound: int | None = None,
    metrics: RoundMetrics | None = None,
) -> VertexColoring:
    """4-coloring whose monochromatic degree is at most ``floor(D/4) + floor(eps1*D)``.

    ``D`` is a known upper bound on the max degree (default: the true one). This
    is at most ``ceil(eps1*D) + floor(D/2)``.
    """
    eps1 = Fraction(eps1)
    if not (0 < eps1 <= 1):
        raise UsageError("eps1 must lie in (0, 1]")
    d = g.max_degree if degree_bound is None else int(degree_bound)
    if d < g.max_degree:
        raise UsageError("degree bound below the true max degree")
    thr = refine_threshold(d, eps1)
    key = base.color * max(g.n, 1) + np.arange(g.n)
    p = max(1, math.floor(eps1 * d))
    start = defective_coloring_p(g, p, base, metrics) if g.m else base
    col = (start.color - 1) % 4 + 1
    col = _local_search(g, col, 4, thr, key, metrics)
    return VertexColoring(col, 4, thr)


def defective_const(g: Graph, base: VertexColoring, degree_bound: int | None = None, metrics=None) -> VertexColoring:
    """4-coloring with defect at most ``floor(D/4) + floor(D/8)``, inside the ``floor(D/2) + ceil(D/8)`` contract."""
    return refine_to_4(g, Fraction(1, 8), base, degree_bound, metrics)


# --- edge schedules -------------------------------------------------------------------


def port_pair_schedule(g: Graph, bip: Bipartition, metrics: RoundMetrics | None = None) -> np.ndarray:
    """Proper line-graph coloring of a bipartite graph from local port numbers.

    Class of an edge = (port at its U end) * delta + (port at its V end) + 1, so
    at most delta**2 classes; one round to learn the far port.
    """
    if g.m == 0:
        return np.zeros(0, dtype=np.int64)
    ports = g.port_numbers()
    low_is_u = bip.side[g.edges[:, 0]] == U_SIDE
    pu = np.where(low_is_u, ports[:, 0], ports[:, 1])
    pv = np.where(low_is_u, ports[:, 1], ports[:, 0])
    delta = g.max_degree
    _charge(metrics, 1, bits=max(1, delta.bit_length()), messages=2 * g.m)
    return pu * delta + pv + 1


def line_graph_schedule(g: Graph, mode: str = "algorithmic", metrics: RoundMetrics | None = None) -> np.ndarray:
    """Proper line-graph coloring via Linial on the line graph.

    One line-graph round is simulated by two rounds of ``g`` (edges are handled by
    their lower endpoint, which relays through the other endpoint).
    """
    if g.m == 0:
        return np.zeros(0, dtype=np.int64)
    sub = RoundMetrics()
    vc = linial_coloring(g.line_graph(), mode=mode, metrics=sub)
    if metrics is not None:
        metrics.charge(2 * sub.rounds, sub.max_message_bits, 2 * sub.messages_total)
        metrics.oracle_rounds += sub.oracle_rounds
        metrics.oracle_calls.extend(sub.oracle_calls)
    return vc.color


def _classes(schedule: np.ndarray, edge_ids: np.ndarray):
    sched = np.asarray(schedule)[edge_ids]
    order = np.lexsort((edge_ids, sched))
    ids = edge_ids[order]
    keys = sched[order]
    cuts = np.flatnonzero(np.diff(keys)) + 1
    return np.split(ids, cuts)


def greedy_edge_coloring(
    g: Graph,
    palette_size: int,
    schedule: np.ndarray,
    metrics: RoundMetrics | None = None,
) -> np.ndarray:
    """Color classes of ``schedule`` one per round, each edge taking its smallest free color."""
    bar = int(g.edge_degrees().max()) if g.m else 0
    if g.m and palette_size < bar + 1:
        raise UsageError(f"palette {palette_size} is smaller than max edge degree + 1 = {bar + 1}")
    lists = _UniformLists(palette_size)
    return greedy_list_coloring(g, lists, schedule, metrics=metrics)


class _UniformLists:
    def __init__(self, p):
        self.p = p

    def __getitem__(self, e):
        return range(1, self.p + 1)


def greedy_list_coloring(
    g: Graph,
    lists,
    schedule: np.ndarray,
    edges=None,
    color: np.ndarray | None = None,
    metrics: RoundMetrics | None = None,
    phase=None,
) -> np.ndarray:
    """Extend ``color`` (0 = uncolored) on ``edges`` class by class from the lists.

    Each edge takes the smallest list color unused by already-colored adjacent
    edges; an exhausted list raises ``SlackFailure`` naming the edge.
    """
    col = np.zeros(g.m, dtype=np.int64) if color is None else color.copy()
    ids = np.arange(g.m) if edges is None else np.asarray(edges, dtype=np.int64)
    if len(ids) == 0:
        return col
    used = [set() for _ in range(g.n)]
    for e in np.flatnonzero(col).tolist():
        u, v = g.edges[e]
        used[u].add(int(col[e]))
        used[v].add(int(col[e]))
    ends = g.edges.tolist()
    rounds = 0
    bits = 1
    for cls in _classes(schedule, ids):
        rounds += 1
        picks = []
        for e in cls.tolist():
            if col[e]:
                continue
            u, v = ends[e]
            uu, uv = used[u], used[v]
            for c in lists[e]:
                if c not in uu and c not in uv:
                    picks.append((e, u, v, c))
                    break
            else:
                raise SlackFailure(f"edge {e} has no free color in its list", edge=e, phase=phase)
        for e, u, v, c in picks:
            col[e] = c
            used[u].add(c)
            used[v].add(c)
            bits = max(bits, int(c).bit_length())
    _charge(metrics, rounds, bits=bits, messages=2 * len(ids))
    return col
