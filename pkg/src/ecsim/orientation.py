"""Generalized balanced edge orientations of 2-colored bipartite graphs.

Phase ``phi`` (with ``nu = eps/8``):

1. ``E_phi``: unoriented edges with ``d(e, phi-1) > (1-nu)^phi * bar_delta``
2. edge ``(u, v)`` proposes to ``v`` if ``x_v - x_u <= eta_e``, else to ``u``
3. each node accepts at most ``k_phi`` proposals (smallest edge ids)
4. accepted edges point at the node that accepted them
5. ``F'``: earlier-oriented edges whose direction violates the step-2 rule at ``x(phi-1)``
6. token game on ``F'`` with reversed arcs, one token per accepted proposal
7. flip every edge a token moved over

``ln(bar_delta)`` is evaluated once in double precision and from then on treated
as an exact rational, so every threshold below is decided exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .codec import width_for
from .errors import UsageError
from .graph import Bipartition, Graph, GraphStats, compute_stats
from .sim import RoundMetrics
from .tokengame import DiGraph, TokenGameConfig, game_rounds, run_token_game, validate_token_run
from .verify import Verdict, exact_leq, to_grid

C0 = 4  # rounds per phase outside the token game
C_TAIL = 6


def ln_bar(bar_delta: int) -> Fraction:
    return Fraction(math.log(max(bar_delta, 3)))


def beta_art(bar_delta: int, eps) -> int:
    """Explicit additive constant of the balanced orientation."""
    eps = Fraction(eps)
    L = ln_bar(bar_delta)
    return math.ceil(Fraction(7, 2) + 28 * 8**5 * L**3 / eps**5 + C_TAIL)


def phase_cap(bar_delta: int, nu) -> int:
    cap = math.ceil(math.log(max(bar_delta, 2) / 4) / math.log(1 / (1 - float(nu))))
    return max(0, cap)


@dataclass(frozen=True)
class OrientationParams:
    eps: Fraction
    nu: Fraction
    eta: tuple
    phase_cap: int
    bar_delta: int
    ln_bar: Fraction

    @classmethod
    def build(cls, stats: GraphStats, eta, eps) -> "OrientationParams":
        eps = Fraction(eps)
        if not (0 < eps <= 1):
            raise UsageError("eps must lie in (0, 1]")
        nu = eps / 8
        return cls(eps, nu, tuple(Fraction(h) for h in eta), phase_cap(stats.bar_delta, nu), stats.bar_delta,
                   ln_bar(stats.bar_delta))


@dataclass
class PhaseDerived:
    k_phi: int
    delta_phi: int
    alpha_phi: list
    d_minus: np.ndarray
    k_e: np.ndarray
    xi_e: list


def k_phi(params: OrientationParams, phi: int) -> int:
    return math.ceil(params.nu * (1 - params.nu) ** (phi - 1) * params.bar_delta)


def delta_phi(params: OrientationParams, phi: int) -> int:
    nu, L = params.nu, params.ln_bar
    return max(1, math.floor(Fraction(1, 16) * nu**6 / L**3 * (1 - nu) ** (phi - 1) * params.bar_delta))


def edge_constants(g: Graph, params: OrientationParams):
    """``k_e = ceil(nu/(1-nu) deg(e))`` and ``xi_e = 5/2 nu/ln k_e + 28 ln^2/nu^4``."""
    nu, L = params.nu, params.ln_bar
    tail = 28 * L**2 / nu**4
    memo = {}
    for d in np.unique(g.edge_degrees()).tolist():
        k = math.ceil(nu / (1 - nu) * d)
        memo[d] = (k, Fraction(5, 2) * nu / L * k + tail)
    deg_e = g.edge_degrees().tolist()
    k_e = np.array([memo[d][0] for d in deg_e], dtype=np.int64)
    xi_e = [memo[d][1] for d in deg_e]
    return k_e, xi_e


def eval_phase_params(
    g: Graph, stats: GraphStats, direction: np.ndarray, phi: int, params: OrientationParams, edge_consts=None
) -> PhaseDerived:
    """Phase constants given the direction map at the start of phase ``phi``.

    Nodes without an oriented edge get ``d_minus = bar_delta``; they are isolated
    in the phase's token game.
    """
    if phi < 1:
        raise UsageError("phases are numbered from 1")
    nu, L = params.nu, params.ln_bar
    deg_e = g.edge_degrees()
    d_minus = np.full(g.n, stats.bar_delta, dtype=np.int64)
    old = np.flatnonzero(direction != 0)
    if len(old):
        np.minimum.at(d_minus, g.edges[old, 0], deg_e[old])
        np.minimum.at(d_minus, g.edges[old, 1], deg_e[old])
    scale = nu**2 / (4 * L)
    memo = {}
    for d in np.unique(d_minus).tolist():
        memo[d] = to_grid(max(Fraction(1), scale * (d + 1)))
    alpha = [memo[d] for d in d_minus.tolist()]
    k_e, xi_e = edge_consts if edge_consts is not None else edge_constants(g, params)
    return PhaseDerived(k_phi(params, phi), delta_phi(params, phi), alpha, d_minus, k_e, xi_e)


@dataclass
class OrientationTrace:
    g: Graph
    bip: Bipartition
    params: OrientationParams
    directions: list = field(default_factory=list)  # after each phase; +1 U->V, -1 V->U, 0 none
    game_verdicts: list = field(default_factory=list)


@dataclass
class OrientationResult:
    u_to_v: np.ndarray
    x: np.ndarray
    beta: int
    params: OrientationParams
    trace: OrientationTrace
    metrics: RoundMetrics
    leftover: int = 0


def _unoriented_degree(g: Graph, direction: np.ndarray) -> np.ndarray:
    """``d(e)``: unoriented neighbors of each edge (meaningful for unoriented edges)."""
    un = direction == 0
    a, b = g.edges[:, 0], g.edges[:, 1]
    cnt = np.bincount(np.concatenate([a[un], b[un]]), minlength=g.n)
    return cnt[a] + cnt[b] - 2 * un


def _incoming(g: Graph, us, vs, direction) -> np.ndarray:
    heads = np.concatenate([vs[direction > 0], us[direction < 0]])
    return np.bincount(heads, minlength=g.n).astype(np.int64)


def compute_balanced_orientation(
    g: Graph,
    bip: Bipartition,
    eta,
    eps,
    metrics: RoundMetrics | None = None,
    validate_games: bool = False,
) -> OrientationResult:
    bip.require(g)
    if len(eta) != g.m:
        raise UsageError("one eta per edge")
    stats = compute_stats(g)
    params = OrientationParams.build(stats, eta, eps)
    us, vs = bip.oriented_edges(g)
    eta_floor = np.array([math.floor(h) for h in params.eta], dtype=np.int64)
    eta_ceil = np.array([math.ceil(h) for h in params.eta], dtype=np.int64)
    direction = np.zeros(g.m, dtype=np.int8)
    x = np.zeros(g.n, dtype=np.int64)
    trace = OrientationTrace(g, bip, params)
    met = RoundMetrics()
    bits = 2 * width_for(max(stats.bar_delta, 1))
    deg_e = g.edge_degrees()
    nu = params.nu
    consts = edge_constants(g, params)
    for phi in range(1, params.phase_cap + 1):
        derived = eval_phase_params(g, stats, direction, phi, params, consts)
        d = _unoriented_degree(g, direction)
        thr = math.floor((1 - nu) ** phi * params.bar_delta)
        e_phi = np.flatnonzero((direction == 0) & (d > thr))
        dx = x[vs] - x[us]
        to_v = dx[e_phi] <= eta_floor[e_phi]
        target = np.where(to_v, vs[e_phi], us[e_phi])
        order = np.lexsort((e_phi, target))
        starts = np.r_[0, np.flatnonzero(np.diff(target[order])) + 1] if len(order) else np.zeros(0, dtype=np.int64)
        pos = np.arange(len(order)) - np.repeat(starts, np.diff(np.r_[starts, len(order)])) if len(order) else order
        acc = order[pos < derived.k_phi]
        f_phi = e_phi[acc]
        tokens = np.bincount(target[acc], minlength=g.n)
        # step 5 at x(phi - 1)
        old = direction != 0
        bad = old & (((direction > 0) & (dx > eta_floor)) | ((direction < 0) & (dx < eta_ceil)))
        f_prime = np.flatnonzero(bad)
        direction[f_phi] = np.where(to_v[acc], 1, -1)
        # step 6: game arcs run against the current orientation
        sub, _ = g.edge_subgraph(f_prime)
        tail = np.where(direction[f_prime] > 0, vs[f_prime], us[f_prime])
        head = np.where(direction[f_prime] > 0, us[f_prime], vs[f_prime])
        dg = DiGraph(sub, tail, head)
        cfg = TokenGameConfig(derived.k_phi, derived.delta_phi, tuple(derived.alpha_phi))
        run = run_token_game(dg, tokens, cfg)
        if validate_games:
            trace.game_verdicts.append(validate_token_run(dg, tokens, cfg, run.state, run.records))
        flipped = f_prime[run.state.passive]
        direction[flipped] = -direction[flipped]
        x = _incoming(g, us, vs, direction)
        met.charge(C0 + game_rounds(cfg), bits=bits, messages=4 * g.m + run.metrics.messages_total)
        trace.directions.append(direction.copy())
    leftover = np.flatnonzero(direction == 0)
    if len(leftover):
        dx = x[vs] - x[us]
        direction[leftover] = np.where(dx[leftover] <= eta_floor[leftover], 1, -1)
        x = _incoming(g, us, vs, direction)
        met.charge(1, bits=bits, messages=2 * len(leftover))
    if metrics is not None:
        metrics.then(met)
    return OrientationResult(direction > 0, x, beta_art(stats.bar_delta, params.eps), params, trace, met, len(leftover))


def check_phase_lemmas(trace: OrientationTrace) -> Verdict:
    """After every phase: unoriented edges have ``d(e, phi) <= (1-nu)^phi bar_delta`` and
    oriented edges satisfy ``+-(x_v - x_u) <= +-eta_e + k_e + phi * xi_e``."""
    v = Verdict()
    g, bip, params = trace.g, trace.bip, trace.params
    if g.m == 0:
        return v
    us, vs = bip.oriented_edges(g)
    nu = params.nu
    k_e, xi_e = edge_constants(g, params)
    eta = params.eta
    eta_f = np.array([float(h) for h in eta])
    xi_f = np.array([float(z) for z in xi_e])
    for phi, direction in enumerate(trace.directions, start=1):
        direction = np.asarray(direction)
        d = _unoriented_degree(g, direction)
        bound = (1 - nu) ** phi * params.bar_delta
        for e in np.flatnonzero((direction == 0) & (d > math.floor(bound))).tolist():
            v.add("degree_decay", (phi, e), int(d[e]), bound)
        x = _incoming(g, us, vs, direction)
        s = direction.astype(float)
        ori = np.flatnonzero(direction != 0)
        lhs = s[ori] * (x[vs[ori]] - x[us[ori]])
        rhs = s[ori] * eta_f[ori] + k_e[ori] + phi * xi_f[ori]

        def exact(j, ori=ori, x=x, direction=direction, phi=phi):
            e = ori[j]
            sg = int(direction[e])
            return sg * int(x[vs[e]] - x[us[e]]), sg * eta[e] + int(k_e[e]) + phi * xi_e[e]

        ok = exact_leq(lhs, rhs, exact)
        for j in np.flatnonzero(~ok).tolist():
            l, r = exact(j)
            v.add("orientation_growth", (phi, int(ori[j])), l, r)
    return v
