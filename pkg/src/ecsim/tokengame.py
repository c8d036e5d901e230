"""Generalized token dropping game: phase algorithm and post-hoc validation.

Tokens move over directed edges (tail -> head), at most one token per edge; an
edge is passive once a token has crossed it. Each phase runs the six steps:

1. ``A(t)``: nodes with ``x >= alpha + delta``
2. active nodes move ``delta`` tokens from active to passive
3. ``S(v)``: tails in ``A(t)`` of ``v``'s active in-edges
4. ``v`` proposes to ``min(|S(v)|, k - t*delta - x'_v)`` of them if
   ``x'_v <= k - t*delta - alpha_v``, preferring small ``deg/alpha`` (then small id)
5. ``w`` accepts ``q_w = min(p_w, x'_w)`` proposals, smallest proposer ids first
6. ``x = x' + r - q``

Since token counts are integers, ``x >= alpha + delta`` is ``x >= ceil(alpha) + delta``
and ``x' <= k - t*delta - alpha`` is ``x' <= k - t*delta - ceil(alpha)``, so both
backends decide activity with integer arithmetic only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .codec import Packed
from .errors import UsageError
from .graph import Graph
from .sim import ExecutionMode, Halt, LOCAL, RoundMetrics, run_sync
from .verify import GRID, Verdict, exact_leq, to_grid


class DiGraph:
    """Directed simple graph: arc ``i`` goes ``tail[i] -> head[i]`` over edge ``i`` of ``base``."""

    def __init__(self, base: Graph, tail, head):
        tail = np.asarray(tail, dtype=np.int64)
        head = np.asarray(head, dtype=np.int64)
        if tail.shape != (base.m,) or head.shape != (base.m,):
            raise UsageError("one tail and one head per edge")
        lo = np.minimum(tail, head)
        hi = np.maximum(tail, head)
        if base.m and not (np.array_equal(lo, base.edges[:, 0]) and np.array_equal(hi, base.edges[:, 1])):
            raise UsageError("arcs must orient the edges of the base graph")
        tail.setflags(write=False)
        head.setflags(write=False)
        self.base = base
        self.tail = tail
        self.head = head

    @classmethod
    def from_arcs(cls, n: int, arcs) -> "DiGraph":
        arcs = np.asarray(list(arcs), dtype=np.int64).reshape(-1, 2)
        base = Graph(n, arcs)
        return cls(base, arcs[:, 0], arcs[:, 1])

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def deg(self) -> np.ndarray:
        """Total (in + out) degree."""
        return self.base.deg


@dataclass(frozen=True)
class TokenGameConfig:
    """``alpha`` is snapped down onto the 2^-20 grid; integer alphas are unchanged."""

    k: int
    delta: int
    alpha: tuple

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("k must be at least 1")
        if self.delta < 1:
            raise UsageError("delta must be at least 1")
        memo = {}
        alpha = tuple(memo[a] if a in memo else memo.setdefault(a, to_grid(a)) for a in self.alpha)
        if alpha and min(alpha) < 1:
            raise UsageError("alpha must be at least 1")
        if alpha and self.delta > min(alpha):
            raise UsageError(f"delta = {self.delta} exceeds min alpha = {min(alpha)}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(cls, n: int, k: int, delta: int, alpha=1) -> "TokenGameConfig":
        return cls(k, delta, tuple([alpha] * n))

    @property
    def phases(self) -> int:
        return max(0, self.k // self.delta - 1)

    def alpha_ceil(self) -> np.ndarray:
        return np.array([math.ceil(a) for a in self.alpha], dtype=np.int64)


@dataclass
class TokenGameState:
    x: np.ndarray
    y: np.ndarray
    passive: np.ndarray  # per arc
    phase: int = 0

    @property
    def tau(self) -> np.ndarray:
        return self.x + self.y


@dataclass
class PhaseRecord:
    t: int
    active: np.ndarray  # A(t) as a boolean mask
    proposals: np.ndarray  # arc ids over which a proposal was sent (head -> tail)
    moved: np.ndarray  # arc ids over which a token moved (tail -> head)
    p: np.ndarray = field(default=None)
    q: np.ndarray = field(default=None)
    r: np.ndarray = field(default=None)


@dataclass
class TokenGameRun:
    state: TokenGameState
    records: list
    metrics: RoundMetrics


def priority_rank(dg: DiGraph, cfg: TokenGameConfig) -> np.ndarray:
    """Rank of each node by ``(deg/alpha, id)``; lower rank is proposed to first."""
    deg = dg.deg.tolist()
    ratios = {}
    for d, a in zip(deg, cfg.alpha):
        if (d, a) not in ratios:
            ratios[(d, a)] = Fraction(d) / a
    levels = {r: i for i, r in enumerate(sorted(set(ratios.values())))}
    level = np.array([levels[ratios[(d, a)]] for d, a in zip(deg, cfg.alpha)], dtype=np.int64)
    order = np.lexsort((np.arange(dg.n), level))
    rank = np.empty(dg.n, dtype=np.int64)
    rank[order] = np.arange(dg.n)
    return rank


def _check_inputs(dg: DiGraph, init_tokens, cfg: TokenGameConfig) -> np.ndarray:
    x0 = np.asarray(init_tokens, dtype=np.int64)
    if x0.shape != (dg.n,):
        raise UsageError("one token count per node")
    if len(cfg.alpha) != dg.n:
        raise UsageError("one alpha per node")
    if x0.size and (x0.min() < 0 or x0.max() > cfg.k):
        raise UsageError(f"initial tokens must lie in [0, k = {cfg.k}]")
    return x0


def _group_rank(keys: np.ndarray) -> np.ndarray:
    """Position of each element within its run of equal ``keys`` (keys sorted)."""
    if len(keys) == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.r_[0, np.flatnonzero(np.diff(keys)) + 1]
    lengths = np.diff(np.r_[starts, len(keys)])
    return np.arange(len(keys)) - np.repeat(starts, lengths)


def game_rounds(cfg: TokenGameConfig) -> int:
    """Engine rounds: one setup round, three per phase, one final delivery round."""
    t = cfg.phases
    return 0 if t == 0 else 3 * t + 2


def run_token_game(
    dg: DiGraph,
    init_tokens,
    cfg: TokenGameConfig,
    backend: str = "direct",
    mode: ExecutionMode = LOCAL,
    metrics: RoundMetrics | None = None,
) -> TokenGameRun:
    """Run ``floor(k/delta) - 1`` phases. ``backend`` is ``direct`` (vectorized) or ``engine``."""
    x0 = _check_inputs(dg, init_tokens, cfg)
    if backend == "engine":
        run = _run_engine(dg, x0, cfg, mode)
    elif backend == "direct":
        run = _run_direct(dg, x0, cfg)
    else:
        raise UsageError(f"unknown backend {backend!r}")
    if metrics is not None:
        metrics.then(run.metrics)
    return run


def _run_direct(dg: DiGraph, x0: np.ndarray, cfg: TokenGameConfig) -> TokenGameRun:
    n, k, delta = dg.n, cfg.k, cfg.delta
    ac = cfg.alpha_ceil()
    rank = priority_rank(dg, cfg)
    tail, head = dg.tail, dg.head
    x = x0.copy()
    y = np.zeros(n, dtype=np.int64)
    passive = np.zeros(dg.m, dtype=bool)
    records = []
    msgs = 0
    for t in range(1, cfg.phases + 1):
        active = x >= ac + delta
        xp = x - delta * active
        y = y + delta * active
        cap = k - t * delta - xp  # proposals v may send
        wants = xp <= k - t * delta - ac
        flags = ~passive & active[tail]
        msgs += int(flags.sum())
        cand = np.flatnonzero(flags & wants[head])
        # step 4: per head, best-ranked tails first
        order = np.lexsort((rank[tail[cand]], head[cand]))
        cand = cand[order]
        pos = _group_rank(head[cand])
        prop = cand[pos < cap[head[cand]]]
        # step 5: per tail, smallest proposer (head) ids first
        order = np.lexsort((head[prop], tail[prop]))
        prop_s = prop[order]
        pos = _group_rank(tail[prop_s])
        moved = np.sort(prop_s[pos < xp[tail[prop_s]]])
        p = np.bincount(tail[prop], minlength=n)
        q = np.bincount(tail[moved], minlength=n)
        r = np.bincount(head[moved], minlength=n)
        passive[moved] = True
        x = xp + r - q
        msgs += len(prop) + len(moved)
        records.append(PhaseRecord(t, active, np.sort(prop), moved, p, q, r))
    metrics = RoundMetrics().charge(game_rounds(cfg), bits=_setup_bits(dg, cfg) if cfg.phases else 0, messages=msgs)
    return TokenGameRun(TokenGameState(x, y, passive, cfg.phases), records, metrics)


def _setup_bits(dg: DiGraph, cfg: TokenGameConfig) -> int:
    """Widest setup message: degree plus the grid numerator of alpha."""
    if dg.m == 0:
        return 0
    dmax = int(dg.deg.max())
    amax = max(int(a * GRID) for a in cfg.alpha)
    return max(1, dmax.bit_length()) + max(1, amax.bit_length())


class TokenGameProgram:
    """Node program. Round 1 exchanges ``(deg, alpha)``; each phase then takes three
    rounds (activity flags, proposals, token transfers) and a last round delivers
    the final transfers."""

    def __init__(self, cfg: TokenGameConfig, widths):
        self.cfg = cfg
        self.dw, self.aw = widths

    def init(self, ctx):
        tokens, out_nbrs, in_nbrs = ctx.input
        st = {
            "x": tokens,
            "y": 0,
            "out": set(out_nbrs),  # active out-arcs (to heads)
            "in": set(in_nbrs),  # active in-arcs (from tails)
            "alpha": self.cfg.alpha[ctx.node],
            "ratio": {},
            "moved": [],
            "proposed": [],
            "log": [],
        }
        if self.cfg.phases == 0:
            return Halt(_final(st))
        return st

    def on_round(self, ctx, st, inbox):
        cfg = self.cfg
        r = st["round"] = st.get("round", 0) + 1
        if r == 1:
            a = st["alpha"]
            msg = Packed((len(ctx.neighbors) << self.aw) | int(a * GRID), self.dw + self.aw)
            return st, {w: msg for w in ctx.neighbors}
        t, sub = divmod(r - 2, 3)
        t += 1
        if sub == 0:
            if r == 2:
                for w, msg in inbox.items():
                    deg, anum = msg.value >> self.aw, msg.value & ((1 << self.aw) - 1)
                    st["ratio"][w] = (Fraction(deg * GRID, anum), w)
            else:
                st["x"] += len(inbox)  # tokens from the previous phase
            if t > cfg.phases:
                return st, {}, Halt(_final(st))
            active = st["x"] >= st["alpha"] + cfg.delta
            st["A"] = active
            if active:
                st["x"] -= cfg.delta
                st["y"] += cfg.delta
            st["t"] = t
            return st, ({w: True for w in st["out"]} if active else {})
        if sub == 1:
            xp = st["x"]
            senders = sorted((w for w in inbox if w in st["in"]), key=lambda w: st["ratio"][w])
            out = {}
            if xp <= cfg.k - t * cfg.delta - st["alpha"]:
                for w in senders[: cfg.k - t * cfg.delta - xp]:
                    out[w] = True
            return st, out
        # sub == 2: accept smallest proposer ids
        props = sorted(w for w in inbox if w in st["out"])
        acc = props[: min(len(props), st["x"])]
        for w in acc:
            st["out"].discard(w)
        st["x"] -= len(acc)
        st["log"].append((t, st["A"], tuple(props), tuple(acc)))
        return st, {w: True for w in acc}


def _final(st):
    return {"x": st["x"], "y": st["y"], "log": st["log"]}


def _run_engine(dg: DiGraph, x0: np.ndarray, cfg: TokenGameConfig, mode: ExecutionMode) -> TokenGameRun:
    n = dg.n
    outs = [[] for _ in range(n)]
    ins = [[] for _ in range(n)]
    for a, (u, v) in enumerate(zip(dg.tail.tolist(), dg.head.tolist())):
        outs[u].append(v)
        ins[v].append(u)
    dmax = int(dg.deg.max()) if dg.m else 0
    amax = max((int(a * GRID) for a in cfg.alpha), default=1)
    widths = (max(1, dmax.bit_length()), max(1, amax.bit_length()))
    inputs = [(int(x0[v]), outs[v], ins[v]) for v in range(n)]
    outputs, metrics = run_sync(dg.base, TokenGameProgram(cfg, widths), mode, inputs=inputs)
    x = np.array([o["x"] for o in outputs], dtype=np.int64)
    y = np.array([o["y"] for o in outputs], dtype=np.int64)
    passive = np.zeros(dg.m, dtype=bool)
    T = cfg.phases
    act = np.zeros((T, n), dtype=bool)
    props = [[] for _ in range(T)]
    moves = [[] for _ in range(T)]
    for w, o in enumerate(outputs):
        for t, a_flag, proposers, accepted in o["log"]:
            act[t - 1, w] = a_flag
            props[t - 1].extend(dg.base.edge_id(w, v) for v in proposers)
            moves[t - 1].extend(dg.base.edge_id(w, v) for v in accepted)
    records = []
    for t in range(1, T + 1):
        prop = np.array(sorted(props[t - 1]), dtype=np.int64)
        moved = np.array(sorted(moves[t - 1]), dtype=np.int64)
        passive[moved] = True
        records.append(
            PhaseRecord(
                t,
                act[t - 1],
                prop,
                moved,
                np.bincount(dg.tail[prop], minlength=n),
                np.bincount(dg.tail[moved], minlength=n),
                np.bincount(dg.head[moved], minlength=n),
            )
        )
    return TokenGameRun(TokenGameState(x, y, passive, T), records, metrics)


def sigma(dg: DiGraph, cfg: TokenGameConfig, arcs=None):
    """Exact per-arc slack ``2(a_u+a_v) + (d_u d_v/(a_u a_v) + d_u/a_u + d_v/a_v) delta``."""
    ids = range(dg.m) if arcs is None else arcs
    out = []
    for i in ids:
        u, v = int(dg.tail[i]), int(dg.head[i])
        au, av = cfg.alpha[u], cfg.alpha[v]
        du, dv = int(dg.deg[u]), int(dg.deg[v])
        out.append(2 * (au + av) + (Fraction(du * dv) / (au * av) + du / au + dv / av) * cfg.delta)
    return out


def validate_token_run(dg: DiGraph, init_tokens, cfg: TokenGameConfig, state: TokenGameState, records) -> Verdict:
    """Replay the records from the initial tokens and check every clause.

    (a) single move per arc, moves only along arcs, moved iff passive;
    (b) phase-local legality with all sends before all receives;
    (c) x_v(t) <= max(2 alpha_v, k - t delta) and y_v(t) <= k - x_v(t);
    (d) y_u(t) - y_v(t) bound on every active arc;
    (e) final tau(u) - tau(v) <= sigma(e) on every active arc, tau <= k.
    """
    v = Verdict()
    x = np.asarray(init_tokens, dtype=np.int64).copy()
    n, k, delta = dg.n, cfg.k, cfg.delta
    if x.size and (x.min() < 0 or x.max() > k):
        v.add("init_tokens", int(np.argmax((x < 0) | (x > k))), None, k)
        return v
    if len(records) != cfg.phases:
        v.add("phase_count", None, len(records), cfg.phases)
    ac = cfg.alpha_ceil()
    alpha = cfg.alpha
    alpha_f = np.array([float(a) for a in alpha])
    deg = dg.deg.astype(float)
    tail, head = dg.tail, dg.head
    moved_count = np.zeros(dg.m, dtype=np.int64)
    passive = np.zeros(dg.m, dtype=bool)
    y = np.zeros(n, dtype=np.int64)

    # bound on y_u(t) - y_v(t) for an active arc (u, v)
    au, av = alpha_f[tail], alpha_f[head]
    du, dv = deg[tail], deg[head]
    gap_f = 2 * av + (du * dv / (au * av) + du / au + dv / av) * delta

    def gap_exact(i):
        a_u, a_v = alpha[tail[i]], alpha[head[i]]
        d_u, d_v = int(dg.deg[tail[i]]), int(dg.deg[head[i]])
        return 2 * a_v + (Fraction(d_u * d_v) / (a_u * a_v) + d_u / a_u + d_v / a_v) * delta

    def check_time(t, x, y, passive):
        bound = np.maximum(2 * alpha_f, k - t * delta)
        ok = exact_leq(x, bound, lambda i: (int(x[i]), max(2 * alpha[i], Fraction(k - t * delta))))
        for node in np.flatnonzero(~ok).tolist():
            v.add("x_bound", (t, node), int(x[node]), max(2 * alpha[node], Fraction(k - t * delta)))
        for node in np.flatnonzero(y > k - x).tolist():
            v.add("y_bound", (t, node), int(y[node]), int(k - x[node]))
        live = np.flatnonzero(~passive)
        if len(live):
            dy = (y[tail[live]] - y[head[live]]).astype(float)
            ok = exact_leq(dy, gap_f[live], lambda j: (int(dy[j]), gap_exact(live[j])))
            for j in np.flatnonzero(~ok).tolist():
                v.add("passive_gap", (t, int(live[j])), int(dy[j]), gap_exact(live[j]))

    check_time(0, x, y, passive)
    for rec in records:
        t = rec.t
        active = x >= ac + delta
        if not np.array_equal(np.asarray(rec.active, dtype=bool), active):
            v.add("active_set", t, None, None)
        moved = np.asarray(rec.moved, dtype=np.int64)
        if len(moved) and (moved.min() < 0 or moved.max() >= dg.m):
            v.add("move_arc", t, None, None)
            return v
        np.add.at(moved_count, moved, 1)
        for a in moved[passive[moved]].tolist():
            v.add("single_move", a, int(moved_count[a]), 1)
        for a in moved[~active[tail[moved]]].tolist():
            v.add("move_from_inactive", (t, a), None, None)
        xp = x - delta * active
        yp = y + delta * active
        q = np.bincount(tail[moved], minlength=n)
        r = np.bincount(head[moved], minlength=n)
        for node in np.flatnonzero(xp - q < 0).tolist():
            v.add("send_underflow", (t, node), int(xp[node] - q[node]), 0)
        for node in np.flatnonzero(xp - q + r + yp > k).tolist():
            v.add("capacity", (t, node), int(xp[node] - q[node] + r[node] + yp[node]), k)
        passive[moved] = True
        x, y = xp + r - q, yp
        check_time(t, x, y, passive)
    for a in np.flatnonzero(moved_count > 1).tolist():
        if not any(c == "single_move" and e == a for c, e, _, _ in v.violations):
            v.add("single_move", a, int(moved_count[a]), 1)
    if not np.array_equal(passive, np.asarray(state.passive, dtype=bool)):
        v.add("passive_iff_moved", int(np.argmax(passive != state.passive)), None, None)
    if not (np.array_equal(x, state.x) and np.array_equal(y, state.y)):
        v.add("final_state", None, None, None)
    tau = np.asarray(state.x) + np.asarray(state.y)
    for node in np.flatnonzero(tau > k).tolist():
        v.add("tau_cap", node, int(tau[node]), k)
    live = np.flatnonzero(~np.asarray(state.passive, dtype=bool))
    if len(live):
        dt = (tau[tail[live]] - tau[head[live]]).astype(float)
        sig_f = 2 * (au + av) + (du * dv / (au * av) + du / au + dv / av) * delta
        ok = exact_leq(dt, sig_f[live], lambda j: (int(dt[j]), sigma(dg, cfg, [live[j]])[0]))
        for j in np.flatnonzero(~ok).tolist():
            v.add("final_slack", int(live[j]), int(dt[j]), sigma(dg, cfg, [live[j]])[0])
    return v
