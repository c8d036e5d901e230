"""Synchronous round-based execution of node programs under LOCAL or CONGEST accounting.

A node program is any object with two methods::

    init(ctx) -> state            # or Halt(output) to stop before round 1
    on_round(ctx, state, inbox) -> (state, outbox) | (state, outbox, Halt(output))

``inbox`` maps neighbor -> message received this round (sent last round) and
``outbox`` maps neighbor -> message. Messages sent in round ``r`` are delivered at
the start of round ``r + 1``. Messages addressed to halted nodes are dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .codec import Packed
from .errors import ProtocolViolation, RoundBudgetExceeded, UsageError
from .graph import Graph

DEFAULT_ROUND_BUDGET = 10**7


@dataclass(frozen=True)
class ExecutionMode:
    kind: str = "LOCAL"
    bandwidth_bits: int | None = None

    def __post_init__(self):
        if self.kind not in ("LOCAL", "CONGEST"):
            raise UsageError(f"unknown execution mode {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ExecutionMode":
        """``local``, ``congest`` or ``congest:<bits>``."""
        head, _, tail = text.strip().partition(":")
        head = head.upper()
        if head == "LOCAL" and not tail:
            return cls("LOCAL")
        if head == "CONGEST":
            return cls("CONGEST", int(tail) if tail else None)
        raise UsageError(f"bad mode {text!r}")

    def bandwidth(self, n: int) -> int | None:
        """Per-message bit cap for an ``n``-node network (``None`` in LOCAL)."""
        if self.kind == "LOCAL":
            return None
        floor_bits = math.ceil(math.log2(max(n, 2)))
        bits = self.bandwidth_bits if self.bandwidth_bits is not None else math.ceil(4 * math.log2(max(n, 2)))
        if bits < floor_bits:
            raise UsageError(f"CONGEST bandwidth {bits} is below ceil(log2 n) = {floor_bits}")
        return bits

    def __str__(self):
        if self.kind == "LOCAL":
            return "local"
        return "congest" if self.bandwidth_bits is None else f"congest:{self.bandwidth_bits}"


LOCAL = ExecutionMode("LOCAL")


@dataclass
class RoundMetrics:
    rounds: int = 0
    oracle_rounds: int = 0
    max_message_bits: int = 0
    messages_total: int = 0
    oracle_calls: list = field(default_factory=list)

    @property
    def oracle_assisted(self) -> bool:
        return self.oracle_rounds > 0

    def charge(self, rounds: int = 0, bits: int = 0, messages: int = 0) -> "RoundMetrics":
        """Account for a stage executed outside the engine."""
        self.rounds += int(rounds)
        self.max_message_bits = max(self.max_message_bits, int(bits))
        self.messages_total += int(messages)
        return self

    def then(self, other: "RoundMetrics") -> "RoundMetrics":
        """Append ``other`` as a later stage (rounds add up)."""
        self.rounds += other.rounds
        self.oracle_rounds += other.oracle_rounds
        self.max_message_bits = max(self.max_message_bits, other.max_message_bits)
        self.messages_total += other.messages_total
        self.oracle_calls.extend(other.oracle_calls)
        return self

    def alongside(self, others) -> "RoundMetrics":
        """Append stages that run in parallel with each other (rounds take the max)."""
        others = list(others)
        if not others:
            return self
        self.rounds += max(o.rounds for o in others)
        for o in others:
            self.oracle_rounds += o.oracle_rounds
            self.max_message_bits = max(self.max_message_bits, o.max_message_bits)
            self.messages_total += o.messages_total
            self.oracle_calls.extend(o.oracle_calls)
        return self

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "oracle_rounds": self.oracle_rounds,
            "max_message_bits": self.max_message_bits,
            "messages_total": self.messages_total,
        }


def oracle_hook(metrics: RoundMetrics, name: str, computation: Callable[[], Any]) -> Any:
    """Run a centralized computation over global state and flag the run as oracle-assisted."""
    value = computation()
    metrics.oracle_rounds += 1
    metrics.oracle_calls.append(name)
    return value


@dataclass(frozen=True)
class Halt:
    output: Any = None


@dataclass(frozen=True)
class NodeContext:
    node: int
    uid: int
    neighbors: tuple
    edge_ids: tuple
    n: int
    delta: int
    input: Any = None


def message_bits(msg) -> int:
    if isinstance(msg, Packed):
        return msg.nbits
    if isinstance(msg, bool):
        return 1
    if isinstance(msg, int):
        return max(1, msg.bit_length() + (1 if msg < 0 else 0))
    if msg is None:
        return 0
    if isinstance(msg, (tuple, list, set, frozenset)):
        return sum(message_bits(x) for x in msg)
    raise TypeError(f"cannot size message of type {type(msg).__name__}")


class Simulator:
    """Lockstep executor; ``run_sync`` is the usual entry point."""

    def __init__(self, g: Graph, program, mode: ExecutionMode = LOCAL, inputs=None, delta: int | None = None):
        self.g = g
        self.program = program
        self.mode = mode
        self.cap = mode.bandwidth(g.n)
        self.metrics = RoundMetrics()
        self.round = 0
        d = g.max_degree if delta is None else int(delta)
        self.contexts = []
        for v in range(g.n):
            adj = g.adjacency(v)
            self.contexts.append(
                NodeContext(
                    node=v,
                    uid=v + 1,
                    neighbors=tuple(w for w, _ in adj),
                    edge_ids=tuple(e for _, e in adj),
                    n=g.n,
                    delta=d,
                    input=None if inputs is None else inputs[v],
                )
            )
        self.states = [None] * g.n
        self.outputs = [None] * g.n
        self.halted = [False] * g.n
        self._pending = [dict() for _ in range(g.n)]
        for v, ctx in enumerate(self.contexts):
            st = program.init(ctx)
            if isinstance(st, Halt):
                self.halted[v] = True
                self.outputs[v] = st.output
            else:
                self.states[v] = st

    @property
    def running(self) -> list[int]:
        return [v for v in range(self.g.n) if not self.halted[v]]

    def done(self) -> bool:
        return all(self.halted)

    def step(self) -> None:
        """Execute one synchronous round."""
        self.round += 1
        r = self.round
        inboxes = self._pending
        nxt = [dict() for _ in range(self.g.n)]
        cap = self.cap
        program = self.program
        m = self.metrics
        halting = []
        for v in range(self.g.n):
            if self.halted[v]:
                continue
            ctx = self.contexts[v]
            res = program.on_round(ctx, self.states[v], inboxes[v])
            if len(res) == 3:
                state, outbox, halt = res
            else:
                state, outbox = res
                halt = None
            self.states[v] = state
            if outbox:
                nbrs = ctx.neighbors
                for w, msg in outbox.items():
                    if w not in nbrs:
                        raise ProtocolViolation(f"node {v} sent to non-neighbor {w} in round {r}", round=r, edge=(v, w))
                    bits = message_bits(msg)
                    if cap is not None and bits > cap:
                        raise ProtocolViolation(
                            f"round {r}: message on edge ({v},{w}) has {bits} bits, CONGEST cap is {cap}",
                            round=r,
                            edge=(v, w),
                            size=bits,
                        )
                    if bits > m.max_message_bits:
                        m.max_message_bits = bits
                    m.messages_total += 1
                    nxt[w][v] = msg
            if halt is not None:
                halting.append((v, halt))
        for v, halt in halting:
            self.halted[v] = True
            self.outputs[v] = halt.output
        for v in range(self.g.n):
            if self.halted[v]:
                nxt[v].clear()
        self._pending = nxt
        m.rounds = r


def run_sync(
    g: Graph,
    program,
    mode: ExecutionMode = LOCAL,
    round_budget: int = DEFAULT_ROUND_BUDGET,
    inputs=None,
    delta: int | None = None,
) -> tuple[list, RoundMetrics]:
    """Run ``program`` on every node of ``g`` until all nodes halt.

    Raises ``RoundBudgetExceeded`` when nodes are still running after
    ``round_budget`` rounds and ``ProtocolViolation`` on oversized CONGEST messages.
    """
    if round_budget < 0:
        raise UsageError("round_budget must be non-negative")
    sim = Simulator(g, program, mode, inputs=inputs, delta=delta)
    while not sim.done():
        if sim.round >= round_budget:
            running = sim.running
            raise RoundBudgetExceeded(
                f"{len(running)} node(s) still running after {sim.round} rounds", rounds=sim.round, running=running
            )
        sim.step()
    return sim.outputs, sim.metrics
