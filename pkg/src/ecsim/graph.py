"""Undirected simple graphs, bipartitions, line-graph degree arithmetic and generators."""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import UsageError

U_SIDE = 0
V_SIDE = 1


class Graph:
    """Immutable simple graph on nodes ``0..n-1`` with dense edge ids ``0..m-1``.

    Edges are stored as ``(min, max)`` pairs in input order; the edge id is the
    position in that order.
    """

    __slots__ = ("n", "edges", "deg", "_indptr", "_nbr", "_eid", "_edge_index")

    def __init__(self, n: int, edges=()):
        n = int(n)
        if n < 0:
            raise UsageError("node count must be non-negative")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise UsageError("edges must be pairs of node ids")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise UsageError("edge endpoint out of range")
        arr = np.sort(arr, axis=1)
        if np.any(arr[:, 0] == arr[:, 1]):
            raise UsageError("self-loops are not allowed")
        keys = arr[:, 0] * max(n, 1) + arr[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise UsageError("parallel edges are not allowed")
        arr.setflags(write=False)
        self.n = n
        self.edges = arr
        m = len(arr)
        deg = np.bincount(arr.ravel(), minlength=n).astype(np.int64) if m else np.zeros(n, dtype=np.int64)
        deg.setflags(write=False)
        self.deg = deg

        # CSR adjacency sorted by neighbor id
        heads = np.concatenate([arr[:, 0], arr[:, 1]])
        tails = np.concatenate([arr[:, 1], arr[:, 0]])
        eids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((tails, heads))
        self._nbr = tails[order]
        self._eid = eids[order]
        self._indptr = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
        self._edge_index = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges.shape == other.edges.shape
            and bool(np.all(self.edges == other.edges))
        )

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def check_edge(self, e: int) -> int:
        if not (0 <= int(e) < self.m):
            raise UsageError(f"invalid edge id {e}")
        return int(e)

    def endpoints(self, e: int) -> tuple[int, int]:
        u, v = self.edges[self.check_edge(e)]
        return int(u), int(v)

    def adjacency(self, v: int) -> list[tuple[int, int]]:
        """Sorted ``(neighbor, edge id)`` pairs of node ``v``."""
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return list(zip(self._nbr[lo:hi].tolist(), self._eid[lo:hi].tolist()))

    def neighbors(self, v: int) -> list[int]:
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return self._nbr[lo:hi].tolist()

    def incident_edges(self, v: int) -> list[int]:
        lo, hi = self._indptr[v], self._indptr[v + 1]
        return self._eid[lo:hi].tolist()

    def csr(self):
        """Return ``(indptr, neighbor, edge_id)`` arrays."""
        return self._indptr, self._nbr, self._eid

    def edge_id(self, u: int, v: int) -> int | None:
        if self._edge_index is None:
            self._edge_index = {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges.tolist())}
        a, b = (u, v) if u < v else (v, u)
        return self._edge_index.get((a, b))

    def edge_degrees(self) -> np.ndarray:
        if self.m == 0:
            return np.zeros(0, dtype=np.int64)
        return self.deg[self.edges[:, 0]] + self.deg[self.edges[:, 1]] - 2

    @property
    def max_degree(self) -> int:
        return int(self.deg.max()) if self.n else 0

    def edge_subgraph(self, edge_ids) -> tuple["Graph", np.ndarray]:
        """Subgraph on the same node set keeping ``edge_ids`` (in the given order).

        Returns the subgraph and the array mapping its edge ids back to ours.
        """
        ids = np.asarray(edge_ids, dtype=np.int64).reshape(-1)
        return Graph(self.n, self.edges[ids]), ids

    def line_graph(self) -> "Graph":
        """Line graph whose node ``e`` is edge ``e`` of this graph."""
        pairs = []
        indptr = self._indptr
        for v in range(self.n):
            inc = np.sort(self._eid[indptr[v]:indptr[v + 1]])
            if len(inc) < 2:
                continue
            a, b = np.triu_indices(len(inc), k=1)
            pairs.append(np.stack([inc[a], inc[b]], axis=1))
        if not pairs:
            return Graph(self.m, [])
        allp = np.concatenate(pairs)
        # two edges share at most one endpoint in a simple graph
        return Graph(self.m, allp)

    def port_numbers(self) -> np.ndarray:
        """``ports[e] = (port at lower endpoint, port at higher endpoint)``, 0-based.

        A node numbers its incident edges by increasing neighbor id.
        """
        ports = np.zeros((self.m, 2), dtype=np.int64)
        for v in range(self.n):
            lo, hi = self._indptr[v], self._indptr[v + 1]
            for p, (w, e) in enumerate(zip(self._nbr[lo:hi], self._eid[lo:hi])):
                ports[e, 0 if v < w else 1] = p
        return ports


@dataclass(frozen=True)
class GraphStats:
    delta: int
    bar_delta: int


class Bipartition:
    """Side tag per node: ``U_SIDE`` (0) or ``V_SIDE`` (1)."""

    __slots__ = ("side",)

    def __init__(self, side):
        arr = np.asarray(side, dtype=np.int8).copy()
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise UsageError("bipartition sides must be 0 (U) or 1 (V)")
        arr.setflags(write=False)
        self.side = arr

    def __len__(self):
        return len(self.side)

    def __eq__(self, other):
        return isinstance(other, Bipartition) and np.array_equal(self.side, other.side)

    def is_valid_for(self, g: Graph) -> bool:
        if len(self.side) != g.n:
            return False
        if g.m == 0:
            return True
        s = self.side[g.edges]
        return bool(np.all(s[:, 0] != s[:, 1]))

    def require(self, g: Graph):
        if not self.is_valid_for(g):
            raise UsageError("graph is not bipartite with respect to the given bipartition")

    def oriented_edges(self, g: Graph) -> tuple[np.ndarray, np.ndarray]:
        """Arrays ``(u, v)`` with ``u`` the U-side and ``v`` the V-side endpoint of each edge."""
        a, b = g.edges[:, 0], g.edges[:, 1]
        a_is_u = self.side[a] == U_SIDE
        return np.where(a_is_u, a, b), np.where(a_is_u, b, a)


def edge_degree(g: Graph, e: int) -> int:
    """Number of edges adjacent to ``e``: ``deg(u) + deg(v) - 2``."""
    u, v = g.endpoints(e)
    return int(g.deg[u] + g.deg[v] - 2)


def compute_stats(g: Graph) -> GraphStats:
    bar = int(g.edge_degrees().max()) if g.m else 0
    return GraphStats(delta=g.max_degree, bar_delta=bar)


MODELS = ("regular_bipartite", "random_bipartite", "random_general")


def generate(model: str, n: int, delta_target: int, seed: int) -> tuple[Graph, Bipartition | None]:
    """Seeded random graph; a pure function of its arguments.

    ``n`` is the total node count. Bipartite models put nodes ``0..ceil(n/2)-1``
    on side U and the rest on side V. ``regular_bipartite`` needs an even ``n``
    and ``delta_target <= n/2``. The random models use a configuration model that
    drops self-loops and duplicate pairs, so degrees never exceed ``delta_target``.
    """
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
    if n < 0 or delta_target < 0:
        raise UsageError("n and delta_target must be non-negative")
    rng = random.Random(seed)
    if model == "random_general":
        if n > 0 and delta_target >= n:
            raise UsageError("delta_target must be smaller than n")
        stubs = [v for v in range(n) for _ in range(delta_target)]
        rng.shuffle(stubs)
        seen = set()
        edges = []
        for a, b in zip(stubs[0::2], stubs[1::2]):
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            edges.append(key)
        return Graph(n, edges), None

    nu = (n + 1) // 2
    nv = n - nu
    side = [U_SIDE] * nu + [V_SIDE] * nv
    if model == "regular_bipartite":
        if n % 2:
            raise UsageError("regular_bipartite needs an even total node count")
        if delta_target > nv:
            raise UsageError("delta_target exceeds the side size")
        shifts = rng.sample(range(nv), delta_target) if nv else []
        perm_u = list(range(nu))
        perm_v = list(range(nv))
        rng.shuffle(perm_u)
        rng.shuffle(perm_v)
        edges = []
        for i in range(nu):
            for s in shifts:
                edges.append((perm_u[i], nu + perm_v[(i + s) % nv]))
        order = list(range(len(edges)))
        rng.shuffle(order)
        return Graph(n, [edges[i] for i in order]), Bipartition(side)

    # random_bipartite
    if delta_target > 0 and (nu == 0 or nv == 0):
        raise UsageError("random_bipartite needs at least one node per side")
    stubs_u = [u for u in range(nu) for _ in range(delta_target)]
    stubs_v = [nu + v for v in range(nv) for _ in range(delta_target)]
    rng.shuffle(stubs_u)
    rng.shuffle(stubs_v)
    seen = set()
    edges = []
    for a, b in zip(stubs_u, stubs_v):
        if (a, b) in seen:
            continue
        seen.add((a, b))
        edges.append((a, b))
    return Graph(n, edges), Bipartition(side)

