"""Centralized validators and brute-force oracles.

Every check recomputes its counts from the raw inputs. Inequalities between
rationals are decided exactly: a vectorized float pass settles clear cases and
anything within a relative margin of the bound is re-decided with ``Fraction``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import UsageError
from .graph import Bipartition, Graph

GRID = 1 << 20  # reals travel as rationals with this denominator


def to_grid(value, up: bool = False) -> Fraction:
    """Round a real onto the 2^-20 grid (down by default, up when ``up``)."""
    f = Fraction(value)
    scaled = f * GRID
    n = -((-scaled.numerator) // scaled.denominator) if up else scaled.numerator // scaled.denominator
    return Fraction(n, GRID)


@dataclass
class Verdict:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, check: str, entity, lhs, rhs) -> None:
        self.violations.append((check, entity, lhs, rhs))

    def extend(self, other: "Verdict") -> "Verdict":
        self.violations.extend(other.violations)
        return self

    @property
    def first(self):
        return self.violations[0] if self.violations else None

    def as_dict(self, limit: int = 20) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"check": c, "entity": _plain(e), "lhs": _plain(l), "rhs": _plain(r)} for c, e, l, r in self.violations[:limit]
            ],
            "violation_count": len(self.violations),
        }


def _plain(x):
    if isinstance(x, Fraction):
        return float(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, tuple):
        return [_plain(v) for v in x]
    return x


def exact_leq(lhs_f: np.ndarray, rhs_f: np.ndarray, exact) -> np.ndarray:
    """Elementwise ``lhs <= rhs`` decided exactly.

    ``lhs_f``/``rhs_f`` are float approximations; ``exact(i)`` returns the exact
    ``(lhs, rhs)`` pair for element ``i`` and is consulted only near the boundary.
    """
    lhs_f = np.asarray(lhs_f, dtype=float)
    rhs_f = np.asarray(rhs_f, dtype=float)
    tol = 1e-9 * np.maximum(1.0, np.maximum(np.abs(lhs_f), np.abs(rhs_f)))
    out = lhs_f <= rhs_f - tol
    unsure = np.flatnonzero(~out & (lhs_f <= rhs_f + tol))
    for i in unsure.tolist():
        l, r = exact(i)
        out[i] = l <= r
    return out


# --- edge colorings -------------------------------------------------------------------


def check_proper_edge_coloring(g: Graph, coloring, lists=None, palette: int | None = None) -> Verdict:
    """Flag uncolored edges, equal colors on adjacent edges, off-list and off-palette colors."""
    v = Verdict()
    col = _as_color_array(g, coloring)
    for e in np.flatnonzero(col <= 0).tolist():
        v.add("uncolored", e, int(col[e]), None)
    if palette is not None:
        for e in np.flatnonzero(col > palette).tolist():
            v.add("off_palette", e, int(col[e]), palette)
    if lists is not None:
        for e in range(g.m):
            c = int(col[e])
            if c > 0 and c not in set(lists[e]):
                v.add("off_list", e, c, None)
    seen = {}
    for e, (a, b) in enumerate(g.edges.tolist()):
        c = int(col[e])
        if c <= 0:
            continue
        for w in (a, b):
            prev = seen.get((w, c))
            if prev is not None:
                v.add("conflict", (prev, e), c, w)
            else:
                seen[(w, c)] = e
    return v


def _as_color_array(g: Graph, coloring) -> np.ndarray:
    if isinstance(coloring, dict):
        col = np.zeros(g.m, dtype=np.int64)
        for e, c in coloring.items():
            if not 0 <= e < g.m:
                raise UsageError(f"coloring names edge {e} outside [0, {g.m})")
            col[e] = c
        return col
    col = np.asarray(coloring, dtype=np.int64)
    if col.shape != (g.m,):
        raise UsageError("coloring must have one entry per edge")
    return col


def colors_used(coloring) -> int:
    col = np.asarray(list(coloring.values()) if isinstance(coloring, dict) else coloring)
    return int(len(np.unique(col[col > 0]))) if col.size else 0


# --- vertex colorings -----------------------------------------------------------------


def check_defect_vertex(g: Graph, coloring, d: int) -> Verdict:
    color = np.asarray(getattr(coloring, "color", coloring), dtype=np.int64)
    v = Verdict()
    mono = np.zeros(g.n, dtype=np.int64)
    for a, b in g.edges.tolist():
        if color[a] == color[b]:
            mono[a] += 1
            mono[b] += 1
    for node in np.flatnonzero(mono > d).tolist():
        v.add("defect", node, int(mono[node]), d)
    return v


# --- orientations and defective 2-edge colorings -------------------------------------


def incoming_counts(g: Graph, bip: Bipartition, u_to_v: np.ndarray) -> np.ndarray:
    """``x_v``: number of edges oriented toward each node. ``u_to_v[e]`` is True for U->V."""
    us, vs = bip.oriented_edges(g)
    heads = np.where(u_to_v, vs, us)
    return np.bincount(heads, minlength=g.n).astype(np.int64)


def check_orientation_balance(g: Graph, bip: Bipartition, u_to_v, eta, eps, beta) -> Verdict:
    """Generalized balanced orientation inequalities, with ``x`` recounted from the direction map."""
    v = Verdict()
    if g.m == 0:
        return v
    u_to_v = np.asarray(u_to_v, dtype=bool)
    x = incoming_counts(g, bip, u_to_v)
    us, vs = bip.oriented_edges(g)
    deg_e = g.edge_degrees()
    eps, beta = Fraction(eps), Fraction(beta)
    eta = [Fraction(h) for h in eta]
    eta_f = np.array([float(h) for h in eta])
    diff = (x[vs] - x[us]).astype(float)
    sign = np.where(u_to_v, 1.0, -1.0)
    lhs = sign * diff
    rhs = sign * eta_f + 1 + float(eps) / 2 * deg_e + float(beta)

    def exact(i):
        s = 1 if u_to_v[i] else -1
        return s * int(x[vs[i]] - x[us[i]]), s * eta[i] + 1 + eps / 2 * int(deg_e[i]) + beta

    ok = exact_leq(lhs, rhs, exact)
    for e in np.flatnonzero(~ok).tolist():
        l, r = exact(e)
        v.add("balance_uv" if u_to_v[e] else "balance_vu", e, l, r)
    return v


def red_blue_neighbors(g: Graph, red: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per edge: number of adjacent red edges and adjacent blue edges."""
    red = np.asarray(red, dtype=bool)
    a, b = g.edges[:, 0], g.edges[:, 1]
    red_at = np.bincount(np.concatenate([a[red], b[red]]), minlength=g.n)
    deg_e = g.edge_degrees()
    r = red_at[a] + red_at[b] - 2 * red.astype(np.int64)
    return r, deg_e - r


def check_defective_2ec(g: Graph, lam, eps, beta, red) -> Verdict:
    """Generalized (1+eps, beta)-relaxed defective 2-edge coloring check.

    Red edge: red neighbors <= (1+eps)*lam*deg(e) + lam*beta; blue edge: the
    same with ``1 - lam`` and blue neighbors.
    """
    v = Verdict()
    if g.m == 0:
        return v
    red = np.asarray(red, dtype=bool)
    lam = [Fraction(x) for x in lam]
    eps, beta = Fraction(eps), Fraction(beta)
    rn, bn = red_blue_neighbors(g, red)
    deg_e = g.edge_degrees()
    share = [lam[e] if red[e] else 1 - lam[e] for e in range(g.m)]
    share_f = np.array([float(s) for s in share])
    lhs = np.where(red, rn, bn).astype(float)
    rhs = float(1 + eps) * share_f * deg_e + share_f * float(beta)

    def exact(i):
        return int(rn[i] if red[i] else bn[i]), (1 + eps) * share[i] * int(deg_e[i]) + share[i] * beta

    ok = exact_leq(lhs, rhs, exact)
    for e in np.flatnonzero(~ok).tolist():
        l, r = exact(e)
        v.add("red_defect" if red[e] else "blue_defect", e, l, r)
    return v


# --- oracles --------------------------------------------------------------------------


@dataclass
class GreedyResult:
    ok: bool
    coloring: np.ndarray | None
    stuck_edge: int | None = None


def sequential_greedy_oracle(g: Graph, lists) -> GreedyResult:
    """Edges in id order take the smallest list color unused by colored neighbors."""
    col = np.zeros(g.m, dtype=np.int64)
    used = [set() for _ in range(g.n)]
    for e, (a, b) in enumerate(g.edges.tolist()):
        for c in sorted(lists[e]):
            if c not in used[a] and c not in used[b]:
                col[e] = c
                used[a].add(c)
                used[b].add(c)
                break
        else:
            return GreedyResult(False, None, e)
    return GreedyResult(True, col)


BRUTE_FORCE_CAP = 12


def brute_force_min_colors(g: Graph) -> int:
    """Chromatic index by exhaustive search (``m <= 12``)."""
    if g.m > BRUTE_FORCE_CAP:
        raise UsageError(f"brute force is limited to {BRUTE_FORCE_CAP} edges, got {g.m}")
    if g.m == 0:
        return 0
    adj = [[] for _ in range(g.m)]
    for a, b in itertools.combinations(range(g.m), 2):
        if set(g.edges[a].tolist()) & set(g.edges[b].tolist()):
            adj[b].append(a)
    for k in range(1, g.m + 1):
        col = [0] * g.m

        def place(e):
            if e == g.m:
                return True
            # symmetry: edge e may open at most one new color
            top = max(col[:e], default=0)
            for c in range(1, min(k, top + 1) + 1):
                if all(col[f] != c for f in adj[e]):
                    col[e] = c
                    if place(e + 1):
                        return True
            col[e] = 0
            return False

        if place(0):
            return k
    return g.m  # unreachable
