"""Plain-text file formats.

Graph file: ``n m`` then ``m`` lines ``u v`` (0-based).
Bipartition file: ``n`` lines of ``U`` or ``V``.
Lists file: one line per edge, ``edge_id k c1 ... ck`` with ascending colors and
an optional trailing real (the edge's eta).
Coloring file: one line per edge, ``edge_id color``.
Token file: one line per node, ``node_id tokens alpha``.
"""
from __future__ import annotations

import io as _io
import os
from fractions import Fraction

from .errors import ParseError
from .graph import Bipartition, Graph, U_SIDE, V_SIDE
from .lists import ListAssignment


def _open_lines(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return fh.read().splitlines(), str(source)
    return source.read().splitlines(), getattr(source, "name", None)


def _ints(tokens, lineno, path):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", lineno, path) from None


def _content(lines):
    for i, raw in enumerate(lines, start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            yield i, s.split()


def read_graph(source) -> Graph:
    lines, path = _open_lines(source)
    it = _content(lines)
    try:
        lineno, toks = next(it)
    except StopIteration:
        raise ParseError("empty graph file", 1, path) from None
    if len(toks) != 2:
        raise ParseError("header must be 'n m'", lineno, path)
    n, m = _ints(toks, lineno, path)
    if n < 0 or m < 0:
        raise ParseError("negative n or m", lineno, path)
    edges = []
    seen = set()
    for lineno, toks in it:
        if len(toks) != 2:
            raise ParseError("edge line must be 'u v'", lineno, path)
        u, v = _ints(toks, lineno, path)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"node index out of range [0, {n})", lineno, path)
        if u == v:
            raise ParseError("self-loop", lineno, path)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError("parallel edge", lineno, path)
        seen.add(key)
        edges.append((u, v))
    if len(edges) != m:
        raise ParseError(f"header declares {m} edges but file has {len(edges)}", None, path)
    return Graph(n, edges)


def read_digraph(source):
    """Graph file read as arcs: line ``u v`` is the arc ``u -> v``."""
    from .tokengame import DiGraph

    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            text = fh.read()
    else:
        text = source.read()
    g = read_graph(_io.StringIO(text))
    arcs = [toks for _, toks in _content(text.splitlines())][1:]
    return DiGraph.from_arcs(g.n, [(int(a), int(b)) for a, b in arcs])


def write_graph(g: Graph, dest) -> None:
    out = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges.tolist()]
    _write(dest, out)


def read_bipartition(source, n: int | None = None) -> Bipartition:
    lines, path = _open_lines(source)
    side = []
    for lineno, toks in _content(lines):
        if len(toks) != 1 or toks[0] not in ("U", "V"):
            raise ParseError("expected 'U' or 'V'", lineno, path)
        side.append(U_SIDE if toks[0] == "U" else V_SIDE)
    if n is not None and len(side) != n:
        raise ParseError(f"expected {n} side tags, found {len(side)}", None, path)
    return Bipartition(side)


def write_bipartition(bip: Bipartition, dest) -> None:
    _write(dest, ["U" if s == U_SIDE else "V" for s in bip.side.tolist()])


def read_lists(source, m: int | None = None, space=None) -> ListAssignment:
    """Parse a lists file; every edge id in ``[0, m)`` must appear exactly once when ``m`` is given."""
    lines, path = _open_lines(source)
    rows = {}
    etas = {}
    for lineno, toks in _content(lines):
        if len(toks) < 2:
            raise ParseError("list line must be 'edge_id k c1 ... ck'", lineno, path)
        e, k = _ints(toks[:2], lineno, path)
        rest = toks[2:]
        if k < 0 or len(rest) not in (k, k + 1):
            raise ParseError(f"list of edge {e} declares {k} colors", lineno, path)
        colors = _ints(rest[:k], lineno, path)
        if any(a >= b for a, b in zip(colors, colors[1:])):
            raise ParseError("colors must be strictly ascending", lineno, path)
        if e < 0 or (m is not None and e >= m):
            raise ParseError(f"edge id {e} out of range", lineno, path)
        if e in rows:
            raise ParseError(f"duplicate edge id {e}", lineno, path)
        rows[e] = colors
        if len(rest) == k + 1:
            try:
                etas[e] = Fraction(rest[k])
            except ValueError:
                raise ParseError(f"bad eta value {rest[k]!r}", lineno, path) from None
    total = m if m is not None else (max(rows) + 1 if rows else 0)
    missing = [e for e in range(total) if e not in rows]
    if missing:
        raise ParseError(f"no list for edge {missing[0]}", None, path)
    eta = [etas.get(e, Fraction(0)) for e in range(total)] if etas else None
    return ListAssignment.from_lists([rows[e] for e in range(total)], space=space, eta=eta)


def write_lists(lists: ListAssignment, dest) -> None:
    out = []
    for e, lst in enumerate(lists.lists):
        row = [str(e), str(len(lst))] + [str(c) for c in lst]
        if lists.eta is not None:
            row.append(str(lists.eta[e]))
        out.append(" ".join(row))
    _write(dest, out)


def read_coloring(source, m: int | None = None) -> dict[int, int]:
    lines, path = _open_lines(source)
    col = {}
    for lineno, toks in _content(lines):
        if len(toks) != 2:
            raise ParseError("coloring line must be 'edge_id color'", lineno, path)
        e, c = _ints(toks, lineno, path)
        if e < 0 or (m is not None and e >= m):
            raise ParseError(f"edge id {e} out of range", lineno, path)
        if e in col:
            raise ParseError(f"duplicate edge id {e}", lineno, path)
        col[e] = c
    return col


def write_coloring(coloring, dest) -> None:
    items = coloring.items() if isinstance(coloring, dict) else enumerate(coloring)
    _write(dest, [f"{e} {c}" for e, c in sorted(items) if c is not None])


def read_tokens(source, n: int | None = None):
    """Parse ``node_id tokens alpha`` lines into ``(tokens, alpha)`` lists."""
    lines, path = _open_lines(source)
    rows = {}
    for lineno, toks in _content(lines):
        if len(toks) != 3:
            raise ParseError("token line must be 'node_id tokens alpha'", lineno, path)
        v, t = _ints(toks[:2], lineno, path)
        try:
            a = Fraction(toks[2])
        except ValueError:
            raise ParseError(f"bad alpha {toks[2]!r}", lineno, path) from None
        if v < 0 or (n is not None and v >= n):
            raise ParseError(f"node id {v} out of range", lineno, path)
        if v in rows:
            raise ParseError(f"duplicate node id {v}", lineno, path)
        rows[v] = (t, a)
    total = n if n is not None else (max(rows) + 1 if rows else 0)
    missing = [v for v in range(total) if v not in rows]
    if missing:
        raise ParseError(f"no token line for node {missing[0]}", None, path)
    return [rows[v][0] for v in range(total)], [rows[v][1] for v in range(total)]


def _write(dest, lines):
    text = "\n".join(lines) + ("\n" if lines else "")
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            fh.write(text)
    elif isinstance(dest, _io.TextIOBase) or hasattr(dest, "write"):
        dest.write(text)
    else:
        raise TypeError("dest must be a path or a writable text stream")
