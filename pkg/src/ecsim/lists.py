"""Per-edge color lists over a declared color space."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UsageError


@dataclass(frozen=True)
class ListAssignment:
    """``lists[e]`` is the sorted, duplicate-free color list of edge ``e`` within ``space``.

    ``space`` is the inclusive integer range ``(lo, hi)``. An optional per-edge
    real ``eta`` column rides along for orientation inputs.
    """

    space: tuple[int, int]
    lists: tuple[tuple[int, ...], ...]
    eta: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        lo, hi = self.space
        if lo > hi + 1:
            raise UsageError(f"bad color space [{lo}, {hi}]")
        fixed = []
        for e, lst in enumerate(self.lists):
            t = tuple(int(c) for c in lst)
            if any(a >= b for a, b in zip(t, t[1:])):
                raise UsageError(f"list of edge {e} is not strictly increasing")
            if t and (t[0] < lo or t[-1] > hi):
                raise UsageError(f"list of edge {e} leaves the color space [{lo}, {hi}]")
            fixed.append(t)
        object.__setattr__(self, "lists", tuple(fixed))

    @classmethod
    def from_lists(cls, lists, space=None, eta=None) -> "ListAssignment":
        lists = [tuple(sorted(set(int(c) for c in lst))) for lst in lists]
        if space is None:
            colors = [c for lst in lists for c in lst]
            space = (min(1, min(colors)) if colors else 1, max(colors) if colors else 0)
        return cls(tuple(space), tuple(lists), None if eta is None else tuple(eta))

    @classmethod
    def uniform(cls, m: int, palette: int) -> "ListAssignment":
        """Every edge gets ``{1..palette}``: the plain ``palette``-edge-coloring instance."""
        full = tuple(range(1, palette + 1))
        return cls((1, palette), tuple(full for _ in range(m)))

    @property
    def space_size(self) -> int:
        return self.space[1] - self.space[0] + 1

    def __len__(self):
        return len(self.lists)

    def __getitem__(self, e):
        return self.lists[e]

    def restrict(self, lo: int, hi: int) -> "ListAssignment":
        """Intersect every list with ``[lo, hi]`` and shrink the space to it."""
        return ListAssignment((lo, hi), tuple(tuple(c for c in lst if lo <= c <= hi) for lst in self.lists))
