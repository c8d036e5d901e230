"""Fixed-width integer packing for CONGEST messages."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ProtocolViolation


@dataclass(frozen=True)
class Packed:
    """A bit string of exactly ``nbits`` bits holding ``value``."""

    value: int
    nbits: int

    def bits(self) -> str:
        return format(self.value, f"0{self.nbits}b") if self.nbits else ""


def width_for(max_value: int) -> int:
    """Bits needed to hold any integer in ``[0, max_value]``."""
    return max(1, int(max_value).bit_length())


def encode(values, widths) -> Packed:
    values = tuple(int(v) for v in values)
    widths = tuple(int(w) for w in widths)
    if len(values) != len(widths):
        raise ValueError("one width per value")
    acc = 0
    for v, w in zip(values, widths):
        if v < 0 or v >= (1 << w):
            raise ProtocolViolation(f"value {v} does not fit in {w} bits", size=w)
        acc = (acc << w) | v
    return Packed(acc, sum(widths))


def decode(packed: Packed, widths) -> tuple[int, ...]:
    widths = tuple(int(w) for w in widths)
    if sum(widths) != packed.nbits:
        raise ProtocolViolation(f"expected {sum(widths)} bits, got {packed.nbits}", size=packed.nbits)
    out = []
    acc = packed.value
    for w in reversed(widths):
        out.append(acc & ((1 << w) - 1))
        acc >>= w
    return tuple(reversed(out))


def color_width(delta: int, factor: int = 3) -> int:
    """Width of a color index when palettes are bounded by ``factor * delta``."""
    return width_for(factor * max(delta, 1))
