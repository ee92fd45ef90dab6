"""Discrete baker maps on square power-of-two lattices.

A map on the 2**n x 2**n lattice is described by an ordered partition of the
side into power-of-two column widths.  Each vertical strip of width 2**q is
stretched horizontally by 2**(n-q) and squashed vertically onto a band of
height 2**q, which permutes the lattice points.  Only partitions whose
prefix sums are each divisible by the width that follows them ("admissible"
partitions) keep every strip aligned to a dyadic grid; those are exactly the
maps with a compact reversible-circuit realisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class BakerPartition:
    """Ordered partition of 2**n into power-of-two widths."""

    n: int
    qs: tuple[int, ...]  # exponents; widths are 2**q, left to right

    def __post_init__(self):
        object.__setattr__(self, "qs", tuple(int(q) for q in self.qs))
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not self.qs:
            raise ValueError("partition must have at least one block")
        side = 1 << self.n
        total = 0
        for q in self.qs:
            if not 0 <= q <= self.n:
                raise ValueError(f"block exponent {q} out of range for n={self.n}")
            total += 1 << q
        if total != side:
            raise ValueError(f"widths sum to {total}, expected {side}")

    @property
    def side(self) -> int:
        return 1 << self.n

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(1 << q for q in self.qs)

    def prefix_sums(self) -> tuple[int, ...]:
        """Left strip boundaries N_0 = 0 <= N_1 <= ... <= N_r = 2**n."""
        sums = [0]
        for q in self.qs:
            sums.append(sums[-1] + (1 << q))
        return tuple(sums)

    def is_admissible(self) -> bool:
        """True when every strip starts on a multiple of its own width."""
        start = 0
        for q in self.qs:
            if start % (1 << q):
                return False
            start += 1 << q
        return True

    def __str__(self) -> str:
        return ",".join(str(w) for w in self.widths)


def from_widths(widths: "list[int] | tuple[int, ...]") -> BakerPartition:
    """Build a partition from explicit block widths; side is their sum."""
    widths = tuple(int(w) for w in widths)
    if not widths:
        raise ValueError("empty width list")
    for w in widths:
        if w < 1 or w & (w - 1):
            raise ValueError(f"width {w} is not a power of two")
    total = sum(widths)
    if total & (total - 1):
        raise ValueError(f"widths sum to {total}, not a power of two")
    n = total.bit_length() - 1
    return BakerPartition(n=n, qs=tuple(w.bit_length() - 1 for w in widths))


def parse_widths(text: str) -> BakerPartition:
    """Parse the comma-separated width form, e.g. '16,8,8,32,64,128'."""
    parts = [p.strip() for p in text.split(",")]
    try:
        widths = [int(p) for p in parts if p]
    except ValueError as exc:
        raise ValueError(f"bad partition text {text!r}") from exc
    if not widths:
        raise ValueError(f"bad partition text {text!r}")
    return from_widths(widths)


def _region_index(part: BakerPartition, x: int) -> int:
    sums = part.prefix_sums()
    for i in range(len(part.qs)):
        if sums[i] <= x < sums[i + 1]:
            return i
    raise ValueError(f"x={x} outside the lattice")


def apply(part: BakerPartition, point: tuple[int, int]) -> tuple[int, int]:
    """Apply the map to one lattice point (x, y)."""
    x, y = point
    side = part.side
    if not (0 <= x < side and 0 <= y < side):
        raise ValueError(f"point {point} outside the {side}x{side} lattice")
    i = _region_index(part, x)
    start = part.prefix_sums()[i]
    h = 1 << (part.n - part.qs[i])  # horizontal stretch = vertical squash
    xp = (x - start) * h + y % h
    yp = start + (y - y % h) // h
    return xp, yp


def apply_inverse(part: BakerPartition, point: tuple[int, int]) -> tuple[int, int]:
    """Invert the map at one lattice point."""
    xp, yp = point
    side = part.side
    if not (0 <= xp < side and 0 <= yp < side):
        raise ValueError(f"point {point} outside the {side}x{side} lattice")
    sums = part.prefix_sums()
    for i, q in enumerate(part.qs):
        if sums[i] <= yp < sums[i + 1]:
            h = 1 << (part.n - q)
            x = sums[i] + xp // h
            y = (yp - sums[i]) * h + xp % h
            return x, y
    raise ValueError(f"point {point} outside every output band")


def iterate(part: BakerPartition, point: tuple[int, int], rounds: int) -> tuple[int, int]:
    """Apply the map `rounds` times (0 rounds is the identity)."""
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    for _ in range(rounds):
        point = apply(part, point)
    return point


def permutation_table(part: BakerPartition) -> np.ndarray:
    """Whole-lattice permutation over flat indices x * 2**n + y.

    Entry table[p] is the flat index of the image of point p, so scattering
    values with table realises one application of the map.
    """
    n = part.n
    side = part.side
    idx = np.arange(side * side, dtype=np.int64)
    xs = idx >> n
    ys = idx & (side - 1)
    sums = np.asarray(part.prefix_sums(), dtype=np.int64)
    region = np.searchsorted(sums, xs, side="right") - 1
    qs = np.asarray(part.qs, dtype=np.int64)[region]
    start = sums[region]
    h = np.int64(1) << (n - qs)
    xp = (xs - start) * h + ys % h
    yp = start + (ys - ys % h) // h
    return (xp << n) | yp


_BIG_COUNT_LIMIT = 64


@lru_cache(maxsize=_BIG_COUNT_LIMIT)
def count_partitions(n: int) -> int:
    """Number of admissible partitions of side 2**n.

    Satisfies C(0) = 1 and C(n) = C(n-1)**2 + 1: a side either stays one
    block or splits into two halves carrying independent admissible
    sub-partitions.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1
    prev = count_partitions(n - 1)
    return prev * prev + 1


def unrank(n: int, index: int) -> BakerPartition:
    """Return the admissible partition with the given rank.

    Rank 0 is the single full-width block; rank 1 + (a * C(n-1) + b) glues
    the rank-a partition of the left half to the rank-b partition of the
    right half.  The map is a bijection from [0, C(n)) onto the admissible
    partitions, so drawing ranks uniformly draws maps uniformly.
    """
    if not 0 <= index < count_partitions(n):
        raise ValueError(f"rank {index} out of range for n={n}")
    return BakerPartition(n=n, qs=_unrank_qs(n, index))


def _unrank_qs(n: int, index: int) -> tuple[int, ...]:
    if index == 0:
        return (n,)
    half = count_partitions(n - 1)
    a, b = divmod(index - 1, half)
    return _unrank_qs(n - 1, a) + _unrank_qs(n - 1, b)
