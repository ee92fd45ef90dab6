"""Bit-plane representation of multi-image sets.

A set of M' square grayscale images of side 2**n with L-bit pixels becomes a
four-dimensional binary tensor indexed (image, plane, x, y).  The image and
plane axes are padded with zeros up to a common power of two 2**k so that the
(image, plane) pair ranges over a square lattice of the same shape class as
the pixel lattice; that symmetry is what lets the scrambling stage treat both
lattices with the same machinery.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np


class PaddingError(ValueError):
    """Raised when padding slots that must be zero carry data."""


def _dtype_for_depth(bit_depth: int):
    if bit_depth <= 8:
        return np.uint8
    if bit_depth <= 16:
        return np.uint16
    if bit_depth <= 32:
        return np.uint32
    return np.uint64


@dataclass
class MultiImage:
    """An ordered set of equally sized square grayscale images.

    Attributes:
        n: pixel lattices are 2**n x 2**n.
        bit_depth: pixels hold values in [0, 2**bit_depth).
        pixels: array of shape (m_prime, 2**n, 2**n).
    """

    n: int
    bit_depth: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.bit_depth < 1:
            raise ValueError("bit depth must be at least 1")
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 3:
            raise ValueError("pixels must have shape (images, side, side)")
        side = 1 << self.n
        count = self.pixels.shape[0]
        if count < 1:
            raise ValueError("at least one image is required")
        if self.pixels.shape[1] != side or self.pixels.shape[2] != side:
            raise ValueError(
                f"image side must be {side} for n={self.n}, "
                f"got {self.pixels.shape[1]}x{self.pixels.shape[2]}"
            )
        limit = 1 << self.bit_depth
        if self.pixels.size and int(self.pixels.max()) >= limit:
            raise ValueError(f"pixel values must be below {limit}")
        self.pixels = self.pixels.astype(_dtype_for_depth(self.bit_depth), copy=False)

    @property
    def m_prime(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def side(self) -> int:
        return 1 << self.n

    def stack_exponent(self) -> int:
        """Shared exponent k with 2**k >= max(m_prime, bit_depth)."""
        return max(self.m_prime - 1, self.bit_depth - 1).bit_length()


@dataclass
class BitPlaneStack:
    """Padded binary tensor bits[image, plane, x, y] with equal side 2**k.

    Plane 0 is the least significant bit.  Padded images (m >= m_prime) and
    padded planes (l >= bit_depth) are zero until scrambling moves data into
    them.
    """

    n: int
    k: int
    m_prime: int
    bit_depth: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        stack_side = 1 << self.k
        side = 1 << self.n
        if self.m_prime < 1 or self.m_prime > stack_side:
            raise ValueError("image count must fit the stack side")
        if self.bit_depth < 1 or self.bit_depth > stack_side:
            raise ValueError("bit depth must fit the stack side")
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        expected = (stack_side, stack_side, side, side)
        if self.bits.shape != expected:
            raise ValueError(f"bit tensor must have shape {expected}")
        if self.bits.size and int(self.bits.max()) > 1:
            raise ValueError("bit tensor entries must be 0 or 1")

    @property
    def stack_side(self) -> int:
        return 1 << self.k

    def padding_mask(self) -> np.ndarray:
        """Boolean mask over (image, plane) slots that carry no source data."""
        s = self.stack_side
        mask = np.zeros((s, s), dtype=bool)
        mask[self.m_prime :, :] = True
        mask[:, self.bit_depth :] = True
        return mask

    def padding_bit_count(self) -> int:
        """Number of set bits sitting in padding slots."""
        return int(self.bits[self.padding_mask()].sum())


def decompose(images: MultiImage) -> BitPlaneStack:
    """Unpack pixel values into the padded bit tensor.

    The plane axis stores binary expansions little-endian, so recombining
    planes with weights 2**l reproduces the pixel values exactly.
    """
    k = images.stack_exponent()
    stack_side = 1 << k
    side = images.side
    bits = np.zeros((stack_side, stack_side, side, side), dtype=np.uint8)
    pix = images.pixels.astype(np.uint64, copy=False)
    for l in range(images.bit_depth):
        bits[: images.m_prime, l] = (pix >> np.uint64(l)) & np.uint64(1)
    return BitPlaneStack(
        n=images.n,
        k=k,
        m_prime=images.m_prime,
        bit_depth=images.bit_depth,
        bits=bits,
    )


def recompose(stack: BitPlaneStack, check_padding: bool = True) -> MultiImage:
    """Rebuild the m_prime source images from plane slices.

    Raises PaddingError when check_padding is set and any padding slot holds
    a one bit; that situation means the tensor no longer describes a plain
    image set (typically a wrong-key decryption).
    """
    if check_padding:
        stray = stack.padding_bit_count()
        if stray:
            raise PaddingError(f"{stray} set bits in padding slots")
    weights = (np.uint64(1) << np.arange(stack.bit_depth, dtype=np.uint64)).reshape(
        1, -1, 1, 1
    )
    planes = stack.bits[: stack.m_prime, : stack.bit_depth].astype(np.uint64)
    values = (planes * weights).sum(axis=1)
    return MultiImage(n=stack.n, bit_depth=stack.bit_depth, pixels=values)


def recompose_all(stack: BitPlaneStack) -> MultiImage:
    """Rebuild every stack slot, padding included.

    Produces 2**k images of 2**k-bit pixels; that is the on-disk shape of
    ciphertext, where scrambling has moved live bits into padding slots.
    """
    s = stack.stack_side
    weights = (np.uint64(1) << np.arange(s, dtype=np.uint64)).reshape(1, -1, 1, 1)
    values = (stack.bits.astype(np.uint64) * weights).sum(axis=1)
    return MultiImage(n=stack.n, bit_depth=s, pixels=values)


# ---------------------------------------------------------------------------
# PGM and manifest I/O


def read_pgm(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """Read a binary (P5) PGM file; returns (array, maxval)."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header") from exc
    if not 0 < maxval < 65536:
        raise ValueError(f"{path}: maxval {maxval} out of range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    raw = data[pos : pos + count * dtype.itemsize]
    if len(raw) != count * dtype.itemsize:
        raise ValueError(f"{path}: truncated pixel data")
    arr = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    if arr.size and int(arr.max()) > maxval:
        raise ValueError(f"{path}: sample exceeds declared maxval")
    return arr.astype(_dtype_for_depth(maxval.bit_length())), maxval


def write_pgm(path: str | os.PathLike, pixels: np.ndarray, maxval: int) -> None:
    """Write a binary (P5) PGM file; 2-byte big-endian samples above 255."""
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval {maxval} out of range for PGM")
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValueError("PGM payload must be two-dimensional")
    if pixels.size and int(pixels.max()) > maxval:
        raise ValueError("sample exceeds maxval")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n{maxval}\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels.astype(dtype).tobytes())


def load_multi(manifest_path: str | os.PathLike, bit_depth: int | None = None) -> MultiImage:
    """Load an image set named by a manifest file.

    The manifest holds one relative PGM path per line; blank lines and lines
    starting with '#' are ignored.  All images must share one power-of-two
    side and one maxval of the form 2**L - 1.
    """
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    paths = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        paths.append(os.path.join(base, line))
    if not paths:
        raise ValueError(f"{manifest_path}: no image entries")
    arrays = []
    maxvals = set()
    for p in paths:
        arr, maxval = read_pgm(p)
        arrays.append(arr)
        maxvals.add(maxval)
    if len(maxvals) != 1:
        raise ValueError(f"{manifest_path}: images disagree on maxval")
    maxval = maxvals.pop()
    depth = maxval.bit_length()
    if maxval != (1 << depth) - 1:
        raise ValueError(f"{manifest_path}: maxval {maxval} is not 2**L - 1")
    if bit_depth is not None and bit_depth != depth:
        raise ValueError(f"{manifest_path}: expected {bit_depth}-bit images")
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"{manifest_path}: images disagree on size")
    h, w = shapes.pop()
    if h != w or h & (h - 1):
        raise ValueError(f"{manifest_path}: images must be square with power-of-two side")
    n = h.bit_length() - 1
    return MultiImage(n=n, bit_depth=depth, pixels=np.stack(arrays))


def save_multi(images: MultiImage, manifest_path: str | os.PathLike) -> list[str]:
    """Write one PGM per image plus a manifest next to them.

    Files are named after the manifest stem; returns the relative paths
    recorded in the manifest.
    """
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path) or "."
    stem = os.path.splitext(os.path.basename(manifest_path))[0]
    maxval = (1 << images.bit_depth) - 1
    if maxval >= 65536:
        raise ValueError("bit depth too large for PGM output")
    names = []
    for m in range(images.m_prime):
        name = f"{stem}_{m:02d}.pgm"
        write_pgm(os.path.join(base, name), images.pixels[m], maxval)
        names.append(name)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(f"# {images.m_prime} images, {images.side}x{images.side}, maxval {maxval}\n")
        for name in names:
            fh.write(name + "\n")
    return names
