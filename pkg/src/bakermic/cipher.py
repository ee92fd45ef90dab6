"""Key handling, key schedule, the two scrambling stages, and diffusion.

Encryption decomposes the image set into the padded bit tensor, scrambles
the (image, plane) fibre of every pixel with a keyed baker map, scrambles
the pixel lattice of every (image, plane) slice with a second keyed baker
map, XORs a chaotic keystream over every bit site, and recombines all tensor
slots into 2**k ciphertext images.  Each stage is exactly invertible given
the key file, which carries the chaotic parameters, the schedule generator
seeds, and the exact plaintext statistics the keystream was seeded from.
"""

from __future__ import annotations

import dataclasses
import struct
from dataclasses import dataclass

import numpy as np

from . import baker
from .brqmi import BitPlaneStack, MultiImage, decompose, recompose, recompose_all
from .chaos import (
    HenonSineParams,
    RankPerms,
    SeedMaterial,
    derive_seed,
    distinct_sequence,
    henon_sine_step,
    keystream_grid,
    rank_perms,
    seed_from_sums,
)

KEY_VERSION = 1


@dataclass(frozen=True)
class ImageParams:
    """Per-image chaotic parameters: lambda pair plus the 10**q scale."""

    lambda1: float
    lambda2: float
    q: int


@dataclass(frozen=True)
class ScheduleParams:
    """Generator parameters of one schedule stage: lambda pair and seed."""

    lambda1: float
    lambda2: float
    x0: float
    y0: float


@dataclass(frozen=True)
class SecretKey:
    """Complete key material; everything decryption needs besides ciphertext.

    intensity_sum and bit_count are filled in by encryption (they are exact
    statistics of the plaintext) and must travel with the key.
    """

    n: int
    k: int
    m_prime: int
    bit_depth: int
    image_params: tuple[ImageParams, ...]
    stage_a: ScheduleParams
    stage_b: ScheduleParams
    r_max1: int
    r_max2: int
    intensity_sum: int | None = None
    bit_count: int | None = None

    def validate(self) -> None:
        if self.n < 0 or self.k < 0:
            raise ValueError("lattice exponents must be nonnegative")
        expected_k = max(self.m_prime - 1, self.bit_depth - 1).bit_length()
        if self.k != expected_k:
            raise ValueError(
                f"stack exponent k={self.k} inconsistent with "
                f"{self.m_prime} images of depth {self.bit_depth}"
            )
        if len(self.image_params) != self.m_prime:
            raise ValueError("one parameter triple per image is required")
        for ip in self.image_params:
            if not (ip.lambda1 > 1 and ip.lambda2 > 1):
                raise ValueError("image lambda factors must exceed 1")
            if not 4 <= ip.q <= 15:
                raise ValueError("q must be in [4, 15]")
        for sp in (self.stage_a, self.stage_b):
            if not (sp.lambda1 > 1 and sp.lambda2 > 1):
                raise ValueError("schedule lambda factors must exceed 1")
            if not (-1 <= sp.x0 <= 1 and -1 <= sp.y0 <= 1):
                raise ValueError("schedule seeds must lie in [-1, 1]")
        if self.r_max1 < 1 or self.r_max2 < 1:
            raise ValueError("round caps must be at least 1")
        if (self.intensity_sum is None) != (self.bit_count is None):
            raise ValueError("intensity_sum and bit_count must be set together")


def make_key(
    n: int,
    m_prime: int,
    bit_depth: int,
    rng,
    q: int = 5,
    r_max1: int | None = None,
    r_max2: int | None = None,
    lambda1: float | None = None,
    lambda2: float | None = None,
) -> SecretKey:
    """Draw a fresh key for the given geometry.

    rng is any object with a random() method (random.Random or SystemRandom).
    Lambda factors default to uniform draws from [2, 8]; passing lambda1 and
    lambda2 pins them for every image.
    """
    k = max(m_prime - 1, bit_depth - 1).bit_length()

    def lam(fixed):
        return fixed if fixed is not None else 2.0 + 6.0 * rng.random()

    def unit():
        return 2.0 * rng.random() - 1.0

    images = tuple(
        ImageParams(lambda1=lam(lambda1), lambda2=lam(lambda2), q=q)
        for _ in range(m_prime)
    )
    stages = tuple(
        ScheduleParams(lambda1=lam(None), lambda2=lam(None), x0=unit(), y0=unit())
        for _ in range(2)
    )
    key = SecretKey(
        n=n,
        k=k,
        m_prime=m_prime,
        bit_depth=bit_depth,
        image_params=images,
        stage_a=stages[0],
        stage_b=stages[1],
        r_max1=r_max1 if r_max1 is not None else max(1, 2 * k),
        r_max2=r_max2 if r_max2 is not None else max(1, 2 * n),
    )
    key.validate()
    return key


# ---------------------------------------------------------------------------
# Key file serialisation


def float_to_hex(v: float) -> str:
    """16 hex digits of the IEEE-754 binary64 bit pattern (bit-exact)."""
    return format(struct.unpack("<Q", struct.pack("<d", v))[0], "016x")


def hex_to_float(text: str) -> float:
    if len(text) != 16:
        raise ValueError(f"expected 16 hex digits, got {text!r}")
    return struct.unpack("<d", struct.pack("<Q", int(text, 16)))[0]


def write_key(key: SecretKey, path) -> None:
    """Write the key file: UTF-8 'field = value' lines, reals as hex bits."""
    key.validate()
    lines = [
        f"version = {KEY_VERSION}",
        f"n = {key.n}",
        f"k = {key.k}",
        f"images = {key.m_prime}",
        f"depth = {key.bit_depth}",
    ]
    for m, ip in enumerate(key.image_params):
        lines.append(f"lambda1_{m} = {float_to_hex(ip.lambda1)}")
        lines.append(f"lambda2_{m} = {float_to_hex(ip.lambda2)}")
        lines.append(f"q_{m} = {ip.q}")
    for name, sp in (("stage_a", key.stage_a), ("stage_b", key.stage_b)):
        lines.append(f"{name}_lambda1 = {float_to_hex(sp.lambda1)}")
        lines.append(f"{name}_lambda2 = {float_to_hex(sp.lambda2)}")
        lines.append(f"{name}_x0 = {float_to_hex(sp.x0)}")
        lines.append(f"{name}_y0 = {float_to_hex(sp.y0)}")
    lines.append(f"r_max1 = {key.r_max1}")
    lines.append(f"r_max2 = {key.r_max2}")
    if key.intensity_sum is not None:
        lines.append(f"intensity_sum = {key.intensity_sum}")
        lines.append(f"bit_count = {key.bit_count}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_key(path) -> SecretKey:
    """Parse a key file written by write_key; strict about fields."""
    fields: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'field = value'")
            name, _, value = line.partition("=")
            name = name.strip()
            if name in fields:
                raise ValueError(f"{path}:{lineno}: duplicate field {name!r}")
            fields[name] = value.strip()

    def take_int(name):
        if name not in fields:
            raise ValueError(f"{path}: missing field {name!r}")
        return int(fields.pop(name))

    def take_float(name):
        if name not in fields:
            raise ValueError(f"{path}: missing field {name!r}")
        return hex_to_float(fields.pop(name))

    version = take_int("version")
    if version != KEY_VERSION:
        raise ValueError(f"{path}: unsupported key version {version}")
    n = take_int("n")
    k = take_int("k")
    m_prime = take_int("images")
    depth = take_int("depth")
    images = tuple(
        ImageParams(
            lambda1=take_float(f"lambda1_{m}"),
            lambda2=take_float(f"lambda2_{m}"),
            q=take_int(f"q_{m}"),
        )
        for m in range(m_prime)
    )
    stages = []
    for name in ("stage_a", "stage_b"):
        stages.append(
            ScheduleParams(
                lambda1=take_float(f"{name}_lambda1"),
                lambda2=take_float(f"{name}_lambda2"),
                x0=take_float(f"{name}_x0"),
                y0=take_float(f"{name}_y0"),
            )
        )
    r_max1 = take_int("r_max1")
    r_max2 = take_int("r_max2")
    intensity = bits = None
    if "intensity_sum" in fields or "bit_count" in fields:
        intensity = take_int("intensity_sum")
        bits = take_int("bit_count")
    if fields:
        raise ValueError(f"{path}: unknown fields {sorted(fields)}")
    key = SecretKey(
        n=n,
        k=k,
        m_prime=m_prime,
        bit_depth=depth,
        image_params=images,
        stage_a=stages[0],
        stage_b=stages[1],
        r_max1=r_max1,
        r_max2=r_max2,
        intensity_sum=intensity,
        bit_count=bits,
    )
    key.validate()
    return key


# ---------------------------------------------------------------------------
# Key schedule


@dataclass
class KeySchedule:
    """Per-site baker selections for both scrambling stages.

    stage1 has one (partition rank, rounds) pair per pixel in row-major
    order; its partitions live on the 2**k (image, plane) lattice.  stage2
    has one pair per (image, plane) slot in row-major order; its partitions
    live on the 2**n pixel lattice.
    """

    n: int
    k: int
    stage1: list[tuple[int, int]]
    stage2: list[tuple[int, int]]


def _draws(params: ScheduleParams, modulus: int, r_max: int, count: int):
    """Raw generator draws: (value mod modulus, rounds in [1, r_max]) pairs.

    Accumulates 64 guard bits beyond the modulus width per draw so the
    reduction bias is far below observability.
    """
    p = HenonSineParams(params.lambda1, params.lambda2)
    x, y = params.x0, params.y0
    for _ in range(100):
        x, y = henon_sine_step(x, y, p)
    words_needed = (modulus.bit_length() + 64 + 31) // 32
    out = []
    for _ in range(count):
        acc = 0
        for _ in range(words_needed):
            x, y = henon_sine_step(x, y, p)
            w = int((x + 1.0) * 0.5 * 4294967296.0)
            if w > 0xFFFFFFFF:
                w = 0xFFFFFFFF
            acc = (acc << 32) | w
        x, y = henon_sine_step(x, y, p)
        w = int((x + 1.0) * 0.5 * 4294967296.0)
        if w > 0xFFFFFFFF:
            w = 0xFFFFFFFF
        out.append((acc % modulus, w % r_max + 1))
    return out


def derive_schedule(key: SecretKey) -> KeySchedule:
    """Expand the key into per-site baker selections.

    Stage A drives the per-pixel fibre maps, stage B the per-slice pixel
    maps; both consume one continuous generator stream in row-major site
    order, so the schedule is reproducible from the key alone.
    """
    key.validate()
    stage1 = _draws(
        key.stage_a,
        baker.count_partitions(key.k),
        key.r_max1,
        1 << (2 * key.n),
    )
    stage2 = _draws(
        key.stage_b,
        baker.count_partitions(key.n),
        key.r_max2,
        1 << (2 * key.k),
    )
    return KeySchedule(n=key.n, k=key.k, stage1=stage1, stage2=stage2)


# ---------------------------------------------------------------------------
# Scrambling stages


def _iterated_table(n: int, rank: int, rounds: int, cache: dict) -> np.ndarray:
    """Forward permutation table of unrank(n, rank) applied `rounds` times."""
    table = cache.get((rank, rounds))
    if table is None:
        base = cache.get(rank)
        if base is None:
            base = baker.permutation_table(baker.unrank(n, rank))
            cache[rank] = base
        table = np.arange(base.size, dtype=np.int64)
        for _ in range(rounds):
            table = base[table]
        cache[(rank, rounds)] = table
    return table


def scramble_images_planes(stack: BitPlaneStack, sched: KeySchedule) -> BitPlaneStack:
    """Stage 1: permute each pixel's (image, plane) fibre with its own map.

    Pixels sharing a (rank, rounds) selection are moved in one vectorised
    gather.  A rounds value of 0 leaves the fibre untouched (test hook).
    """
    s = stack.stack_side
    side = 1 << stack.n
    flat = stack.bits.reshape(s * s, side * side)
    out = np.empty_like(flat)
    groups: dict[tuple[int, int], list[int]] = {}
    for p, sel in enumerate(sched.stage1):
        groups.setdefault(sel, []).append(p)
    cache: dict = {}
    for (rank, rounds), cols in groups.items():
        cols = np.asarray(cols, dtype=np.int64)
        if rounds == 0:
            out[:, cols] = flat[:, cols]
            continue
        fwd = _iterated_table(stack.k, rank, rounds, cache)
        inv = np.empty_like(fwd)
        inv[fwd] = np.arange(fwd.size, dtype=np.int64)
        out[:, cols] = flat[np.ix_(inv, cols)]
    return dataclasses.replace(stack, bits=out.reshape(stack.bits.shape))


def inverse_scramble_images_planes(stack: BitPlaneStack, sched: KeySchedule) -> BitPlaneStack:
    s = stack.stack_side
    side = 1 << stack.n
    flat = stack.bits.reshape(s * s, side * side)
    out = np.empty_like(flat)
    groups: dict[tuple[int, int], list[int]] = {}
    for p, sel in enumerate(sched.stage1):
        groups.setdefault(sel, []).append(p)
    cache: dict = {}
    for (rank, rounds), cols in groups.items():
        cols = np.asarray(cols, dtype=np.int64)
        if rounds == 0:
            out[:, cols] = flat[:, cols]
            continue
        fwd = _iterated_table(stack.k, rank, rounds, cache)
        out[:, cols] = flat[np.ix_(fwd, cols)]
    return dataclasses.replace(stack, bits=out.reshape(stack.bits.shape))


def scramble_positions(stack: BitPlaneStack, sched: KeySchedule) -> BitPlaneStack:
    """Stage 2: permute the pixel lattice of each (image, plane) slice."""
    s = stack.stack_side
    side = 1 << stack.n
    flat = stack.bits.reshape(s * s, side * side)
    out = np.empty_like(flat)
    cache: dict = {}
    for c, (rank, rounds) in enumerate(sched.stage2):
        if rounds == 0:
            out[c] = flat[c]
            continue
        fwd = _iterated_table(stack.n, rank, rounds, cache)
        inv = np.empty_like(fwd)
        inv[fwd] = np.arange(fwd.size, dtype=np.int64)
        out[c] = flat[c][inv]
    return dataclasses.replace(stack, bits=out.reshape(stack.bits.shape))


def inverse_scramble_positions(stack: BitPlaneStack, sched: KeySchedule) -> BitPlaneStack:
    s = stack.stack_side
    side = 1 << stack.n
    flat = stack.bits.reshape(s * s, side * side)
    out = np.empty_like(flat)
    cache: dict = {}
    for c, (rank, rounds) in enumerate(sched.stage2):
        if rounds == 0:
            out[c] = flat[c]
            continue
        fwd = _iterated_table(stack.n, rank, rounds, cache)
        out[c] = flat[c][fwd]
    return dataclasses.replace(stack, bits=out.reshape(stack.bits.shape))


# ---------------------------------------------------------------------------
# Diffusion


def image_rank_perms(key: SecretKey, seed: SeedMaterial, m: int) -> RankPerms:
    """Rank permutations for stack image m; padded images reuse m mod M'."""
    ip = key.image_params[m % key.m_prime]
    xs, ys = distinct_sequence(
        (seed.x0, seed.y0),
        HenonSineParams(ip.lambda1, ip.lambda2),
        count=1 << key.n,
    )
    return rank_perms(xs, ys)


def diffuse(
    stack: BitPlaneStack,
    key: SecretKey,
    seed: SeedMaterial,
    stats: dict | None = None,
) -> BitPlaneStack:
    """XOR the keystream over every bit site; self-inverse by construction.

    Every (image, plane, x, y) site is XORed exactly once with bit `plane`
    of the keystream integer at (image, x, y).  Padded images take the
    parameter triple of image m mod M', so all 2**k images get live
    keystream.  When stats is given, stats['xor_sites'] receives the number
    of sites actually touched.
    """
    s = stack.stack_side
    bits = stack.bits.copy()
    sites = 0
    perms_cache: dict[int, RankPerms] = {}
    for m in range(s):
        src = m % key.m_prime
        perms = perms_cache.get(src)
        if perms is None:
            perms = image_rank_perms(key, seed, m)
            perms_cache[src] = perms
        grid = keystream_grid(perms, key.image_params[src].q, key.k)
        for l in range(s):
            plane_key = ((grid >> np.int64(l)) & np.int64(1)).astype(np.uint8)
            bits[m, l] ^= plane_key
            sites += plane_key.size
    if stats is not None:
        stats["xor_sites"] = sites
    return dataclasses.replace(stack, bits=bits)


# ---------------------------------------------------------------------------
# Whole-pipeline entry points


def encrypt(images: MultiImage, key: SecretKey) -> tuple[MultiImage, SecretKey]:
    """Encrypt an image set.

    Returns the ciphertext (2**k images of 2**k-bit pixels) and the key
    updated with the exact plaintext statistics; the updated key must be
    stored, since decryption reseeds the keystream from it.
    """
    key.validate()
    if images.n != key.n or images.m_prime != key.m_prime or images.bit_depth != key.bit_depth:
        raise ValueError("key geometry does not match the image set")
    seed = derive_seed(images)
    key = dataclasses.replace(
        key, intensity_sum=seed.intensity_sum, bit_count=seed.bit_count
    )
    sched = derive_schedule(key)
    stack = decompose(images)
    stack = scramble_images_planes(stack, sched)
    stack = scramble_positions(stack, sched)
    stack = diffuse(stack, key, seed)
    return recompose_all(stack), key


def decrypt(cipher: MultiImage, key: SecretKey) -> tuple[MultiImage, int]:
    """Invert the pipeline; returns (images, stray_padding_bits).

    stray_padding_bits counts set bits left in padding slots after
    inversion.  Zero means clean recovery; anything else signals a wrong
    key or corrupted ciphertext, but the recovered images are still
    returned for inspection.
    """
    key.validate()
    if key.intensity_sum is None:
        raise ValueError("key carries no plaintext statistics; encrypt first")
    s = 1 << key.k
    if cipher.n != key.n or cipher.m_prime != s or cipher.bit_depth != s:
        raise ValueError("ciphertext geometry does not match the key")
    seed = seed_from_sums(
        key.intensity_sum, key.bit_count, key.m_prime, key.bit_depth, key.n
    )
    sched = derive_schedule(key)
    stack = decompose(cipher)
    stack = diffuse(stack, key, seed)
    stack = inverse_scramble_positions(stack, sched)
    stack = inverse_scramble_images_planes(stack, sched)
    stack = BitPlaneStack(
        n=key.n,
        k=key.k,
        m_prime=key.m_prime,
        bit_depth=key.bit_depth,
        bits=stack.bits,
    )
    stray = stack.padding_bit_count()
    images = recompose(stack, check_padding=False)
    return images, stray
