"""Coupled Chebyshev / Henon-sine dynamics and keystream material.

The diffusion keystream mixes two sources: a sine-wrapped Henon orbit seeded
from exact whole-set image statistics, and Chebyshev polynomials indexed by
rank permutations of that orbit.  Everything here is deterministic given the
seed values; Chebyshev evaluation goes through extended precision so that
large orders stay accurate to well below the tolerances used downstream.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .brqmi import MultiImage


@dataclass(frozen=True)
class HenonSineParams:
    """Control parameters of the sine-wrapped Henon step.

    The quadratic and shear coefficients are fixed; the lambda factors are
    key material and should exceed 1 to keep the orbit chaotic.
    """

    lambda1: float
    lambda2: float
    a: float = 1.4
    b: float = 0.3

    def validate(self) -> None:
        if not (self.lambda1 > 1 and self.lambda2 > 1):
            raise ValueError("lambda factors must exceed 1")


def henon_sine_step(x: float, y: float, p: HenonSineParams) -> tuple[float, float]:
    """One step of the sine-wrapped Henon map; output stays in [-1, 1]^2."""
    x2 = math.sin(math.pi * p.lambda1 * (1.0 - p.a * x * x + y))
    y2 = math.sin(math.pi * p.lambda2 * (p.b * x))
    return x2, y2


def chebyshev(k: int, x: float) -> float:
    """Chebyshev polynomial T_k(x) on [-1, 1] via the closed trig form.

    Evaluated at 40 working digits and rounded once, so the defining
    identity T_k(cos t) = cos(k t) survives orders up to about 10**6 at
    double precision instead of degrading by k ulps.
    """
    k = int(k)
    if k < 0:
        raise ValueError("order must be nonnegative")
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"argument {x} outside [-1, 1]")
    if k == 0:
        return 1.0
    if k == 1:
        return float(x)
    with mpmath.mp.workdps(40):
        return float(mpmath.cos(k * mpmath.acos(mpmath.mpf(x))))


# ---------------------------------------------------------------------------
# Seed material


@dataclass(frozen=True)
class SeedMaterial:
    """Whole-set statistics binding the keystream to the plaintext.

    intensity_sum and bit_count are exact integers; x0 is the normalised
    intensity and y0 chains it through a Chebyshev order equal to the total
    set-bit count, so flipping any single plaintext bit reseeds both.
    """

    intensity_sum: int
    bit_count: int
    x0: float
    y0: float


def seed_from_sums(
    intensity_sum: int, bit_count: int, m_prime: int, bit_depth: int, n: int
) -> SeedMaterial:
    """Rebuild seed values from the stored exact sums."""
    denom = m_prime * ((1 << bit_depth) - 1) * (1 << (2 * n))
    if not 0 <= intensity_sum <= denom:
        raise ValueError("intensity sum out of range for the declared geometry")
    x0 = intensity_sum / denom
    y0 = chebyshev(bit_count, x0)
    return SeedMaterial(intensity_sum=intensity_sum, bit_count=bit_count, x0=x0, y0=y0)


def derive_seed(images: MultiImage) -> SeedMaterial:
    """Exact seed statistics of an image set."""
    pix = images.pixels.astype(np.uint64)
    intensity = int(pix.sum())
    bits = 0
    for l in range(images.bit_depth):
        bits += int(((pix >> np.uint64(l)) & np.uint64(1)).sum())
    return seed_from_sums(intensity, bits, images.m_prime, images.bit_depth, images.n)


# ---------------------------------------------------------------------------
# Distinct orbit values and rank permutations


def distinct_sequence(
    seed: tuple[float, float],
    p: HenonSineParams,
    count: int,
    max_iterations: int = 10_000_000,
) -> tuple[list[float], list[float]]:
    """Collect the first `count` distinct orbit values on each coordinate.

    Runs a 100-step burn-in, then records x and y values independently in
    order of first appearance (value equality, so ranks are well defined).
    Raises RuntimeError if the orbit fails to produce enough distinct values
    within the iteration budget, which flags a degenerate parameter choice.
    """
    if count < 1:
        raise ValueError("count must be positive")
    x, y = seed
    for _ in range(100):
        x, y = henon_sine_step(x, y, p)
    xs: list[float] = []
    ys: list[float] = []
    seen_x: set[float] = set()
    seen_y: set[float] = set()
    for _ in range(max_iterations):
        x, y = henon_sine_step(x, y, p)
        if len(xs) < count and x not in seen_x:
            seen_x.add(x)
            xs.append(x)
        if len(ys) < count and y not in seen_y:
            seen_y.add(y)
            ys.append(y)
        if len(xs) == count and len(ys) == count:
            return xs, ys
    raise RuntimeError(
        f"orbit produced fewer than {count} distinct values within "
        f"{max_iterations} iterations; parameters look degenerate"
    )


@dataclass(frozen=True)
class RankPerms:
    """Orbit samples plus their 1-based rank permutations.

    s[i] is the rank of xs[i] among all xs (1 = smallest); t ranks ys.
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    s: tuple[int, ...]
    t: tuple[int, ...]


def _ranks(values: list[float]) -> tuple[int, ...]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    for r, idx in enumerate(order, start=1):
        ranks[idx] = r
    return tuple(ranks)


def rank_perms(xs: list[float], ys: list[float]) -> RankPerms:
    """Rank the two sample lists; each rank vector is a permutation."""
    if len(xs) != len(ys):
        raise ValueError("sample lists must have equal length")
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise ValueError("sample values must be distinct")
    return RankPerms(xs=tuple(xs), ys=tuple(ys), s=_ranks(xs), t=_ranks(ys))


# ---------------------------------------------------------------------------
# Keystream integers


def key_int(i: int, j: int, perms: RankPerms, q: int, k: int) -> int:
    """Keystream integer for pixel (i, j), both 1-based, reduced mod 2**(2**k).

    Couples the coordinates crosswise: the x-rank at i picks a Chebyshev
    order applied to a y sample, and vice versa.  The product is scaled by
    10**q and floored before Euclidean reduction, so the result is always
    in [0, 2**(2**k)).
    """
    side = len(perms.s)
    if not (1 <= i <= side and 1 <= j <= side):
        raise ValueError("pixel coordinates are 1-based and bounded by the sample count")
    a = chebyshev(perms.s[i - 1], perms.ys[side - i])
    b = chebyshev(perms.t[j - 1], perms.xs[side - j])
    v = math.floor((a * b) * float(10**q))
    return v % (1 << (1 << k))


def key_bits(i: int, j: int, perms: RankPerms, q: int, k: int) -> np.ndarray:
    """Plane-indexed bit vector of the keystream integer, length 2**k."""
    v = key_int(i, j, perms, q, k)
    return np.array([(v >> l) & 1 for l in range(1 << k)], dtype=np.uint8)


def keystream_grid(perms: RankPerms, q: int, k: int) -> np.ndarray:
    """All keystream integers of one image as a (side, side) array.

    Matches key_int entrywise (same float evaluation order) but computes the
    Chebyshev factors once per row/column instead of once per pixel.
    """
    side = len(perms.s)
    width = 1 << k
    if width > 62:
        raise ValueError("plane count too large for the vectorised keystream")
    a = np.array(
        [chebyshev(perms.s[i], perms.ys[side - 1 - i]) for i in range(side)]
    )
    b = np.array(
        [chebyshev(perms.t[j], perms.xs[side - 1 - j]) for j in range(side)]
    )
    v = np.floor(np.outer(a, b) * float(10**q)).astype(np.int64)
    return v % np.int64(1 << width)


# ---------------------------------------------------------------------------
# Lyapunov estimation


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    skipped: int  # orbit points with zero derivative, excluded from the mean


def lyapunov_estimate(
    f, dfdx, x0: float, iterations: int, burn_in: int = 100
) -> LyapunovEstimate:
    """Largest Lyapunov exponent of a 1-D map by orbit-averaged log |f'|."""
    if iterations < 1:
        raise ValueError("iterations must be positive")
    x = x0
    for _ in range(burn_in):
        x = f(x)
    total = 0.0
    used = 0
    skipped = 0
    for _ in range(iterations):
        d = dfdx(x)
        if d == 0.0:
            skipped += 1
        else:
            total += math.log(abs(d))
            used += 1
        x = f(x)
    if used == 0:
        raise ValueError("derivative vanished on the whole sampled orbit")
    return LyapunovEstimate(value=total / used, skipped=skipped)


def henon_sine_lyapunov(
    p: HenonSineParams,
    seed: tuple[float, float] = (0.1, 0.1),
    iterations: int = 20000,
    burn_in: int = 100,
) -> float:
    """Largest Lyapunov exponent of the 2-D step by tangent-vector growth."""
    x, y = seed
    for _ in range(burn_in):
        x, y = henon_sine_step(x, y, p)
    vx, vy = 1.0, 0.0
    total = 0.0
    for _ in range(iterations):
        u = 1.0 - p.a * x * x + y
        c1 = math.cos(math.pi * p.lambda1 * u) * math.pi * p.lambda1
        c2 = math.cos(math.pi * p.lambda2 * (p.b * x)) * math.pi * p.lambda2
        jvx = c1 * (-2.0 * p.a * x) * vx + c1 * vy
        jvy = c2 * p.b * vx
        norm = math.hypot(jvx, jvy)
        if norm == 0.0:
            # tangent collapsed; restart the direction without counting growth
            vx, vy = 1.0, 0.0
            x, y = henon_sine_step(x, y, p)
            continue
        total += math.log(norm)
        vx, vy = jvx / norm, jvy / norm
        x, y = henon_sine_step(x, y, p)
    return total / iterations


# ---------------------------------------------------------------------------
# CSV emitters


def emit_trajectory(
    p: HenonSineParams, seed: tuple[float, float], count: int
) -> list[str]:
    """CSV rows of the orbit; the first data row is the seed itself."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "x", "y"])
    x, y = seed
    for step in range(count):
        writer.writerow([step, repr(x), repr(y)])
        x, y = henon_sine_step(x, y, p)
    return buf.getvalue().splitlines()


def emit_chebyshev_table(k_max: int, xs: list[float]) -> list[str]:
    """CSV rows tabulating T_0..T_k_max over the given sample points."""
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x"] + [f"T{k}" for k in range(k_max + 1)])
    for x in xs:
        writer.writerow([repr(float(x))] + [repr(chebyshev(k, x)) for k in range(k_max + 1)])
    return buf.getvalue().splitlines()
