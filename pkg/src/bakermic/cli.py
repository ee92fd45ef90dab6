"""Command-line interface.

One binary with subcommands for key generation, encryption, decryption,
statistical analysis, partition queries, circuit synthesis/verification,
and CSV emitters for the chaotic building blocks.

Exit codes: 0 success, 1 usage error, 2 data or format error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import random
import sys

import numpy as np

from . import analysis, baker, chaos, qcircuit
from .brqmi import MultiImage, load_multi, save_multi
from .cipher import decrypt, encrypt, make_key, read_key, write_key


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_keygen(args) -> int:
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    key = make_key(
        n=args.n,
        m_prime=args.images,
        bit_depth=args.depth,
        rng=rng,
        q=args.qm,
        r_max1=args.rmax1,
        r_max2=args.rmax2,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
    )
    write_key(key, args.key)
    print(f"wrote key for {args.images} images of side {1 << args.n} to {args.key}")
    return 0


def cmd_encrypt(args) -> int:
    key = read_key(args.key)
    images = load_multi(args.inp)
    cipher, updated = encrypt(images, key)
    save_multi(cipher, args.out)
    write_key(updated, args.key)
    print(
        f"encrypted {images.m_prime} images into {cipher.m_prime} ciphertext "
        f"images; key file updated with plaintext statistics"
    )
    return 0


def cmd_decrypt(args) -> int:
    key = read_key(args.key)
    cipher = load_multi(args.inp)
    images, stray = decrypt(cipher, key)
    if stray:
        print(
            f"warning: {stray} set bits left in padding slots; "
            "wrong key or corrupted ciphertext",
            file=sys.stderr,
        )
    save_multi(images, args.out)
    print(f"recovered {images.m_prime} images to {args.out}")
    return 0


def _flip_one_bit(images: MultiImage) -> MultiImage:
    pixels = images.pixels.copy()
    pixels[0, 0, 0] ^= 1
    return MultiImage(n=images.n, bit_depth=images.bit_depth, pixels=pixels)


def _set_metrics(report: analysis.MetricsReport, images: MultiImage, seed: int) -> None:
    report.chi2 = [
        analysis.histogram_chi2(images.pixels[m], images.bit_depth)
        for m in range(images.m_prime)
    ]
    report.correlations = {
        direction: [
            analysis.adjacent_correlation(images.pixels[m], direction, seed=seed + m)
            for m in range(images.m_prime)
        ]
        for direction in analysis.DIRECTIONS
    }


def cmd_analyze(args) -> int:
    report = analysis.MetricsReport()
    if args.inp2 is not None:
        a = load_multi(args.inp)
        b = load_multi(args.inp2)
        if a.pixels.shape != b.pixels.shape or a.bit_depth != b.bit_depth:
            raise ValueError("the two image sets must share shape and depth")
        _set_metrics(report, a, args.seed)
        report.npcr, report.uaci = analysis.npcr_uaci(a.pixels, b.pixels, a.bit_depth)
        report.bit_diff = analysis.bit_difference_rate(a.pixels, b.pixels, a.bit_depth)
    else:
        if args.key is None:
            raise UsageError("analyze needs --in2 for pair mode or --key for full mode")
        key = read_key(args.key)
        plain = load_multi(args.inp)
        cipher1, key1 = encrypt(plain, key)
        cipher2, _ = encrypt(_flip_one_bit(plain), key)
        _set_metrics(report, cipher1, args.seed)
        report.npcr, report.uaci = analysis.npcr_uaci(
            cipher1.pixels, cipher2.pixels, cipher1.bit_depth
        )
        report.bit_diff = analysis.bit_difference_rate(
            cipher1.pixels, cipher2.pixels, cipher1.bit_depth
        )
        if args.block is not None:
            block = tuple(int(v) for v in args.block.split(","))
            if len(block) != 4:
                raise UsageError("--block wants x,y,width,height")
            series = analysis.occlusion_test(cipher1, key1, plain, block)
            report.psnr_series["occlusion"] = list(series)
        if args.density is not None:
            series = analysis.noise_test(
                cipher1, key1, plain, args.density, seed=args.seed
            )
            report.psnr_series[f"noise_{args.density:g}"] = list(series)
    _write_text(args.out, report.render())
    return 0


def cmd_partitions(args) -> int:
    if args.action == "count":
        print(baker.count_partitions(args.n))
    elif args.action == "unrank":
        print(baker.unrank(args.n, int(args.index)))
    elif args.action == "check":
        part = baker.parse_widths(args.widths)
        verdict = "admissible" if part.is_admissible() else "inadmissible"
        print(f"{part} (n={part.n}): {verdict}")
    elif args.action == "list":
        if args.n > 3:
            raise ValueError("list is capped at n = 3 (26 partitions); use unrank beyond that")
        for rank in range(baker.count_partitions(args.n)):
            print(baker.unrank(args.n, rank))
    return 0


def cmd_circuit_synth(args) -> int:
    part = baker.parse_widths(args.partition)
    circuit = qcircuit.synthesize(part)
    _write_text(args.out, qcircuit.emit_text(circuit, part))
    return 0


def cmd_circuit_verify(args) -> int:
    with open(args.inp, "r", encoding="utf-8") as fh:
        circuit = qcircuit.parse_text(fh.read())
    part = baker.parse_widths(args.partition)
    if qcircuit.verify(circuit, part):
        print(f"PASS: circuit matches {part} on all {1 << (2 * part.n)} states")
        return 0
    print(f"FAIL: circuit does not realise {part}")
    return 3


def cmd_appendix_henon(args) -> int:
    p = chaos.HenonSineParams(args.lambda1, args.lambda2)
    rows = chaos.emit_trajectory(p, (args.x0, args.y0), args.count)
    _write_lines(args.out, rows)
    return 0


def cmd_appendix_chebyshev(args) -> int:
    xs = np.linspace(-1.0, 1.0, args.points)
    rows = chaos.emit_chebyshev_table(args.kmax, list(xs))
    _write_lines(args.out, rows)
    return 0


# ---------------------------------------------------------------------------
# Parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bakermic", description=__doc__)
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="cap on worker threads (the current implementation is single-process)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="draw a fresh key file")
    p.add_argument("--key", required=True, help="output key file")
    p.add_argument("--n", type=int, required=True, help="images are 2**n x 2**n")
    p.add_argument("--images", type=int, required=True, help="number of images M'")
    p.add_argument("--depth", type=int, default=8, help="bit depth L (default 8)")
    p.add_argument("--seed", type=int, default=None, help="deterministic draw seed")
    p.add_argument("--qm", type=int, default=5, help="keystream scale exponent q")
    p.add_argument("--rmax1", type=int, default=None, help="stage-1 round cap")
    p.add_argument("--rmax2", type=int, default=None, help="stage-2 round cap")
    p.add_argument("--lambda1", type=float, default=None, help="pin lambda1 for all images")
    p.add_argument("--lambda2", type=float, default=None, help="pin lambda2 for all images")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt an image set")
    p.add_argument("--in", dest="inp", required=True, help="plaintext manifest")
    p.add_argument("--key", required=True, help="key file (updated in place)")
    p.add_argument("--out", required=True, help="ciphertext manifest to write")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a ciphertext set")
    p.add_argument("--in", dest="inp", required=True, help="ciphertext manifest")
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--out", required=True, help="plaintext manifest to write")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("analyze", help="statistical and robustness measurements")
    p.add_argument("--in", dest="inp", required=True, help="image set manifest")
    p.add_argument("--in2", dest="inp2", default=None, help="second set: compare directly")
    p.add_argument("--key", default=None, help="key file: run the full battery")
    p.add_argument("--out", default=None, help="report file (default stdout)")
    p.add_argument("--seed", type=int, default=0, help="sampler seed")
    p.add_argument("--block", default=None, help="occlusion block as x,y,width,height")
    p.add_argument("--density", type=float, default=None, help="salt-and-pepper density")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("partitions", help="admissible-partition queries")
    ps = p.add_subparsers(dest="action", required=True)
    q = ps.add_parser("count", help="number of admissible partitions")
    q.add_argument("n", type=int)
    q.set_defaults(func=cmd_partitions)
    q = ps.add_parser("unrank", help="partition with a given rank")
    q.add_argument("n", type=int)
    q.add_argument("index", help="rank (arbitrary precision)")
    q.set_defaults(func=cmd_partitions)
    q = ps.add_parser("check", help="report admissibility of a width list")
    q.add_argument("widths")
    q.set_defaults(func=cmd_partitions)
    q = ps.add_parser("list", help="enumerate all admissible partitions (n <= 3)")
    q.add_argument("n", type=int)
    q.set_defaults(func=cmd_partitions)

    p = sub.add_parser("circuit", help="SWAP-circuit synthesis and verification")
    ps = p.add_subparsers(dest="action", required=True)
    q = ps.add_parser("synth", help="synthesise a circuit for a partition")
    q.add_argument("partition", help="comma-separated widths, e.g. 4,2,2")
    q.add_argument("--out", default=None, help="gate list file (default stdout)")
    q.set_defaults(func=cmd_circuit_synth)
    q = ps.add_parser("verify", help="check a gate list against a partition")
    q.add_argument("--in", dest="inp", required=True, help="gate list file")
    q.add_argument("partition", help="comma-separated widths")
    q.set_defaults(func=cmd_circuit_verify)

    p = sub.add_parser("appendix", help="CSV emitters for the chaotic maps")
    ps = p.add_subparsers(dest="action", required=True)
    q = ps.add_parser("henon", help="orbit trajectory table")
    q.add_argument("--lambda1", type=float, required=True)
    q.add_argument("--lambda2", type=float, required=True)
    q.add_argument("--x0", type=float, default=0.1)
    q.add_argument("--y0", type=float, default=0.1)
    q.add_argument("--count", type=int, default=100)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_appendix_henon)
    q = ps.add_parser("chebyshev", help="polynomial value table")
    q.add_argument("--kmax", type=int, default=8)
    q.add_argument("--points", type=int, default=41)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_appendix_chebyshev)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.threads < 1:
        print("usage error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
