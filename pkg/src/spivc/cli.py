"""Command-line interface: ``spivc <subcommand> ...``.

Every failure exits non-zero with one line on stderr of the form
``spivc-error[<stage>]: <message>``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import pnm
from .imaging import NoiseModel, add_noise, generate_patterns, measure_combined
from .pipeline import RunManifest, StageError, dump_report, run_pipeline
from .qr import QRDecodeError, qr_decode, qr_decode_gray, qr_encode
from .reconstruct import SolverConfig, dot_accuracy, f1_score, psnr, reconstruct_correlation, reconstruct_lsq, solve_tv
from .vc_opaque import encode_shares, extract_secret_from_overlay, rescale_overlay
from .vc_patterns import encode_pattern_shares, reveal_secret_from_patterns, reveal_secret_from_reconstruction

EXIT_ERROR = 2
EXIT_THRESHOLD = 1


class CliError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


class _Parser(argparse.ArgumentParser):
    """Usage errors follow the one-line diagnostic format too."""

    def error(self, message):
        self.exit(EXIT_ERROR, f"spivc-error[usage]: {self.prog}: {message}\n")


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def load_share_manifest(path):
    """Regenerate a pattern share pair from its JSON manifest."""
    with open(path) as f:
        d = json.load(f)
    if "secret" in d:
        secret_path = d["secret"]
        if not os.path.isabs(secret_path):
            secret_path = os.path.join(os.path.dirname(os.path.abspath(path)), secret_path)
        secret = pnm.read_pbm(secret_path)
    else:
        secret = np.array([[int(c) for c in row] for row in d["secret_rows"]], dtype=np.uint8)
    return encode_pattern_shares(d["width"], d["height"], d["count"], secret, d["base_seed"], d["orient_seed"])


def patterns_from_descriptor(desc: dict):
    if desc.get("kind") == "random":
        return generate_patterns(desc["width"], desc["height"], desc["count"], desc["seed"])
    if desc.get("kind") == "share":
        secret = np.array([[int(c) for c in row] for row in desc["secret_rows"]], dtype=np.uint8)
        pair = encode_pattern_shares(desc["width"], desc["height"], desc["count"], secret,
                                     desc["base_seed"], desc["orient_seed"])
        return pair.seq_a if desc.get("which", "A") == "A" else pair.seq_b
    raise CliError("patterns", f"cannot regenerate patterns of kind {desc.get('kind')!r}")


def _patterns(args, width: int, height: int, meta: dict | None = None):
    if getattr(args, "share_manifest", None):
        pair = load_share_manifest(args.share_manifest)
        return pair.seq_a if args.which == "A" else pair.seq_b
    if args.n is not None:
        return generate_patterns(width, height, args.n, args.seed)
    if meta and meta.get("patterns"):
        return patterns_from_descriptor(meta["patterns"][0])
    raise CliError("patterns", "give --n/--seed or --share-manifest")


def cmd_gen_qr(args):
    try:
        sym = qr_encode(args.text, args.version, args.ec, args.mask)
    except ValueError as exc:
        raise CliError("gen-qr", str(exc)) from None
    pnm.write_pbm(args.out, sym.matrix)
    print(f"wrote {args.out}: version {sym.version}-{sym.ec_level}, mask {sym.mask_id}, {sym.size}x{sym.size}")


def cmd_encode_shares(args):
    base = pnm.read_pbm(args.base)
    secret = pnm.read_pbm(args.secret)
    try:
        pair = encode_shares(base, secret, args.seed, args.assignment)
    except ValueError as exc:
        raise CliError("encode-shares", str(exc)) from None
    pnm.write_pbm(args.out1, pair.key1)
    pnm.write_pbm(args.out2, pair.key2)
    manifest = args.manifest or os.path.splitext(args.out1)[0] + ".shares.json"
    with open(manifest, "w") as f:
        json.dump({"seed": args.seed, "assignment": args.assignment, "secret": args.secret,
                   "base": args.base, "key1": args.out1, "key2": args.out2}, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {args.out1}, {args.out2}, {manifest}")


def cmd_encode_pattern_shares(args):
    secret = pnm.read_pbm(args.secret)
    h, w = secret.shape
    try:
        pair = encode_pattern_shares(w, h, args.n, secret, args.base_seed, args.orient_seed)
    except ValueError as exc:
        raise CliError("encode-pattern-shares", str(exc)) from None
    rel = os.path.relpath(os.path.abspath(args.secret), os.path.dirname(os.path.abspath(args.out)))
    with open(args.out, "w") as f:
        json.dump(pair.manifest(rel), f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {args.out}")


def cmd_gen_patterns(args):
    if args.share_manifest:
        pair = load_share_manifest(args.share_manifest)
        seq = pair.seq_a if args.which == "A" else pair.seq_b
    else:
        if args.n is None:
            raise CliError("gen-patterns", "give --n or --share-manifest")
        seq = generate_patterns(args.width, args.height, args.n, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    count = seq.count if args.first is None else min(args.first, seq.count)
    for i in range(count):
        pnm.write_pbm(os.path.join(args.out_dir, f"pattern_{i:05d}.pbm"), seq[i])
    print(f"wrote {count} patterns to {args.out_dir}")


def cmd_measure(args):
    objects = [pnm.read_image(p) for p in args.objects]
    h, w = objects[0].shape
    if args.share_manifest:
        pair = load_share_manifest(args.share_manifest)
        if len(objects) == 1:
            objects = objects * 2
        if len(objects) != 2:
            raise CliError("measure", "pattern shares illuminate exactly two objects")
        seqs, scheme = [pair.seq_a, pair.seq_b], "pattern-share"
    else:
        if args.n is None:
            raise CliError("measure", "give --n/--seed or --share-manifest")
        seq = generate_patterns(w, h, args.n, args.seed)
        seqs = [seq] * len(objects)
        scheme = "plain-spi" if len(objects) == 1 else "combined"
    try:
        series = measure_combined(objects, seqs, scheme=scheme)
        series = add_noise(series, NoiseModel("additive-gaussian" if args.noise_sigma else "none",
                                              args.noise_sigma, args.noise_seed))
    except ValueError as exc:
        raise CliError("measure", str(exc)) from None
    pnm.write_series(args.out, series)
    print(f"wrote {args.out}: {len(series)} measurements")


def cmd_add_noise(args):
    series = pnm.read_series(args.series)
    try:
        out = add_noise(series, NoiseModel("additive-gaussian", args.noise_sigma, args.noise_seed))
    except ValueError as exc:
        raise CliError("add-noise", str(exc)) from None
    pnm.write_series(args.out, out)
    print(f"wrote {args.out}")


def cmd_reconstruct(args):
    series = pnm.read_series(args.series)
    dims = series.meta.get("objects", [[None, None]])[0]
    width = args.width or dims[0]
    height = args.height or dims[1]
    if not width or not height:
        raise CliError("reconstruct", "image size unknown; pass --width/--height")
    patterns = _patterns(args, width, height, series.meta)
    try:
        if args.method == "correlation":
            img = reconstruct_correlation(series, patterns)
        elif args.method == "least-squares":
            img = reconstruct_lsq(series, patterns)
        else:
            cfg = SolverConfig("tv", args.lam, args.max_iters, nonneg=not args.allow_negative, tol=args.tol)
            res = solve_tv(series, patterns, cfg)
            img = res.image
            if args.log:
                with open(args.log, "w") as f:
                    f.write("\n".join(res.log_lines()) + "\n")
    except (ValueError, FloatingPointError) as exc:
        raise CliError("reconstruct", str(exc)) from None
    pnm.write_image(args.out, np.maximum(img, 0.0))
    print(f"wrote {args.out} and {pnm.sidecar_path(args.out)}")


def cmd_reveal(args):
    try:
        if args.mode == "overlay":
            bits = extract_secret_from_overlay(rescale_overlay(pnm.read_image(args.inputs[0])))
        elif args.mode == "patterns":
            if not args.share_manifest:
                raise CliError("reveal", "--mode patterns needs --share-manifest")
            bits = reveal_secret_from_patterns(load_share_manifest(args.share_manifest))
        else:
            comb = pnm.read_image(args.inputs[0])
            single = pnm.read_image(args.inputs[1]) if len(args.inputs) > 1 else None
            bits = reveal_secret_from_reconstruction(comb, single)
    except (ValueError, IndexError) as exc:
        raise CliError("reveal", str(exc)) from None
    pnm.write_pbm(args.out, bits)
    print(f"wrote {args.out}: {int(bits.sum())} secret pixels")


def cmd_decode_qr(args):
    try:
        with open(args.input, "rb") as f:
            magic = f.read(2)
        if magic in (b"P1", b"P4"):
            res = qr_decode(pnm.read_pbm(args.input))
        else:
            res = qr_decode_gray(pnm.read_image(args.input), args.threshold)
    except (QRDecodeError, ValueError) as exc:
        raise CliError("decode-qr", str(exc)) from None
    _print_json({"message": res.text, "corrected_errors": res.corrected_errors,
                 "version": res.version, "ec_level": res.ec_level, "mask_id": res.mask_id})


def cmd_metrics(args):
    try:
        if args.kind == "psnr":
            value = psnr(pnm.read_image(args.a), pnm.read_image(args.b))
        else:
            a, b = pnm.read_pbm(args.a), pnm.read_pbm(args.b)
            value = dot_accuracy(a, b) if args.kind == "dots" else f1_score(a, b)
    except ValueError as exc:
        raise CliError("metrics", str(exc)) from None
    _print_json({args.kind: "inf" if value == float("inf") else value})


def cmd_pipeline(args):
    try:
        manifest = RunManifest.load(args.manifest)
    except (ValueError, TypeError, OSError) as exc:
        raise CliError("manifest", str(exc)) from None
    try:
        report = run_pipeline(manifest, os.path.dirname(os.path.abspath(args.manifest)))
    except StageError as exc:
        raise CliError(exc.stage, str(exc)) from None
    text = dump_report(report)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else EXIT_THRESHOLD


def _add_pattern_flags(p, share=True):
    p.add_argument("--seed", type=int, default=0, help="pattern seed (64-bit)")
    p.add_argument("--n", type=int, default=None, help="number of patterns")
    if share:
        p.add_argument("--share-manifest", help="use pattern shares from this manifest instead")
        p.add_argument("--which", choices=("A", "B"), default="A", help="share sequence to use")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spivc", description="Visual cryptography with single-pixel imaging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-qr", help="encode text as a QR symbol (PBM)")
    p.add_argument("text")
    p.add_argument("--version", type=int, default=4)
    p.add_argument("--ec", choices=("L", "M", "Q", "H"), default="H")
    p.add_argument("--mask", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_qr)

    p = sub.add_parser("encode-shares", help="split a secret into two opaque visual keys")
    p.add_argument("--base", required=True)
    p.add_argument("--secret", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--assignment", choices=("random", "balanced"), default="random")
    p.add_argument("--out1", required=True)
    p.add_argument("--out2", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_encode_shares)

    p = sub.add_parser("encode-pattern-shares", help="hide a secret in two pattern sequences")
    p.add_argument("--secret", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--orient-seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode_pattern_shares)

    p = sub.add_parser("gen-patterns", help="write illumination patterns as PBM files")
    p.add_argument("--width", type=int, default=33)
    p.add_argument("--height", type=int, default=33)
    _add_pattern_flags(p)
    p.add_argument("--first", type=int, default=None, help="only write the first K patterns")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen_patterns)

    p = sub.add_parser("measure", help="simulate bucket-detector measurements")
    p.add_argument("objects", nargs="+", help="object images (PGM/PBM); several are summed by one detector")
    _add_pattern_flags(p)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("add-noise", help="add Gaussian detector noise to a series")
    p.add_argument("series")
    p.add_argument("--noise-sigma", type=float, required=True)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_add_noise)

    p = sub.add_parser("reconstruct", help="reconstruct an image from a series")
    p.add_argument("series")
    _add_pattern_flags(p)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--method", choices=("correlation", "least-squares", "tv"), default="tv")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--allow-negative", action="store_true")
    p.add_argument("--log", help="write the TV iteration log (JSON lines)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("reveal", help="recover a secret bitmap")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--mode", choices=("overlay", "patterns", "reconstruction"), required=True)
    p.add_argument("--share-manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("decode-qr", help="decode a module-aligned QR image")
    p.add_argument("input")
    p.add_argument("--threshold", choices=("otsu", "midpoint"), default="otsu")
    p.set_defaults(func=cmd_decode_qr)

    p = sub.add_parser("metrics", help="compare two images or bitmaps")
    p.add_argument("a")
    p.add_argument("b", help="reference")
    p.add_argument("--kind", choices=("psnr", "dots", "f1"), default="psnr")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("pipeline", help="run an end-to-end manifest")
    p.add_argument("manifest")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except CliError as exc:
        print(f"spivc-error[{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, KeyError) as exc:
        print(f"spivc-error[{args.command}]: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
