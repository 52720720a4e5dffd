"""``copymove`` command line: lbp, detect, discriminate, synth, eval.

Exit status: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import figures
from .detector import DetectorParams, detect
from .discriminator import A_FORGED, B_FORGED, DiscriminatorConfig, discriminate_pair, pair_histograms
from .errors import CopyMoveError, DimensionMismatch
from .evaluation import MODES, EvalConfig, evaluate, ingest
from .lbp import LbpConfig, compute_lbp, lbp_to_gray
from .raster import BinaryMask, decode_gray, decode_mask, encode_image, encode_mask, encode_overlay
from .regions import boundary_band, connected_components, select_pair
from .synth import Blend, SpecDistribution, corpus, default_bases, write_corpus

EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _radii(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}")
    if not vals or any(r < 1 for r in vals):
        raise argparse.ArgumentTypeError("radii must be >= 1")
    return vals


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _detector_params(args) -> DetectorParams:
    return DetectorParams(block_size=args.block_size, zigzag_count=args.zigzag_count, quant=args.quant,
                          neighbor_window=args.neighbor_window, min_support=args.min_support,
                          var_min=args.var_min)


def _disc_config(args) -> DiscriminatorConfig:
    return DiscriminatorConfig(radii=args.radii, neighbors=args.neighbors, band_width=args.band_width)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CopyMoveError(f"cannot read {path}: {exc.strerror}") from exc


# -- subcommands ---------------------------------------------------------------

def cmd_lbp(args) -> int:
    img = decode_gray(_read(args.image))
    lbp = compute_lbp(img, LbpConfig(args.neighbors, args.radius))
    hist = np.bincount(lbp.codes[lbp.valid].astype(np.int64), minlength=lbp.config.n_codes)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_bytes(encode_image(lbp_to_gray(lbp)))
    summary = {"width": img.width, "height": img.height, "P": args.neighbors, "R": args.radius,
               "margin": lbp.margin, "valid_pixels": int(lbp.valid.sum()), "histogram": hist.tolist()}
    if args.json:
        sys.stdout.write(_dump(summary))
    else:
        top = np.argsort(-hist, kind="stable")[:5]
        print(f"{img.width}x{img.height}  P={args.neighbors} R={args.radius:g}  "
              f"valid={summary['valid_pixels']}  top codes: "
              + ", ".join(f"{k}:{hist[k]}" for k in top))
    return 0


def cmd_detect(args) -> int:
    img = decode_gray(_read(args.image))
    result = detect(img, _detector_params(args))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "mask.png").write_bytes(encode_mask(result.mask))
        (out / "detection.json").write_text(result.sidecar_json())
    if args.json:
        sys.stdout.write(result.sidecar_json())
    else:
        shifts = ", ".join(f"{s}x{n}" for s, n in result.dominant_shifts) or "none"
        print(f"marked pixels: {int(result.mask.bits.sum())}  dominant shifts: {shifts}")
    return 0


def cmd_discriminate(args) -> int:
    img = decode_gray(_read(args.image))
    if args.mask:
        mask = decode_mask(_read(args.mask))
    else:
        mask = detect(img, _detector_params(args)).mask
    if mask.shape != img.shape:
        raise DimensionMismatch(f"mask {mask.shape} does not match image {img.shape}")
    cfg = _disc_config(args)
    pair = select_pair(connected_components(mask, cfg.min_area))
    verdict = discriminate_pair(img, pair, mask, cfg, workers=args.workers)

    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verdict.json").write_text(verdict.to_json())
        dup = {A_FORGED: pair.a, B_FORGED: pair.b}.get(verdict.final)
        orig = {A_FORGED: pair.b, B_FORGED: pair.a}.get(verdict.final)
        (out / "overlay.png").write_bytes(encode_overlay(img, orig, dup))
        figures.radius_stds(verdict, out / "radius_std.png")
        for d in verdict.decisions:
            try:
                ha, hb = pair_histograms(img, pair, mask, d.radius, cfg.neighbors, cfg.band_width)
            except CopyMoveError:
                continue
            figures.band_histograms(ha, hb, d.radius, out / f"histograms_R{d.radius:g}.png", d.std_a, d.std_b)
        if args.dump_bands:
            for d in verdict.decisions:
                margin = LbpConfig(cfg.neighbors, d.radius).margin
                for name, own, other in (("A", pair.a, pair.b), ("B", pair.b, pair.a)):
                    try:
                        band = boundary_band(own, mask, cfg.band_width, margin, other)
                    except CopyMoveError:
                        continue
                    (out / f"band_{name}_R{d.radius:g}.png").write_bytes(encode_mask(BinaryMask(band.mask)))

    if args.json:
        sys.stdout.write(verdict.to_json())
    else:
        for d in verdict.decisions:
            sa = "n/a" if d.std_a is None else f"{d.std_a:.6f}"
            sb = "n/a" if d.std_b is None else f"{d.std_b:.6f}"
            print(f"R={d.radius:g}  std_a={sa}  std_b={sb}  vote={d.vote}")
        print(f"final: {verdict.final}  (A = larger or raster-first region, bbox {pair.a.bbox}; B bbox {pair.b.bbox})")
    return 0


def cmd_synth(args) -> int:
    if args.bases:
        paths = sorted(p for p in Path(args.bases).iterdir() if p.suffix.lower() in (".png", ".pgm", ".ppm"))
        if not paths:
            raise CopyMoveError(f"no base images in {args.bases}")
        bases = [decode_gray(p.read_bytes()) for p in paths]
    else:
        bases = default_bases(args.n_bases, (args.base_size, args.base_size), args.seed)
    blend = "gaussian_feather" if args.blend == "feather" else "none"
    Blend(blend, args.sigma, args.band)  # validates
    dist = SpecDistribution(sigmas=(args.sigma,), band=args.band, blend=blend)
    samples = corpus(bases, args.n, dist, seed=args.seed, workers=args.workers)
    ids = write_corpus(samples, args.out_dir)
    summary = {"n": len(ids), "seed": args.seed, "blend": blend, "sigma": args.sigma, "band": args.band,
               "bases": len(bases), "ids": ids}
    if args.json:
        sys.stdout.write(_dump(summary))
    else:
        print(f"wrote {len(ids)} forgeries to {args.out_dir}")
    return 0


def cmd_eval(args) -> int:
    entries = ingest(args.root, args.layout)
    cfg = EvalConfig(_disc_config(args), _detector_params(args))
    report = evaluate(entries, args.mode, cfg, workers=args.workers)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json())
        (out / "table.txt").write_text(report.table())
        figures.accuracy(report, out / "accuracy.png")
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.table())
    return 0


# -- parser ----------------------------------------------------------------------

def _add_disc(p):
    p.add_argument("--radii", type=_radii, default=(2.0, 3.0, 4.0), help="comma-separated LBP radii (default 2,3,4)")
    p.add_argument("--neighbors", type=int, default=8, help="LBP neighbour count P (default 8)")
    p.add_argument("--band-width", type=int, default=4, help="boundary band half-width in pixels (default 4)")


def _add_detector(p):
    d = DetectorParams()
    p.add_argument("--block-size", type=int, default=d.block_size)
    p.add_argument("--zigzag-count", type=int, default=d.zigzag_count)
    p.add_argument("--quant", type=float, default=d.quant)
    p.add_argument("--neighbor-window", type=int, default=d.neighbor_window)
    p.add_argument("--min-support", type=int, default=d.min_support)
    p.add_argument("--var-min", type=float, default=d.var_min)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="copymove", description="Copy-move forgery analysis toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="{lbp,detect,discriminate,synth,eval}",
                                parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("lbp", help="compute an LBP code map")
    p.add_argument("--image", required=True)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--neighbors", type=int, default=8)
    p.add_argument("--out", help="write the code map as an 8-bit PNG")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lbp)

    p = sub.add_parser("detect", help="block-matching copy-move detector")
    p.add_argument("--image", required=True)
    _add_detector(p)
    p.add_argument("--out-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("discriminate", help="label the pasted region of a mask pair")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", help="copy-move mask; when omitted the detector supplies one")
    _add_disc(p)
    _add_detector(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-bands", action="store_true", help="also write band masks to --out-dir")
    p.add_argument("--out-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_discriminate)

    p = sub.add_parser("synth", help="generate a ground-truthed forgery corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bases", help="directory of base images (default: procedural textures)")
    p.add_argument("--n-bases", type=int, default=5)
    p.add_argument("--base-size", type=int, default=384)
    p.add_argument("--blend", choices=("feather", "none"), default="feather")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--band", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="accuracy report over a dataset directory")
    p.add_argument("--root", required=True)
    p.add_argument("--layout", choices=("synth", "grip"), default="synth")
    p.add_argument("--mode", choices=MODES, default="ground_truth_mask")
    _add_disc(p)
    _add_detector(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (CopyMoveError, ValueError) as exc:
        print(f"copymove {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
