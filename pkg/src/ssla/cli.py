"""Command-line interface: fuse, metrics, expogen, compare.

Exit codes: 0 success, 2 input error, 3 decode error, 4 inference failure.

The ``fuse`` subcommand runs the full adjustment-and-fusion chain on an
exposure stack; ``metrics`` scores a single image; ``expogen`` renders a
builtin high-dynamic-range scene into a synthetic exposure stack;
``compare`` runs the four benchmark configurations on one stack and prints
a score table.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import metrics as metrics_mod
from .errors import InputError, SslaError
from .expogen import BUILTIN_SCENES, builtin_scene, make_stack
from .imageio import decode_image, encode_png, load_stack, write_pfm
from .pipeline import (PipelineConfig, build_config, compare_runs,
                       run_pipeline, standard_configs)

# Fixed palette for label-map PNGs: label m -> LABEL_PALETTE[m % 10] (RGB).
LABEL_PALETTE = [
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207),
]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    """Pipeline knobs shared by ``fuse`` and ``compare``; default None so
    only flags the user set override the config file."""
    p.add_argument("--config", metavar="FILE", help="key=value settings file")
    p.add_argument("--approach", type=int, choices=(0, 1, 2), default=None,
                   help="0 fuse unchanged, 1 brightness bands, 2 mixture")
    p.add_argument("--no-enhance", action="store_true",
                   help="skip local contrast enhancement")
    p.add_argument("--sigma-spatial", type=float, default=None,
                   help="bilateral spatial sigma in pixels")
    p.add_argument("--sigma-range", type=float, default=None,
                   help="bilateral range sigma on the [0,1] luminance scale")
    p.add_argument("--bilateral-backend", choices=("grid", "exact"), default=None,
                   help="local-mean filter implementation")
    p.add_argument("--k", type=int, default=None, dest="k",
                   help="maximum mixture components")
    p.add_argument("--max-iters", type=int, default=None,
                   help="maximum mixture update iterations")
    p.add_argument("--downsize-max", type=int, default=None,
                   help="max side length of the maps the mixture is fitted on")
    p.add_argument("--seed", type=int, default=None, help="mixture-init seed")
    p.add_argument("--tonemap-knee", choices=("max", "1"), default=None,
                   help="white point of the compression curve")
    p.add_argument("--middle-gray", type=float, default=None,
                   help="per-segment log-average target")
    p.add_argument("--epsilon", type=float, default=None,
                   help="luminance floor inside log-averages")
    p.add_argument("--fusion", choices=("mertens", "average"), default=None,
                   help="fusion backend")
    p.add_argument("--fuse-domain", choices=("encoded", "linear"), default=None,
                   help="fuse display-encoded or linear values")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=None,
                   help="output PNG bit depth")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        "approach": args.approach,
        "contrast_enhancement": False if args.no_enhance else None,
        "sigma_spatial": args.sigma_spatial,
        "sigma_range": args.sigma_range,
        "bilateral_backend": args.bilateral_backend,
        "max_components": args.k,
        "max_iter": args.max_iters,
        "downsize_max": args.downsize_max,
        "seed": args.seed,
        "tonemap_knee": args.tonemap_knee,
        "target_gray": args.middle_gray,
        "epsilon": args.epsilon,
        "fuse_method": args.fusion,
        "fuse_domain": args.fuse_domain,
        "bit_depth": args.bit_depth,
    }
    return build_config(args.config, overrides)


def _write_label_map(path: Path, labels: np.ndarray) -> None:
    """Label map as an indexed-palette PNG (label m -> palette entry m%10)."""
    img = Image.fromarray(labels.astype(np.uint8), mode="P")
    flat = [c for rgb in LABEL_PALETTE for c in rgb]
    img.putpalette((flat * 26)[:768])
    img.save(path)


def _emit_intermediates(out_dir: Path, inter: dict, bit_depth: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    part = inter.get("partition")
    if part is not None:
        _write_label_map(out_dir / "label_map.png", part.labels)
    adjusted = inter.get("adjusted")
    if adjusted is not None:
        for i, img in enumerate(adjusted.images):
            seg = int(adjusted.segment_ids[i])
            encode_png(out_dir / f"adjusted_{i:02d}_seg{seg}.png", img, bit_depth)


def cmd_fuse(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    stack = load_stack(args.inputs)
    fused, report, inter = run_pipeline(stack, cfg)
    encode_png(args.output, fused, cfg.bit_depth)
    report["config"] = dataclasses.asdict(cfg)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    if args.emit_intermediates:
        _emit_intermediates(Path(args.emit_intermediates), inter, cfg.bit_depth)
    print(f"wrote {args.output}  (segments: {report['m']}, "
          f"entropy: {report['metrics']['entropy_bits']:.3f} bits)")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    image = decode_image(args.image)
    scores = {
        "entropy_bits": metrics_mod.entropy_bits(image),
        "naturalness": metrics_mod.naturalness(image, stride=args.patch_stride),
    }
    if args.json:
        print(json.dumps(scores, indent=2))
    else:
        print(f"entropy_bits: {scores['entropy_bits']:.4f}")
        print(f"naturalness: {scores['naturalness']:.4f}")
    return 0


def _parse_evs(raw: str) -> list[float]:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    if not parts:
        raise InputError("no exposure values given")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise InputError(f"bad exposure value list {raw!r}") from exc


def cmd_expogen(args: argparse.Namespace) -> int:
    evs = _parse_evs(args.evs)
    size = (args.size, args.size)
    scene = builtin_scene(args.scene, size, seed=args.seed)
    stack = make_stack(scene, evs)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = args.format
    for i, (ev, img) in enumerate(zip(evs, stack)):
        name = f"{args.scene}_{i:02d}_ev{ev:+.2f}.{ext}"
        if ext == "pfm":
            write_pfm(out_dir / name, img)
        else:
            encode_png(out_dir / name, img, 16 if ext == "png16" else 8)
    print(f"wrote {len(stack)} exposures to {out_dir}")
    return 0


def _format_table(rows: list[dict], fmt: str) -> str:
    cols = ["config", "entropy_bits", "naturalness", "m", "wall_ms"]
    if fmt == "csv":
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(str(r[c]) for c in cols))
        return "\n".join(lines) + "\n"
    widths = [max(len(c), *(len(str(r[c])) for r in rows)) for c in cols]
    head = "| " + " | ".join(c.ljust(w) for c, w in zip(cols, widths)) + " |"
    rule = "| " + " | ".join("-" * w for w in widths) + " |"
    body = ["| " + " | ".join(str(r[c]).ljust(w) for c, w in zip(cols, widths)) + " |"
            for r in rows]
    return "\n".join([head, rule, *body]) + "\n"


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    stack = load_stack(args.inputs)
    results = compare_runs(stack, standard_configs(cfg))
    rows = []
    for name, (_fused, report) in results.items():
        rows.append({
            "config": name,
            "entropy_bits": round(report["metrics"]["entropy_bits"], 4),
            "naturalness": round(report["metrics"]["naturalness"], 4),
            "m": report["m"],
            "wall_ms": report["wall_ms"],
        })
    table = _format_table(rows, args.format)
    if args.output:
        Path(args.output).write_text(table)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssla",
        description="Segment-wise luminance adjustment and exposure fusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fuse = sub.add_parser("fuse", help="adjust and fuse an exposure stack")
    p_fuse.add_argument("inputs", nargs="+", help="input images (PNG or PFM)")
    p_fuse.add_argument("-o", "--output", required=True, help="fused PNG path")
    p_fuse.add_argument("--report", metavar="FILE",
                        help="write the run report as JSON")
    p_fuse.add_argument("--emit-intermediates", metavar="DIR",
                        help="write the adjusted stack and label map here")
    _add_config_flags(p_fuse)
    p_fuse.set_defaults(func=cmd_fuse)

    p_met = sub.add_parser("metrics", help="score one image")
    p_met.add_argument("image", help="image to score (PNG or PFM)")
    p_met.add_argument("--json", action="store_true", help="emit JSON")
    p_met.add_argument("--patch-stride", type=int, default=None,
                       help="patch step for the contrast statistic "
                            "(default: patch size, non-overlapping)")
    p_met.set_defaults(func=cmd_metrics)

    p_gen = sub.add_parser("expogen", help="render a synthetic exposure stack")
    p_gen.add_argument("--scene", required=True, choices=sorted(BUILTIN_SCENES),
                       help="builtin scene name")
    p_gen.add_argument("--evs", required=True,
                       help="comma-separated exposure values; use the = form "
                            "for negatives, e.g. --evs=-7,-3.5,0")
    p_gen.add_argument("--seed", type=int, default=0, help="texture seed")
    p_gen.add_argument("--size", type=int, default=256, help="square side length")
    p_gen.add_argument("--format", choices=("pfm", "png", "png16"), default="pfm",
                       help="output format (pfm keeps full linear precision)")
    p_gen.add_argument("-o", "--output", required=True, help="output directory")
    p_gen.set_defaults(func=cmd_expogen)

    p_cmp = sub.add_parser("compare",
                           help="score the four benchmark configurations")
    p_cmp.add_argument("inputs", nargs="+", help="input images (PNG or PFM)")
    p_cmp.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p_cmp.add_argument("-o", "--output", help="write the table here")
    _add_config_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SslaError as exc:
        print(f"ssla: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
