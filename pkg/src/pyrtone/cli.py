"""Command-line interface.

Subcommands: enhance, decompose, reconstruct, lut-apply, llf, edges, eval,
bench, export-conditioning.  Machine-readable output is JSON; human tables
go to stdout.  All subcommands are deterministic under fixed --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import bench, parse_size
from .edges import canny
from .image import ColorSpace, Image, load_image, save_image, srgb_to_linear, linear_to_srgb, xyz_to_linear_rgb
from .local_laplacian import direct_llf, fast_llf
from .lut import parse_cube, apply_trilinear
from .metrics import evaluate
from .params import heuristic_params, load_bundle
from .pipeline import PipelineConfig, enhance_detailed
from .pyramid import adaptive_levels, downsample2, gaussian_pyramid, laplacian_from_gaussian, LaplacianPyramid, laplacian_reconstruct

_SPACES = {
    "linear": ColorSpace.LINEAR_RGB,
    "srgb": ColorSpace.SRGB,
    "xyz": ColorSpace.XYZ,
}


def _entry_image(path: str, space: str) -> Image:
    """Load and bring an input into linear working space if requested."""
    img = load_image(path, space=_SPACES[space])
    if img.space is ColorSpace.XYZ:
        return xyz_to_linear_rgb(img)
    if img.space is ColorSpace.SRGB:
        return srgb_to_linear(img)
    return img


def _config_from_json(path: str | None) -> PipelineConfig:
    if not path:
        return PipelineConfig()
    with open(path) as fh:
        return PipelineConfig(**json.load(fh))


def _cmd_enhance(args) -> int:
    img = _entry_image(args.input, args.input_space)
    cfg = _config_from_json(args.config)
    if args.bundle:
        params = load_bundle(args.bundle)
    else:
        n = adaptive_levels(img.height, img.width, cfg.target_low_res)
        lr = img
        for _ in range(n):
            lr = downsample2(lr)
        params = heuristic_params(lr, cfg.basis_count, cfg.lut_bins)
    out = enhance_detailed(img, params, cfg).output
    if args.output_space == "srgb":
        out = linear_to_srgb(out)
    save_image(out, args.output, kind=args.output_kind)
    return 0


def _cmd_decompose(args) -> int:
    img = load_image(args.input, space=_SPACES[args.input_space])
    n = args.levels or adaptive_levels(img.height, img.width, args.target)
    lap = laplacian_from_gaussian(gaussian_pyramid(img, n))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for k, band in enumerate(lap.bands):
        name = f"band_{k:02d}.tif"
        save_image(band, outdir / name, kind="tiff32f")
        files.append(name)
    save_image(lap.residual, outdir / "residual.tif", kind="tiff32f")
    manifest = {
        "levels": n,
        "band_sizes": [[b.height, b.width] for b in lap.bands],
        "residual_size": [lap.residual.height, lap.residual.width],
        "band_files": files,
        "residual_file": "residual.tif",
    }
    (outdir / "pyramid.json").write_text(json.dumps(manifest, indent=2))
    print(json.dumps(manifest))
    return 0


def _cmd_reconstruct(args) -> int:
    indir = Path(args.indir)
    manifest = json.loads((indir / "pyramid.json").read_text())
    bands = tuple(load_image(indir / name, kind="tiff32f") for name in manifest["band_files"])
    residual = load_image(indir / manifest["residual_file"], kind="tiff32f")
    out = laplacian_reconstruct(LaplacianPyramid(bands, residual))
    save_image(out, args.output, kind=args.output_kind)
    return 0


def _cmd_lut_apply(args) -> int:
    lut = parse_cube(Path(args.lut).read_text())
    img = load_image(args.input, space=_SPACES[args.input_space])
    save_image(apply_trilinear(lut, img), args.output, kind=args.output_kind)
    return 0


def _cmd_llf(args) -> int:
    img = load_image(args.input, space=_SPACES[args.input_space])
    n = args.levels or adaptive_levels(img.height, img.width, 64)
    fn = direct_llf if args.direct else fast_llf
    kwargs = {} if args.direct else {"n_samples": args.samples}
    out = fn(img, args.alpha, args.beta, args.sigma_r, n, **kwargs)
    save_image(out, args.output, kind=args.output_kind)
    return 0


def _cmd_edges(args) -> int:
    img = load_image(args.input, space=_SPACES[args.input_space])
    save_image(canny(img, args.blur_sigma, args.low, args.high), args.output, kind="png")
    return 0


def _cmd_eval(args) -> int:
    a = load_image(args.a, space=_SPACES[args.space])
    b = load_image(args.b, space=_SPACES[args.space])
    report = evaluate(a, b)
    if args.json:
        print(json.dumps(report.as_dict()))
    else:
        print(f"psnr    {report.psnr:.4f} dB")
        print(f"ssim    {report.ssim:.6f}")
        print(f"delta_e {report.delta_e:.4f}")
    return 0


def _cmd_bench(args) -> int:
    sizes = [parse_size(tok) for tok in args.sizes.split(",")]
    cfg = _config_from_json(args.config)
    report = bench(sizes, reps=args.reps, cfg=cfg, seed=args.seed, threads=args.threads)
    if args.json:
        print(report.to_json())
    else:
        print(f"{'size':>12} {'pixels':>10} {'median ms':>10} {'p95 ms':>10}")
        for e in report.entries:
            print(f"{e.height:>5}x{e.width:<6} {e.pixels:>10} {e.median_ms:>10.2f} {e.p95_ms:>10.2f}")
    return 0


def _cmd_export_conditioning(args) -> int:
    import tifffile

    img = _entry_image(args.input, args.input_space)
    cfg = _config_from_json(args.config)
    if args.bundle:
        params = load_bundle(args.bundle)
    else:
        n = adaptive_levels(img.height, img.width, cfg.target_low_res)
        lr = img
        for _ in range(n):
            lr = downsample2(lr)
        params = heuristic_params(lr, cfg.basis_count, cfg.lut_bins)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stacks = []

    def recorder(stack):
        stacks.append(stack)
        return params.level_params.level(stack.level)

    enhance_detailed(img, params, cfg, predictor=recorder)
    manifest = []
    for stack in stacks:
        name = f"conditioning_{stack.level:02d}.tif"
        tifffile.imwrite(outdir / name, stack.data.astype(np.float32))
        manifest.append({
            "level": stack.level,
            "file": name,
            "height": int(stack.data.shape[0]),
            "width": int(stack.data.shape[1]),
            "channels": int(stack.channels),
            "layout": [[role, count] for role, count in stack.layout],
        })
    (outdir / "conditioning.json").write_text(json.dumps(manifest, indent=2))
    print(json.dumps(manifest))
    return 0


def _add_io_args(p, output: bool = True):
    p.add_argument("--input", required=True)
    p.add_argument("--input-space", choices=sorted(_SPACES), default="linear")
    if output:
        p.add_argument("--output", required=True)
        p.add_argument("--output-kind", choices=("png", "tiff8", "tiff16", "tiff32f"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pyrtone", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="seed for synthetic inputs")
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("LLF_THREADS", 0)) or None,
        help="parallelism cap (recorded in reports; the engine is single-threaded)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="run the full enhancement pipeline")
    _add_io_args(p)
    p.add_argument("--bundle", help="LLFP1 parameter bundle (identity fallback when omitted)")
    p.add_argument("--config", help="JSON file mirroring PipelineConfig")
    p.add_argument("--output-space", choices=("linear", "srgb"), default="linear")
    p.set_defaults(fn=_cmd_enhance)

    p = sub.add_parser("decompose", help="write Laplacian levels as float TIFFs + manifest")
    _add_io_args(p, output=False)
    p.add_argument("--outdir", required=True)
    p.add_argument("--levels", type=int, default=0, help="0 = adaptive")
    p.add_argument("--target", type=int, default=64)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("reconstruct", help="rebuild an image from a decompose directory")
    p.add_argument("--indir", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--output-kind", choices=("png", "tiff8", "tiff16", "tiff32f"), default=None)
    p.set_defaults(fn=_cmd_reconstruct)

    p = sub.add_parser("lut-apply", help="apply a .cube LUT")
    _add_io_args(p)
    p.add_argument("--lut", required=True)
    p.set_defaults(fn=_cmd_lut_apply)

    p = sub.add_parser("llf", help="local Laplacian detail filter")
    _add_io_args(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--sigma-r", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=16, help="reference sample count (fast path)")
    p.add_argument("--levels", type=int, default=0, help="0 = adaptive")
    p.add_argument("--direct", action="store_true", help="use the exact per-coefficient filter")
    p.set_defaults(fn=_cmd_llf)

    p = sub.add_parser("edges", help="Canny edge map as 8-bit PNG")
    _add_io_args(p)
    p.add_argument("--blur-sigma", type=float, default=1.0)
    p.add_argument("--low", type=float, default=0.1)
    p.add_argument("--high", type=float, default=0.2)
    p.set_defaults(fn=_cmd_edges)

    p = sub.add_parser("eval", help="PSNR / SSIM / delta-E between two files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--space", choices=("linear", "srgb"), default="srgb")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("bench", help="pipeline timing on synthetic images")
    p.add_argument("--sizes", default="480p,4k", help="comma list: named (480p, 4k) or HxW")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--config", help="JSON file mirroring PipelineConfig")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("export-conditioning", help="write predictor input stacks as float TIFF + layout JSON")
    _add_io_args(p, output=False)
    p.add_argument("--outdir", required=True)
    p.add_argument("--bundle")
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_export_conditioning)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # surface a clean diagnostic, not a traceback
        print(f"pyrtone {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
