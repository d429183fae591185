"""Command-line interface: ``wavinpaint {degrade,inpaint,bench}``."""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import bench as bench_mod
from ._backend import kernels
from .coeff_domain import (
    MaskError,
    degrade,
    level_for_size,
    load_observed,
    make_random_loss_mask,
    make_subband_loss_mask,
    save_observed,
)
from .image_core import ImageError, load_image, psnr, save_image
from .nltv_reg import NlParams
from .presets import PresetError, load_preset, preset_names
from .solvers import GUIDE_POLICIES, SOLVERS, SolverConfig, SolverError, build_graph
from .tv_reg import ProxConfig

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

_SOLVER_LABEL = {"alg1": "Algorithm 1", "bos": "BOS"}


class UsageError(Exception):
    pass


def _stem(path: str) -> str:
    return os.path.splitext(path)[0]


def _add_scenario_flags(p):
    g = p.add_argument_group("scenario")
    g.add_argument("--subband", choices=("LH", "HL", "HH"), help="lose one whole detail subband")
    g.add_argument("--level-size", type=int, default=32, metavar="N",
                   help="side length of the lost subband (default 32)")
    g.add_argument("--random-keep", type=float, metavar="F",
                   help="keep a random fraction F of the coefficients")
    g.add_argument("--keep-ll", action="store_true", help="never lose LL coefficients")
    g.add_argument("--sigma", type=float, default=0.0, metavar="S",
                   help="std of Gaussian noise added to received coefficients")
    g.add_argument("--seed", type=int, default=0, metavar="N",
                   help="mask seed; the noise uses N+1")
    g.add_argument("--levels", type=int, default=4, help="decomposition depth (default 4)")


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--reg", choices=("tv", "nltv"), default="tv")
    g.add_argument("--solver", choices=("alg1", "bos"), default="alg1")
    g.add_argument("--lambda", dest="lam", type=float, help="Algorithm 1 penalty")
    g.add_argument("--mu", type=float, help="BOS regularization weight")
    g.add_argument("--delta", type=float, default=1.0, help="BOS step size")
    g.add_argument("--inner", type=int, default=10, help="PFBS steps per BOS iteration")
    g.add_argument("--max-outer", type=int, default=25)
    g.add_argument("--stop-tol", type=float, default=1e-5)
    g.add_argument("--prox-iters", type=int, default=50, help="inner prox iterations")
    g.add_argument("--prox-tol", type=float, default=1e-5)
    g.add_argument("--sigma-threshold", choices=("discrepancy", "literal"), default="discrepancy",
                   help="noisy stopping bound: sigma scaled by sqrt(size), or sigma itself")
    g.add_argument("--nl-guide", choices=GUIDE_POLICIES, default="tv",
                   help="image the NL-TV weights are computed from (default: TV pre-pass)")
    g.add_argument("--exact-adjoint", action="store_true",
                   help="BOS: use the true transpose of the analysis operator "
                        "(needs --delta 0.5 or smaller)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavinpaint", description="Recover lost wavelet coefficients of an image."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s ({kernels.NAME} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="simulate coefficient loss on an image")
    p.add_argument("--in", dest="input", required=True, help="original image (PGM or PNG)")
    p.add_argument("--mask", help="output mask file (default: <out-dir>/<input stem>.wim)")
    p.add_argument("--out-dir", default=".", help="directory for received/interpolated images")
    p.add_argument("--ref", help="reference for the printed PSNR (default: the input)")
    _add_scenario_flags(p)

    p = sub.add_parser("inpaint", help="reconstruct from a mask and coefficient file")
    p.add_argument("--mask", required=True, help="mask file written by 'degrade'")
    p.add_argument("--out", required=True, help="restored image path")
    p.add_argument("--ref", help="reference image for PSNR")
    p.add_argument("--sigma", type=float, help="override the noise level stored in the mask file")
    p.add_argument("--trace", metavar="CSV", help="per-iteration trace")
    p.add_argument("--plot", metavar="SVG", help="PSNR against time (needs --ref)")
    _add_solver_flags(p)

    p = sub.add_parser("bench", help="run a benchmark preset")
    p.add_argument("--preset", help="preset name or JSON file")
    p.add_argument("--list", action="store_true", help="list bundled presets")
    p.add_argument("--in", dest="input", help="image to use instead of the preset's")
    p.add_argument("--out-dir", default="bench-out")
    p.add_argument("--methods", nargs="+", help="subset of the preset's methods")
    p.add_argument("--max-outer", type=int, help="override every method's iteration cap")
    p.add_argument("--trace", metavar="CSV", help="combined trace (default: in --out-dir)")
    p.add_argument("--plot", metavar="SVG", help="PSNR against time")
    p.add_argument("--show-preset", action="store_true", help="print the preset JSON and exit")
    return parser


def _scenario_mask(args, shape):
    if (args.subband is None) == (args.random_keep is None):
        raise UsageError("give exactly one of --subband or --random-keep")
    if args.subband is not None:
        level = level_for_size(shape, args.level_size)
        if level > args.levels:
            raise UsageError(f"--level-size {args.level_size} needs more than {args.levels} levels")
        return make_subband_loss_mask(args.levels, shape, (args.subband, level))
    return make_random_loss_mask(args.levels, shape, args.random_keep, args.keep_ll, args.seed)


def cmd_degrade(args) -> int:
    img = load_image(args.input)
    mask = _scenario_mask(args, img.shape)
    observed = degrade(img, mask, args.sigma, args.seed + 1)
    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.basename(_stem(args.input))
    mask_path = args.mask or os.path.join(args.out_dir, base + ".wim")
    save_observed(mask_path, observed)
    stem = os.path.join(args.out_dir, os.path.basename(_stem(mask_path)))
    save_image(observed.received, stem + "_received.pgm")
    print(f"mask: {mask_path} ({mask.n_missing} of {mask.known.size} coefficients lost)")
    ref = load_image(args.ref) if args.ref else img
    print(f"received: {stem}_received.pgm, PSNR={psnr(ref, load_image(stem + '_received.pgm')):.2f}dB")
    if not mask.ll_known.all():
        save_image(observed.f0, stem + "_interpolated.pgm")
        print(
            f"interpolated: {stem}_interpolated.pgm, "
            f"PSNR={psnr(ref, load_image(stem + '_interpolated.pgm')):.2f}dB"
        )
    return EXIT_OK


def solver_config(args, sigma: float) -> SolverConfig:
    return SolverConfig(
        regularizer=args.reg,
        lam=args.lam,
        mu=args.mu,
        delta=args.delta,
        max_outer=args.max_outer,
        inner_pfbs=args.inner,
        prox=ProxConfig(tol=args.prox_tol, max_iters=args.prox_iters),
        stop_tol=args.stop_tol,
        noise_sigma=sigma,
        noise_threshold=args.sigma_threshold,
        exact_adjoint=args.exact_adjoint,
    )


def cmd_inpaint(args) -> int:
    observed = load_observed(args.mask)
    sigma = observed.noise_sigma if args.sigma is None else args.sigma
    cfg = solver_config(args, sigma)
    ref = None
    if args.ref:
        ref = load_image(args.ref)
        if ref.shape != observed.shape:
            raise MaskError(f"reference {ref.shape} does not match mask {observed.shape}")
    if args.plot and ref is None:
        raise UsageError("--plot needs --ref")
    graph = None
    if cfg.regularizer == "nltv":
        t0 = time.perf_counter()
        graph = build_graph(observed, NlParams(), args.nl_guide)
        print(f"weights: {graph.n_edges} edges in {time.perf_counter() - t0:.2f}s")
    t0 = time.perf_counter()
    out, trace = SOLVERS[args.solver](observed, cfg, graph=graph, reference=ref)
    elapsed = time.perf_counter() - t0
    save_image(out, args.out)
    label = f"{args.reg.upper().replace('NLTV', 'NL-TV')}-{_SOLVER_LABEL[args.solver]}"
    parts = [label]
    if ref is not None:
        parts.append(f"PSNR={psnr(ref, load_image(args.out)):.2f}dB")
    parts += [f"iter={len(trace)}", f"time={elapsed:.2f}s"]
    print(", ".join(parts))
    if args.trace:
        trace.write_csv(args.trace, {"method": f"{args.reg}-{args.solver}"})
    if args.plot:
        svg = bench_mod.svg_plot(
            {label: (trace.column("elapsed_s"), trace.column("psnr_db"))}, title=label
        )
        with open(args.plot, "w") as fh:
            fh.write(svg)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.list:
        for name in preset_names():
            print(name)
        return EXIT_OK
    if not args.preset:
        raise UsageError("--preset is required (or --list)")
    preset = load_preset(args.preset)
    if args.show_preset:
        print(preset.dumps())
        return EXIT_OK
    if args.max_outer is not None:
        for spec in preset.methods.values():
            spec.config["max_outer"] = args.max_outer
    image = load_image(args.input) if args.input else None
    result = bench_mod.run_preset(preset, image=image, methods=args.methods, out_dir=args.out_dir)
    if args.trace:
        bench_mod.write_combined_csv(result, args.trace)
    if args.plot:
        bench_mod.write_plot(result, args.plot)
    print(bench_mod.summary_table(result))
    return EXIT_OK


COMMANDS = {"degrade": cmd_degrade, "inpaint": cmd_inpaint, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except SolverError as exc:
        print(f"wavinpaint: solver aborted: {exc}", file=sys.stderr)
    except (ImageError, MaskError, PresetError, KeyError, ValueError, OSError) as exc:
        print(f"wavinpaint: {exc}", file=sys.stderr)
    return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
