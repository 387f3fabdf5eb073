"""Command-line front end.

Subcommands:
  segment     stack directory or single PGM -> mask PGM + JSON report
  eval        mask vs reference -> metrics JSON (optional threshold baseline)
  phantom     write a synthetic stack + ground-truth mask
  trace-dump  run the tracker and dump per-step diagnostics as CSV

Exit codes: 0 success, 2 segmentation failure (reported by name in the
JSON report), 1 I/O or usage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .cusum import DEFAULT_Q, CusumConfig, ResetMode
from .errors import (CusumSegError, DegenerateThreshold, DimensionMismatch,
                     EmptyTrace, IndexOutOfRange, InvalidSpec, IoError,
                     MalformedFile, NoContrast, SeedNotFound, TrackerDiverged)
from .imaging import (Point2D, load_image, load_stack, otsu_threshold,
                      save_stack, working_image)
from .mask import load_mask, save_mask
from .metrics import best_threshold_baseline, confusion, derive_metrics
from .phantom import PhantomSpec, generate
from .planner import LoopMode, PlannerParams
from .seed import Corner, SeedConfig, find_initial_point
from .segmenter import run_tracker, segment_image
from .trace import write_trace_csv

_SEGMENTATION_ERRORS = (NoContrast, SeedNotFound, DegenerateThreshold,
                        TrackerDiverged, EmptyTrace)
_USAGE_ERRORS = (IoError, MalformedFile, IndexOutOfRange, InvalidSpec,
                 DimensionMismatch, OSError, ValueError)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 reserved for segmentation
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _xy(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected X,Y")
    return float(parts[0]), float(parts[1])


def _lesion(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected CX,CY,RADIUS,DELTA")
    return tuple(float(p) for p in parts)


def _slice_arg(text: str):
    if text == "all":
        return "all"
    return int(text)


def _add_tracker_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--timepoint", type=int, default=3,
                   help="timepoint used as the working image (default 3)")
    p.add_argument("--seed", type=_xy, default=None, metavar="X,Y",
                   help="skip the corner scan and start here")
    p.add_argument("--corner", default=Corner.BOTTOM_LEFT.value,
                   choices=[c.value for c in Corner])
    p.add_argument("--step-length", type=float, default=0.39)
    p.add_argument("--loop-lag", type=int, default=8)
    p.add_argument("--loop-tolerance", type=float, default=None,
                   help="default: step length / 100")
    p.add_argument("--loop-mode", default=LoopMode.OVERRIDE.value,
                   choices=[m.value for m in LoopMode])
    p.add_argument("--max-steps", type=int, default=None,
                   help="default: 50 * (width + height)")
    p.add_argument("--warmup", type=int, default=20,
                   help="steps before closure at the seed may trigger")
    p.add_argument("--q", type=int, default=DEFAULT_Q,
                   help="samples per region window")
    p.add_argument("--reset-mode", default=ResetMode.ZERO.value,
                   choices=[m.value for m in ResetMode])
    p.add_argument("--h-min", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="cusumseg",
                  description="Boundary-tracking segmentation toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", parents=[], help="segment one image")
    seg.add_argument("input", help="stack directory or single PGM file")
    seg.add_argument("--slice", type=_slice_arg, default=0,
                     help="slice index, or 'all'")
    _add_tracker_flags(seg)
    seg.add_argument("-o", "--output", required=True,
                     help="mask PGM path ('all': directory)")
    seg.add_argument("--report", default=None,
                     help="JSON report path (default: <output>.json)")
    seg.add_argument("--trace-csv", default=None,
                     help="also dump per-step diagnostics here")
    seg.add_argument("--jobs", type=int, default=1,
                     help="worker threads for --slice all")
    seg.set_defaults(func=cmd_segment)

    ev = sub.add_parser("eval", help="score a mask against a reference")
    ev.add_argument("--mask", required=True)
    ev.add_argument("--reference", required=True)
    ev.add_argument("--baseline-image", default=None,
                    help="also score the best global threshold of this image")
    ev.add_argument("--report", default=None,
                    help="JSON path (default: stdout)")
    ev.set_defaults(func=cmd_eval)

    ph = sub.add_parser("phantom", help="write a synthetic test stack")
    ph.add_argument("-o", "--output", required=True, help="output directory")
    ph.add_argument("--width", type=int, default=128)
    ph.add_argument("--height", type=int, default=128)
    ph.add_argument("--background-mean", type=float, default=100.0)
    ph.add_argument("--interior-mean", type=float, default=450.0)
    ph.add_argument("--ring-mean", type=float, default=700.0)
    ph.add_argument("--center", type=_xy, default=(64.0, 64.0), metavar="X,Y")
    ph.add_argument("--outer-axes", type=_xy, default=(52.0, 58.0),
                    metavar="A,B")
    ph.add_argument("--inner-axes", type=_xy, default=(44.0, 50.0),
                    metavar="A,B")
    ph.add_argument("--lesion", type=_lesion, action="append", default=[],
                    metavar="CX,CY,R,DELTA", help="repeatable")
    ph.add_argument("--noise-sigma", type=float, default=20.0)
    ph.add_argument("--num-timepoints", type=int, default=8)
    ph.add_argument("--bolus-dip", type=float, default=0.3)
    ph.add_argument("--rng-seed", type=int, default=1)
    ph.add_argument("--truth", default="outer", choices=["outer", "inner"])
    ph.set_defaults(func=cmd_phantom)

    td = sub.add_parser("trace-dump", help="per-step tracker diagnostics CSV")
    td.add_argument("input", help="stack directory or single PGM file")
    td.add_argument("--slice", type=int, default=0)
    _add_tracker_flags(td)
    td.add_argument("-o", "--output", required=True, help="CSV path")
    td.set_defaults(func=cmd_trace_dump)

    return top


def _tracker_config(args):
    params = PlannerParams(step_length=args.step_length,
                           loop_lag=args.loop_lag,
                           loop_tolerance=args.loop_tolerance,
                           max_steps=args.max_steps,
                           warmup_steps=args.warmup,
                           loop_mode=LoopMode(args.loop_mode))
    config = CusumConfig(q=args.q,
                         reset_mode=ResetMode(args.reset_mode),
                         h_min=args.h_min)
    seed_cfg = SeedConfig(corner=Corner(args.corner))
    override = Point2D(*args.seed) if args.seed is not None else None
    return params, config, seed_cfg, override


def _config_echo(args, params: PlannerParams, config: CusumConfig) -> dict:
    return {
        "corner": args.corner,
        "h_min": config.h_min,
        "loop_lag": params.loop_lag,
        "loop_mode": params.loop_mode.value,
        "loop_tolerance": params.tolerance(),
        "max_steps": args.max_steps,
        "q": config.q,
        "reset_mode": config.reset_mode.value,
        "step_length": params.step_length,
        "warmup_steps": params.warmup_steps,
    }


def _load_working(args):
    """(image, slice_index_or_None, timepoint_or_None) for one slice."""
    path = Path(args.input)
    if path.is_dir():
        stack = load_stack(path)
        return (working_image(stack, args.slice, args.timepoint),
                args.slice, args.timepoint)
    return load_image(path), None, None


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as f:
            f.write(text)


def _segment_one(img, args, params, config, seed_cfg, override, mask_path):
    start = time.perf_counter()
    result = segment_image(img, params, config, override, seed_cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    save_mask(result.mask, mask_path)
    report = {
        "degenerate_fill": result.fill.degenerate,
        "mask_path": str(mask_path),
        "num_change_points": len(result.trace.change_points),
        "num_steps": result.trace.steps,
        "seed": {"x": result.seed.x, "y": result.seed.y},
        "termination": result.trace.termination.value,
        "threshold": result.threshold,
        "wall_time_ms": elapsed_ms,
    }
    return result, report


def cmd_segment(args) -> int:
    params, config, seed_cfg, override = _tracker_config(args)
    report_path = args.report or str(args.output) + ".json"
    base = {
        "config": _config_echo(args, params, config),
        "input": str(args.input),
        "timepoint": None,
    }

    def fail(exc, extra):
        report = dict(base, **extra)
        report["error"] = type(exc).__name__
        report["detail"] = str(exc)
        _write_json(report, report_path)
        sys.stderr.write(f"cusumseg: {type(exc).__name__}: {exc}\n")
        return 2

    if args.slice == "all":
        stack = load_stack(args.input)
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        base["timepoint"] = args.timepoint

        def work(s: int):
            img = working_image(stack, s, args.timepoint)
            mask_path = out_dir / f"mask_s{s}.pgm"
            _, rep = _segment_one(img, args, params, config, seed_cfg,
                                  override, mask_path)
            return dict(rep, slice=s)

        try:
            if args.jobs > 1:
                with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                    reports = list(pool.map(work, range(stack.num_slices)))
            else:
                reports = [work(s) for s in range(stack.num_slices)]
        except _SEGMENTATION_ERRORS as exc:
            return fail(exc, {"slice": "all"})
        _write_json(dict(base, slice="all", slices=reports), report_path)
        return 0

    img, slice_idx, timepoint = _load_working(args)
    base["slice"] = slice_idx
    base["timepoint"] = timepoint
    try:
        result, rep = _segment_one(img, args, params, config, seed_cfg,
                                   override, args.output)
    except _SEGMENTATION_ERRORS as exc:
        return fail(exc, {})
    if args.trace_csv:
        write_trace_csv(result.trace, args.trace_csv)
    _write_json(dict(base, **rep), report_path)
    return 0


def cmd_eval(args) -> int:
    mask = load_mask(args.mask)
    reference = load_mask(args.reference)
    counts = confusion(mask, reference)
    report = {"cusum": derive_metrics(counts).as_dict()}
    if args.baseline_image:
        img = load_image(args.baseline_image)
        threshold, metrics = best_threshold_baseline(img, reference)
        block = {"threshold": threshold}
        block.update(metrics.as_dict())
        report["best_threshold"] = block
    _write_json(report, args.report)
    return 0


def cmd_phantom(args) -> int:
    spec = PhantomSpec(width=args.width, height=args.height,
                       background_mean=args.background_mean,
                       interior_mean=args.interior_mean,
                       ring_mean=args.ring_mean,
                       center=args.center,
                       outer_axes=args.outer_axes,
                       inner_axes=args.inner_axes,
                       lesions=tuple(args.lesion),
                       noise_sigma=args.noise_sigma,
                       num_timepoints=args.num_timepoints,
                       bolus_dip_fraction=args.bolus_dip,
                       rng_seed=args.rng_seed,
                       truth_ellipse=args.truth)
    stack, truth = generate(spec)
    out = Path(args.output)
    save_stack(stack, out)
    save_mask(truth, out / "ground_truth.pgm")
    return 0


def cmd_trace_dump(args) -> int:
    params, config, seed_cfg, override = _tracker_config(args)
    img, _, _ = _load_working(args)
    threshold = otsu_threshold(img)
    if override is None:
        seed = find_initial_point(img, threshold, seed_cfg)
    else:
        seed = override
    try:
        trace = run_tracker(img, seed, params, config)
    except TrackerDiverged as exc:
        # keep the partial trace: the whole point of the dump is debugging
        if exc.trace is not None:
            write_trace_csv(exc.trace, args.output)
        sys.stderr.write(f"cusumseg: TrackerDiverged: {exc}\n")
        return 2
    write_trace_csv(trace, args.output)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SEGMENTATION_ERRORS as exc:
        sys.stderr.write(f"cusumseg: {type(exc).__name__}: {exc}\n")
        return 2
    except _USAGE_ERRORS as exc:
        sys.stderr.write(f"cusumseg: {type(exc).__name__}: {exc}\n")
        return 1
    except CusumSegError as exc:
        sys.stderr.write(f"cusumseg: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
