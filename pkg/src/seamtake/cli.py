"""Batch interface: project creation, staged computation, benchmarks, and
the local UI service.

Exit codes are stable per error class (see `seamtake --help`); identical
invocations with a fixed --seed produce bit-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np
from PIL import Image

from . import video
from .errors import ConfigurationError, IngestionError, SeamTakeError
from .pipeline import Project, StageEngine, load_project, save_project
from .seamcut import SeamParams, StrokeSet, coarse_to_fine_cut

_EXIT_CODE_HELP = """\
exit codes:
  0 success            1 unexpected error    2 ingestion error
  3 structural error   4 model error         5 match error
  6 alignment error    7 constraint conflict 8 appearance error
  9 crop error        10 configuration      11 project format
"""


def _parse_range(text: str) -> tuple[int, int]:
    try:
        first, last = text.split(":")
        return int(first), int(last)
    except ValueError:
        raise ConfigurationError(f"range must look like FIRST:LAST, got {text!r}") from None


def _scan_range(pattern: str) -> tuple[int, int]:
    """Probe consecutive indices from 0 while files exist."""
    if not os.path.exists(pattern % 0):
        raise IngestionError(f"no frame at index 0 for pattern {pattern!r}")
    last = 0
    while os.path.exists(pattern % (last + 1)):
        last += 1
    return 0, last


def import_strokes(pattern: str, first: int, last: int) -> StrokeSet:
    """Per-frame two-color PNG masks: pure red = A, pure blue = B."""
    strokes = StrokeSet()
    for t in range(first, last + 1):
        path = pattern % t
        if not os.path.exists(path):
            continue
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"))
        red = (arr[:, :, 0] == 255) & (arr[:, :, 1] == 0) & (arr[:, :, 2] == 0)
        blue = (arr[:, :, 0] == 0) & (arr[:, :, 1] == 0) & (arr[:, :, 2] == 255)
        for y, x in np.argwhere(red):
            strokes.add(t, int(x), int(y), "A")
        for y, x in np.argwhere(blue):
            strokes.add(t, int(x), int(y), "B")
    return strokes


def _triple(text: str) -> list[int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigurationError(f"expected LEVEL,DIVISION,SMOOTH, got {text!r}")
    return parts


_OVERRIDE_FLAGS = (
    ("--offset", "offset", int),
    ("--anchor", "anchor", int),
    ("--lambda", "lam", float),
    ("--level", "level", int),
    ("--grow", "grow", int),
    ("--blend-width", "blend_width", int),
    ("--gamma", "gamma", float),
    ("--fade-frames", "fade_frames", int),
    ("--seed", "seed", int),
    ("--ransac-iterations", "ransac_iterations", int),
    ("--inlier-px", "ransac_inlier_px", float),
    ("--match", "match", _triple),
    ("--refine", "refine", _triple),
)


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    for flag, dest, typ in _OVERRIDE_FLAGS:
        parser.add_argument(flag, dest=dest, type=typ, default=None)
    parser.add_argument("--blur", dest="blur_enabled", choices=["on", "off"], default=None)
    parser.add_argument("--color", dest="color_enabled", choices=["on", "off"], default=None)
    parser.add_argument("--strokes", dest="strokes_pattern", default=None,
                        help="import strokes from two-color PNG masks (red=A, blue=B)")
    parser.add_argument("--save", action="store_true",
                        help="persist flag overrides into the project file")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker threads (stages currently run serially)")


def _apply_overrides(project: Project, args) -> bool:
    changed = False
    for _, dest, _ in _OVERRIDE_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            project.set_param(dest, value)
            changed = True
    for dest in ("blur_enabled", "color_enabled"):
        value = getattr(args, dest, None)
        if value is not None:
            project.set_param(dest, value == "on")
            changed = True
    if getattr(args, "strokes_pattern", None):
        first, last = 0, max(project.a_range[1] - project.a_range[0], 0)
        project.strokes = import_strokes(args.strokes_pattern, first, last)
        changed = True
    return changed


def _load_for_run(args) -> Project:
    project = load_project(args.project)
    changed = _apply_overrides(project, args)
    if changed and args.save:
        save_project(project, args.project)
    elif changed:
        # pure-run guarantee: overrides never persist, so run detached from
        # the on-disk cache as well
        project.path = None
    return project


def _cmd_init(args) -> int:
    a_range = _parse_range(args.a_range) if args.a_range else _scan_range(args.a)
    b_range = _parse_range(args.b_range) if args.b_range else _scan_range(args.b)
    project = Project(a_pattern=args.a, a_range=a_range, b_pattern=args.b, b_range=b_range)
    project.params["offset"] = args.offset
    if args.strokes_pattern:
        project.strokes = import_strokes(args.strokes_pattern, 0, a_range[1] - a_range[0])
    save_project(project, args.project)
    print(f"created {args.project}: A {a_range[0]}:{a_range[1]}, "
          f"B {b_range[0]}:{b_range[1]}, offset {args.offset}")
    return 0


def _cmd_stage(args, stage: str) -> int:
    project = _load_for_run(args)
    engine = StageEngine(project)
    engine.compute(stage)
    for line in engine.stage_report():
        print(line)
    return 0


def _cmd_composite(args) -> int:
    project = _load_for_run(args)
    engine = StageEngine(project)
    out_pattern = args.out
    if out_pattern is None:
        base, _ = os.path.splitext(args.project)
        out_pattern = base + "_out_%04d.png"
    paths = engine.export(out_pattern, seam_overlay=args.seam_overlay)
    for line in engine.stage_report():
        print(line)
    print(f"wrote {len(paths)} frames to {out_pattern}")
    return 0


def _cmd_bench_cut(args) -> int:
    project = _load_for_run(args)
    engine = StageEngine(project)
    al = engine.compute("align")
    blur = engine.compute("blur")
    color = engine.compute("color")
    a_clip, b_clip = blur["a"], color["b"]
    masks = a_clip.all_masks() & b_clip.all_masks()
    motion = engine._output_motion(al["track"], al["timeline"], *al["overlap"])
    lo, hi = _parse_range(args.levels)
    glo, ghi = _parse_range(args.grows)
    rows = []
    for level in range(lo, hi + 1):
        for grow in range(glo, ghi + 1):
            start = time.perf_counter()
            labels, stats = coarse_to_fine_cut(
                a_clip, b_clip, masks, project.strokes,
                SeamParams(project.params["lam"], level, grow), motion,
            )
            row = {
                "level": level,
                "grow": grow,
                "time_s": round(time.perf_counter() - start, 4),
                "peak_memory_bytes": stats.peak_memory_bytes,
                "nodes": stats.total_nodes,
                "energy": round(stats.energy, 3),
            }
            rows.append(row)
            print(json.dumps(row))
    return 0


def _cmd_bench_align(args) -> int:
    from . import geometry
    from .align import MatchParams, fit_frame_alignment

    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    w, h = (int(v) for v in args.size.split("x"))
    ok = 0
    worst = 0.0
    for trial in range(args.trials):
        base = rng.uniform(0, 255, size=(h, w, 3))
        from scipy import ndimage

        img = ndimage.gaussian_filter(base, sigma=(2.5, 2.5, 0)).astype(np.float32)
        for _ in range(8):
            ph, pw = int(rng.integers(4, h // 3)), int(rng.integers(4, w // 3))
            y, x = int(rng.integers(0, h - ph)), int(rng.integers(0, w - pw))
            img[y : y + ph, x : x + pw] += rng.uniform(-60, 60, 3).astype(np.float32)
        img = np.clip(img, 0, 255)
        angle = np.deg2rad(rng.uniform(-args.max_rot, args.max_rot))
        h_map = geometry.rotation_about(angle, (w - 1) / 2, (h - 1) / 2)
        h_map = geometry.translation(*rng.uniform(-args.max_shift, args.max_shift, 2)) @ h_map
        warped, mask = video.warp_frame(img, h_map)
        try:
            fitted = fit_frame_alignment(img, warped, MatchParams(), rng=rng, b_valid=mask)
        except SeamTakeError:
            continue
        err = geometry.corner_error(geometry.invert(fitted), h_map, w, h)
        worst = max(worst, err)
        if err < 0.5:
            ok += 1
    rate = ok / args.trials
    print(json.dumps({"trials": args.trials, "recovered": ok, "rate": rate,
                      "worst_corner_px": round(worst, 3)}))
    return 0 if rate >= 0.95 else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = args.ui
    if ui_dir is None:
        # repo layout: frontend/ beside src/; present in development checkouts
        candidate = os.path.join(os.path.dirname(__file__), "..", "..", "frontend")
        if os.path.isdir(os.path.join(candidate, "dist")):
            ui_dir = os.path.normpath(candidate)
    app = create_app(args.project, static_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seamtake",
        description="Composite two takes of a scene along a minimum-visibility "
        "spatiotemporal seam.",
        epilog=_EXIT_CODE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a project from two frame sequences")
    p.add_argument("project")
    p.add_argument("--a", required=True, help="printf-style pattern for take A")
    p.add_argument("--b", required=True, help="printf-style pattern for take B")
    p.add_argument("--a-range", default=None, help="FIRST:LAST (default: scan from 0)")
    p.add_argument("--b-range", default=None)
    p.add_argument("--offset", type=int, default=0, help="B relative to A, in frames")
    p.add_argument("--strokes", dest="strokes_pattern", default=None)
    p.set_defaults(func=_cmd_init)

    for stage in ("align", "cut"):
        p = sub.add_parser(stage, help=f"compute through the {stage} stage and persist")
        p.add_argument("project")
        _add_override_flags(p)
        p.set_defaults(func=lambda a, s=stage: _cmd_stage(a, s))

    p = sub.add_parser("composite", help="compute the full composite and write frames")
    p.add_argument("project")
    p.add_argument("--out", default=None, help="output pattern (default <project>_out_%%04d.png)")
    p.add_argument("--seam-overlay", action="store_true", help="tint seam pixels red")
    _add_override_flags(p)
    p.set_defaults(func=_cmd_composite)

    p = sub.add_parser("bench-cut", help="sweep pyramid levels/grows, report time and memory")
    p.add_argument("project")
    p.add_argument("--levels", default="0:3")
    p.add_argument("--grows", default="0:1")
    _add_override_flags(p)
    p.set_defaults(func=_cmd_bench_cut)

    p = sub.add_parser("bench-align", help="synthetic homography recovery suite")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--size", default="320x240")
    p.add_argument("--max-shift", type=float, default=30.0)
    p.add_argument("--max-rot", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench_align)

    p = sub.add_parser("serve", help="start the local UI service")
    p.add_argument("project")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8754)
    p.add_argument("--ui", default=None, help="directory with the built browser UI")
    p.set_defaults(func=_cmd_serve)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SeamTakeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
