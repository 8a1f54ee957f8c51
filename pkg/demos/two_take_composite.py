#!/usr/bin/env python3
"""End-to-end walk through the library: align two synthetic takes, equalize
blur and color, cut a motion-compensated seam, blend and crop.

    python demos/make_synthetic_takes.py /tmp/takes --blur 5 --color-gain 1.15
    python demos/two_take_composite.py /tmp/takes
"""

import os
import sys

import numpy as np

from seamtake import video
from seamtake.align import MatchParams, RansacParams, align_videos
from seamtake.appearance import apply_color_lut, build_color_lut, match_blur
from seamtake.composite import assemble_output, greedy_crop, missing_pixels
from seamtake.geometry import invert
from seamtake.seamcut import SeamParams, coarse_to_fine_cut


def main(scene_dir):
    a = video.load_frame_sequence(os.path.join(scene_dir, "a_%04d.png"), 0, 5)
    b = video.load_frame_sequence(os.path.join(scene_dir, "b_%04d.png"), 0, 5)
    print(f"takes: {a.num_frames} frames of {a.width}x{a.height}")

    # 1. alignment: anchor fit + temporal propagate-and-refine
    track = align_videos(
        a, b, anchor=a.num_frames // 2,
        match_p=MatchParams(level=3, division=4, smooth=1),
        refine_p=MatchParams(level=1, division=4, smooth=1),
        ransac=RansacParams(seed=0),
    )
    b_warped = video.warp_clip(b, list(track.spatial))
    print("aligned; first spatial map:\n", np.round(track.spatial[0], 3))

    # 2. appearance: blur then color equalization
    fa, fb, kernel, which = match_blur(a.frame(2), b_warped.frame(2))
    print(f"blur match: {which} gets kernel {kernel.to_list()}")
    masks = a.all_masks() & b_warped.all_masks()
    lut = build_color_lut(a, b_warped, masks, gamma=200.0)
    b_matched = apply_color_lut(b_warped, lut)

    # 3. seam: strokes from the scene's mask files feed the cut
    from seamtake.cli import import_strokes

    strokes = import_strokes(os.path.join(scene_dir, "s_%04d.png"), 0, a.num_frames - 1)
    motion = np.stack([invert(h) for h in track.temporal_a])
    labels, stats = coarse_to_fine_cut(
        a, b_matched, masks, strokes, SeamParams(lam=1.0, level=2, grow=1), motion
    )
    for line in stats.report_lines():
        print(" ", line)

    # 4. blend across the seam, crop away anything uncovered
    missing = missing_pixels(labels, a.all_masks(), b_matched.all_masks())
    rect = greedy_crop(missing)
    out = assemble_output(a, b_matched, labels, blend_width=4, crop=rect)
    paths = video.save_frame_sequence(out, os.path.join(scene_dir, "composite_%04d.png"))
    print(f"wrote {len(paths)} composited frames ({out.width}x{out.height})")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "/tmp/takes")
