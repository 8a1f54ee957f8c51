#!/usr/bin/env python3
"""Reproduce the coarse-to-fine time/memory trend on a synthetic clip.

Sweeps pyramid levels and band growth on a 480x270 ten-frame pair and
prints one row per setting; level=0 is the single-scale global cut.
"""

import numpy as np
from scipy import ndimage

from seamtake import geometry, video
from seamtake.seamcut import SeamParams, StrokeSet, coarse_to_fine_cut, identity_motion


def build_clip(t_count=10, height=270, width=480, seed=11):
    rng = np.random.default_rng(0)
    base = np.full((height, width, 3), 128.0)
    g = np.random.default_rng(seed)
    for sigma, amp in ((56.0, 60.0), (14.0, 40.0), (1.5, 18.0)):
        layer = ndimage.gaussian_filter(g.uniform(-1, 1, (height, width, 3)), sigma=(sigma, sigma, 0))
        base += layer / np.abs(layer).max() * amp
    base = np.clip(base, 5, 250).astype(np.float32)
    shifted, _ = video.warp_frame(base, geometry.translation(1.6, 1.0))
    xs = np.arange(width, dtype=np.float64)
    lane = (1.0 - 0.85 * np.exp(-(((xs - 100.0) / 35.0) ** 2))).astype(np.float32)[None, :, None]
    fa = np.empty((t_count, height, width, 3), np.float32)
    fb = np.empty_like(fa)
    for t in range(t_count):
        fa[t] = base + rng.normal(0, 1.0, size=base.shape)
        fb[t] = base + lane * (shifted - base) + rng.normal(0, 1.0, size=base.shape)
        x0 = 140 + 12 * t
        fb[t, 60:210, x0 : x0 + 90] = rng.uniform(0, 255, size=(150, 90, 3))
    a = video.VideoClip(np.clip(fa, 0, 255))
    b = video.VideoClip(np.clip(fb, 0, 255))
    strokes = StrokeSet.from_points(
        [(t, 6, y, "A") for t in range(t_count) for y in range(20, height - 10, 12)]
        + [(t, width - 7, y, "B") for t in range(t_count) for y in range(20, height - 10, 12)]
    )
    return a, b, np.ones((t_count, height, width), bool), strokes, identity_motion(t_count)


def main():
    a, b, masks, strokes, motion = build_clip()
    print(f"{'level':>5} {'grow':>4} {'time_s':>8} {'peak_mem_MiB':>12} {'energy':>10}")
    for level in (0, 1, 2, 3):
        for grow in ((1,) if level == 0 else (0, 1, 2)):
            _, stats = coarse_to_fine_cut(
                a, b, masks, strokes, SeamParams(1.0, level, grow), motion
            )
            print(
                f"{level:>5} {grow:>4} {stats.total_time:>8.2f} "
                f"{stats.peak_memory_bytes / 2**20:>12.2f} {stats.energy:>10.0f}"
            )


if __name__ == "__main__":
    main()
