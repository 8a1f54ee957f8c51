#!/usr/bin/env python3
"""Write a synthetic two-take scene as PNG sequences.

Both takes window the same textured master under independent camera shake;
take A carries a red square, take B a blue one at another spot, and take B
optionally differs in color gain and blur. Also writes per-frame stroke
masks (pure red = keep A, pure blue = keep B) usable with --strokes.
"""

import argparse
import os

import numpy as np
from scipy import ndimage

from seamtake import geometry, video
from seamtake.appearance import BlurKernel, box_blur


def textured_master(height, width, seed):
    rng = np.random.default_rng(seed)
    img = np.full((height, width, 3), 128.0)
    for sigma, amp in ((24.0, 60.0), (6.0, 40.0), (1.5, 18.0)):
        layer = ndimage.gaussian_filter(
            rng.uniform(-1, 1, size=(height, width, 3)), sigma=(sigma, sigma, 0)
        )
        img += layer / np.abs(layer).max() * amp
    for _ in range(max(6, height * width // 600)):
        ph = int(rng.integers(height // 12 + 2, height // 4 + 3))
        pw = int(rng.integers(width // 12 + 2, width // 4 + 3))
        y = int(rng.integers(0, height - ph))
        x = int(rng.integers(0, width - pw))
        img[y : y + ph, x : x + pw] += rng.uniform(-70, 70, 3)
    return np.clip(img, 5, 250).astype(np.float32)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--frames", type=int, default=6)
    parser.add_argument("--width", type=int, default=128)
    parser.add_argument("--height", type=int, default=96)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--color-gain", type=float, default=1.0)
    parser.add_argument("--color-offset", type=float, default=0.0)
    parser.add_argument("--blur", type=int, default=0, help="box width applied to take B")
    args = parser.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    pad = 12
    rng = np.random.default_rng(args.seed)
    master = textured_master(args.height + 2 * pad, args.width + 2 * pad, args.seed)
    master_a = master.copy()
    master_b = master.copy()
    a_obj = (pad + 6, pad + 8)
    b_obj = (pad + args.width - 18, pad + args.height - 20)
    master_a[a_obj[1] : a_obj[1] + 7, a_obj[0] : a_obj[0] + 7] = (220, 40, 40)
    master_b[b_obj[1] : b_obj[1] + 7, b_obj[0] : b_obj[0] + 7] = (40, 60, 220)

    stroke_pixels = {
        "A": [(a_obj[0] - pad + 3, a_obj[1] - pad + 3), (2, 2)],
        "B": [(b_obj[0] - pad + 3, b_obj[1] - pad + 3)],
    }
    for t in range(args.frames):
        sa = rng.uniform(-1.5, 1.5, 2)
        sb = rng.uniform(-1.5, 1.5, 2) + np.array([3.0, 1.0])
        wa, _ = video.warp_frame(
            master_a, geometry.translation(-(pad + sa[0]), -(pad + sa[1])),
            out_shape=(args.height, args.width),
        )
        wb, _ = video.warp_frame(
            master_b, geometry.translation(-(pad + sb[0]), -(pad + sb[1])),
            out_shape=(args.height, args.width),
        )
        if args.color_gain != 1.0 or args.color_offset:
            wb = np.clip(wb * args.color_gain + args.color_offset, 0, 255).astype(np.float32)
        if args.blur:
            wb = box_blur(wb, BlurKernel((args.blur, args.blur), (args.blur, args.blur)))
        video.save_frame(wa, os.path.join(args.out_dir, f"a_{t:04d}.png"))
        video.save_frame(wb, os.path.join(args.out_dir, f"b_{t:04d}.png"))
        mask = np.zeros((args.height, args.width, 3), np.float32)
        for (x, y) in stroke_pixels["A"]:
            mask[y, x] = (255, 0, 0)
        for (x, y) in stroke_pixels["B"]:
            mask[y, x] = (0, 0, 255)
        video.save_frame(mask, os.path.join(args.out_dir, f"s_{t:04d}.png"))

    print(f"wrote {args.frames} frames per take into {args.out_dir}")
    print(f"  take A pattern: {os.path.join(args.out_dir, 'a_%04d.png')}")
    print(f"  take B pattern: {os.path.join(args.out_dir, 'b_%04d.png')}")
    print(f"  stroke masks:   {os.path.join(args.out_dir, 's_%04d.png')}")


if __name__ == "__main__":
    main()
