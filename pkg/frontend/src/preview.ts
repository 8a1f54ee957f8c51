/**
 * Client-side overlay helpers: the difference view is computed in the
 * browser from the two source frames; seam overlays come from the service.
 */

/** Per-pixel RGB distance of two same-size RGBA buffers, as grayscale RGBA. */
export function differenceImage(
  a: Uint8ClampedArray,
  b: Uint8ClampedArray,
  width: number,
  height: number,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    const o = i * 4;
    const d =
      (Math.abs(a[o] - b[o]) + Math.abs(a[o + 1] - b[o + 1]) + Math.abs(a[o + 2] - b[o + 2])) / 3;
    out[o] = out[o + 1] = out[o + 2] = d;
    out[o + 3] = 255;
  }
  return out;
}

/** Tint mask pixels red over a base RGBA buffer (seam display). */
export function tintMask(
  base: Uint8ClampedArray,
  maskBoundary: Uint8ClampedArray,
  width: number,
  height: number,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(base);
  for (let i = 0; i < width * height; i++) {
    if (maskBoundary[i * 4] === 0) continue;
    const o = i * 4;
    out[o] = Math.round(0.5 * base[o] + 127.5);
    out[o + 1] = Math.round(0.5 * base[o + 1]);
    out[o + 2] = Math.round(0.5 * base[o + 2]);
  }
  return out;
}

/** Boundary pixels of a binary label mask (white = B), as an RGBA mask. */
export function maskBoundary(
  mask: Uint8ClampedArray,
  width: number,
  height: number,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  const at = (x: number, y: number) => mask[(y * width + x) * 4] > 127;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const v = at(x, y);
      const edge =
        (x + 1 < width && at(x + 1, y) !== v) ||
        (x > 0 && at(x - 1, y) !== v) ||
        (y + 1 < height && at(x, y + 1) !== v) ||
        (y > 0 && at(x, y - 1) !== v);
      if (edge) out[(y * width + x) * 4] = 255;
    }
  }
  return out;
}
