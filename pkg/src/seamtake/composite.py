"""Final assembly: alpha blending across the seam and the greedy crop.

The blend weight ramps linearly with the Manhattan distance to the seam, so
pixels straddling the label change mix near 50/50 and pure source content
resumes `width` pixels away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import video
from .errors import CropError, StructuralError
from .seamcut import LABEL_A

_INF = np.inf


@dataclass(frozen=True)
class CropRect:
    """Inclusive-exclusive pixel bounds."""

    left: int
    top: int
    right: int
    bottom: int

    def __post_init__(self):
        if self.right <= self.left or self.bottom <= self.top:
            raise CropError(f"empty crop rectangle {self}")

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.bottom - self.top

    def to_list(self) -> list[int]:
        return [self.left, self.top, self.right, self.bottom]

    @classmethod
    def from_list(cls, values) -> "CropRect":
        return cls(*(int(v) for v in values))

    @classmethod
    def full(cls, width: int, height: int) -> "CropRect":
        return cls(0, 0, width, height)


def _l1_distance_to(targets: np.ndarray) -> np.ndarray:
    """Exact Manhattan distance from every pixel to the nearest True pixel
    (separable two-pass transform)."""
    h, w = targets.shape
    d = np.where(targets, 0.0, _INF)
    for y in range(1, h):
        np.minimum(d[y], d[y - 1] + 1.0, out=d[y])
    for y in range(h - 2, -1, -1):
        np.minimum(d[y], d[y + 1] + 1.0, out=d[y])
    dt = d.T.copy()
    for x in range(1, w):
        np.minimum(dt[x], dt[x - 1] + 1.0, out=dt[x])
    for x in range(w - 2, -1, -1):
        np.minimum(dt[x], dt[x + 1] + 1.0, out=dt[x])
    return dt.T


def seam_distance(labels: np.ndarray) -> np.ndarray:
    """Per-pixel Manhattan distance to the nearest opposite-label pixel.

    Uniform labelings return an all-infinity field (blending becomes a
    no-op)."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise StructuralError("seam_distance expects one label frame")
    is_a = labels == LABEL_A
    if is_a.all() or (~is_a).all():
        return np.full(labels.shape, _INF)
    dist_to_a = _l1_distance_to(is_a)
    dist_to_b = _l1_distance_to(~is_a)
    return np.where(is_a, dist_to_b, dist_to_a)


def alpha_blend(
    a: np.ndarray,
    b: np.ndarray,
    labels: np.ndarray,
    dist: np.ndarray,
    width: int,
    mask_a: np.ndarray | None = None,
    mask_b: np.ndarray | None = None,
) -> np.ndarray:
    """Blend the two sources around the seam: each pixel keeps weight alpha
    on its own labeled source, falling from ~1 far away to ~0.5 on the seam.
    width = 0 is a hard cut. Where only one source is valid, that source
    wins regardless of label."""
    a = video.check_frame(a).astype(np.float64)
    b = video.check_frame(b).astype(np.float64)
    if a.shape != b.shape or labels.shape != a.shape[:2]:
        raise StructuralError("alpha_blend inputs disagree in shape")
    if width < 0:
        raise StructuralError("blend width must be >= 0")
    is_a = labels == LABEL_A
    own = np.where(is_a[..., None], a, b)
    other = np.where(is_a[..., None], b, a)
    if width == 0:
        out = own.copy()
    else:
        alpha = np.clip(0.5 * (1.0 + (dist - 0.5) / width), 0.0, 1.0)
        alpha = np.where(np.isfinite(dist), alpha, 1.0)[..., None]
        out = alpha * own + (1.0 - alpha) * other
    if mask_a is not None or mask_b is not None:
        va = np.ones(labels.shape, bool) if mask_a is None else np.asarray(mask_a, bool)
        vb = np.ones(labels.shape, bool) if mask_b is None else np.asarray(mask_b, bool)
        only_a = va & ~vb
        only_b = vb & ~va
        out[only_a] = a[only_a]
        out[only_b] = b[only_b]
    return out.astype(np.float32)


def missing_pixels(labels: np.ndarray, masks_a: np.ndarray, masks_b: np.ndarray) -> np.ndarray:
    """True where the labeled (selected) source has no real content."""
    labels = np.asarray(labels)
    return np.where(labels == LABEL_A, ~np.asarray(masks_a, bool), ~np.asarray(masks_b, bool))


def greedy_crop(missing: np.ndarray) -> CropRect:
    """Shrink borders until no frame has an empty pixel inside the rectangle.

    Per frame: every empty pixel counts toward its nearest border (ties
    resolved left, right, top, bottom) and the border with the highest count
    loses one pixel line; the surviving rectangle seeds the next frame.
    """
    missing = np.asarray(missing, dtype=bool)
    if missing.ndim != 3:
        raise StructuralError("missing mask stack must be (T, H, W)")
    t_n, h, w = missing.shape
    left, top, right, bottom = 0, 0, w, h
    for t in range(t_n):
        while True:
            if right <= left or bottom <= top:
                raise CropError(f"crop collapsed on frame {t}; frame unusable")
            ys, xs = np.nonzero(missing[t, top:bottom, left:right])
            if ys.size == 0:
                break
            dl = xs
            dr = (right - left - 1) - xs
            dt = ys
            db = (bottom - top - 1) - ys
            dmin = np.minimum(np.minimum(dl, dr), np.minimum(dt, db))
            take_l = dl == dmin
            take_r = (dr == dmin) & ~take_l
            take_t = (dt == dmin) & ~take_l & ~take_r
            take_b = ~(take_l | take_r | take_t)
            counts = np.array([take_l.sum(), take_r.sum(), take_t.sum(), take_b.sum()])
            border = int(np.argmax(counts))
            if border == 0:
                left += 1
            elif border == 1:
                right -= 1
            elif border == 2:
                top += 1
            else:
                bottom -= 1
    return CropRect(left, top, right, bottom)


def overlay_seam(frame: np.ndarray, labels: np.ndarray, tint=(255.0, 0.0, 0.0)) -> np.ndarray:
    """Debug view: tint pixels adjacent to a label change."""
    frame = video.check_frame(frame).copy()
    boundary = np.zeros(labels.shape, dtype=bool)
    diff = labels[:, :-1] != labels[:, 1:]
    boundary[:, :-1] |= diff
    boundary[:, 1:] |= diff
    diff = labels[:-1, :] != labels[1:, :]
    boundary[:-1, :] |= diff
    boundary[1:, :] |= diff
    frame[boundary] = 0.5 * frame[boundary] + 0.5 * np.asarray(tint, dtype=np.float32)
    return frame


def assemble_output(
    a: video.VideoClip,
    b_matched: video.VideoClip,
    labels: np.ndarray,
    blend_width: int,
    crop: CropRect | None = None,
    seam_overlay: bool = False,
) -> video.VideoClip:
    """Blend every frame across the seam, then crop."""
    if a.frames.shape != b_matched.frames.shape:
        raise StructuralError("clips must have equal dimensions")
    if labels.shape != a.frames.shape[:3]:
        raise StructuralError("label volume does not match the clips")
    frames = np.empty_like(a.frames)
    for t in range(a.num_frames):
        dist = seam_distance(labels[t])
        frames[t] = alpha_blend(
            a.frame(t), b_matched.frame(t), labels[t], dist, blend_width,
            mask_a=a.mask(t), mask_b=b_matched.mask(t),
        )
        if seam_overlay:
            frames[t] = overlay_seam(frames[t], labels[t])
    if crop is not None:
        frames = frames[:, crop.top : crop.bottom, crop.left : crop.right]
    return video.VideoClip(np.ascontiguousarray(frames))
