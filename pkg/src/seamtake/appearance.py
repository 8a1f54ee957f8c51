"""Blur and color equalization between takes.

Blur matching never sharpens: it estimates a two-pass box filter that brings
the sharper image's per-axis blurriness (mean absolute gradient) down to the
blurrier one's. Color matching builds per-channel histogram-matching LUTs
from pixels whose RGB L1 difference stays under a similarity threshold, so
differing foreground content cannot bias the transfer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import video
from .errors import AppearanceError, StructuralError

DEFAULT_GAMMA = 200.0
DEFAULT_FADE_FRAMES = 30
_MAX_HALF_WIDTH = 64
# per-axis relative slack under which blurriness counts as already matched,
# making repeated matching idempotent
_MATCHED_REL_TOL = 0.02


@dataclass(frozen=True)
class BlurKernel:
    """Two separable box passes with independent x/y widths (odd, >= 1)."""

    pass1: tuple[int, int] = (1, 1)
    pass2: tuple[int, int] = (1, 1)

    def __post_init__(self):
        for w in (*self.pass1, *self.pass2):
            if w < 1 or w % 2 == 0:
                raise ValueError(f"box widths must be odd and >= 1, got {self}")

    @property
    def is_identity(self) -> bool:
        return self.pass1 == (1, 1) and self.pass2 == (1, 1)

    def to_list(self) -> list[int]:
        return [*self.pass1, *self.pass2]

    @classmethod
    def from_list(cls, values) -> "BlurKernel":
        w1x, w1y, w2x, w2y = (int(v) for v in values)
        return cls((w1x, w1y), (w2x, w2y))


def blurriness(img: np.ndarray) -> tuple[float, float]:
    """Mean absolute finite-difference gradient per axis, averaged over the
    color channels: (bx, by)."""
    img = video.check_frame(img).astype(np.float64)
    h, w = img.shape[:2]
    if h < 2 or w < 2:
        raise StructuralError("blurriness needs at least a 2x2 image")
    bx = float(np.abs(np.diff(img, axis=1)).mean())
    by = float(np.abs(np.diff(img, axis=0)).mean())
    return bx, by


def _box_pass(img: np.ndarray, wx: int, wy: int) -> np.ndarray:
    out = img
    if wx > 1:
        out = ndimage.uniform_filter1d(out, size=wx, axis=1, mode="nearest")
    if wy > 1:
        out = ndimage.uniform_filter1d(out, size=wy, axis=0, mode="nearest")
    return out


def box_blur(img: np.ndarray, kernel: BlurKernel) -> np.ndarray:
    """Apply both box passes (replicated borders). Two equal-width passes
    realize a triangle filter."""
    img = video.check_frame(img)
    out = img.astype(np.float64)
    out = _box_pass(out, *kernel.pass1)
    out = _box_pass(out, *kernel.pass2)
    return out.astype(np.float32)


def _axis_blurriness(img, axis):
    d = np.abs(np.diff(img, axis=1 if axis == 0 else 0))
    return float(d.mean())


def _blur_axis(img, axis, w1, w2):
    """Apply both passes along a single axis."""
    nd_axis = 1 if axis == 0 else 0
    out = img
    if w1 > 1:
        out = ndimage.uniform_filter1d(out, size=w1, axis=nd_axis, mode="nearest")
    if w2 > 1:
        out = ndimage.uniform_filter1d(out, size=w2, axis=nd_axis, mode="nearest")
    return out


def _solve_axis(sharp, target, axis):
    """Two-iteration width search for one axis.

    First grow both passes together until the blurriness drops to the
    target, then re-search the second pass width alone for the closest
    match. Returns (w1, w2).
    """
    if _axis_blurriness(sharp, axis) <= target * (1.0 + _MATCHED_REL_TOL):
        return 1, 1
    k = 0
    current = _axis_blurriness(sharp, axis)
    while current > target * (1.0 + 1e-6) and k < _MAX_HALF_WIDTH:
        k += 1
        width = 2 * k + 1
        current = _axis_blurriness(_blur_axis(sharp, axis, width, width), axis)
    w1 = 2 * k + 1
    base = _blur_axis(sharp, axis, w1, 1)
    best_w2, best_err = 1, abs(_axis_blurriness(base, axis) - target)
    for w2 in range(3, w1 + 4, 2):
        b = _axis_blurriness(
            ndimage.uniform_filter1d(base, size=w2, axis=1 if axis == 0 else 0, mode="nearest"),
            axis,
        )
        err = abs(b - target)
        if err < best_err:
            best_w2, best_err = w2, err
        if b <= target:
            break
    return w1, best_w2


def estimate_blur_kernel(sharp: np.ndarray, blurry: np.ndarray) -> BlurKernel:
    """Kernel whose application brings `sharp` to `blurry`'s blurriness.

    Each axis gets the two-iteration width search; because blurring one
    axis also lowers the other axis's gradients slightly, the two per-axis
    solves alternate until the widths settle."""
    sharp = video.check_frame(sharp).astype(np.float64)
    target_x, target_y = blurriness(blurry)
    bx, by = blurriness(sharp)
    if bx <= target_x * (1 + _MATCHED_REL_TOL) and by <= target_y * (1 + _MATCHED_REL_TOL):
        warnings.warn("first image is already at least as blurry on both axes; identity kernel")
        return BlurKernel()
    wx = (1, 1)
    wy = (1, 1)
    for _ in range(3):
        base_y = _blur_axis(sharp, 1, *wy)
        new_wx = _solve_axis(base_y, target_x, axis=0)
        base_x = _blur_axis(sharp, 0, *new_wx)
        new_wy = _solve_axis(base_x, target_y, axis=1)
        if new_wx == wx and new_wy == wy:
            break
        wx, wy = new_wx, new_wy
    return BlurKernel((wx[0], wy[0]), (wx[1], wy[1]))


def match_blur(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, BlurKernel, str]:
    """Blur the sharper of the two frames to match the blurrier one.

    Returns (a', b', kernel, which_blurred) with which_blurred one of
    'A', 'B', 'neither'.
    """
    a = video.check_frame(a)
    b = video.check_frame(b)
    if a.shape != b.shape:
        raise StructuralError("blur matching needs same-size frames")
    ax, ay = blurriness(a)
    bx, by = blurriness(b)
    # larger mean gradient = sharper image; that one receives the blur
    if ax + ay > bx + by:
        kernel = estimate_blur_kernel(a, b)
        if kernel.is_identity:
            return a, b, kernel, "neither"
        return box_blur(a, kernel), b, kernel, "A"
    if bx + by > ax + ay:
        kernel = estimate_blur_kernel(b, a)
        if kernel.is_identity:
            return a, b, kernel, "neither"
        return a, box_blur(b, kernel), kernel, "B"
    return a, b, BlurKernel(), "neither"


@dataclass
class ColorLUT:
    """Per-channel monotone 256-entry lookup tables mapping B's values onto
    A's distribution, with a linear fade window past the overlap."""

    tables: np.ndarray
    fade_frames: int = DEFAULT_FADE_FRAMES

    def __post_init__(self):
        self.tables = np.asarray(self.tables, dtype=np.float64)
        if self.tables.shape != (3, 256):
            raise StructuralError(f"LUT must be (3, 256), got {self.tables.shape}")
        if np.any(np.diff(self.tables, axis=1) < 0):
            raise StructuralError("LUT entries must be non-decreasing")

    @classmethod
    def identity(cls, fade_frames: int = DEFAULT_FADE_FRAMES) -> "ColorLUT":
        return cls(np.tile(np.arange(256.0), (3, 1)), fade_frames)

    def to_list(self) -> list[list[int]]:
        return np.round(self.tables).astype(int).tolist()

    @classmethod
    def from_list(cls, values, fade_frames: int = DEFAULT_FADE_FRAMES) -> "ColorLUT":
        return cls(np.asarray(values, dtype=np.float64), fade_frames)

    def apply_frame(self, frame: np.ndarray, alpha: float = 1.0) -> np.ndarray:
        frame = video.check_frame(frame)
        vals = np.clip(frame.astype(np.float64), 0.0, 255.0)
        out = np.empty_like(vals)
        xs = np.arange(256.0)
        for c in range(3):
            out[..., c] = np.interp(vals[..., c], xs, self.tables[c])
        if alpha < 1.0:
            out = alpha * out + (1.0 - alpha) * frame.astype(np.float64)
        return out.astype(np.float32)


def build_color_lut(
    a: video.VideoClip,
    b_warped: video.VideoClip,
    masks: np.ndarray,
    gamma: float = DEFAULT_GAMMA,
    fade_frames: int = DEFAULT_FADE_FRAMES,
) -> ColorLUT:
    """Histogram-match B's channels onto A's, using only overlap pixels whose
    RGB L1 difference is below gamma, aggregated over all frames."""
    if a.frames.shape != b_warped.frames.shape:
        raise StructuralError("clips must have equal dimensions")
    masks = np.asarray(masks, dtype=bool)
    av = a.frames.astype(np.float64)
    bv = b_warped.frames.astype(np.float64)
    l1 = np.abs(av - bv).sum(axis=-1)
    qualify = masks & (l1 < gamma)
    if not qualify.any():
        raise AppearanceError(
            f"no pixel pairs qualify under gamma={gamma}; raise gamma or check alignment"
        )
    a_q = np.clip(np.round(av[qualify]), 0, 255).astype(np.int64)
    b_q = np.clip(np.round(bv[qualify]), 0, 255).astype(np.int64)
    tables = np.empty((3, 256))
    for c in range(3):
        hist_a = np.bincount(a_q[:, c], minlength=256).astype(np.float64)
        hist_b = np.bincount(b_q[:, c], minlength=256).astype(np.float64)
        cdf_a = np.cumsum(hist_a) / hist_a.sum()
        cdf_b = np.cumsum(hist_b) / hist_b.sum()
        # map each B level to the smallest A level whose CDF reaches it
        tables[c] = np.searchsorted(cdf_a, cdf_b, side="left").clip(0, 255)
    return ColorLUT(tables, fade_frames)


def apply_color_lut(
    b: video.VideoClip, lut: ColorLUT, overlap_end: int | None = None
) -> video.VideoClip:
    """Apply the LUT to a clip; past overlap_end the effect fades out
    linearly over the LUT's fade window."""
    frames = np.empty_like(b.frames)
    for t in range(b.num_frames):
        alpha = 1.0
        if overlap_end is not None and t > overlap_end:
            if lut.fade_frames <= 0:
                alpha = 0.0
            else:
                alpha = max(0.0, 1.0 - (t - overlap_end) / float(lut.fade_frames))
        frames[t] = lut.apply_frame(b.frame(t), alpha)
    return video.VideoClip(frames, None if b.masks is None else b.masks.copy())
