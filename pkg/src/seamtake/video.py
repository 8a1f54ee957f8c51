"""Frame sequences, pyramids, warping and difference maps.

A frame is an (H, W, 3) float32 array in working space (0..255 scale);
8-bit quantization only happens at file I/O. A validity mask is an
(H, W) bool array, True where the pixel holds real content.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from . import geometry
from .errors import IngestionError, StructuralError


@dataclass
class VideoClip:
    """An ordered stack of same-size RGB frames, shape (T, H, W, 3) float32."""

    frames: np.ndarray
    masks: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise StructuralError(f"clip must be (T, H, W, 3), got {self.frames.shape}")
        if self.frames.shape[0] < 1:
            raise StructuralError("clip needs at least one frame")
        if not np.isfinite(self.frames).all():
            raise StructuralError("clip contains non-finite samples")
        if self.masks is not None:
            self.masks = np.asarray(self.masks, dtype=bool)
            if self.masks.shape != self.frames.shape[:3]:
                raise StructuralError("mask stack does not match clip dimensions")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def frame(self, t: int) -> np.ndarray:
        return self.frames[t]

    def mask(self, t: int) -> np.ndarray:
        if self.masks is None:
            return np.ones(self.frames.shape[1:3], dtype=bool)
        return self.masks[t]

    def all_masks(self) -> np.ndarray:
        if self.masks is None:
            return np.ones(self.frames.shape[:3], dtype=bool)
        return self.masks


def check_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float32)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise StructuralError(f"frame must be (H, W, 3), got {frame.shape}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise StructuralError("frame has empty dimensions")
    return frame


def load_frame_sequence(path_pattern: str, first: int, last: int) -> VideoClip:
    """Load a numbered image sequence (printf-style pattern, inclusive range)."""
    if last < first:
        raise IngestionError(f"empty frame range {first}..{last}")
    frames = []
    shape = None
    for i in range(first, last + 1):
        path = path_pattern % i
        if not os.path.exists(path):
            raise IngestionError(f"missing frame index {i}: {path}")
        try:
            with Image.open(path) as im:
                arr = np.asarray(im.convert("RGB"), dtype=np.float32)
        except OSError as exc:
            raise IngestionError(f"unreadable frame index {i}: {path}") from exc
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise StructuralError(
                f"frame index {i} is {arr.shape[1]}x{arr.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
        frames.append(arr)
    return VideoClip(np.stack(frames))


def save_frame_sequence(clip: VideoClip, path_pattern: str, first: int = 0) -> list[str]:
    """Write frames as 8-bit PNGs; returns the written paths."""
    paths = []
    for t in range(clip.num_frames):
        path = path_pattern % (first + t)
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        save_frame(clip.frame(t), path)
        paths.append(path)
    return paths


def save_frame(frame: np.ndarray, path: str) -> None:
    data = np.clip(np.round(np.asarray(frame, dtype=np.float64)), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path)


def frame_to_png_bytes(frame: np.ndarray) -> bytes:
    import io

    data = np.clip(np.round(np.asarray(frame, dtype=np.float64)), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(data, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _block_reduce_mean(arr: np.ndarray, axis: int) -> np.ndarray:
    """Mean over non-overlapping pairs along axis; odd tail averages itself."""
    n = arr.shape[axis]
    starts = np.arange(0, n, 2)
    sums = np.add.reduceat(arr, starts, axis=axis)
    counts = np.minimum(starts + 2, n) - starts
    shape = [1] * arr.ndim
    shape[axis] = len(starts)
    return sums / counts.reshape(shape)


def downsample2(frame: np.ndarray) -> np.ndarray:
    """2x2 box-average downsample; edge blocks average the available pixels."""
    frame = np.asarray(frame, dtype=np.float32)
    if frame.shape[0] <= 1 and frame.shape[1] <= 1:
        return frame
    out = _block_reduce_mean(frame.astype(np.float64), axis=0)
    out = _block_reduce_mean(out, axis=1)
    return out.astype(np.float32)


def downsample2_mask(mask: np.ndarray) -> np.ndarray:
    """A coarse pixel is valid only if its whole 2x2 source block is valid."""
    m = np.asarray(mask, dtype=np.float64)
    out = _block_reduce_mean(m, axis=0)
    out = _block_reduce_mean(out, axis=1)
    return out >= 1.0


def downsample2_temporal(clip: VideoClip) -> VideoClip:
    """Average consecutive frame pairs; an unpaired last frame passes through."""
    if clip.num_frames < 2:
        raise StructuralError("temporal downsampling needs at least 2 frames")
    frames = _block_reduce_mean(clip.frames.astype(np.float64), axis=0).astype(np.float32)
    masks = None
    if clip.masks is not None:
        masks = _block_reduce_mean(clip.masks.astype(np.float64), axis=0) >= 1.0
    return VideoClip(frames, masks)


def downsample2_frame_and_mask(frame: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return downsample2(frame), downsample2_mask(mask)


def bilinear_sample(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample img at fractional (x, y); coordinates are clamped to the frame."""
    h, w = img.shape[:2]
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    img = img.astype(np.float64, copy=False)
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def warp_frame(
    frame: np.ndarray,
    h: np.ndarray,
    out_shape: tuple[int, int] | None = None,
    src_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Warp a frame by a homography mapping source coords into output coords.

    Each output pixel samples the source at h^-1 (x, y); the returned mask
    is False where that source location falls outside the frame (or outside
    src_mask when given).
    """
    frame = check_frame(frame)
    h_inv = geometry.invert(h)
    height, width = frame.shape[:2]
    oh, ow = out_shape if out_shape is not None else (height, width)
    xs, ys = np.meshgrid(np.arange(ow, dtype=np.float64), np.arange(oh, dtype=np.float64))
    denom = h_inv[2, 0] * xs + h_inv[2, 1] * ys + h_inv[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = (h_inv[0, 0] * xs + h_inv[0, 1] * ys + h_inv[0, 2]) / denom
        sy = (h_inv[1, 0] * xs + h_inv[1, 1] * ys + h_inv[1, 2]) / denom
    valid = (
        np.isfinite(sx)
        & np.isfinite(sy)
        & (sx >= 0)
        & (sx <= width - 1)
        & (sy >= 0)
        & (sy <= height - 1)
    )
    sx = np.where(valid, sx, 0.0)
    sy = np.where(valid, sy, 0.0)
    out = bilinear_sample(frame, sx, sy)
    out[~valid] = 0.0
    if src_mask is not None:
        # a warped pixel is real only if all four bilinear taps were real
        src = np.asarray(src_mask, dtype=np.float64)
        cov = bilinear_sample(src[..., None], sx, sy)[..., 0]
        valid = valid & (cov >= 1.0 - 1e-9)
        out[~valid] = 0.0
    return out.astype(np.float32), valid


def warp_clip(clip: VideoClip, homographies: list[np.ndarray] | np.ndarray) -> VideoClip:
    """Warp every frame by its homography (B_t -> A_t maps)."""
    if len(homographies) != clip.num_frames:
        raise StructuralError("need one homography per frame")
    frames = np.empty_like(clip.frames)
    masks = np.empty(clip.frames.shape[:3], dtype=bool)
    for t in range(clip.num_frames):
        src_mask = clip.masks[t] if clip.masks is not None else None
        frames[t], masks[t] = warp_frame(clip.frame(t), homographies[t], src_mask=src_mask)
    return VideoClip(frames, masks)


def difference_volume(a: VideoClip, b_warped: VideoClip, masks: np.ndarray) -> np.ndarray:
    """Per-pixel squared RGB distance where both sources are valid, else 0.

    Returns (T, H, W) float64.
    """
    if a.frames.shape != b_warped.frames.shape:
        raise StructuralError(
            f"clip shapes differ: {a.frames.shape} vs {b_warped.frames.shape}"
        )
    masks = np.asarray(masks, dtype=bool)
    if masks.shape != a.frames.shape[:3]:
        raise StructuralError("mask stack does not match clip dimensions")
    diff = a.frames.astype(np.float64) - b_warped.frames.astype(np.float64)
    d = np.einsum("thwc,thwc->thw", diff, diff)
    d[~masks] = 0.0
    return d
