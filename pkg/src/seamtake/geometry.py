"""3x3 homography helpers used by alignment, the seam graph and warping.

Homographies are plain (3, 3) float64 arrays, normalized so H[2, 2] == 1.
All maps act on pixel coordinates (x, y).
"""

from __future__ import annotations

import numpy as np

from .errors import ModelError

IDENTITY = np.eye(3)


def normalize(h: np.ndarray) -> np.ndarray:
    """Rescale so the bottom-right entry is exactly 1."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (3, 3):
        raise ModelError(f"homography must be 3x3, got {h.shape}")
    if h[2, 2] == 0 or not np.isfinite(h).all():
        raise ModelError("homography is not normalizable")
    return h / h[2, 2]


def invert(h: np.ndarray) -> np.ndarray:
    try:
        inv = np.linalg.inv(np.asarray(h, dtype=np.float64))
    except np.linalg.LinAlgError as exc:
        raise ModelError("homography is singular") from exc
    return normalize(inv)


def translation(dx: float, dy: float) -> np.ndarray:
    h = np.eye(3)
    h[0, 2] = dx
    h[1, 2] = dy
    return h


def scaling(s: float) -> np.ndarray:
    return np.diag([s, s, 1.0])


def rotation_about(angle_rad: float, cx: float, cy: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return translation(cx, cy) @ rot @ translation(-cx, -cy)


def apply(h: np.ndarray, xy: np.ndarray) -> np.ndarray:
    """Map points through h.

    xy is (..., 2); returns the same shape. Raises on points mapped to
    the line at infinity.
    """
    xy = np.asarray(xy, dtype=np.float64)
    pts = np.concatenate([xy, np.ones(xy.shape[:-1] + (1,))], axis=-1)
    out = pts @ np.asarray(h, dtype=np.float64).T
    w = out[..., 2:3]
    if np.any(np.abs(w) < 1e-12):
        raise ModelError("point mapped to infinity by homography")
    return out[..., :2] / w


def corner_error(h_a: np.ndarray, h_b: np.ndarray, width: int, height: int) -> float:
    """Max displacement between the two maps over the frame corners, in px."""
    corners = np.array(
        [[0.0, 0.0], [width - 1.0, 0.0], [0.0, height - 1.0], [width - 1.0, height - 1.0]]
    )
    d = apply(h_a, corners) - apply(h_b, corners)
    return float(np.max(np.hypot(d[:, 0], d[:, 1])))


def conjugate_halfscale(h: np.ndarray) -> np.ndarray:
    """The same map expressed at half resolution: S H S^-1 with S = 1/2-scale."""
    s = scaling(0.5)
    return normalize(s @ np.asarray(h, dtype=np.float64) @ scaling(2.0))
