"""Video alignment: hierarchical compass block matching, robust homography
fitting, and temporally stable propagate-and-refine tracking.

The matcher minimizes the mean per-pixel RGB L1 distance between a block of
the first image and a shifted block of the second, normalized by the number
of pixels actually compared, so partially off-frame blocks compare fairly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry, video
from .errors import AlignmentError, MatchError, ModelError

# candidate order encodes the tie-break: keep the center, then prefer the
# smallest step in (dx, dy) lexicographic order
_CANDIDATES = (
    (0, 0),
    (-1, 0), (0, -1), (0, 1), (1, 0),
    (-1, -1), (-1, 1), (1, -1), (1, 1),
)

_MAX_COMPASS_ITERS = 64
_MIN_BLOCK_PX = 4


@dataclass(frozen=True)
class MatchParams:
    """Hierarchical compass search knobs: pyramid depth, grid size, overlap."""

    level: int = 5
    division: int = 5
    smooth: int = 0

    def __post_init__(self):
        if self.level < 1 or self.division < 1 or self.smooth < 0:
            raise ValueError(f"invalid match params {self}")


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 500
    inlier_px: float = 2.0
    seed: int = 0


@dataclass
class BlockMatch:
    """One matched block: center in the first image, displacement into the
    second, and the mean L1 cost at the optimum."""

    center: tuple[float, float]
    disp: tuple[float, float]
    cost: float
    degenerate: bool = False


@dataclass
class AlignmentTrack:
    """Per-frame spatial maps (B_t -> A_t) plus the per-clip temporal maps
    (entry t maps frame t+1 into frame t) propagation is built from."""

    spatial: np.ndarray
    temporal_a: np.ndarray
    temporal_b: np.ndarray
    anchor: int

    def __post_init__(self):
        self.spatial = np.asarray(self.spatial, dtype=np.float64)
        self.temporal_a = np.asarray(self.temporal_a, dtype=np.float64)
        self.temporal_b = np.asarray(self.temporal_b, dtype=np.float64)

    @property
    def num_frames(self) -> int:
        return self.spatial.shape[0]


def _block_cost(a, b, rect, dx, dy, a_valid=None, b_valid=None):
    """Mean L1 cost of comparing rect in `a` against rect shifted by (dx, dy)
    in `b`, over the pixels where both are inside and valid.

    Returns (cost, count); cost is None when nothing could be compared.
    """
    h, w = a.shape[:2]
    x0, y0, x1, y1 = rect
    ax0 = max(x0, 0, -dx)
    ax1 = min(x1, w, w - dx)
    ay0 = max(y0, 0, -dy)
    ay1 = min(y1, h, h - dy)
    if ax1 <= ax0 or ay1 <= ay0:
        return None, 0
    pa = a[ay0:ay1, ax0:ax1]
    pb = b[ay0 + dy : ay1 + dy, ax0 + dx : ax1 + dx]
    if a_valid is None and b_valid is None:
        return float(np.abs(pa - pb).mean()), pa.shape[0] * pa.shape[1]
    valid = np.ones(pa.shape[:2], dtype=bool)
    if a_valid is not None:
        valid &= a_valid[ay0:ay1, ax0:ax1]
    if b_valid is not None:
        valid &= b_valid[ay0 + dy : ay1 + dy, ax0 + dx : ax1 + dx]
    count = int(valid.sum())
    if count == 0:
        return None, 0
    per_px = np.abs(pa - pb).sum(axis=2)
    return float(per_px[valid].sum() / (3.0 * count)), count


def compass_step(a, b, cur, region, a_valid=None, b_valid=None):
    """One 9-neighbor descent step on the displacement, ties keep the center.

    `cur` is an integer (dx, dy); `region` is (x0, y0, x1, y1) in a's coords.
    """
    dx, dy = int(round(cur[0])), int(round(cur[1]))
    best = None
    best_cost = None
    for ddx, ddy in _CANDIDATES:
        cost, _ = _block_cost(a, b, region, dx + ddx, dy + ddy, a_valid, b_valid)
        if cost is None:
            continue
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best = (dx + ddx, dy + ddy)
    if best is None:
        raise MatchError("no overlap between images under any candidate shift")
    return best


def subpixel_refine(cost_minus: float, cost_center: float, cost_plus: float) -> float:
    """Vertex of the parabola through three equally spaced costs, clamped to
    [-0.5, 0.5]; 0 when the parabola degenerates."""
    if cost_center == 0.0:
        return 0.0
    denom = 2.0 * (cost_minus + cost_plus - 2.0 * cost_center)
    if denom <= 0 or not np.isfinite(denom):
        return 0.0
    off = (cost_minus - cost_plus) / denom
    return float(np.clip(off, -0.5, 0.5))


def _converge_block(a, b, rect, disp, a_valid=None, b_valid=None):
    """Iterate compass steps until the center wins (capped)."""
    dx, dy = int(round(disp[0])), int(round(disp[1]))
    for _ in range(_MAX_COMPASS_ITERS):
        nx, ny = compass_step(a, b, (dx, dy), rect, a_valid, b_valid)
        if (nx, ny) == (dx, dy):
            break
        dx, dy = nx, ny
    return dx, dy


def _fractional_cost(a, b, rect, u, v, a_valid=None, b_valid=None):
    """Block cost at a fractional displacement; b is sampled bilinearly by
    mixing the four surrounding integer shifts."""
    u0 = int(np.floor(u))
    v0 = int(np.floor(v))
    fu = u - u0
    fv = v - v0
    h, w = a.shape[:2]
    x0, y0, x1, y1 = rect
    ax0 = max(x0, 0, -u0, -(u0 + 1))
    ax1 = min(x1, w, w - u0, w - (u0 + 1))
    ay0 = max(y0, 0, -v0, -(v0 + 1))
    ay1 = min(y1, h, h - v0, h - (v0 + 1))
    if ax1 <= ax0 or ay1 <= ay0:
        return None
    pa = a[ay0:ay1, ax0:ax1].astype(np.float64)

    def tap(du, dv):
        return b[ay0 + v0 + dv : ay1 + v0 + dv, ax0 + u0 + du : ax1 + u0 + du]

    pb = (
        (1 - fu) * (1 - fv) * tap(0, 0)
        + fu * (1 - fv) * tap(1, 0)
        + (1 - fu) * fv * tap(0, 1)
        + fu * fv * tap(1, 1)
    )
    valid = np.ones(pa.shape[:2], dtype=bool)
    if a_valid is not None:
        valid &= a_valid[ay0:ay1, ax0:ax1]
    if b_valid is not None:

        def vtap(du, dv):
            return b_valid[ay0 + v0 + dv : ay1 + v0 + dv, ax0 + u0 + du : ax1 + u0 + du]

        valid &= vtap(0, 0) & vtap(1, 0) & vtap(0, 1) & vtap(1, 1)
    count = int(valid.sum())
    if count == 0:
        return None
    return float(np.abs(pa - pb).sum(axis=2)[valid].sum() / (3.0 * count))


def _subpixel_block(a, b, rect, dx, dy, a_valid=None, b_valid=None):
    """Fractional refinement around a converged integer displacement:
    per-axis parabolas on bilinearly shifted costs, at halving step sizes."""
    c0, _ = _block_cost(a, b, rect, dx, dy, a_valid, b_valid)
    if c0 is None or c0 == 0.0:
        return 0.0, 0.0, c0
    u, v = float(dx), float(dy)
    cur = c0
    for step in (0.5, 0.25):
        for axis in (0, 1):
            if axis == 0:
                cm = _fractional_cost(a, b, rect, u - step, v, a_valid, b_valid)
                cp = _fractional_cost(a, b, rect, u + step, v, a_valid, b_valid)
            else:
                cm = _fractional_cost(a, b, rect, u, v - step, a_valid, b_valid)
                cp = _fractional_cost(a, b, rect, u, v + step, a_valid, b_valid)
            if cm is None or cp is None:
                continue
            best = min(cm, cur, cp)
            if cm == best and cm < cur:
                delta = -step
            elif cp == best and cp < cur:
                delta = step
            else:
                delta = step * subpixel_refine(cm, cur, cp)
            if delta:
                if axis == 0:
                    u += delta
                else:
                    v += delta
                moved = _fractional_cost(
                    a, b, rect, u, v, a_valid, b_valid
                )
                if moved is not None:
                    cur = moved
    fx = float(np.clip(u - dx, -0.75, 0.75))
    fy = float(np.clip(v - dy, -0.75, 0.75))
    return fx, fy, c0


def _pyramid(img, num_levels):
    """Coarse-to-fine list of `num_levels` images (last is the original)."""
    levels = [np.asarray(img, dtype=np.float32)]
    for _ in range(num_levels - 1):
        levels.append(video.downsample2(levels[-1]))
    return levels[::-1]


def _mask_pyramid(mask, num_levels):
    if mask is None:
        return [None] * num_levels
    levels = [np.asarray(mask, dtype=bool)]
    for _ in range(num_levels - 1):
        levels.append(video.downsample2_mask(levels[-1]))
    return levels[::-1]


def compass_search(a, b, levels: int, a_valid=None, b_valid=None) -> tuple[float, float]:
    """Whole-frame displacement of b relative to a by coarse-to-fine
    single-pixel descent, with subpixel refinement at the finest level."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    a = video.check_frame(a)
    b = video.check_frame(b)
    if a.shape != b.shape:
        raise MatchError("compass search needs same-size images")
    pyr_a = _pyramid(a, levels)
    pyr_b = _pyramid(b, levels)
    pyr_av = _mask_pyramid(a_valid, levels)
    pyr_bv = _mask_pyramid(b_valid, levels)
    dx = dy = 0
    for li, (pa, pb) in enumerate(zip(pyr_a, pyr_b)):
        if li > 0:
            dx, dy = dx * 2, dy * 2
        rect = (0, 0, pa.shape[1], pa.shape[0])
        dx, dy = _converge_block(pa, pb, rect, (dx, dy), pyr_av[li], pyr_bv[li])
    rect = (0, 0, a.shape[1], a.shape[0])
    fx, fy, _ = _subpixel_block(a, b, rect, dx, dy, pyr_av[-1], pyr_bv[-1])
    return float(dx + fx), float(dy + fy)


def _bounded_level(level: int, width: int, height: int) -> int:
    """Reduce pyramid depth until the coarsest whole-frame block is at least
    4x4 pixels."""
    bounded = level
    while bounded > 1 and min(width, height) // (2 ** bounded) < _MIN_BLOCK_PX:
        bounded -= 1
    if bounded != level:
        warnings.warn(
            f"match level reduced from {level} to {bounded} so the coarsest "
            f"block stays at least {_MIN_BLOCK_PX}px",
            stacklevel=3,
        )
    return bounded


def _grid_rects(width, height, g, smooth):
    """Block rectangles of a g-by-g grid, each expanded by `smooth` blocks of
    overlap and clipped to the frame. Returns (rects, centers)."""
    xs = np.round(np.linspace(0, width, g + 1)).astype(int)
    ys = np.round(np.linspace(0, height, g + 1)).astype(int)
    rects = []
    centers = []
    for j in range(g):
        for i in range(g):
            bw = xs[i + 1] - xs[i]
            bh = ys[j + 1] - ys[j]
            x0 = max(0, xs[i] - smooth * bw)
            x1 = min(width, xs[i + 1] + smooth * bw)
            y0 = max(0, ys[j] - smooth * bh)
            y1 = min(height, ys[j + 1] + smooth * bh)
            rects.append((x0, y0, x1, y1))
            centers.append(((xs[i] + xs[i + 1] - 1) / 2.0, (ys[j] + ys[j + 1] - 1) / 2.0))
    return rects, centers


def hierarchical_match(
    a,
    b,
    p: MatchParams,
    init: np.ndarray | None = None,
    a_valid=None,
    b_valid=None,
) -> list[BlockMatch]:
    """Coarse-to-fine block matching: one whole-frame block at the coarsest
    pyramid level, then a division-by-division grid at every finer level,
    each block starting from its containing parent's doubled displacement.

    If `init` is given, b is warped by it first, so the returned
    displacements describe only the residual motion.
    """
    a = video.check_frame(a)
    b = video.check_frame(b)
    if a.shape != b.shape:
        raise MatchError("hierarchical match needs same-size images")
    height, width = a.shape[:2]
    if init is not None:
        b, warped_valid = video.warp_frame(b, init, src_mask=b_valid)
        b_valid = warped_valid
    level = _bounded_level(p.level, width, height)
    num_levels = level + 1
    pyr_a = _pyramid(a, num_levels)
    pyr_b = _pyramid(b, num_levels)
    pyr_av = _mask_pyramid(a_valid, num_levels)
    pyr_bv = _mask_pyramid(b_valid, num_levels)

    # level 0: single global block
    img_a, img_b = pyr_a[0], pyr_b[0]
    rect = (0, 0, img_a.shape[1], img_a.shape[0])
    try:
        gdx, gdy = _converge_block(img_a, img_b, rect, (0, 0), pyr_av[0], pyr_bv[0])
    except MatchError:
        gdx = gdy = 0
    disps = np.array([[(gdx, gdy)]], dtype=np.float64).reshape(1, 1, 2)
    prev_g = 1

    for li in range(1, num_levels):
        img_a, img_b = pyr_a[li], pyr_b[li]
        h_l, w_l = img_a.shape[:2]
        g = p.division
        rects, _ = _grid_rects(w_l, h_l, g, p.smooth)
        new_disps = np.zeros((g, g, 2), dtype=np.float64)
        for j in range(g):
            for i in range(g):
                pi = min(i * prev_g // g, prev_g - 1)
                pj = min(j * prev_g // g, prev_g - 1)
                d0 = disps[pj, pi] * 2.0
                try:
                    dx, dy = _converge_block(
                        img_a, img_b, rects[j * g + i], d0, pyr_av[li], pyr_bv[li]
                    )
                except MatchError:
                    dx, dy = int(round(d0[0])), int(round(d0[1]))
                new_disps[j, i] = (dx, dy)
        disps = new_disps
        prev_g = g

    # final level: subpixel refinement and degeneracy flagging
    img_a, img_b = pyr_a[-1], pyr_b[-1]
    g = prev_g
    rects, centers = _grid_rects(width, height, g, p.smooth)
    matches = []
    for j in range(g):
        for i in range(g):
            rect = rects[j * g + i]
            dx, dy = int(disps[j, i, 0]), int(disps[j, i, 1])
            block = img_a[rect[1] : rect[3], rect[0] : rect[2]]
            degenerate = bool(block.size == 0 or np.ptp(block) == 0)
            cost = np.inf
            fdx, fdy = float(dx), float(dy)
            if not degenerate:
                cand = [
                    _block_cost(img_a, img_b, rect, dx + d[0], dy + d[1], pyr_av[-1], pyr_bv[-1])[0]
                    for d in _CANDIDATES
                ]
                known = [c for c in cand if c is not None]
                if not known:
                    degenerate = True
                elif len(set(known)) == 1 and len(known) == len(cand):
                    # flat cost surface: the block cannot discriminate shifts
                    degenerate = True
                else:
                    fx, fy, c0 = _subpixel_block(
                        img_a, img_b, rect, dx, dy, pyr_av[-1], pyr_bv[-1]
                    )
                    fdx, fdy = dx + fx, dy + fy
                    cost = c0 if c0 is not None else np.inf
            matches.append(
                BlockMatch(
                    center=centers[j * g + i],
                    disp=(fdx, fdy),
                    cost=float(cost),
                    degenerate=degenerate,
                )
            )
    return matches


def _dlt_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares homography src -> dst via the normalized DLT."""

    def normalize_pts(pts):
        centroid = pts.mean(axis=0)
        d = np.hypot(*(pts - centroid).T).mean()
        scale = np.sqrt(2.0) / d if d > 1e-12 else 1.0
        t = np.array(
            [[scale, 0, -scale * centroid[0]], [0, scale, -scale * centroid[1]], [0, 0, 1]]
        )
        return (pts - centroid) * scale, t

    sn, ts = normalize_pts(src)
    dn, td = normalize_pts(dst)
    n = src.shape[0]
    a = np.zeros((2 * n, 9))
    a[0::2, 0:2] = -sn
    a[0::2, 2] = -1
    a[0::2, 6:8] = sn * dn[:, 0:1]
    a[0::2, 8] = dn[:, 0]
    a[1::2, 3:5] = -sn
    a[1::2, 5] = -1
    a[1::2, 6:8] = sn * dn[:, 1:2]
    a[1::2, 8] = dn[:, 1]
    _, _, vt = np.linalg.svd(a)
    h = vt[-1].reshape(3, 3)
    h = np.linalg.inv(td) @ h @ ts
    if abs(h[2, 2]) < 1e-12:
        raise ModelError("degenerate homography solution")
    return geometry.normalize(h)


def _any_collinear(pts: np.ndarray, tol: float = 1e-6) -> bool:
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            for k in range(j + 1, len(pts)):
                v1 = pts[j] - pts[i]
                v2 = pts[k] - pts[i]
                if abs(v1[0] * v2[1] - v1[1] * v2[0]) < tol:
                    return True
    return False


def fit_homography_ransac(
    matches: list[BlockMatch],
    iterations: int = 500,
    inlier_px: float = 2.0,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """RANSAC homography over block correspondences center -> center + disp.

    Returns the model refit by least squares over the best consensus set,
    plus per-match inlier flags (degenerate matches are never inliers).
    """
    usable = np.array([not m.degenerate for m in matches], dtype=bool)
    idx = np.flatnonzero(usable)
    if idx.size < 4:
        raise ModelError(f"need at least 4 usable matches, have {idx.size}")
    src = np.array([matches[i].center for i in idx], dtype=np.float64)
    dst = src + np.array([matches[i].disp for i in idx], dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(seed)

    best_count = 0
    best_inliers = None
    n = idx.size
    for _ in range(iterations):
        sample = rng.choice(n, 4, replace=False)
        if _any_collinear(src[sample]) or _any_collinear(dst[sample]):
            continue
        try:
            h = _dlt_homography(src[sample], dst[sample])
        except (ModelError, np.linalg.LinAlgError):
            continue
        try:
            proj = geometry.apply(h, src)
        except ModelError:
            continue
        err = np.hypot(*(proj - dst).T)
        inl = err < inlier_px
        count = int(inl.sum())
        if count > best_count:
            best_count = count
            best_inliers = inl
    if best_inliers is None or best_count < 4:
        raise ModelError("RANSAC found no valid model (all samples degenerate)")
    h = _dlt_homography(src[best_inliers], dst[best_inliers])
    flags = np.zeros(len(matches), dtype=bool)
    flags[idx[best_inliers]] = True
    return h, flags


def estimate_temporal(
    clip: video.VideoClip,
    p: MatchParams,
    ransac: RansacParams = RansacParams(),
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Per-pair homographies inside one clip; entry t maps frame t+1 into
    frame t."""
    if clip.num_frames < 2:
        raise AlignmentError("temporal estimation needs at least 2 frames")
    if rng is None:
        rng = np.random.default_rng(ransac.seed)
    out = np.empty((clip.num_frames - 1, 3, 3))
    for t in range(clip.num_frames - 1):
        matches = hierarchical_match(
            clip.frame(t), clip.frame(t + 1), p,
            a_valid=clip.masks[t] if clip.masks is not None else None,
            b_valid=clip.masks[t + 1] if clip.masks is not None else None,
        )
        h, _ = fit_homography_ransac(matches, ransac.iterations, ransac.inlier_px, rng=rng)
        out[t] = geometry.invert(h)
    return out


def propagate_alignment(h_t: np.ndarray, h_a: np.ndarray, h_b: np.ndarray) -> np.ndarray:
    """Predict the next frame's spatial map from the temporal maps:
    H_next = H_a^-1 * H_t * H_b."""
    return geometry.normalize(geometry.invert(h_a) @ np.asarray(h_t) @ np.asarray(h_b))


def _fit_spatial(a_frame, b_frame, p, ransac, rng, init=None, a_valid=None, b_valid=None):
    matches = hierarchical_match(a_frame, b_frame, p, init=init, a_valid=a_valid, b_valid=b_valid)
    h, _ = fit_homography_ransac(matches, ransac.iterations, ransac.inlier_px, rng=rng)
    correction = geometry.invert(h)
    if init is None:
        return correction
    return geometry.normalize(correction @ init)


def fit_frame_alignment(
    a_frame,
    b_frame,
    match_p: MatchParams = MatchParams(),
    residual_p: MatchParams = MatchParams(level=2, division=8, smooth=0),
    residual_rounds: int = 2,
    ransac: RansacParams = RansacParams(),
    rng: np.random.Generator | None = None,
    a_valid=None,
    b_valid=None,
) -> np.ndarray:
    """Full single-pair alignment: hierarchical fit, then residual rounds
    that pre-warp b by the current estimate and refit the small correction.

    Block matching reports each block's average displacement, which sits at
    the block's texture centroid rather than its center under rotation or
    perspective; re-matching the residual removes that bias. Returns the
    homography mapping b into a."""
    if rng is None:
        rng = np.random.default_rng(ransac.seed)
    h = _fit_spatial(a_frame, b_frame, match_p, ransac, rng, a_valid=a_valid, b_valid=b_valid)
    for _ in range(residual_rounds):
        h = _fit_spatial(
            a_frame, b_frame, residual_p, ransac, rng,
            init=h, a_valid=a_valid, b_valid=b_valid,
        )
    return h


def align_videos(
    a: video.VideoClip,
    b: video.VideoClip,
    anchor: int,
    match_p: MatchParams = MatchParams(),
    refine_p: MatchParams = MatchParams(level=1, division=4, smooth=1),
    ransac: RansacParams = RansacParams(),
    refine: bool = True,
    band: np.ndarray | None = None,
    temporal: tuple[np.ndarray, np.ndarray] | None = None,
) -> AlignmentTrack:
    """Align clip b to clip a: fit the anchor frame directly, then propagate
    along both directions through the temporal homographies, correcting the
    residual drift of each prediction with a light block-matching pass.

    With refine=False the track is propagation-only (drifts over time; kept
    for diagnostics). `band` optionally restricts matching to per-frame
    region masks.
    """
    if a.num_frames != b.num_frames:
        raise AlignmentError("clips must be synchronized to equal length")
    t_count = a.num_frames
    if not 0 <= anchor < t_count:
        raise AlignmentError(f"anchor {anchor} outside 0..{t_count - 1}")
    if band is not None and band.shape != (t_count, a.height, a.width):
        raise AlignmentError("band mask stack does not match clips")
    rng = np.random.default_rng(ransac.seed)

    def band_at(t):
        return band[t] if band is not None else None

    def a_mask(t):
        m = a.masks[t] if a.masks is not None else None
        bd = band_at(t)
        if m is None:
            return bd
        return m if bd is None else (m & bd)

    spatial = np.empty((t_count, 3, 3))
    try:
        spatial[anchor] = fit_frame_alignment(
            a.frame(anchor), b.frame(anchor), match_p,
            ransac=ransac, rng=rng,
            a_valid=a_mask(anchor),
            b_valid=b.masks[anchor] if b.masks is not None else None,
        )
    except (ModelError, MatchError) as exc:
        raise AlignmentError(
            f"could not fit alignment at anchor frame {anchor}; "
            f"try an anchor where the takes look similar ({exc})"
        ) from exc

    if temporal is not None:
        temporal_a, temporal_b = temporal
    elif t_count > 1:
        temporal_a = estimate_temporal(a, match_p, ransac, rng=rng)
        temporal_b = estimate_temporal(b, match_p, ransac, rng=rng)
    else:
        temporal_a = np.empty((0, 3, 3))
        temporal_b = np.empty((0, 3, 3))

    def step(t_from, t_to):
        if t_to > t_from:
            pred = propagate_alignment(spatial[t_from], temporal_a[t_from], temporal_b[t_from])
        else:
            pred = geometry.normalize(
                temporal_a[t_to] @ spatial[t_from] @ geometry.invert(temporal_b[t_to])
            )
        if not refine:
            return pred
        try:
            return _fit_spatial(
                a.frame(t_to), b.frame(t_to), refine_p, ransac, rng,
                init=pred,
                a_valid=a_mask(t_to),
                b_valid=b.masks[t_to] if b.masks is not None else None,
            )
        except (ModelError, MatchError):
            warnings.warn(f"drift refinement failed at frame {t_to}; keeping prediction")
            return pred

    for t in range(anchor, t_count - 1):
        spatial[t + 1] = step(t, t + 1)
    for t in range(anchor, 0, -1):
        spatial[t - 1] = step(t, t - 1)
    return AlignmentTrack(spatial, temporal_a, temporal_b, anchor)


def realign_band(
    a: video.VideoClip,
    b: video.VideoClip,
    track: AlignmentTrack,
    band: np.ndarray,
    match_p: MatchParams = MatchParams(),
    refine_p: MatchParams = MatchParams(level=1, division=4, smooth=1),
    ransac: RansacParams = RansacParams(),
) -> AlignmentTrack:
    """Re-run alignment with the match cost restricted to a per-frame band
    (typically the region around an initial seam). Temporal homographies are
    reused from the existing track."""
    band = np.asarray(band, dtype=bool)
    if band.shape != (a.num_frames, a.height, a.width):
        raise AlignmentError("band mask stack does not match clips")
    for t in range(band.shape[0]):
        if not band[t].any():
            raise AlignmentError(f"realignment band is empty on frame {t}")
    try:
        return align_videos(
            a, b, track.anchor, match_p, refine_p, ransac,
            band=band, temporal=(track.temporal_a, track.temporal_b),
        )
    except AlignmentError as exc:
        raise AlignmentError(
            f"realignment band is too small for a stable fit ({exc})"
        ) from exc
