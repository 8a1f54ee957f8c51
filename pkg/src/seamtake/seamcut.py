"""Spatiotemporal seam computation.

Builds a 3D grid flow network over the difference volume where temporal
adjacency follows per-frame-pair homographies (so a "stationary" seam tracks
scene content), and labels pixels A/B by min-cut. A coarse-to-fine driver
keeps graphs small by re-optimizing only a band around the upsampled seam.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import geometry, video
from .errors import ConstraintConflictError, StructuralError
from .maxflow import FlowNetwork

LABEL_A = 0
LABEL_B = 1
_LABEL_CODES = {"A": LABEL_A, "B": LABEL_B}


@dataclass(frozen=True)
class SeamParams:
    """Seam energy / refinement knobs: temporal weight, pyramid levels, band
    growth exponent (the band is grown by 2**grow pixels)."""

    lam: float = 1.0
    level: int = 3
    grow: int = 1

    def __post_init__(self):
        if self.lam < 0 or self.level < 0 or self.grow < 0:
            raise ValueError(f"invalid seam params {self}")


class StrokeSet:
    """User-painted hard constraints: (frame, x, y, label) tuples."""

    def __init__(self, entries=None):
        if entries is None or len(entries) == 0:
            self.entries = np.zeros((0, 4), dtype=np.int32)
        else:
            self.entries = np.asarray(entries, dtype=np.int32).reshape(-1, 4)

    @classmethod
    def from_points(cls, points):
        """points: iterable of (t, x, y, label) with label 'A'/'B' or 0/1."""
        rows = []
        for t, x, y, label in points:
            code = _LABEL_CODES[label] if isinstance(label, str) else int(label)
            rows.append((t, x, y, code))
        return cls(np.array(rows, dtype=np.int32) if rows else None)

    def __len__(self):
        return self.entries.shape[0]

    def add(self, t: int, x: int, y: int, label) -> None:
        code = _LABEL_CODES[label] if isinstance(label, str) else int(label)
        self.entries = np.vstack([self.entries, np.array([[t, x, y, code]], dtype=np.int32)])

    def erase(self, t: int, x: int, y: int) -> None:
        e = self.entries
        keep = ~((e[:, 0] == t) & (e[:, 1] == x) & (e[:, 2] == y))
        self.entries = e[keep]

    def has_label(self, code: int) -> bool:
        return bool(np.any(self.entries[:, 3] == code))

    def counts(self, shape: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
        """Rasterize to per-pixel A/B stroke counts over a (T, H, W) volume."""
        t_n, h, w = shape
        count_a = np.zeros(shape, dtype=np.int32)
        count_b = np.zeros(shape, dtype=np.int32)
        e = self.entries
        if e.size:
            inside = (
                (e[:, 0] >= 0) & (e[:, 0] < t_n)
                & (e[:, 1] >= 0) & (e[:, 1] < w)
                & (e[:, 2] >= 0) & (e[:, 2] < h)
            )
            if not inside.all():
                raise StructuralError("stroke outside the volume bounds")
            for t, x, y, code in e:
                if code == LABEL_A:
                    count_a[t, y, x] += 1
                else:
                    count_b[t, y, x] += 1
        return count_a, count_b

    def to_list(self) -> list[list[int]]:
        return self.entries.tolist()


def _pool2(vol: np.ndarray, axis: int, reducer) -> np.ndarray:
    n = vol.shape[axis]
    starts = np.arange(0, n, 2)
    return reducer(vol, starts, axis=axis)


def _pool_sum(vol: np.ndarray) -> np.ndarray:
    """Sum over 2x2x2 blocks (t, y, x), odd tails pooled as-is."""
    out = vol
    for axis in range(3):
        out = _pool2(out, axis, np.add.reduceat)
    return out


def _pool_all(mask: np.ndarray) -> np.ndarray:
    """Logical AND over 2x2x2 blocks."""
    inv = (~mask).astype(np.int32)
    return _pool_sum(inv) == 0


def motion_targets(motion_t: np.ndarray, width: int, height: int):
    """Forward-map every pixel of a frame through one motion homography,
    rounded to the nearest pixel. Returns (tx, ty, valid) arrays (H, W)."""
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    m = np.asarray(motion_t, dtype=np.float64)
    denom = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = (m[0, 0] * xs + m[0, 1] * ys + m[0, 2]) / denom
        ty = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) / denom
    tx = np.rint(tx)
    ty = np.rint(ty)
    valid = (
        np.isfinite(tx) & np.isfinite(ty)
        & (tx >= 0) & (tx < width) & (ty >= 0) & (ty < height)
    )
    return tx.astype(np.int64), ty.astype(np.int64), valid


def identity_motion(num_frames: int) -> np.ndarray:
    return np.broadcast_to(np.eye(3), (max(num_frames - 1, 0), 3, 3)).copy()


@dataclass
class SeamGraph:
    """A built flow network plus the bookkeeping to read a labeling back."""

    net: FlowNetwork
    node_ids: np.ndarray
    shape: tuple[int, int, int]
    base_labels: np.ndarray | None
    const_a: np.ndarray
    const_b: np.ndarray
    inf_cap: float
    num_spatial_edges: int = 0
    num_temporal_edges: int = 0
    num_terminal_links: int = 0

    @property
    def num_nodes(self) -> int:
        return self.net.num_nodes

    def add_terminal(self, t: int, mask: np.ndarray, label: int) -> None:
        ids = self.node_ids[t][mask]
        ids = ids[ids >= 0]
        if ids.size == 0:
            return
        if label == LABEL_A:
            self.net.add_source_edges(ids, self.inf_cap)
        else:
            self.net.add_sink_edges(ids, self.inf_cap)
        self.num_terminal_links += ids.size


def build_graph(
    d: np.ndarray,
    strokes,
    params: SeamParams,
    motion: np.ndarray,
    band: np.ndarray | None = None,
    boundary_labels: np.ndarray | None = None,
) -> SeamGraph:
    """Construct the seam flow network over a difference volume.

    `strokes` may be a StrokeSet or a pre-rasterized (const_a, const_b) pair
    of constraint masks. With `band`, only band pixels become nodes and
    fixed neighbors outside the band pull via infinite terminal links of
    their label from `boundary_labels`.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 3:
        raise StructuralError(f"difference volume must be (T, H, W), got {d.shape}")
    t_n, h, w = d.shape
    if len(motion) != max(t_n - 1, 0):
        raise StructuralError("need one motion homography per consecutive frame pair")
    if band is not None:
        band = np.asarray(band, dtype=bool)
        if band.shape != d.shape:
            raise StructuralError("band shape mismatch")
        if boundary_labels is None:
            raise StructuralError("band-restricted graphs need boundary labels")

    if isinstance(strokes, StrokeSet):
        count_a, count_b = strokes.counts(d.shape)
        conflict = (count_a > 0) & (count_b > 0)
        if conflict.any():
            t, y, x = np.argwhere(conflict)[0]
            raise ConstraintConflictError(
                f"pixel (frame {t}, x {x}, y {y}) is stroked with both labels"
            )
        const_a = count_a > 0
        const_b = count_b > 0
    else:
        const_a, const_b = strokes
        const_a = np.asarray(const_a, dtype=bool)
        const_b = np.asarray(const_b, dtype=bool)

    free = band if band is not None else np.ones(d.shape, dtype=bool)
    node_ids = np.full(d.shape, -1, dtype=np.int64)
    node_ids[free] = np.arange(int(free.sum()))
    net = FlowNetwork(int(free.sum()))

    graph = SeamGraph(
        net=net,
        node_ids=node_ids,
        shape=d.shape,
        base_labels=None if boundary_labels is None else np.asarray(boundary_labels, dtype=np.uint8).copy(),
        const_a=const_a,
        const_b=const_b,
        inf_cap=0.0,
    )

    finite_sum = 0.0
    pull_a = np.zeros(d.shape, dtype=bool)
    pull_b = np.zeros(d.shape, dtype=bool)

    def fixed_label(tt, yy, xx):
        return graph.base_labels[tt, yy, xx]

    def add_pair_edges(id_i, id_k, w_ik, in_i, in_k, coord_i, coord_k):
        """Split neighbor pairs into free-free edges and free-fixed pulls."""
        nonlocal finite_sum
        both = in_i & in_k
        net.add_edges(id_i[both], id_k[both], w_ik[both])
        finite_sum += float(w_ik[both].sum())
        only_i = in_i & ~in_k
        if only_i.any() and graph.base_labels is not None:
            lbl = graph.base_labels[coord_k[0][only_i], coord_k[1][only_i], coord_k[2][only_i]]
            ids = id_i[only_i]
            sel_a = lbl == LABEL_A
            _mark_pull(pull_a, pull_b, coord_i, only_i, sel_a)
        only_k = in_k & ~in_i
        if only_k.any() and graph.base_labels is not None:
            lbl = graph.base_labels[coord_i[0][only_k], coord_i[1][only_k], coord_i[2][only_k]]
            sel_a = lbl == LABEL_A
            _mark_pull(pull_a, pull_b, coord_k, only_k, sel_a)
        return int(both.sum())

    def _mark_pull(pa, pb, coords, sel, is_a):
        tt, yy, xx = (c[sel] for c in coords)
        pa[tt[is_a], yy[is_a], xx[is_a]] = True
        pb[tt[~is_a], yy[~is_a], xx[~is_a]] = True

    # spatial edges: right and down neighbors; only pairs touching a free
    # pixel are materialized, so band graphs stay small
    for dt, dy, dx in ((0, 0, 1), (0, 1, 0)):
        sel = np.zeros(d.shape, dtype=bool)
        if dx:
            sel[:, :, :-1] = free[:, :, :-1] | free[:, :, 1:]
        else:
            sel[:, :-1, :] = free[:, :-1, :] | free[:, 1:, :]
        ti, yi, xi = np.nonzero(sel)
        tk, yk, xk = ti + dt, yi + dy, xi + dx
        w_ik = (d[ti, yi, xi] + d[tk, yk, xk]) / 2.0
        in_i = free[ti, yi, xi]
        in_k = free[tk, yk, xk]
        graph.num_spatial_edges += add_pair_edges(
            node_ids[ti, yi, xi], node_ids[tk, yk, xk], w_ik,
            in_i, in_k, (ti, yi, xi), (tk, yk, xk),
        )

    # temporal edges along motion links
    for t in range(t_n - 1):
        tx, ty, valid = motion_targets(motion[t], w, h)
        sel = valid.copy()
        vy, vx = np.nonzero(valid)
        sel[vy, vx] = free[t][vy, vx] | free[t + 1][ty[vy, vx], tx[vy, vx]]
        yi, xi = np.nonzero(sel)
        ti = np.full(yi.shape, t)
        tk = ti + 1
        yk, xk = ty[yi, xi], tx[yi, xi]
        w_ik = params.lam * (d[ti, yi, xi] + d[tk, yk, xk]) / 2.0
        in_i = free[ti, yi, xi]
        in_k = free[tk, yk, xk]
        graph.num_temporal_edges += add_pair_edges(
            node_ids[ti, yi, xi], node_ids[tk, yk, xk], w_ik,
            in_i, in_k, (ti, yi, xi), (tk, yk, xk),
        )

    graph.inf_cap = finite_sum + 1.0
    pinned_a = (const_a | pull_a) & free
    pinned_b = (const_b | pull_b) & free
    for t in range(t_n):
        graph.add_terminal(t, pinned_a[t], LABEL_A)
        graph.add_terminal(t, pinned_b[t], LABEL_B)
    return graph


def apply_keyframes(graph: SeamGraph, keyframe_labels: dict[int, np.ndarray]) -> None:
    """Pin whole frames to fixed labelings (hard constraints)."""
    for t, labels in keyframe_labels.items():
        labels = np.asarray(labels, dtype=np.uint8)
        if labels.shape != graph.shape[1:]:
            raise StructuralError(f"keyframe {t} labeling has wrong shape")
        clash_a = graph.const_a[t] & (labels == LABEL_B)
        clash_b = graph.const_b[t] & (labels == LABEL_A)
        if clash_a.any() or clash_b.any():
            raise ConstraintConflictError(f"keyframe {t} contradicts a stroke")
        graph.add_terminal(t, labels == LABEL_A, LABEL_A)
        graph.add_terminal(t, labels == LABEL_B, LABEL_B)


def min_cut(graph: SeamGraph) -> tuple[np.ndarray, float]:
    """Solve the network; returns (labels, cut energy). Free pixels on the
    source side take label A."""
    flow, source_side = graph.net.solve()
    if graph.base_labels is not None:
        labels = graph.base_labels.copy()
    else:
        labels = np.full(graph.shape, LABEL_B, dtype=np.uint8)
    in_graph = graph.node_ids >= 0
    labels[in_graph] = np.where(source_side[graph.node_ids[in_graph]], LABEL_A, LABEL_B)
    return labels, float(flow)


def labeling_energy(labels: np.ndarray, d: np.ndarray, lam: float, motion: np.ndarray) -> float:
    """Visibility penalty of a labeling: mean difference of every cut
    neighbor pair, temporal pairs weighted by lam."""
    labels = np.asarray(labels)
    d = np.asarray(d, dtype=np.float64)
    t_n, h, w = d.shape
    total = 0.0
    cut = labels[:, :, :-1] != labels[:, :, 1:]
    total += float((((d[:, :, :-1] + d[:, :, 1:]) / 2.0)[cut]).sum())
    cut = labels[:, :-1, :] != labels[:, 1:, :]
    total += float((((d[:, :-1, :] + d[:, 1:, :]) / 2.0)[cut]).sum())
    for t in range(t_n - 1):
        tx, ty, valid = motion_targets(motion[t], w, h)
        yi, xi = np.nonzero(valid)
        yk, xk = ty[yi, xi], tx[yi, xi]
        cut = labels[t, yi, xi] != labels[t + 1, yk, xk]
        total += float(lam * ((d[t, yi, xi] + d[t + 1, yk, xk]) / 2.0)[cut].sum())
    return total


def seam_boundary(labels: np.ndarray, motion: np.ndarray | None = None) -> np.ndarray:
    """Label-change boundary pixels: the trailing pixel of each differing
    neighbor pair (spatially) and the target pixel of each differing motion
    link."""
    labels = np.asarray(labels)
    t_n, h, w = labels.shape
    boundary = np.zeros(labels.shape, dtype=bool)
    diff = labels[:, :, :-1] != labels[:, :, 1:]
    boundary[:, :, 1:] |= diff
    diff = labels[:, :-1, :] != labels[:, 1:, :]
    boundary[:, 1:, :] |= diff
    if motion is not None:
        for t in range(t_n - 1):
            tx, ty, valid = motion_targets(motion[t], w, h)
            yi, xi = np.nonzero(valid)
            yk, xk = ty[yi, xi], tx[yi, xi]
            diff = labels[t, yi, xi] != labels[t + 1, yk, xk]
            boundary[t + 1, yk[diff], xk[diff]] = True
    return boundary


def grow_band(labels: np.ndarray, grow: int, motion: np.ndarray) -> np.ndarray:
    """Band of free pixels around the seam: Chebyshev dilation by 2**grow
    spatially, one dilation step along the motion links temporally."""
    boundary = seam_boundary(labels, motion)
    if not boundary.any():
        return boundary
    radius = 2 ** grow
    size = 2 * radius + 1
    band = np.zeros(labels.shape, dtype=bool)
    for t in range(labels.shape[0]):
        band[t] = ndimage.maximum_filter(boundary[t].astype(np.uint8), size=size) > 0
    t_n, h, w = labels.shape
    out = band.copy()
    for t in range(t_n - 1):
        tx, ty, valid = motion_targets(motion[t], w, h)
        sel = valid & band[t]
        out[t + 1, ty[sel], tx[sel]] = True
        back = geometry.invert(motion[t])
        bx, by, bvalid = motion_targets(back, w, h)
        sel = bvalid & band[t + 1]
        out[t, by[sel], bx[sel]] = True
    return out


def upsample_labels(labels: np.ndarray, fine_shape: tuple[int, int, int]) -> np.ndarray:
    """Nearest-neighbor 2x upsampling in t, y and x, clipped to fine_shape."""
    up = labels
    for axis in range(3):
        up = np.repeat(up, 2, axis=axis)
    return np.ascontiguousarray(up[: fine_shape[0], : fine_shape[1], : fine_shape[2]])


@dataclass
class CutStats:
    levels: list[dict] = field(default_factory=list)
    total_time: float = 0.0
    energy: float = 0.0

    @property
    def peak_memory_bytes(self) -> int:
        return max((lv["memory_bytes"] for lv in self.levels), default=0)

    @property
    def total_nodes(self) -> int:
        return sum(lv["nodes"] for lv in self.levels)

    def report_lines(self) -> list[str]:
        lines = []
        for lv in self.levels:
            lines.append(
                "level {level}: volume {t}x{h}x{w} nodes {nodes} edges {edges} "
                "mem {memory_bytes} B time {time:.4f} s energy {energy:.3f}".format(**lv)
            )
        lines.append(
            f"total: time {self.total_time:.4f} s peak-mem {self.peak_memory_bytes} B "
            f"energy {self.energy:.3f}"
        )
        return lines


def _downsample_level(d_clip_a, d_clip_b, masks, motion, const_counts):
    """One pyramid step: spatial then temporal halving of everything."""
    a2 = video.VideoClip(
        np.stack([video.downsample2(f) for f in d_clip_a.frames]),
        np.stack([video.downsample2_mask(m) for m in d_clip_a.all_masks()]),
    )
    b2 = video.VideoClip(
        np.stack([video.downsample2(f) for f in d_clip_b.frames]),
        np.stack([video.downsample2_mask(m) for m in d_clip_b.all_masks()]),
    )
    masks2 = np.stack([video.downsample2_mask(m) for m in masks])
    motion2 = np.array([geometry.conjugate_halfscale(m) for m in motion]).reshape(-1, 3, 3)
    if a2.num_frames >= 2:
        t_pairs = (a2.num_frames + 1) // 2 - 1
        merged = np.empty((t_pairs, 3, 3))
        for j in range(t_pairs):
            merged[j] = geometry.normalize(motion2[2 * j + 1] @ motion2[2 * j])
        a2 = video.downsample2_temporal(a2)
        b2 = video.downsample2_temporal(b2)
        masks2 = _pool2(masks2.astype(np.int32), 0, np.minimum.reduceat).astype(bool)
        motion2 = merged
    ca, cb = const_counts
    ca2 = _pool_sum(ca)
    cb2 = _pool_sum(cb)
    return a2, b2, masks2, motion2, (ca2, cb2)


def _constraint_masks(counts):
    ca, cb = counts
    return ca > cb, cb > ca


def _enforce(labels, const_a, const_b):
    labels[const_a] = LABEL_A
    labels[const_b] = LABEL_B
    return labels


def coarse_to_fine_cut(
    a: video.VideoClip,
    b_warped: video.VideoClip,
    masks: np.ndarray,
    strokes: StrokeSet,
    params: SeamParams,
    motion: np.ndarray,
    keyframes: dict[int, np.ndarray] | None = None,
) -> tuple[np.ndarray, CutStats]:
    """Pyramid seam cut: full cut on the coarsest volume, then band-restricted
    cuts per level down to full resolution. Stroke pixels keep their labels at
    every level (a coarse pixel inherits the majority of its fine strokes).
    """
    d_full = video.difference_volume(a, b_warped, masks)
    shape = d_full.shape
    count_a, count_b = strokes.counts(shape)
    conflict = (count_a > 0) & (count_b > 0)
    if conflict.any():
        t, y, x = np.argwhere(conflict)[0]
        raise ConstraintConflictError(
            f"pixel (frame {t}, x {x}, y {y}) is stroked with both labels"
        )
    if keyframes:
        for t, kf in keyframes.items():
            kf = np.asarray(kf, dtype=np.uint8)
            if kf.shape != shape[1:]:
                raise StructuralError(f"keyframe {t} labeling has wrong shape")
            clash = ((count_a[t] > 0) & (kf == LABEL_B)) | ((count_b[t] > 0) & (kf == LABEL_A))
            if clash.any():
                raise ConstraintConflictError(f"keyframe {t} contradicts a stroke")
            count_a[t] += (kf == LABEL_A).astype(np.int32)
            count_b[t] += (kf == LABEL_B).astype(np.int32)

    stats = CutStats()
    if not (strokes.has_label(LABEL_A) and strokes.has_label(LABEL_B)) and not keyframes:
        warnings.warn("strokes for both labels are required; returning a uniform labeling")
        label = LABEL_A if strokes.has_label(LABEL_A) or len(strokes) == 0 else LABEL_B
        return np.full(shape, label, dtype=np.uint8), stats

    # pixels covered by exactly one source are pinned to it: labeling absent
    # content would only create missing output pixels for the crop to eat
    masks_a = a.all_masks()
    masks_b = b_warped.all_masks()
    unconstrained = (count_a == 0) & (count_b == 0)
    count_a += ((masks_a & ~masks_b) & unconstrained).astype(np.int32)
    count_b += ((masks_b & ~masks_a) & unconstrained).astype(np.int32)

    level = params.level
    while level > 0 and (min(shape[1], shape[2]) >> level) < 8:
        level -= 1
    if level != params.level:
        warnings.warn(
            f"seam pyramid reduced from {params.level} to {level} levels so the "
            "coarsest volume stays at least 8x8"
        )

    # pyramid, finest first
    pyr = [(a, b_warped, np.asarray(masks, dtype=bool), np.asarray(motion, dtype=np.float64),
            (count_a, count_b))]
    for _ in range(level):
        pyr.append(_downsample_level(*pyr[-1]))

    t0 = time.perf_counter()
    labels = None
    for k in range(level, -1, -1):
        a_k, b_k, masks_k, motion_k, counts_k = pyr[k]
        d_k = video.difference_volume(a_k, b_k, masks_k)
        const_a_k, const_b_k = _constraint_masks(counts_k)
        lv_start = time.perf_counter()
        if labels is None:
            graph = build_graph(d_k, (const_a_k, const_b_k), params, motion_k)
            labels, cut_value = min_cut(graph)
        else:
            # grow around the seam at the coarse level, then upsample the
            # region along with the labels
            band_coarse = grow_band(labels, params.grow, pyr[k + 1][3])
            band = upsample_labels(band_coarse.astype(np.uint8), d_k.shape).astype(bool)
            labels = upsample_labels(labels, d_k.shape)
            _enforce(labels, const_a_k, const_b_k)
            if band.any():
                graph = build_graph(
                    d_k, (const_a_k, const_b_k), params, motion_k,
                    band=band, boundary_labels=labels,
                )
                labels, cut_value = min_cut(graph)
            else:
                graph = None
                cut_value = 0.0
        _enforce(labels, const_a_k, const_b_k)
        stats.levels.append(
            {
                "level": k,
                "t": d_k.shape[0],
                "h": d_k.shape[1],
                "w": d_k.shape[2],
                "nodes": graph.num_nodes if graph else 0,
                "edges": graph.net.num_edges if graph else 0,
                "memory_bytes": graph.net.memory_estimate_bytes() if graph else 0,
                "time": time.perf_counter() - lv_start,
                "energy": float(cut_value),
            }
        )
    stats.total_time = time.perf_counter() - t0
    stats.energy = labeling_energy(labels, d_full, params.lam, motion)
    return labels, stats
