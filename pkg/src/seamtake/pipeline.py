"""Stage orchestration: the compositing dataflow as a dependency graph with
content-hash validity stamps, lazy recomputation, and project persistence.

Stage topology (optional stages pass through when disabled):

    align -> blur -> color -> cut -> blend -> crop
      A feeds blur directly; cut and blend consume both the blurred A and
      the color-matched warped B; crop consumes the blended frames.

A project file is JSON; large artifacts (alignment track, label masks) are
sidecar files referenced by relative path and content hash.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from PIL import Image

from . import align as align_mod
from . import appearance, composite, geometry, seamcut, video
from .errors import ConfigurationError, ProjectFormatError

SCHEMA_VERSION = 1

STAGES = ("align", "blur", "color", "cut", "blend", "crop")

STAGE_DEPS: dict[str, tuple[str, ...]] = {
    "align": (),
    "blur": ("align",),
    "color": ("blur",),
    "cut": ("blur", "color"),
    "blend": ("blur", "color", "cut"),
    "crop": ("blend",),
}

# which stage consumes each parameter directly
PARAM_OWNER: dict[str, str] = {
    "sources": "align",
    "offset": "align",
    "anchor": "align",
    "match": "align",
    "refine": "align",
    "ransac_iterations": "align",
    "ransac_inlier_px": "align",
    "seed": "align",
    "blur_enabled": "blur",
    "color_enabled": "color",
    "gamma": "color",
    "fade_frames": "color",
    "strokes": "cut",
    "keyframes": "cut",
    "lam": "cut",
    "level": "cut",
    "grow": "cut",
    "blend_width": "blend",
}

DEFAULT_PARAMS: dict[str, Any] = {
    "offset": 0,
    "anchor": None,
    "match": [5, 5, 0],
    "refine": [1, 4, 1],
    "ransac_iterations": 500,
    "ransac_inlier_px": 2.0,
    "seed": 0,
    "blur_enabled": False,
    "color_enabled": False,
    "gamma": 200.0,
    "fade_frames": 30,
    "lam": 1.0,
    "level": 3,
    "grow": 1,
    "blend_width": 8,
}


def stage_closure(changed: str) -> set[str]:
    """All stages whose output can change when `changed` (a parameter name or
    a stage name) changes: the owning stage plus its transitive dependents."""
    if changed in STAGES:
        root = changed
    elif changed in PARAM_OWNER:
        root = PARAM_OWNER[changed]
    else:
        raise ConfigurationError(f"unknown parameter or stage: {changed}")
    dirty = {root}
    grew = True
    while grew:
        grew = False
        for stage in STAGES:
            if stage not in dirty and any(d in dirty for d in STAGE_DEPS[stage]):
                dirty.add(stage)
                grew = True
    return dirty


@dataclass
class Project:
    """Inputs, parameters and cached-artifact references for one composite."""

    a_pattern: str = ""
    a_range: tuple[int, int] = (0, 0)
    b_pattern: str = ""
    b_range: tuple[int, int] = (0, 0)
    params: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))
    strokes: seamcut.StrokeSet = field(default_factory=seamcut.StrokeSet)
    keyframes: dict[int, np.ndarray] = field(default_factory=dict)
    cache: dict = field(default_factory=dict)
    path: str | None = None

    def set_param(self, name: str, value) -> set[str]:
        """Change one parameter; returns the dirtied stages."""
        if name not in self.params:
            raise ConfigurationError(f"unknown parameter: {name}")
        self.params[name] = value
        return stage_closure(name)

    def add_stroke(self, t: int, x: int, y: int, label) -> set[str]:
        self.strokes.add(t, x, y, label)
        return stage_closure("strokes")

    def to_dict(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "sources": {
                "a_pattern": self.a_pattern,
                "a_range": list(self.a_range),
                "b_pattern": self.b_pattern,
                "b_range": list(self.b_range),
            },
            "params": dict(self.params),
            "strokes": self.strokes.to_list(),
            "keyframes": {str(t): np.asarray(v, dtype=np.uint8).tolist() for t, v in self.keyframes.items()},
            "cache": self.cache,
        }

    @classmethod
    def from_dict(cls, data: dict, path: str | None = None) -> "Project":
        version = data.get("schemaVersion")
        if version != SCHEMA_VERSION:
            raise ProjectFormatError(
                f"project schema version {version!r} is not supported "
                f"(this build reads version {SCHEMA_VERSION}); upgrade required"
            )
        src = data["sources"]
        params = dict(DEFAULT_PARAMS)
        params.update(data.get("params", {}))
        return cls(
            a_pattern=src["a_pattern"],
            a_range=tuple(src["a_range"]),
            b_pattern=src["b_pattern"],
            b_range=tuple(src["b_range"]),
            params=params,
            strokes=seamcut.StrokeSet(data.get("strokes") or None),
            keyframes={int(t): np.asarray(v, dtype=np.uint8) for t, v in data.get("keyframes", {}).items()},
            cache=data.get("cache", {}),
            path=path,
        )


def save_project(project: Project, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(project.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    project.path = path


def load_project(path: str) -> Project:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ProjectFormatError(f"no project file at {path}") from None
    except json.JSONDecodeError as exc:
        raise ProjectFormatError(
            f"corrupt project file {path}: {exc.msg} at line {exc.lineno} column {exc.colno}"
        ) from exc
    return Project.from_dict(data, path=path)


@dataclass
class Timeline:
    """Output-frame bookkeeping: output index k covers global time k + t0;
    A contributes where exists_a, B where exists_b."""

    t0: int
    length: int
    a_len: int
    b_len: int
    offset: int

    def a_index(self, k: int) -> int | None:
        t = k + self.t0
        return t if 0 <= t < self.a_len else None

    def b_index(self, k: int) -> int | None:
        t = k + self.t0 - self.offset
        return t if 0 <= t < self.b_len else None

    @property
    def overlap(self) -> tuple[int, int]:
        """Output-index overlap window [start, end)."""
        start = max(0, self.offset) - self.t0
        end = min(self.a_len, self.b_len + self.offset) - self.t0
        return start, end


def make_timeline(a_len: int, b_len: int, offset: int) -> Timeline:
    start = max(0, offset)
    end = min(a_len, b_len + offset)
    if end <= start:
        raise ConfigurationError(
            f"offset {offset} leaves no overlap between takes ({a_len} and {b_len} frames)"
        )
    t0 = min(0, offset)
    length = max(a_len, b_len + offset) - t0
    return Timeline(t0=t0, length=length, a_len=a_len, b_len=b_len, offset=offset)


def _hash_bytes(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(c)
    return h.hexdigest()


def _hash_json(obj) -> str:
    return _hash_bytes(json.dumps(obj, sort_keys=True).encode())


class StageEngine:
    """Executes stages lazily against a project; caches artifacts in memory
    keyed by validity stamps (content hashes of the upstream closure) and
    mirrors the compact artifacts to sidecar files when the project has a
    path."""

    def __init__(self, project: Project):
        self.project = project
        self.invocations: dict[str, int] = {s: 0 for s in STAGES}
        self.timings: dict[str, float] = {}
        self._values: dict[str, tuple[str, Any]] = {}
        self._file_hash_cache: dict[tuple[str, int, int], str] = {}

    # ---- stamps ----

    def _source_hash(self) -> str:
        files = []
        for pattern, (first, last) in (
            (self.project.a_pattern, self.project.a_range),
            (self.project.b_pattern, self.project.b_range),
        ):
            for i in range(first, last + 1):
                path = pattern % i
                try:
                    st = os.stat(path)
                except FileNotFoundError:
                    files.append((path, "missing"))
                    continue
                key = (path, st.st_size, st.st_mtime_ns)
                if key not in self._file_hash_cache:
                    with open(path, "rb") as fh:
                        self._file_hash_cache[key] = _hash_bytes(fh.read())
                files.append((path, self._file_hash_cache[key]))
        return _hash_json(files)

    def _direct_params(self, stage: str) -> dict:
        p = self.project.params
        out = {k: p[k] for k, owner in PARAM_OWNER.items() if owner == stage and k in p}
        if stage == "align":
            out["sources"] = [
                self.project.a_pattern, list(self.project.a_range),
                self.project.b_pattern, list(self.project.b_range),
                self._source_hash(),
            ]
        if stage == "cut":
            out["strokes"] = self.project.strokes.to_list()
            out["keyframes"] = {
                str(t): _hash_bytes(np.ascontiguousarray(v, dtype=np.uint8).tobytes())
                for t, v in sorted(self.project.keyframes.items())
            }
        return out

    def stamp(self, stage: str) -> str:
        deps = [self.stamp(d) for d in STAGE_DEPS[stage]]
        return _hash_json({"stage": stage, "params": self._direct_params(stage), "deps": deps})

    # ---- artifact sidecars ----

    def _artifact_dir(self) -> str | None:
        if self.project.path is None:
            return None
        base, _ = os.path.splitext(self.project.path)
        return base + ".artifacts"

    def _store_sidecar(self, stage: str, stamp: str, payload: dict) -> None:
        art_dir = self._artifact_dir()
        if art_dir is None:
            return
        os.makedirs(art_dir, exist_ok=True)
        entry: dict[str, Any] = {"stamp": stamp, "files": {}}
        for name, (kind, data) in payload.items():
            rel = f"{stage}_{name}"
            if kind == "npz":
                rel += ".npz"
                buf = io.BytesIO()
                np.savez_compressed(buf, **data)
                blob = buf.getvalue()
            elif kind == "json":
                rel += ".json"
                blob = json.dumps(data, sort_keys=True).encode()
            elif kind == "labels":
                rel = self._store_label_masks(art_dir, data)
                with open(os.path.join(art_dir, rel), "rb") as fh:
                    blob = fh.read()
                entry["files"][name] = {"path": rel, "sha256": _hash_bytes(blob)}
                continue
            else:
                raise ValueError(kind)
            with open(os.path.join(art_dir, rel), "wb") as fh:
                fh.write(blob)
            entry["files"][name] = {"path": rel, "sha256": _hash_bytes(blob)}
        self.project.cache[stage] = entry
        if self.project.path:
            save_project(self.project, self.project.path)

    def _store_label_masks(self, art_dir: str, labels: np.ndarray) -> str:
        """Per-frame 1-bit PNGs plus an index manifest; returns the manifest
        relpath."""
        mask_dir = os.path.join(art_dir, "labels")
        os.makedirs(mask_dir, exist_ok=True)
        files = []
        hashes = {}
        for t in range(labels.shape[0]):
            name = f"label_{t:04d}.png"
            img = Image.fromarray((labels[t] == seamcut.LABEL_B).astype(np.uint8) * 255).convert("1")
            img.save(os.path.join(mask_dir, name))
            with open(os.path.join(mask_dir, name), "rb") as fh:
                hashes[name] = _hash_bytes(fh.read())
            files.append(name)
        manifest = {
            "frames": int(labels.shape[0]),
            "height": int(labels.shape[1]),
            "width": int(labels.shape[2]),
            "files": files,
            "sha256": hashes,
        }
        with open(os.path.join(art_dir, "labels", "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=1)
        return os.path.join("labels", "manifest.json")

    def _load_sidecar(self, stage: str, stamp: str):
        entry = self.project.cache.get(stage)
        if not entry or entry.get("stamp") != stamp:
            return None
        art_dir = self._artifact_dir()
        if art_dir is None:
            return None
        out = {}
        for name, ref in entry["files"].items():
            path = os.path.join(art_dir, ref["path"])
            try:
                with open(path, "rb") as fh:
                    blob = fh.read()
            except FileNotFoundError:
                return None
            if _hash_bytes(blob) != ref["sha256"]:
                warnings.warn(f"sidecar {ref['path']} failed its integrity check; recomputing")
                return None
            if path.endswith(".npz"):
                out[name] = dict(np.load(io.BytesIO(blob)))
            elif ref["path"].endswith("manifest.json"):
                out[name] = self._load_label_masks(art_dir, json.loads(blob))
            else:
                out[name] = json.loads(blob)
        return out

    def _load_label_masks(self, art_dir: str, manifest: dict) -> np.ndarray | None:
        labels = np.empty((manifest["frames"], manifest["height"], manifest["width"]), np.uint8)
        for t, name in enumerate(manifest["files"]):
            path = os.path.join(art_dir, "labels", name)
            try:
                with open(path, "rb") as fh:
                    blob = fh.read()
            except FileNotFoundError:
                return None
            if _hash_bytes(blob) != manifest["sha256"][name]:
                return None
            arr = np.asarray(Image.open(io.BytesIO(blob)).convert("L"))
            labels[t] = (arr > 127).astype(np.uint8)
        return labels

    # ---- stage execution ----

    def compute(self, stage: str):
        """Compute through `stage`, running only what the stamps say is
        stale; returns the stage value."""
        if stage not in STAGES:
            raise ConfigurationError(f"unknown stage: {stage}")
        stamp = self.stamp(stage)
        hit = self._values.get(stage)
        if hit and hit[0] == stamp:
            return hit[1]
        deps = {d: self.compute(d) for d in STAGE_DEPS[stage]}
        start = time.perf_counter()
        value = getattr(self, f"_run_{stage}")(stamp, deps)
        self.timings[stage] = time.perf_counter() - start
        self._values[stage] = (stamp, value)
        return value

    def _run_align(self, stamp: str, deps):
        p = self.project.params
        clip_a = video.load_frame_sequence(self.project.a_pattern, *self.project.a_range)
        clip_b = video.load_frame_sequence(self.project.b_pattern, *self.project.b_range)
        timeline = make_timeline(clip_a.num_frames, clip_b.num_frames, p["offset"])
        ov_start, ov_end = timeline.overlap
        anchor = p["anchor"]
        if anchor is None:
            anchor = (ov_start + ov_end - 1) // 2
        if not ov_start <= anchor < ov_end:
            raise ConfigurationError(f"anchor {anchor} outside overlap {ov_start}..{ov_end - 1}")

        cached = self._load_sidecar("align", stamp)
        if cached is not None and "track" in cached:
            tr = cached["track"]
            track = align_mod.AlignmentTrack(
                tr["spatial"], tr["temporal_a"], tr["temporal_b"], int(tr["anchor"][0])
            )
            b_tail = tr["b_tail"]
        else:
            self.invocations["align"] += 1
            sub_a = video.VideoClip(clip_a.frames[ov_start + timeline.t0 : ov_end + timeline.t0])
            b0 = ov_start + timeline.t0 - p["offset"]
            sub_b = video.VideoClip(clip_b.frames[b0 : b0 + (ov_end - ov_start)])
            track = align_mod.align_videos(
                sub_a,
                sub_b,
                anchor - ov_start,
                match_p=align_mod.MatchParams(*p["match"]),
                refine_p=align_mod.MatchParams(*p["refine"]),
                ransac=align_mod.RansacParams(
                    p["ransac_iterations"], p["ransac_inlier_px"], p["seed"]
                ),
            )
            b_tail = self._extend_b_tail(clip_b, timeline, ov_end, track, p)
            self._store_sidecar(
                "align",
                stamp,
                {
                    "track": (
                        "npz",
                        {
                            "spatial": track.spatial,
                            "temporal_a": track.temporal_a,
                            "temporal_b": track.temporal_b,
                            "anchor": np.array([track.anchor]),
                            "b_tail": b_tail,
                        },
                    )
                },
            )
        return self._materialize_align(clip_a, clip_b, timeline, track, b_tail, ov_start, ov_end)

    def _extend_b_tail(self, clip_b, timeline, ov_end, track, p):
        """Spatial maps for B frames past the overlap (warped by propagating
        through B's own temporal motion; A no longer contributes shake)."""
        tail_ks = [k for k in range(ov_end, timeline.length) if timeline.b_index(k) is not None]
        if not tail_ks:
            return np.empty((0, 3, 3))
        b_last = timeline.b_index(ov_end - 1)
        maps = []
        h = track.spatial[-1]
        prev = clip_b.frame(b_last)
        rng = np.random.default_rng(p["seed"])
        for k in tail_ks:
            bi = timeline.b_index(k)
            cur = clip_b.frame(bi)
            matches = align_mod.hierarchical_match(
                prev, cur, align_mod.MatchParams(*p["match"])
            )
            h_b, _ = align_mod.fit_homography_ransac(
                matches, p["ransac_iterations"], p["ransac_inlier_px"], rng=rng
            )
            h = geometry.normalize(h @ geometry.invert(h_b))
            maps.append(h)
            prev = cur
        return np.asarray(maps)

    def _materialize_align(self, clip_a, clip_b, timeline, track, b_tail, ov_start, ov_end):
        h, w = clip_a.height, clip_a.width
        t_out = timeline.length
        frames_a = np.zeros((t_out, h, w, 3), dtype=np.float32)
        masks_a = np.zeros((t_out, h, w), dtype=bool)
        frames_b = np.zeros((t_out, h, w, 3), dtype=np.float32)
        masks_b = np.zeros((t_out, h, w), dtype=bool)
        tail_i = 0
        for k in range(t_out):
            ai = timeline.a_index(k)
            if ai is not None:
                frames_a[k] = clip_a.frame(ai)
                masks_a[k] = True
            bi = timeline.b_index(k)
            if bi is not None:
                if ov_start <= k < ov_end:
                    h_t = track.spatial[k - ov_start]
                elif k >= ov_end:
                    h_t = b_tail[tail_i]
                    tail_i += 1
                else:
                    h_t = np.eye(3)
                frames_b[k], masks_b[k] = video.warp_frame(clip_b.frame(bi), h_t)
        return {
            "track": track,
            "timeline": timeline,
            "overlap": (ov_start, ov_end),
            "a": video.VideoClip(frames_a, masks_a),
            "b": video.VideoClip(frames_b, masks_b),
        }

    def _run_blur(self, stamp: str, deps):
        al = deps["align"]
        p = self.project.params
        if not p["blur_enabled"]:
            return {"a": al["a"], "b": al["b"], "kernel": appearance.BlurKernel(), "which": "off"}
        ov_start, ov_end = al["overlap"]
        anchor = min(max((ov_start + ov_end - 1) // 2, ov_start), ov_end - 1)
        cached = self._load_sidecar("blur", stamp)
        if cached is not None and "kernel" in cached:
            kernel = appearance.BlurKernel.from_list(cached["kernel"]["widths"])
            which = cached["kernel"]["which"]
        else:
            self.invocations["blur"] += 1
            # measure on the jointly valid region so warp borders don't
            # masquerade as sharp edges
            both = al["a"].mask(anchor) & al["b"].mask(anchor)
            ys, xs = np.nonzero(both)
            y0, y1 = ys.min(), ys.max() + 1
            x0, x1 = xs.min(), xs.max() + 1
            _, _, kernel, which = appearance.match_blur(
                al["a"].frame(anchor)[y0:y1, x0:x1], al["b"].frame(anchor)[y0:y1, x0:x1]
            )
            self._store_sidecar(
                "blur", stamp,
                {"kernel": ("json", {"widths": kernel.to_list(), "which": which})},
            )
        a_clip, b_clip = al["a"], al["b"]
        if which == "A" and not kernel.is_identity:
            frames = np.stack([appearance.box_blur(f, kernel) for f in a_clip.frames])
            a_clip = video.VideoClip(frames, a_clip.masks)
        elif which == "B" and not kernel.is_identity:
            frames = np.stack([appearance.box_blur(f, kernel) for f in b_clip.frames])
            b_clip = video.VideoClip(frames, b_clip.masks)
        return {"a": a_clip, "b": b_clip, "kernel": kernel, "which": which}

    def _run_color(self, stamp: str, deps):
        bl = deps["blur"]
        p = self.project.params
        if not p["color_enabled"]:
            return {"b": bl["b"], "lut": None}
        al = self._values["align"][1]
        ov_start, ov_end = al["overlap"]
        cached = self._load_sidecar("color", stamp)
        if cached is not None and "lut" in cached:
            lut = appearance.ColorLUT.from_list(cached["lut"]["tables"], p["fade_frames"])
        else:
            self.invocations["color"] += 1
            both = bl["a"].all_masks() & bl["b"].all_masks()
            lut = appearance.build_color_lut(
                bl["a"], bl["b"], both, gamma=p["gamma"], fade_frames=p["fade_frames"]
            )
            self._store_sidecar("color", stamp, {"lut": ("json", {"tables": lut.to_list()})})
        overlap_end = ov_end - 1 if ov_end < al["timeline"].length else None
        return {"b": appearance.apply_color_lut(bl["b"], lut, overlap_end), "lut": lut}

    def _run_cut(self, stamp: str, deps):
        bl = deps["blur"]
        co = deps["color"]
        p = self.project.params
        al = self._values["align"][1]
        a_clip, b_clip = bl["a"], co["b"]
        masks = a_clip.all_masks() & b_clip.all_masks()
        track = al["track"]
        timeline = al["timeline"]
        ov_start, ov_end = al["overlap"]
        motion = self._output_motion(track, timeline, ov_start, ov_end)
        keyframes = dict(self.project.keyframes)
        for k in range(timeline.length):
            has_a = timeline.a_index(k) is not None
            has_b = timeline.b_index(k) is not None
            if has_a != has_b:
                label = seamcut.LABEL_A if has_a else seamcut.LABEL_B
                keyframes.setdefault(
                    k, np.full((a_clip.height, a_clip.width), label, dtype=np.uint8)
                )
        cached = self._load_sidecar("cut", stamp)
        if cached is not None and cached.get("labels") is not None:
            return {"labels": cached["labels"], "stats": None, "motion": motion}
        self.invocations["cut"] += 1
        labels, stats = seamcut.coarse_to_fine_cut(
            a_clip, b_clip, masks, self.project.strokes,
            seamcut.SeamParams(p["lam"], p["level"], p["grow"]),
            motion, keyframes=keyframes or None,
        )
        self._store_sidecar("cut", stamp, {"labels": ("labels", labels)})
        return {"labels": labels, "stats": stats, "motion": motion}

    def _output_motion(self, track, timeline, ov_start, ov_end):
        """Forward motion links (frame k -> k+1) following A's camera; B's
        own motion continues past the overlap, identity elsewhere."""
        motion = np.tile(np.eye(3), (timeline.length - 1, 1, 1))
        for k in range(timeline.length - 1):
            t = k + timeline.t0
            if 0 <= t < timeline.a_len - 1 and k >= ov_start and k + 1 < ov_end:
                # temporal_a maps t+1 -> t inside the overlap window
                motion[k] = geometry.invert(track.temporal_a[k - ov_start])
        return motion

    def _run_blend(self, stamp: str, deps):
        bl = deps["blur"]
        co = deps["color"]
        cut = deps["cut"]
        p = self.project.params
        self.invocations["blend"] += 1
        a_clip, b_clip = bl["a"], co["b"]
        labels = cut["labels"]
        frames = np.empty_like(a_clip.frames)
        for t in range(a_clip.num_frames):
            dist = composite.seam_distance(labels[t])
            frames[t] = composite.alpha_blend(
                a_clip.frame(t), b_clip.frame(t), labels[t], dist, p["blend_width"],
                mask_a=a_clip.mask(t), mask_b=b_clip.mask(t),
            )
        missing = composite.missing_pixels(labels, a_clip.all_masks(), b_clip.all_masks())
        return {"frames": video.VideoClip(frames), "missing": missing, "labels": labels}

    def _run_crop(self, stamp: str, deps):
        blend = deps["blend"]
        cached = self._load_sidecar("crop", stamp)
        if cached is not None and "rect" in cached:
            rect = composite.CropRect.from_list(cached["rect"]["bounds"])
        else:
            self.invocations["crop"] += 1
            rect = composite.greedy_crop(blend["missing"])
            self._store_sidecar("crop", stamp, {"rect": ("json", {"bounds": rect.to_list()})})
        return {"rect": rect}

    # ---- outputs ----

    def final_clip(self, seam_overlay: bool = False) -> video.VideoClip:
        blend = self.compute("blend")
        rect = self.compute("crop")["rect"]
        frames = blend["frames"].frames
        if seam_overlay:
            labels = blend["labels"]
            frames = np.stack(
                [composite.overlay_seam(frames[t], labels[t]) for t in range(frames.shape[0])]
            )
        frames = frames[:, rect.top : rect.bottom, rect.left : rect.right]
        return video.VideoClip(np.ascontiguousarray(frames))

    def export(self, out_pattern: str, seam_overlay: bool = False) -> list[str]:
        return video.save_frame_sequence(self.final_clip(seam_overlay), out_pattern)

    def stage_report(self) -> list[str]:
        lines = []
        for stage in STAGES:
            if stage in self.timings:
                lines.append(f"{stage}: {self.timings[stage]:.3f} s")
        cut = self._values.get("cut")
        if cut and cut[1].get("stats"):
            lines.extend(cut[1]["stats"].report_lines())
        return lines
