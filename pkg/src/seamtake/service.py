"""Local HTTP API driving the browser UI: project state, frame delivery,
stroke editing, staged runs with polled progress, previews and export.

All mutations are serialized behind one lock and bump a revision counter;
writers must present the revision they based their edit on (stale writes
get 409). At most one computation runs at a time (423 while busy). Preview
frames at full scale are byte-identical to CLI composite output.
"""

from __future__ import annotations

import io
import threading
import uuid

import numpy as np
from fastapi import Body, FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import video
from .errors import SeamTakeError
from .pipeline import STAGES, StageEngine, load_project, make_timeline, save_project
from .seamcut import LABEL_B


def _png_response(frame: np.ndarray, headers: dict | None = None) -> Response:
    return Response(video.frame_to_png_bytes(frame), media_type="image/png",
                    headers=headers or {})


def _half_res(frame: np.ndarray) -> np.ndarray:
    return video.downsample2(frame)


class Session:
    """One project: engine, revision counter, at most one running job."""

    def __init__(self, project_path: str):
        self.project_path = project_path
        self.project = load_project(project_path)
        self.engine = StageEngine(self.project)
        self.revision = 0
        self.lock = threading.Lock()
        self.jobs: dict[str, dict] = {}
        self.active_job: str | None = None
        # last finished results the preview endpoints serve from
        self.preview: dict | None = None

    def timeline(self):
        a_len = self.project.a_range[1] - self.project.a_range[0] + 1
        b_len = self.project.b_range[1] - self.project.b_range[0] + 1
        return make_timeline(a_len, b_len, self.project.params["offset"])

    def snapshot(self) -> dict:
        tl = self.timeline()
        return {
            "revision": self.revision,
            "sources": {
                "a_pattern": self.project.a_pattern,
                "a_range": list(self.project.a_range),
                "b_pattern": self.project.b_pattern,
                "b_range": list(self.project.b_range),
            },
            "params": dict(self.project.params),
            "strokes": self.project.strokes.to_list(),
            "timeline": {
                "length": tl.length,
                "t0": tl.t0,
                "overlap": list(tl.overlap),
            },
        }

    def stale(self, base_revision) -> bool:
        return base_revision is not None and int(base_revision) != self.revision

    def persist(self):
        if self.project.path:
            save_project(self.project, self.project.path)


def create_app(project_path: str, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="seamtake service")
    session = Session(project_path)
    app.state.session = session

    def conflict():
        return JSONResponse({"error": "stale revision", "revision": session.revision},
                            status_code=409)

    @app.get("/project")
    def get_project():
        return session.snapshot()

    @app.put("/offset")
    def put_offset(payload: dict = Body(...)):
        with session.lock:
            if session.stale(payload.get("base_revision")):
                return conflict()
            try:
                offset = int(payload["offset"])
                a_len = session.project.a_range[1] - session.project.a_range[0] + 1
                b_len = session.project.b_range[1] - session.project.b_range[0] + 1
                make_timeline(a_len, b_len, offset)  # validates overlap
            except (KeyError, ValueError, SeamTakeError) as exc:
                return JSONResponse({"error": str(exc), "revision": session.revision},
                                    status_code=422)
            session.project.set_param("offset", offset)
            session.revision += 1
            session.persist()
            return {"revision": session.revision, "offset": offset}

    @app.put("/params")
    def put_params(payload: dict = Body(...)):
        with session.lock:
            if session.stale(payload.get("base_revision")):
                return conflict()
            try:
                for name, value in payload.get("params", {}).items():
                    session.project.set_param(name, value)
            except SeamTakeError as exc:
                return JSONResponse({"error": str(exc), "revision": session.revision},
                                    status_code=422)
            session.revision += 1
            session.persist()
            return {"revision": session.revision}

    @app.get("/frame/{clip}/{t}")
    def get_frame(clip: str, t: int, scale: str = "full"):
        if clip not in ("a", "b"):
            return JSONResponse({"error": "clip must be 'a' or 'b'"}, status_code=404)
        pattern = session.project.a_pattern if clip == "a" else session.project.b_pattern
        first, last = session.project.a_range if clip == "a" else session.project.b_range
        if not 0 <= t <= last - first:
            return JSONResponse({"error": f"frame {t} out of range"}, status_code=404)
        try:
            frame = video.load_frame_sequence(pattern, first + t, first + t).frame(0)
        except SeamTakeError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)
        if scale == "half":
            frame = _half_res(frame)
        return _png_response(frame, {"X-Revision": str(session.revision)})

    @app.put("/strokes/{t}")
    def put_strokes(t: int, payload: dict = Body(...)):
        with session.lock:
            if session.stale(payload.get("base_revision")):
                return conflict()
            for delta in payload.get("deltas", []):
                x, y = int(delta["x"]), int(delta["y"])
                if delta.get("erase"):
                    session.project.strokes.erase(t, x, y)
                else:
                    session.project.strokes.add(t, x, y, str(delta["label"]))
            session.revision += 1
            session.persist()
            return {"revision": session.revision,
                    "strokes": len(session.project.strokes)}

    def _start_job(stage: str, export: dict | None = None):
        with session.lock:
            if session.active_job is not None:
                return JSONResponse(
                    {"error": "a computation is already running",
                     "job": session.active_job},
                    status_code=423,
                )
            job_id = uuid.uuid4().hex[:12]
            job = {
                "id": job_id,
                "stage": stage,
                "status": "running",
                "stages_run": [],
                "timings": {},
                "error": None,
                "revision": session.revision,
                "exported": None,
            }
            session.jobs[job_id] = job
            session.active_job = job_id

        def work():
            engine = session.engine
            before = dict(engine.invocations)
            try:
                engine.compute(stage if stage != "composite" else "crop")
                if stage in ("composite", "crop") or export is not None:
                    clip = engine.final_clip()
                    with session.lock:
                        session.preview = {
                            "revision": job["revision"],
                            "frames": clip.frames,
                            "labels": engine.compute("blend")["labels"],
                            "rect": engine.compute("crop")["rect"],
                        }
                if export is not None:
                    job["exported"] = engine.export(
                        export["pattern"], export.get("seam_overlay", False)
                    )
                job["status"] = "done"
            except Exception as exc:  # stage errors surface through the job
                job["status"] = "error"
                job["error"] = f"{stage}: {exc}"
            finally:
                job["stages_run"] = [
                    s for s in STAGES if engine.invocations[s] > before.get(s, 0)
                ]
                job["timings"] = {k: round(v, 4) for k, v in engine.timings.items()}
                with session.lock:
                    session.active_job = None

        threading.Thread(target=work, daemon=True).start()
        return {"job": job_id, "revision": session.revision}

    @app.post("/run/{stage}")
    def run_stage(stage: str):
        if stage not in STAGES and stage != "composite":
            return JSONResponse({"error": f"unknown stage {stage!r}"}, status_code=404)
        if stage in ("cut", "blend", "crop", "composite"):
            strokes = session.project.strokes
            if not (strokes.has_label(0) and strokes.has_label(1)) and not session.project.keyframes:
                return JSONResponse(
                    {"error": "the cut needs strokes of both labels (A and B)"},
                    status_code=422,
                )
        return _start_job(stage if stage != "composite" else "composite")

    @app.get("/job/{job_id}")
    def get_job(job_id: str):
        job = session.jobs.get(job_id)
        if job is None:
            return JSONResponse({"error": "no such job"}, status_code=404)
        return {k: v for k, v in job.items()}

    @app.get("/preview/{t}")
    def get_preview(t: int, seam: int = 0, scale: str = "full"):
        pv = session.preview
        if pv is None:
            return JSONResponse({"error": "no composite has been computed yet"},
                                status_code=404)
        frames = pv["frames"]
        if not 0 <= t < frames.shape[0]:
            return JSONResponse({"error": f"frame {t} out of range"}, status_code=404)
        frame = frames[t]
        if seam:
            from .composite import overlay_seam

            rect = pv["rect"]
            labels = pv["labels"][t, rect.top : rect.bottom, rect.left : rect.right]
            frame = overlay_seam(frame, labels)
        if scale == "half":
            frame = _half_res(frame)
        stale = int(pv["revision"] != session.revision)
        return _png_response(frame, {"X-Revision": str(pv["revision"]),
                                     "X-Stale": str(stale)})

    @app.get("/seam/{t}")
    def get_seam(t: int):
        pv = session.preview
        if pv is None:
            return JSONResponse({"error": "no cut has been computed yet"}, status_code=404)
        labels = pv["labels"]
        if not 0 <= t < labels.shape[0]:
            return JSONResponse({"error": f"frame {t} out of range"}, status_code=404)
        from PIL import Image

        mask = (labels[t] == LABEL_B).astype(np.uint8) * 255
        buf = io.BytesIO()
        Image.fromarray(mask).convert("1").save(buf, format="PNG")
        stale = int(pv["revision"] != session.revision)
        return Response(buf.getvalue(), media_type="image/png",
                        headers={"X-Revision": str(pv["revision"]), "X-Stale": str(stale)})

    @app.post("/export")
    def export(payload: dict = Body(...)):
        pattern = payload.get("pattern")
        if not pattern:
            return JSONResponse({"error": "export needs an output 'pattern'"},
                                status_code=422)
        return _start_job("composite", export={
            "pattern": pattern,
            "seam_overlay": bool(payload.get("seam_overlay", False)),
        })

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
