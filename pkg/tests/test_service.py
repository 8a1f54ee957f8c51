import io
import threading
import time

import pytest
from fastapi.testclient import TestClient
from PIL import Image

from seamtake.cli import run
from seamtake.pipeline import load_project
from seamtake.service import create_app

from conftest import make_two_take_scene, tiny_project


@pytest.fixture()
def served(tmp_path):
    scene = make_two_take_scene(str(tmp_path / "scene"))
    project = tiny_project(scene)
    from seamtake.pipeline import save_project

    path = str(tmp_path / "p.json")
    save_project(project, path)
    app = create_app(path)
    client = TestClient(app)
    return client, scene, path, tmp_path


def wait_job(client, job_id, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/job/{job_id}").json()
        if job["status"] != "running":
            return job
        time.sleep(0.05)
    raise TimeoutError("job did not finish")


class TestProjectState:
    def test_offset_roundtrip_bumps_revision(self, served):
        client, _, _, _ = served
        state = client.get("/project").json()
        rev = state["revision"]
        r = client.put("/offset", json={"offset": -1, "base_revision": rev})
        assert r.status_code == 200
        assert r.json()["revision"] == rev + 1
        state = client.get("/project").json()
        assert state["params"]["offset"] == -1
        assert state["revision"] == rev + 1

    def test_stale_revision_conflict(self, served):
        client, _, _, _ = served
        rev = client.get("/project").json()["revision"]
        assert client.put("/offset", json={"offset": 1, "base_revision": rev}).status_code == 200
        r = client.put("/offset", json={"offset": 2, "base_revision": rev})
        assert r.status_code == 409

    def test_offset_without_overlap_rejected(self, served):
        client, _, _, _ = served
        rev = client.get("/project").json()["revision"]
        r = client.put("/offset", json={"offset": 100, "base_revision": rev})
        assert r.status_code == 422
        assert client.get("/project").json()["params"]["offset"] == 0

    def test_concurrent_writes_apply_exactly_once(self, served):
        client, _, _, _ = served
        rev = client.get("/project").json()["revision"]
        results = []

        def hit(offset):
            r = client.put("/offset", json={"offset": offset, "base_revision": rev})
            results.append(r.status_code)

        threads = [threading.Thread(target=hit, args=(o,)) for o in (1, -1, 2, -2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [200, 409, 409, 409]
        assert client.get("/project").json()["revision"] == rev + 1


class TestFrames:
    def test_frame_delivery_and_half_res(self, served):
        client, scene, _, _ = served
        r = client.get("/frame/a/0")
        assert r.status_code == 200 and r.headers["content-type"] == "image/png"
        img = Image.open(io.BytesIO(r.content))
        assert img.size == (scene["width"], scene["height"])
        r = client.get("/frame/a/0?scale=half")
        img = Image.open(io.BytesIO(r.content))
        assert img.size == (scene["width"] // 2, scene["height"] // 2)

    def test_unknown_clip_or_frame(self, served):
        client, _, _, _ = served
        assert client.get("/frame/c/0").status_code == 404
        assert client.get("/frame/a/999").status_code == 404


class TestStrokesAndRuns:
    def test_run_cut_requires_both_labels(self, served):
        client, _, path, _ = served
        # wipe strokes
        rev = client.get("/project").json()["revision"]
        project = load_project(path)
        app2 = create_app(path)
        client2 = TestClient(app2)
        session = app2.state.session
        session.project.strokes.entries = session.project.strokes.entries[:0]
        r = client2.post("/run/cut")
        assert r.status_code == 422
        assert "both labels" in r.json()["error"]

    def test_stroke_edit_keeps_alignment_cached(self, served):
        client, _, _, _ = served
        r = client.post("/run/composite")
        assert r.status_code == 200
        job = wait_job(client, r.json()["job"])
        assert job["status"] == "done"
        assert "align" in job["stages_run"]
        rev = client.get("/project").json()["revision"]
        r = client.put("/strokes/0", json={
            "deltas": [{"x": 3, "y": 3, "label": "A"}], "base_revision": rev,
        })
        assert r.status_code == 200
        r = client.post("/run/composite")
        job = wait_job(client, r.json()["job"])
        assert job["status"] == "done"
        assert "align" not in job["stages_run"]
        assert "cut" in job["stages_run"]

    def test_job_collision_returns_locked(self, served):
        client, _, _, _ = served
        session = client.app.state.session
        with session.lock:
            session.active_job = "someotherjob"
        try:
            r = client.post("/run/cut")
            assert r.status_code == 423
        finally:
            with session.lock:
                session.active_job = None

    def test_erase_delta(self, served):
        client, _, _, _ = served
        rev = client.get("/project").json()["revision"]
        r = client.put("/strokes/0", json={
            "deltas": [{"x": 9, "y": 9, "label": "A"}], "base_revision": rev,
        })
        n1 = r.json()["strokes"]
        rev = r.json()["revision"]
        r = client.put("/strokes/0", json={
            "deltas": [{"x": 9, "y": 9, "erase": True, "label": "A"}], "base_revision": rev,
        })
        assert r.json()["strokes"] == n1 - 1


class TestPreviewAndExport:
    def test_preview_matches_cli_composite_bytes(self, served, tmp_path):
        client, scene, path, base = served
        r = client.post("/run/composite")
        job = wait_job(client, r.json()["job"])
        assert job["status"] == "done"
        out = str(tmp_path / "cli_%04d.png")
        assert run(["composite", path, "--out", out]) == 0
        for t in (0, 2, 5):
            served_png = client.get(f"/preview/{t}?scale=full")
            assert served_png.status_code == 200
            assert served_png.headers["X-Stale"] == "0"
            with open(out % t, "rb") as fh:
                assert served_png.content == fh.read()

    def test_preview_before_compute_404(self, served):
        client, _, _, _ = served
        assert client.get("/preview/0").status_code == 404

    def test_seam_mask_and_stale_badge(self, served):
        client, _, _, _ = served
        r = client.post("/run/composite")
        wait_job(client, r.json()["job"])
        seam = client.get("/seam/0")
        assert seam.status_code == 200
        img = Image.open(io.BytesIO(seam.content))
        assert img.mode == "1"
        assert seam.headers["X-Stale"] == "0"
        rev = client.get("/project").json()["revision"]
        client.put("/strokes/0", json={"deltas": [{"x": 1, "y": 1, "label": "A"}],
                                       "base_revision": rev})
        seam = client.get("/seam/0")
        assert seam.headers["X-Stale"] == "1"

    def test_export_writes_frames(self, served, tmp_path):
        client, scene, _, _ = served
        pattern = str(tmp_path / "exp_%04d.png")
        r = client.post("/export", json={"pattern": pattern})
        assert r.status_code == 200
        job = wait_job(client, r.json()["job"])
        assert job["status"] == "done"
        assert len(job["exported"]) == scene["range"][1] + 1
        img = Image.open(job["exported"][0])
        assert img.size[0] <= scene["width"]
