import time

import pytest
from fastapi.testclient import TestClient

from e2vts.frameio import write_image
from e2vts.service import create_app
from e2vts.synth import panning_frames, two_scene_frames

QUAD = [[60.0, 50.0], [150.0, 50.0], [150.0, 120.0], [60.0, 120.0]]


def write_frames(directory, frames):
    directory.mkdir(parents=True, exist_ok=True)
    for f in frames:
        write_image(directory / f"{f.index:04d}.png", f.pixels)
    return directory


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "data")
    with TestClient(app) as c:
        yield c


@pytest.fixture
def pan_dir(tmp_path):
    frames, _ = panning_frames(8, 256, 192, seed=90)
    return write_frames(tmp_path / "pan", frames)


def create_session(client, frames_dir):
    resp = client.post("/api/sessions", json={"frames_dir": str(frames_dir)})
    assert resp.status_code == 200, resp.text
    return resp.json()


def put_quad(client, sid, index, quad=QUAD, label="L"):
    return client.put(
        f"/api/sessions/{sid}/frames/{index}/annotations",
        json={"annotations": [{"track_id": 0, "quad": quad, "label": label,
                               "source": "human"}]})


def wait_job(client, sid, jid, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/api/sessions/{sid}/jobs/{jid}").json()
        if doc["status"] != "running":
            return doc
        time.sleep(0.1)
    raise TimeoutError("job did not settle")


def propagate_and_wait(client, sid, frame_from, frame_to, seed=0):
    resp = client.post(f"/api/sessions/{sid}/propagate",
                       json={"from": frame_from, "to": frame_to, "seed": seed})
    assert resp.status_code == 200, resp.text
    return wait_job(client, sid, resp.json()["job_id"])


class TestSessions:
    def test_create_and_fetch_frame(self, client, pan_dir):
        info = create_session(client, pan_dir)
        assert info["frame_count"] == 8
        png = client.get(f"/api/sessions/{info['id']}/frames/0")
        assert png.status_code == 200
        assert png.headers["content-type"] == "image/png"
        assert png.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_empty_dir_rejected(self, client, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        resp = client.post("/api/sessions", json={"frames_dir": str(empty)})
        assert resp.status_code == 400
        assert "reason" in resp.json()

    def test_sessions_are_independent(self, client, pan_dir):
        a = create_session(client, pan_dir)
        b = create_session(client, pan_dir)
        assert a["id"] != b["id"]

    def test_unknown_session_404(self, client):
        assert client.get("/api/sessions/zzz").status_code == 404

    def test_frame_out_of_range_404(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        assert client.get(f"/api/sessions/{sid}/frames/99").status_code == 404


class TestAnnotations:
    def test_seed_increments_revision(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        resp = put_quad(client, sid, 0)
        assert resp.status_code == 200
        assert resp.json()["revision"] == 1
        doc = client.get(f"/api/sessions/{sid}").json()
        anns = doc["frames"][0]["annotations"]
        assert anns[0]["source"] == "human"
        assert anns[0]["quad"] == QUAD

    def test_self_intersecting_quad_rejected(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        bowtie = [[0, 0], [10, 10], [10, 0], [0, 10]]
        resp = put_quad(client, sid, 0, quad=bowtie)
        assert resp.status_code == 400
        assert "intersect" in resp.json()["reason"]
        doc = client.get(f"/api/sessions/{sid}").json()
        assert doc["revision"] == 0 and doc["frames"] == []

    def test_bad_index_no_state_change(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        assert put_quad(client, sid, 42).status_code == 404
        assert client.get(f"/api/sessions/{sid}").json()["revision"] == 0


class TestPropagation:
    def test_full_pan_completes(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        put_quad(client, sid, 0)
        job = propagate_and_wait(client, sid, 0, 7)
        assert job["status"] == "completed"
        doc = client.get(f"/api/sessions/{sid}/export").json()
        assert [f["index"] for f in doc["frames"]] == list(range(8))
        sources = {f["index"]: f["annotations"][0]["source"]
                   for f in doc["frames"]}
        assert sources[0] == "human"
        assert all(sources[i] == "propagated" for i in range(1, 8))
        assert len(doc["diagnostics"]) == 7

    def test_missing_seed_rejected(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        resp = client.post(f"/api/sessions/{sid}/propagate",
                           json={"from": 0, "to": 7})
        assert resp.status_code == 400

    def test_scene_cut_halts(self, client, tmp_path):
        frames = two_scene_frames(8, 4, 256, 192, seed=70)
        d = write_frames(tmp_path / "cut", frames)
        sid = create_session(client, d)["id"]
        put_quad(client, sid, 0)
        job = propagate_and_wait(client, sid, 0, 7)
        assert job["status"] == "halted"
        assert job["halted_at"] == 4

    def test_concurrent_job_conflicts(self, client, tmp_path):
        frames, _ = panning_frames(14, 256, 192, seed=71)
        d = write_frames(tmp_path / "long", frames)
        sid = create_session(client, d)["id"]
        put_quad(client, sid, 0)
        first = client.post(f"/api/sessions/{sid}/propagate",
                            json={"from": 0, "to": 13})
        assert first.status_code == 200
        second = client.post(f"/api/sessions/{sid}/propagate",
                             json={"from": 0, "to": 13})
        assert second.status_code == 409
        put = put_quad(client, sid, 2)
        assert put.status_code == 409
        wait_job(client, sid, first.json()["job_id"])

    def test_correction_marks_downstream_stale(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        put_quad(client, sid, 0)
        propagate_and_wait(client, sid, 0, 7)
        put_quad(client, sid, 3)
        doc = client.get(f"/api/sessions/{sid}").json()
        stale = {f["index"]: [a["stale"] for a in f["annotations"]]
                 for f in doc["frames"]}
        assert all(stale[i] == [False] for i in range(0, 4))
        assert all(stale[i] == [True] for i in range(4, 8))
        export = client.get(f"/api/sessions/{sid}/export").json()
        assert [f["index"] for f in export["frames"]] == [0, 1, 2, 3]

    def test_export_idempotent(self, client, pan_dir):
        sid = create_session(client, pan_dir)["id"]
        put_quad(client, sid, 0)
        a = client.get(f"/api/sessions/{sid}/export").json()
        b = client.get(f"/api/sessions/{sid}/export").json()
        assert a == b

    def test_export_round_trips_through_eval(self, client, pan_dir, tmp_path):
        import json

        from e2vts.cli import main

        sid = create_session(client, pan_dir)["id"]
        put_quad(client, sid, 0)
        propagate_and_wait(client, sid, 0, 7)
        doc = client.get(f"/api/sessions/{sid}/export").json()
        exported = tmp_path / "doc.json"
        exported.write_text(json.dumps(doc))
        report = tmp_path / "report.json"
        assert main(["eval", "--pred", str(exported), "--gt", str(exported),
                     "--report", str(report)]) == 0
        aggregates = json.loads(report.read_text())["aggregates"]
        assert aggregates["mean_iou"] == 1.0
        assert aggregates["mean_edit_distance"] == 0.0
        assert aggregates["gt_count"] == 8


class TestCorrectionEquivalence:
    def test_repropagation_equals_fresh_session(self, client, tmp_path):
        n, cut = 9, 4
        frames = two_scene_frames(n, cut, 256, 192, seed=72)
        full_dir = write_frames(tmp_path / "full", frames)
        sid = create_session(client, full_dir)["id"]
        put_quad(client, sid, 0)
        job = propagate_and_wait(client, sid, 0, n - 1, seed=17)
        assert job["status"] == "halted" and job["halted_at"] == cut

        correction = [[40.0, 40.0], [140.0, 46.0], [136.0, 110.0], [44.0, 104.0]]
        put_quad(client, sid, cut, quad=correction, label="C")
        job = propagate_and_wait(client, sid, cut, n - 1, seed=17)
        assert job["status"] == "completed"
        corrected = client.get(f"/api/sessions/{sid}/export").json()

        tail = [f.pixels for f in frames[cut:]]
        fresh_frames = [type(frames[0])(index=i, pixels=p)
                        for i, p in enumerate(tail)]
        fresh_dir = write_frames(tmp_path / "fresh", fresh_frames)
        sid2 = create_session(client, fresh_dir)["id"]
        put_quad(client, sid2, 0, quad=correction, label="C")
        job = propagate_and_wait(client, sid2, 0, n - 1 - cut, seed=17)
        assert job["status"] == "completed"
        fresh = client.get(f"/api/sessions/{sid2}/export").json()

        corrected_by_index = {f["index"]: f["annotations"]
                              for f in corrected["frames"]}
        fresh_by_index = {f["index"]: f["annotations"]
                          for f in fresh["frames"]}
        for offset in range(n - cut):
            assert corrected_by_index[cut + offset] == fresh_by_index[offset]
