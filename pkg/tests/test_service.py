"""HTTP and WebSocket service endpoints."""

from __future__ import annotations

import base64
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from pdmrender import combine
from pdmrender.service import NoSessionError, SessionStore, create_app

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

VOLUME_REQ = {
    "synth": {"kind": "sphere_shell", "dims": 32, "seed": 3},
    "partitions": 16,
}

TF_UPPER_HALF = {
    "control_points": [
        {"intensity": 0, "r": 0, "g": 0, "b": 0, "a": 0},
        {"intensity": 127, "r": 0, "g": 0, "b": 0, "a": 0},
        {"intensity": 128, "r": 1, "g": 0.5, "b": 0.2, "a": 0.3},
        {"intensity": 255, "r": 1, "g": 0.5, "b": 0.2, "a": 0.5},
    ]
}


@pytest.fixture()
def client():
    app = create_app()
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def loaded(client):
    resp = client.post("/api/volume", json=VOLUME_REQ)
    assert resp.status_code == 200
    return client


class TestNoSession:
    def test_info_409(self, client):
        resp = client.get("/api/info")
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "no_session"

    def test_frame_409(self, client):
        resp = client.get("/api/frame")
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "no_session"

    def test_tf_409(self, client):
        resp = client.post("/api/tf", json=TF_UPPER_HALF)
        assert resp.status_code == 409


class TestVolumeLoad:
    def test_synth_load_response(self, client):
        resp = client.post("/api/volume", json=VOLUME_REQ)
        assert resp.status_code == 200
        body = resp.json()
        assert body["dims"] == [32, 32, 32]
        assert body["bits"] == 8
        assert body["n"] == 16
        assert body["bdims"] == [8, 8, 8]
        assert body["extra_memory_bytes"] == 16 * 8**3
        assert body["one_time_init_ms"] > 0.0

    def test_both_specs_rejected(self, client):
        resp = client.post(
            "/api/volume",
            json={**VOLUME_REQ, "path": "/tmp/x.raw"},
        )
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "bad_volume_spec"

    def test_neither_spec_rejected(self, client):
        resp = client.post("/api/volume", json={"partitions": 8})
        assert resp.status_code == 400

    def test_missing_file(self, client):
        resp = client.post("/api/volume", json={"path": "/tmp/does-not-exist.raw"})
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "load_failed"

    def test_info_after_load(self, loaded):
        body = loaded.get("/api/info").json()
        assert body["dims"] == [32, 32, 32]
        assert sum(body["histogram"]) == 32**3
        assert len(body["scheme"]) == 16
        assert body["scheme"][0][0] == 0
        assert body["scheme"][-1][1] == 255
        assert body["occupancy_mode"] == "range_apron"

    def test_min_special_scheme(self, client):
        resp = client.post(
            "/api/volume",
            json={**VOLUME_REQ, "scheme": "min_special", "rho_min": 10},
        )
        assert resp.status_code == 200
        info = client.get("/api/info").json()
        assert info["scheme"][0] == [0, 10]

    def test_reload_replaces_session(self, loaded):
        resp = loaded.post(
            "/api/volume",
            json={"synth": {"kind": "noise", "dims": 16, "seed": 1}, "partitions": 4},
        )
        assert resp.status_code == 200
        info = loaded.get("/api/info").json()
        assert info["dims"] == [16, 16, 16]
        assert info["n"] == 4


class TestTransferFunction:
    def test_empty_tf_selects_nothing(self, loaded):
        lut = [[0.0, 0.0, 0.0, 0.0]] * 256
        resp = loaded.post("/api/tf", json={"lut": lut})
        assert resp.status_code == 200
        body = resp.json()
        assert body["selection"] == []
        assert body["dprime_nonzero_fraction"] == 0.0
        assert body["select_ms"] >= 0.0
        assert body["combine_ms"] >= 0.0

    def test_everywhere_tf_selects_all(self, loaded):
        points = [
            {"intensity": 0, "r": 0, "g": 0, "b": 0, "a": 0.2},
            {"intensity": 255, "r": 1, "g": 1, "b": 1, "a": 0.5},
        ]
        body = loaded.post("/api/tf", json={"control_points": points}).json()
        assert body["selection"] == list(range(1, 17))
        # every block holds some intensity, so the combined map is zero
        # everywhere and nothing can be skipped
        assert body["dprime_nonzero_fraction"] == 1.0

    def test_identical_posts_identical_state(self, loaded):
        a = loaded.post("/api/tf", json=TF_UPPER_HALF).json()
        frame_a = loaded.get("/api/frame", params={"w": 16, "h": 16}).content
        b = loaded.post("/api/tf", json=TF_UPPER_HALF).json()
        frame_b = loaded.get("/api/frame", params={"w": 16, "h": 16}).content
        assert a["selection"] == b["selection"]
        assert a["dprime_nonzero_fraction"] == b["dprime_nonzero_fraction"]
        assert frame_a == frame_b

    def test_empty_body_rejected(self, loaded):
        resp = loaded.post("/api/tf", json={})
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "bad_tf"

    def test_malformed_tf_leaves_session_unchanged(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        before = loaded.get("/api/frame", params={"w": 16, "h": 16}).content
        bad = {
            "control_points": [
                {"intensity": 5, "r": 0, "g": 0, "b": 0, "a": 0},
                {"intensity": 255, "r": 0, "g": 0, "b": 0, "a": 1},
            ]
        }
        resp = loaded.post("/api/tf", json=bad)
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "bad_tf"
        after = loaded.get("/api/frame", params={"w": 16, "h": 16}).content
        assert before == after

    def test_wrong_bits_rejected(self, loaded):
        lut16 = [[0.0, 0.0, 0.0, 0.5]] * 16
        resp = loaded.post("/api/tf", json={"bits": 4, "lut": lut16})
        assert resp.status_code == 400

    def test_combined_map_matches_recompute(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        store = loaded.app.state.store
        session = store.snapshot()
        ref = combine(session.pdm_set, session.selection)
        assert np.array_equal(session.dprime.dist, ref.dist)


class TestFrame:
    def test_png_content(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        resp = loaded.get("/api/frame", params={"w": 24, "h": 24, "angle": 0.7})
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert resp.content.startswith(PNG_MAGIC)
        stats = json.loads(resp.headers["x-render-stats"])
        assert stats["rays"] == 24 * 24
        assert stats["samples_evaluated"] > 0

    def test_full_turn_identical(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        params = {"w": 20, "h": 20}
        a = loaded.get("/api/frame", params={**params, "angle": 0.0}).content
        b = loaded.get("/api/frame", params={**params, "angle": 2.0 * np.pi}).content
        assert a == b

    def test_skip_mode_changes_stats_not_pixels(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        params = {"w": 24, "h": 24, "angle": 1.1, "step": 1.0}
        none = loaded.get("/api/frame", params={**params, "ess": "none"})
        pdm = loaded.get("/api/frame", params={**params, "ess": "pdm"})
        assert none.content == pdm.content
        ev_none = json.loads(none.headers["x-render-stats"])["samples_evaluated"]
        ev_pdm = json.loads(pdm.headers["x-render-stats"])["samples_evaluated"]
        assert ev_pdm < ev_none

    def test_invalid_params_rejected(self, loaded):
        assert loaded.get("/api/frame", params={"w": 0}).status_code == 422
        assert loaded.get("/api/frame", params={"ess": "warp"}).status_code == 422
        assert loaded.get("/api/frame", params={"step": 0}).status_code == 422


class TestStream:
    def test_malformed_request_keeps_socket_open(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        with loaded.websocket_connect("/api/stream") as ws:
            ws.send_text("{not json")
            msg = ws.receive_json()
            assert msg["error"]["code"] == "bad_request"
            ws.send_text(json.dumps({"angle": 0.3, "w": 16, "h": 16}))
            frame = ws.receive_json()
            assert "error" not in frame
            assert frame["frame_id"] >= 1

    def test_frame_payload(self, loaded):
        loaded.post("/api/tf", json=TF_UPPER_HALF)
        with loaded.websocket_connect("/api/stream") as ws:
            ws.send_text(json.dumps({"angle": 0.0, "w": 16, "h": 16, "ess": "pdm"}))
            a = ws.receive_json()
            ws.send_text(json.dumps({"angle": 0.5, "w": 16, "h": 16, "ess": "pdm"}))
            b = ws.receive_json()
        assert b["frame_id"] == a["frame_id"] + 1
        image = base64.b64decode(a["image"])
        assert image.startswith(PNG_MAGIC)
        assert a["render_stats"]["rays"] == 256
        assert {"select_ms", "combine_ms"} <= set(a["update_timings"])

    def test_no_session_error_frame(self, client):
        with client.websocket_connect("/api/stream") as ws:
            ws.send_text(json.dumps({"angle": 0.0}))
            msg = ws.receive_json()
            assert msg["error"]["code"] == "no_session"
            # socket is still usable afterwards
            ws.send_text("also not json")
            assert ws.receive_json()["error"]["code"] == "bad_request"

    def test_validation_error_frame(self, loaded):
        with loaded.websocket_connect("/api/stream") as ws:
            ws.send_text(json.dumps({"w": -5}))
            assert ws.receive_json()["error"]["code"] == "bad_request"


class TestSessionStore:
    def test_set_tf_before_load(self):
        from pdmrender import tf_archetype

        store = SessionStore()
        with pytest.raises(NoSessionError):
            store.set_tf(tf_archetype("tf2"))

    def test_load_starts_with_empty_tf(self):
        from pdmrender import BlockGrid, scheme_uniform, synth_volume

        store = SessionStore()
        vol = synth_volume("noise", 16, seed=0)
        session = store.load(vol, BlockGrid.for_dims(vol.dims, 4), scheme_uniform(8, 8))
        assert len(session.selection) == 0
        assert np.all(session.dprime.dist == 255)

    def test_frame_ids_monotone(self):
        store = SessionStore()
        assert [store.next_frame_id() for _ in range(3)] == [1, 2, 3]


class TestUiContract:
    """What the browser front end relies on end to end."""

    def test_frame_matches_cli_render(self, tmp_path, client):
        from pdmrender import tf_archetype, tf_to_json
        from pdmrender.cli import main as cli_main

        out = tmp_path / "cli.png"
        code = cli_main(
            [
                "render",
                "--synth", "sphere_shell", "--dims", "64", "--seed", "3",
                "--partitions", "16",
                "--tf", "tf3",
                "--angle", "0.9",
                "--size", "200x160",
                "--step", "1.0",
                "--ess", "pdm",
                "--out", str(out),
            ]
        )
        assert code == 0

        resp = client.post(
            "/api/volume",
            json={"synth": {"kind": "sphere_shell", "dims": 64, "seed": 3}, "partitions": 16},
        )
        assert resp.status_code == 200
        resp = client.post("/api/tf", json=json.loads(tf_to_json(tf_archetype("tf3"))))
        assert resp.status_code == 200
        frame = client.get(
            "/api/frame", params={"angle": 0.9, "w": 200, "h": 160, "ess": "pdm", "step": 1.0}
        )
        assert frame.status_code == 200
        assert frame.content == out.read_bytes()

    def test_tf_edit_repaints_quickly(self, client):
        import time

        resp = client.post(
            "/api/volume",
            json={"synth": {"kind": "sphere_shell", "dims": 128, "seed": 0}, "partitions": 64},
        )
        assert resp.status_code == 200
        # warm the kernels so the measurement reflects steady-state editing
        client.post("/api/tf", json=TF_UPPER_HALF)
        client.get("/api/frame", params={"angle": 0.5, "w": 384, "h": 384, "ess": "pdm", "step": 1.0})

        edited = {
            "control_points": [
                {"intensity": 0, "r": 0, "g": 0, "b": 0, "a": 0},
                {"intensity": 100, "r": 0.2, "g": 0.4, "b": 0.9, "a": 0},
                {"intensity": 160, "r": 0.9, "g": 0.7, "b": 0.3, "a": 0.6},
                {"intensity": 255, "r": 1, "g": 1, "b": 1, "a": 0.8},
            ]
        }
        t0 = time.perf_counter()
        tf_resp = client.post("/api/tf", json=edited)
        frame = client.get(
            "/api/frame", params={"angle": 0.6, "w": 384, "h": 384, "ess": "pdm", "step": 1.0}
        )
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        assert tf_resp.status_code == 200
        body = tf_resp.json()
        assert body["select_ms"] >= 0.0 and body["combine_ms"] >= 0.0
        assert frame.status_code == 200
        assert elapsed_ms < 500.0, f"edit-to-frame took {elapsed_ms:.0f}ms"

    def test_static_frontend_served_when_built(self, client):
        import pathlib

        dist = pathlib.Path(__file__).resolve().parents[1] / "frontend" / "dist"
        if not dist.is_dir():
            pytest.skip("frontend not built")
        page = client.get("/")
        assert page.status_code == 200
        assert 'id="tf-editor"' in page.text
        script = client.get("/main.js")
        assert script.status_code == 200
        assert "FrameLoop" in script.text
