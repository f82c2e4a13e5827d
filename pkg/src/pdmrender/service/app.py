"""HTTP and WebSocket endpoints of the render service.

GET /api/info, POST /api/volume, POST /api/tf, GET /api/frame, and the
client-paced WS /api/stream. Frames are PNG so the lossless path from the
kernel to the browser preserves the skip-mode equivalence property.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from ..raycast import encode_png
from ..transfer import TransferFunctionError, tf_from_json
from ..volume import BlockGrid, VolumeError, load_raw, synth_volume
from .models import (
    InfoResponse,
    StreamRequest,
    TfRequest,
    TfResponse,
    VolumeLoadRequest,
    VolumeLoadResponse,
)
from .session import NoSessionError, SessionStore


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


def _tf_request_to_obj(req: TfRequest) -> dict:
    obj: dict = {}
    if req.bits is not None:
        obj["bits"] = req.bits
    if req.control_points is not None:
        obj["control_points"] = [
            {"intensity": p.intensity, "r": p.r, "g": p.g, "b": p.b, "a": p.a}
            for p in req.control_points
        ]
    if req.lut is not None:
        obj["lut"] = [list(row) for row in req.lut]
    return obj


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="pdmrender service")
    store = SessionStore()
    app.state.store = store

    @app.get("/api/info")
    def get_info():
        try:
            s = store.snapshot()
        except NoSessionError as exc:
            return _error(409, "no_session", str(exc))
        return InfoResponse(
            dims=s.volume.dims,
            bits=s.volume.bits,
            n=s.scheme.n,
            scheme=s.scheme.bounds(),
            histogram=[int(c) for c in s.volume.histogram(256)],
            block_edge=s.grid.b,
            occupancy_mode=s.occupancy_mode,
        )

    @app.post("/api/volume")
    def post_volume(req: VolumeLoadRequest):
        if (req.synth is None) == (req.path is None):
            return _error(400, "bad_volume_spec", "exactly one of synth/path required")
        try:
            if req.synth is not None:
                volume = synth_volume(req.synth.kind, req.synth.dims, req.synth.seed)
            else:
                meta = req.meta_path or str(Path(req.path).with_suffix(".json"))
                volume = load_raw(req.path, meta)
            from ..transfer import scheme_uniform, scheme_with_min_special

            if req.scheme == "uniform":
                scheme = scheme_uniform(req.partitions, volume.bits)
            else:
                rho_min = req.rho_min
                if rho_min is None:
                    rho_min = int(
                        np.bincount(volume.voxels.ravel().astype(np.int64)).argmax()
                    )
                scheme = scheme_with_min_special(req.partitions, volume.bits, rho_min)
            grid = BlockGrid.for_dims(volume.dims, req.block_edge)
            session = store.load(volume, grid, scheme, req.occupancy)
        except (OSError, VolumeError, ValueError) as exc:
            return _error(400, "load_failed", str(exc))
        return VolumeLoadResponse(
            dims=session.volume.dims,
            bits=session.volume.bits,
            n=session.scheme.n,
            block_edge=session.grid.b,
            bdims=session.grid.bdims,
            one_time_init_ms=session.pdm_set.init_seconds * 1000.0,
            extra_memory_bytes=session.pdm_set.memory_bytes(),
        )

    @app.post("/api/tf")
    def post_tf(req: TfRequest):
        try:
            snapshot = store.snapshot()
        except NoSessionError as exc:
            return _error(409, "no_session", str(exc))
        obj = _tf_request_to_obj(req)
        if "bits" not in obj and "control_points" not in obj and "lut" not in obj:
            return _error(400, "bad_tf", "transfer function body is empty")
        obj.setdefault("bits", snapshot.volume.bits)
        try:
            tf = tf_from_json(obj)
            session = store.set_tf(tf)
        except (TransferFunctionError, ValueError) as exc:
            return _error(400, "bad_tf", str(exc))
        return TfResponse(
            selection=session.selection.sorted,
            select_ms=session.select_ms,
            combine_ms=session.combine_ms,
            dprime_nonzero_fraction=session.dprime.occupied_fraction,
        )

    @app.get("/api/frame")
    def get_frame(
        angle: float = Query(default=0.0),
        w: int = Query(default=256, ge=1, le=4096),
        h: int = Query(default=256, ge=1, le=4096),
        ess: str = Query(default="pdm", pattern="^(none|block|distance|pdm)$"),
        step: float = Query(default=0.5, gt=0.0),
    ):
        try:
            fb, stats, _ = store.render_frame(angle, w, h, ess, step)
        except NoSessionError as exc:
            return _error(409, "no_session", str(exc))
        return Response(
            content=encode_png(fb),
            media_type="image/png",
            headers={"x-render-stats": json.dumps(stats.as_dict())},
        )

    @app.websocket("/api/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    req = StreamRequest.model_validate(json.loads(raw))
                except (json.JSONDecodeError, ValidationError) as exc:
                    await ws.send_json(
                        {"error": {"code": "bad_request", "message": str(exc)}}
                    )
                    continue
                try:
                    fb, stats, session = store.render_frame(
                        req.angle, req.w, req.h, req.ess, req.step
                    )
                except NoSessionError as exc:
                    await ws.send_json(
                        {"error": {"code": "no_session", "message": str(exc)}}
                    )
                    continue
                await ws.send_json(
                    {
                        "frame_id": store.next_frame_id(),
                        "image": base64.b64encode(encode_png(fb)).decode("ascii"),
                        "render_stats": stats.as_dict(),
                        "update_timings": {
                            "select_ms": session.select_ms,
                            "combine_ms": session.combine_ms,
                        },
                    }
                )
        except WebSocketDisconnect:
            return

    if static_dir is None:
        default_static = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        if default_static.is_dir():
            static_dir = str(default_static)
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="frontend")

    return app
