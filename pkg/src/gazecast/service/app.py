"""HTTP service: scene replays out, gaze sessions in.

The capture UI fetches crowd replays built from trajectory windows and
uploads recorded steering sessions. Uploads are validated against the
session schema (field-level error bodies), persisted atomically, and
immutable afterwards; stored bytes are returned verbatim on fetch.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..gaze import session_from_dict
from ..errors import SessionValidationError
from .schemas import (
    SceneSummary,
    UploadResponse,
    ValidationDetail,
    replay_from_window,
    scene_id_for,
)
from .storage import InvalidSessionIdError, SessionExistsError, SessionStore


def create_app(windows, store, max_scene_pedestrians=30, frontend_dir=None):
    """windows: list of SceneWindow available as replays; store: SessionStore."""
    app = FastAPI(title="gazecast capture service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    scenes = {scene_id_for(w): w for w in windows}

    @app.get("/scenes", response_model=list[SceneSummary])
    def list_scenes():
        return [
            SceneSummary(
                scene_id=scene_id,
                dataset_id=w.dataset_id,
                start_frame=w.start_frame,
                n_pedestrians=min(w.n_pedestrians, max_scene_pedestrians),
                n_frames=w.length,
            )
            for scene_id, w in scenes.items()
        ]

    @app.get("/scenes/{scene_id}")
    def get_scene(scene_id: str):
        window = scenes.get(scene_id)
        if window is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown scene {scene_id!r}"})
        return replay_from_window(window, max_scene_pedestrians)

    @app.get("/sessions", response_model=list[str])
    def list_sessions():
        return store.list_ids()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            raw = store.load(session_id)
        except (KeyError, InvalidSessionIdError):
            return JSONResponse(status_code=404, content={"detail": f"unknown session {session_id!r}"})
        # Stored bytes returned verbatim so round trips are byte-identical.
        return Response(content=raw, media_type="application/json")

    @app.post("/sessions", status_code=201, response_model=UploadResponse)
    async def upload_session(request: Request, session_id: str | None = Query(default=None)):
        raw = await request.body()
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as err:
            return _validation_response(ValidationDetail(message=f"invalid JSON: {err}"))
        try:
            session_from_dict(payload)
        except SessionValidationError as err:
            return _validation_response(
                ValidationDetail(message=str(err), field=err.field, sample_index=err.sample_index)
            )

        sid = session_id or store.new_id()
        try:
            store.save(sid, raw)
        except InvalidSessionIdError as err:
            return _validation_response(ValidationDetail(message=str(err), field="session_id"))
        except SessionExistsError:
            return JSONResponse(
                status_code=409, content={"detail": f"session {sid!r} already exists"}
            )
        except OSError as err:
            return JSONResponse(status_code=500, content={"detail": f"storage failure: {err}"})
        return UploadResponse(session_id=sid)

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app


def _validation_response(detail):
    return JSONResponse(status_code=422, content={"detail": detail.model_dump()})
