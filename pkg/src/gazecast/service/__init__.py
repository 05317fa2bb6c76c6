"""Capture service: scene replays and gaze-session persistence over HTTP."""

from .app import create_app
from .schemas import SceneReplay, SceneSummary, UploadResponse, replay_from_window, scene_id_for
from .storage import SessionExistsError, SessionStore

__all__ = [
    "SceneReplay",
    "SceneSummary",
    "SessionExistsError",
    "SessionStore",
    "UploadResponse",
    "create_app",
    "replay_from_window",
    "scene_id_for",
]
