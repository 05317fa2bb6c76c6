"""Pydantic request/response models for the capture service."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..trajdata import STEP_SECONDS


class SceneSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scene_id: str
    dataset_id: str
    start_frame: int
    n_pedestrians: int
    n_frames: int


class PedestrianState(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    x: float
    y: float


class SceneReplay(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scene_id: str
    frame_interval: float = STEP_SECONDS
    frames: list[list[PedestrianState]]
    start: list[float] = Field(min_length=2, max_length=2)
    goal: list[float] = Field(min_length=2, max_length=2)


class UploadResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    session_id: str


class ValidationDetail(BaseModel):
    model_config = ConfigDict(extra="forbid")

    message: str
    field: str | None = None
    sample_index: int | None = None


def scene_id_for(window):
    return f"{window.dataset_id}:{window.start_frame}"


def replay_from_window(window, max_pedestrians=30):
    """Replay document for a window, capped for UI legibility.

    The suggested start/goal straddle the crowd bounding box so the
    steering task crosses the pedestrians; goal != start by construction.
    """
    peds = window.pedestrians[:max_pedestrians]
    frames = []
    for k in range(window.length):
        frames.append(
            [
                PedestrianState(id=p.pedestrian_id, x=float(p.abs_positions[k, 0]), y=float(p.abs_positions[k, 1]))
                for p in peds
            ]
        )
    all_pos = np.concatenate([p.abs_positions for p in peds], axis=0)
    lo = all_pos.min(axis=0)
    hi = all_pos.max(axis=0)
    mid_y = float((lo[1] + hi[1]) / 2.0)
    start = [float(lo[0] - 2.0), mid_y]
    goal = [float(hi[0] + 2.0), mid_y]
    return SceneReplay(
        scene_id=scene_id_for(window),
        frames=frames,
        start=start,
        goal=goal,
    )
