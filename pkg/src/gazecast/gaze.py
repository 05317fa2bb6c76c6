"""Gaze-proxy sessions and ground-truth attention distributions.

A session records a human steering a virtual pedestrian through a replayed
crowd from a top-down view; the cursor stands in for gaze. Sessions are
persisted one per file as JSON with a `format_version` field (currently 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, RangeError, SessionValidationError

FORMAT_VERSION = 1
GAZE_WINDOW_SECONDS = 0.2
MIN_SAMPLE_RATE_HZ = 20.0


@dataclass
class SceneRef:
    dataset_id: str
    start_frame: int


@dataclass
class GazeSample:
    t: float  # seconds from session start
    gaze_xy: np.ndarray  # (2,) meters, cursor proxy
    agent_xy: np.ndarray  # (2,) meters, steered agent
    agent_v: np.ndarray  # (2,) m/s


@dataclass
class GazeSession:
    scene_ref: SceneRef
    goal: np.ndarray  # (2,) meters
    samples: list[GazeSample]
    format_version: int = FORMAT_VERSION


@dataclass
class GazeWindowPoints:
    points: np.ndarray  # (M, 2) meters; may be empty, empty windows are skipped as supervision

    def __len__(self):
        return len(self.points)


@dataclass
class GroundTruthAttention:
    weights: np.ndarray  # (N,), non-negative, sums to 1
    sigma2: float
    uniform_fallback: bool = False


# -- session schema ---------------------------------------------------------------

_SESSION_KEYS = {"format_version", "scene_ref", "goal", "samples"}
_SCENE_REF_KEYS = {"dataset_id", "start_frame"}
_SAMPLE_KEYS = {"t", "gaze_xy", "agent_xy", "agent_v"}


def _require_vec2(value, field):
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and np.isfinite(v) for v in value)
    ):
        raise SessionValidationError(f"{field} must be a pair of finite numbers", field=field)
    return np.array(value, dtype=np.float64)


def session_from_dict(payload):
    """Validate and decode a session document; raises SessionValidationError."""
    if not isinstance(payload, dict):
        raise SessionValidationError("session document must be an object")
    unknown = set(payload) - _SESSION_KEYS
    if unknown:
        raise SessionValidationError(f"unknown session keys {sorted(unknown)}", field=sorted(unknown)[0])
    missing = _SESSION_KEYS - set(payload)
    if missing:
        raise SessionValidationError(f"missing session keys {sorted(missing)}", field=sorted(missing)[0])
    if payload["format_version"] != FORMAT_VERSION:
        raise SessionValidationError(
            f"unsupported format_version {payload['format_version']!r}", field="format_version"
        )

    ref = payload["scene_ref"]
    if not isinstance(ref, dict) or set(ref) != _SCENE_REF_KEYS:
        raise SessionValidationError("scene_ref must have dataset_id and start_frame", field="scene_ref")
    if not isinstance(ref["dataset_id"], str):
        raise SessionValidationError("scene_ref.dataset_id must be a string", field="scene_ref.dataset_id")
    if not isinstance(ref["start_frame"], int):
        raise SessionValidationError("scene_ref.start_frame must be an integer", field="scene_ref.start_frame")

    goal = _require_vec2(payload["goal"], "goal")

    raw_samples = payload["samples"]
    if not isinstance(raw_samples, list) or len(raw_samples) < 2:
        raise SessionValidationError("samples must be a list with at least 2 entries", field="samples")

    samples = []
    prev_t = None
    for i, raw in enumerate(raw_samples):
        if not isinstance(raw, dict) or set(raw) != _SAMPLE_KEYS:
            raise SessionValidationError(
                f"sample {i} must have keys {sorted(_SAMPLE_KEYS)}", field="samples", sample_index=i
            )
        t = raw["t"]
        if not isinstance(t, (int, float)) or not np.isfinite(t):
            raise SessionValidationError(f"sample {i} has non-numeric t", field="samples.t", sample_index=i)
        if prev_t is not None:
            if t <= prev_t:
                raise SessionValidationError(
                    f"timestamps must strictly increase; sample {i} has t={t} after {prev_t}",
                    field="samples.t",
                    sample_index=i,
                )
            if (t - prev_t) > 1.0 / MIN_SAMPLE_RATE_HZ + 1e-9:
                raise SessionValidationError(
                    f"sampling gap {t - prev_t:.4f}s at sample {i} exceeds the 20 Hz minimum",
                    field="samples.t",
                    sample_index=i,
                )
        prev_t = t
        samples.append(
            GazeSample(
                t=float(t),
                gaze_xy=_require_vec2(raw["gaze_xy"], f"samples[{i}].gaze_xy"),
                agent_xy=_require_vec2(raw["agent_xy"], f"samples[{i}].agent_xy"),
                agent_v=_require_vec2(raw["agent_v"], f"samples[{i}].agent_v"),
            )
        )

    return GazeSession(
        scene_ref=SceneRef(dataset_id=ref["dataset_id"], start_frame=ref["start_frame"]),
        goal=goal,
        samples=samples,
    )


def session_to_dict(session):
    return {
        "format_version": session.format_version,
        "scene_ref": {
            "dataset_id": session.scene_ref.dataset_id,
            "start_frame": session.scene_ref.start_frame,
        },
        "goal": [float(v) for v in session.goal],
        "samples": [
            {
                "t": float(s.t),
                "gaze_xy": [float(v) for v in s.gaze_xy],
                "agent_xy": [float(v) for v in s.agent_xy],
                "agent_v": [float(v) for v in s.agent_v],
            }
            for s in session.samples
        ],
    }


def load_session(path):
    with open(path, "r", encoding="utf-8") as handle:
        return session_from_dict(json.load(handle))


def save_session(path, session):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(session_to_dict(session), handle, indent=1)


# -- attention supervision ----------------------------------------------------------


def extract_window(session, t_obs_time):
    """Gaze points with t in (t_obs_time - 0.2, t_obs_time]."""
    t0 = session.samples[0].t
    t1 = session.samples[-1].t
    if not (t0 <= t_obs_time <= t1):
        raise RangeError(f"t={t_obs_time} outside session span [{t0}, {t1}]")
    points = [
        s.gaze_xy for s in session.samples if t_obs_time - GAZE_WINDOW_SECONDS < s.t <= t_obs_time
    ]
    return GazeWindowPoints(points=np.array(points).reshape(-1, 2))


def ground_truth_attention(points, ped_positions, sigma2):
    """Normalized Gaussian-mixture density at each pedestrian position.

    density_j = mean over gaze points g of exp(-|p_j - g|^2 / (2 sigma2));
    an all-underflow mixture falls back to uniform weights and says so.
    """
    if sigma2 <= 0.0:
        raise ContractError(f"sigma2 must be positive, got {sigma2}")
    gaze = points.points if isinstance(points, GazeWindowPoints) else np.asarray(points, dtype=np.float64)
    ped_positions = np.asarray(ped_positions, dtype=np.float64)
    if len(gaze) == 0:
        raise ContractError("ground-truth attention needs at least one gaze point")
    if len(ped_positions) == 0:
        raise ContractError("ground-truth attention needs at least one pedestrian")

    diff = ped_positions[:, None, :] - gaze[None, :, :]  # (N, M, 2)
    d2 = np.sum(diff * diff, axis=2)
    densities = np.exp(-d2 / (2.0 * sigma2)).mean(axis=1)
    total = densities.sum()
    if total <= 0.0:
        n = len(ped_positions)
        return GroundTruthAttention(weights=np.full(n, 1.0 / n), sigma2=float(sigma2), uniform_fallback=True)
    return GroundTruthAttention(weights=densities / total, sigma2=float(sigma2), uniform_fallback=False)


def pick_gaze_target(window, focal):
    """Index of the neighbor with smallest distance over closing speed.

    Only neighbors approaching the focal pedestrian qualify; if none do,
    the nearest neighbor is returned. Returns the focal index when it has
    no neighbors.
    """
    n = window.n_pedestrians
    if n == 1:
        return focal
    t = window.t_obs - 1
    focal_pos = window.pedestrians[focal].abs_positions[t]
    focal_vel = window.pedestrians[focal].velocity_at_obs

    best_score = None
    best_j = None
    nearest_j = None
    nearest_d = None
    for j, ped in enumerate(window.pedestrians):
        if j == focal:
            continue
        r = ped.abs_positions[t] - focal_pos
        u = ped.velocity_at_obs - focal_vel
        dist2 = float(r @ r)
        if nearest_d is None or dist2 < nearest_d:
            nearest_d = dist2
            nearest_j = j
        closing = float(r @ u)
        if closing < 0.0:  # approaching: distance shrinking
            score = -dist2 / closing
            if best_score is None or score < best_score:
                best_score = score
                best_j = j
    return best_j if best_j is not None else nearest_j


def synthetic_gaze_oracle(window, focal, rng, n_points=10, jitter_std=0.2):
    """Stand-in for human gaze: points jittered around the most pressing neighbor.

    With no neighbors the points sit on the focal pedestrian's own
    projected next position. Deterministic given the rng seed.
    """
    t = window.t_obs - 1
    target = pick_gaze_target(window, focal)
    if target == focal:
        ped = window.pedestrians[focal]
        center = ped.abs_positions[t] + ped.velocity_at_obs * 0.4
    else:
        center = window.pedestrians[target].abs_positions[t]
    points = center + rng.normal((n_points, 2)) * jitter_std
    return GazeWindowPoints(points=points)
