"""Trajectory file parsing, observation windows, and dataset splits.

Input files are plain text, one observation per line: `frame_id ped_id x y`
(whitespace-separated, world meters). After frame-stride resampling the
retained steps are 0.4 s apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, DataError, ParseError

STEP_SECONDS = 0.4
T_OBS = 8
T_PRED = 12


@dataclass
class RawTrack:
    pedestrian_id: int
    frames: list[int]
    positions: np.ndarray  # (len(frames), 2) meters


@dataclass
class WindowPedestrian:
    pedestrian_id: int
    abs_positions: np.ndarray  # (t_obs + t_pred, 2) meters
    rel_displacements: np.ndarray  # (t_obs + t_pred, 2); row 0 is (0, 0)
    velocity_at_obs: np.ndarray  # (2,) m/s at the last observed step


@dataclass
class SceneWindow:
    dataset_id: str
    start_frame: int
    pedestrians: list[WindowPedestrian]
    t_obs: int = T_OBS
    t_pred: int = T_PRED

    @property
    def n_pedestrians(self):
        return len(self.pedestrians)

    @property
    def length(self):
        return self.t_obs + self.t_pred


@dataclass
class Split:
    train: list[SceneWindow]
    validation: list[SceneWindow]
    test: list[SceneWindow]


def parse_dataset(path, frame_stride=10):
    """Read `frame ped x y` rows into per-pedestrian tracks.

    Frames are resampled on a global grid anchored at the smallest frame
    id, keeping rows with (frame - min_frame) % frame_stride == 0.
    """
    if frame_stride < 1:
        raise ConfigError(f"frame_stride must be >= 1, got {frame_stride}")
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 4:
                raise ParseError(f"expected 4 fields, got {len(fields)}", line=lineno)
            try:
                frame = int(float(fields[0]))
                ped = int(float(fields[1]))
                x = float(fields[2])
                y = float(fields[3])
            except ValueError:
                raise ParseError(f"non-numeric field in row {fields!r}", line=lineno)
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ParseError("non-finite coordinate", line=lineno)
            rows.append((frame, ped, x, y))

    if not rows:
        return []

    by_ped: dict[int, list[tuple[int, float, float]]] = {}
    for frame, ped, x, y in rows:
        by_ped.setdefault(ped, []).append((frame, x, y))

    for ped, samples in by_ped.items():
        frames = [s[0] for s in samples]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise DataError(f"non-monotone frames for pedestrian {ped}")

    min_frame = min(r[0] for r in rows)
    tracks = []
    for ped in sorted(by_ped):
        kept = [(f, x, y) for f, x, y in by_ped[ped] if (f - min_frame) % frame_stride == 0]
        if not kept:
            continue
        tracks.append(
            RawTrack(
                pedestrian_id=ped,
                frames=[f for f, _, _ in kept],
                positions=np.array([[x, y] for _, x, y in kept], dtype=np.float64),
            )
        )
    return tracks


def _displacements(abs_positions):
    rel = np.zeros_like(abs_positions)
    rel[1:] = abs_positions[1:] - abs_positions[:-1]
    return rel


def build_windows(tracks, t_obs=T_OBS, t_pred=T_PRED, dataset_id=""):
    """Sliding windows, stride one retained frame.

    A window keeps exactly the pedestrians observed at all t_obs + t_pred
    consecutive retained frames; empty windows are dropped.
    """
    length = t_obs + t_pred
    if not tracks:
        return []

    all_frames = sorted({f for tr in tracks for f in tr.frames})
    if len(all_frames) >= 2:
        stride = min(b - a for a, b in zip(all_frames, all_frames[1:]))
    else:
        stride = 1

    frame_index = {}
    for tr in tracks:
        frame_index[tr.pedestrian_id] = {f: i for i, f in enumerate(tr.frames)}

    windows = []
    for start in all_frames:
        wanted = [start + k * stride for k in range(length)]
        peds = []
        for tr in tracks:
            idx = frame_index[tr.pedestrian_id]
            if all(f in idx for f in wanted):
                abs_pos = tr.positions[[idx[f] for f in wanted]]
                rel = _displacements(abs_pos)
                velocity = (abs_pos[t_obs - 1] - abs_pos[t_obs - 2]) / STEP_SECONDS
                peds.append(
                    WindowPedestrian(
                        pedestrian_id=tr.pedestrian_id,
                        abs_positions=abs_pos,
                        rel_displacements=rel,
                        velocity_at_obs=velocity,
                    )
                )
        if peds:
            windows.append(
                SceneWindow(
                    dataset_id=dataset_id,
                    start_frame=start,
                    pedestrians=peds,
                    t_obs=t_obs,
                    t_pred=t_pred,
                )
            )
    return windows


def leave_one_out_split(datasets, held_out, validation_fraction=0.1, seed=0):
    """Test on `held_out`, carve train/validation from the other four."""
    if len(datasets) != 5:
        raise ConfigError(f"expected exactly 5 datasets, got {len(datasets)}")
    if held_out not in datasets:
        raise ConfigError(f"unknown held-out dataset {held_out!r}; have {sorted(datasets)}")

    rng = np.random.default_rng(seed)
    train: list[SceneWindow] = []
    validation: list[SceneWindow] = []
    for name in sorted(datasets):
        if name == held_out:
            continue
        windows = datasets[name]
        n_val = int(np.ceil(validation_fraction * len(windows))) if windows else 0
        order = rng.permutation(len(windows))
        validation.extend(windows[i] for i in order[:n_val])
        train.extend(windows[i] for i in order[n_val:])
    return Split(train=train, validation=validation, test=list(datasets[held_out]))


def velocity_at(window, pedestrian, t):
    """Backward-difference velocity (m/s) of pedestrians[pedestrian] at step t."""
    if t < 1:
        raise ContractError(f"velocity needs t >= 1, got {t}")
    ped = window.pedestrians[pedestrian]
    return (ped.abs_positions[t] - ped.abs_positions[t - 1]) / STEP_SECONDS


def relative_context(window, focal, t=None):
    """p_rel[j] = position_j - position_focal at step t (default last observed)."""
    if t is None:
        t = window.t_obs - 1
    focal_pos = window.pedestrians[focal].abs_positions[t]
    return np.array([p.abs_positions[t] - focal_pos for p in window.pedestrians])


def positions_from_displacements(origin, displacements):
    """Cumulatively sum displacements starting from (but not including) origin."""
    return np.asarray(origin, dtype=np.float64) + np.cumsum(displacements, axis=0)
