"""Synthetic corpora: trajectory files, causal attention benchmarks, sessions.

Desk-scale stand-ins for the real benchmark data. The trajectory generator
writes plain text files in the standard `frame ped x y` format so they run
through the full parsing pipeline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .attention_net import build_examples
from .gaze import GazeSample, GazeSession, SceneRef, pick_gaze_target
from .numerics import Rng
from .trajdata import STEP_SECONDS, SceneWindow, WindowPedestrian

TOY_DATASET_NAMES = ("TOY_A", "TOY_B", "TOY_C", "TOY_D", "TOY_E")


def generate_toy_corpus(
    out_dir,
    dataset_names=TOY_DATASET_NAMES,
    n_pedestrians=6,
    n_frames=59,
    seed=0,
    turn_scale=0.12,
    frame_stride=10,
):
    """Write one trajectory file per dataset; returns {name: path}.

    Pedestrians walk at constant speed with a per-pedestrian constant turn
    rate, so histories carry curvature that a constant-velocity
    extrapolation misses. Every pedestrian spans all frames, giving
    n_frames - 19 windows per dataset.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = {}
    for name in dataset_names:
        rows = []
        for ped in range(1, n_pedestrians + 1):
            pos = rng.uniform(-4.0, 4.0, 2)
            speed = rng.uniform(0.7, 1.5)
            heading = rng.uniform(0.0, 2.0 * np.pi)
            turn = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0) * turn_scale
            for k in range(n_frames):
                rows.append((k * frame_stride, ped, pos[0], pos[1]))
                pos = pos + speed * STEP_SECONDS * np.array([np.cos(heading), np.sin(heading)])
                heading += turn
        rows.sort()
        path = out_dir / f"{name}.txt"
        with open(path, "w", encoding="utf-8") as handle:
            for frame, ped, x, y in rows:
                handle.write(f"{frame} {ped} {x:.6f} {y:.6f}\n")
        paths[name] = path
    return paths


def _constant_velocity_track(pos_at_obs, velocity, length=20, t_obs=8):
    pos_at_obs = np.asarray(pos_at_obs, dtype=np.float64)
    velocity = np.asarray(velocity, dtype=np.float64)
    return np.array(
        [pos_at_obs + (k - (t_obs - 1)) * velocity * STEP_SECONDS for k in range(length)]
    )


def _window_from_tracks(tracks, velocities, dataset_id, start_frame):
    peds = []
    for i, (abs_positions, vel) in enumerate(zip(tracks, velocities)):
        rel = np.zeros_like(abs_positions)
        rel[1:] = abs_positions[1:] - abs_positions[:-1]
        peds.append(
            WindowPedestrian(
                pedestrian_id=i + 1,
                abs_positions=abs_positions,
                rel_displacements=rel,
                velocity_at_obs=np.asarray(vel, dtype=np.float64),
            )
        )
    return SceneWindow(dataset_id=dataset_id, start_frame=start_frame, pedestrians=peds)


def generate_causal_window(rng, n_neighbors=6, avoid_step=0.32, index=0):
    """One window where a single neighbor determines the focal next step.

    Neighbors move with constant velocity; one of them heads straight at
    the focal pedestrian. The focal pedestrian's step after the observed
    horizon is a fixed-length move directly away from whichever neighbor
    the pressing-neighbor criterion selects. Returns (window, causal_index)
    with the focal pedestrian at index 0.
    """
    focal_pos = np.zeros(2)
    focal_vel = rng.uniform(0.8, 1.4) * _unit(rng.uniform(0.0, 2.0 * np.pi))

    positions = [focal_pos]
    velocities = [focal_vel]
    approach = rng.integers(0, n_neighbors)
    for j in range(n_neighbors):
        r = rng.uniform(1.5, 5.0)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        pos = focal_pos + r * _unit(angle)
        if j == approach:
            vel = focal_vel - rng.uniform(1.0, 1.8) * _unit(angle)  # closes on the focal ped
        else:
            vel = rng.uniform(0.5, 1.5) * _unit(rng.uniform(0.0, 2.0 * np.pi))
        positions.append(pos)
        velocities.append(vel)

    tracks = [_constant_velocity_track(p, v) for p, v in zip(positions, velocities)]
    probe = _window_from_tracks(tracks, velocities, "causal", index)
    causal = pick_gaze_target(probe, 0)

    # Overwrite the focal future: one avoidance step away from the causal
    # neighbor, then drift on with the original velocity.
    away = _unit_vec(positions[0] - positions[causal])
    focal_track = tracks[0].copy()
    focal_track[8] = focal_track[7] + avoid_step * away
    for k in range(9, 20):
        focal_track[k] = focal_track[k - 1] + focal_vel * STEP_SECONDS
    tracks[0] = focal_track

    window = _window_from_tracks(tracks, velocities, "causal", index)
    return window, causal


def generate_attention_benchmark(n_windows, seed, n_neighbors=6, gaze_seed=None):
    """Causal-neighbor corpus: (examples, causal_indices), focal-only examples."""
    from .attention_net import synthetic_gaze_provider

    rng = np.random.default_rng(seed)
    windows = []
    causal = []
    for i in range(n_windows):
        window, c = generate_causal_window(rng, n_neighbors=n_neighbors, index=i)
        windows.append(window)
        causal.append(c)

    provider = synthetic_gaze_provider(seed if gaze_seed is None else gaze_seed)
    examples = []
    for window in windows:
        examples.extend(build_examples([window], lambda w, f: provider(w, f) if f == 0 else None)[:1])
    return examples, causal


def _unit(angle):
    return np.array([np.cos(angle), np.sin(angle)])


def _unit_vec(v):
    n = np.linalg.norm(v)
    return v / n if n > 0 else np.array([1.0, 0.0])


def synthesize_session(window, seed, rate_hz=50.0):
    """A plausible recorded steering run over a window replay.

    The virtual agent walks from one side of the crowd toward a goal on the
    other side; the gaze proxy tracks the currently most pressing
    pedestrian with jitter. Produces a schema-valid GazeSession.
    """
    rng = Rng(seed)
    duration = (window.length - 1) * STEP_SECONDS
    n_samples = int(duration * rate_hz) + 1

    center = np.mean([p.abs_positions[0] for p in window.pedestrians], axis=0)
    start = center + np.array([-4.0, 0.0])
    goal = center + np.array([4.0, 0.0])
    samples = []
    agent = start.copy()
    for i in range(n_samples):
        t = i / rate_hz
        direction = _unit_vec(goal - agent)
        speed = 1.2
        if i > 0:
            agent = agent + direction * speed / rate_hz
        frame = min(int(t / STEP_SECONDS), window.length - 1)
        crowd_pos = [p.abs_positions[frame] for p in window.pedestrians]
        nearest = int(np.argmin([np.linalg.norm(p - agent) for p in crowd_pos]))
        gaze = crowd_pos[nearest] + rng.normal(2) * 0.15
        samples.append(
            GazeSample(
                t=t,
                gaze_xy=gaze,
                agent_xy=agent.copy(),
                agent_v=direction * speed,
            )
        )
    return GazeSession(
        scene_ref=SceneRef(dataset_id=window.dataset_id, start_frame=window.start_frame),
        goal=goal,
        samples=samples,
    )
