"""Shared fixture builders for the test suite."""

import numpy as np

from gazecast.trajdata import SceneWindow, WindowPedestrian


def make_window(positions, velocities, dataset_id="fix", start_frame=0, t_obs=8, t_pred=12):
    """Constant-velocity window whose state at the last observed step is given."""
    peds = []
    length = t_obs + t_pred
    for i, (pos, vel) in enumerate(zip(positions, velocities)):
        pos = np.asarray(pos, dtype=np.float64)
        vel = np.asarray(vel, dtype=np.float64)
        abs_positions = np.array([pos + (k - (t_obs - 1)) * vel * 0.4 for k in range(length)])
        rel = np.zeros_like(abs_positions)
        rel[1:] = abs_positions[1:] - abs_positions[:-1]
        peds.append(
            WindowPedestrian(
                pedestrian_id=i + 1,
                abs_positions=abs_positions,
                rel_displacements=rel,
                velocity_at_obs=vel.copy(),
            )
        )
    return SceneWindow(
        dataset_id=dataset_id, start_frame=start_frame, pedestrians=peds, t_obs=t_obs, t_pred=t_pred
    )


def random_window(rng, n_peds, dataset_id="fix", start_frame=0):
    """Window with smooth random-curvature trajectories (not constant velocity)."""
    peds = []
    for i in range(n_peds):
        pos = rng.normal(scale=4.0, size=2)
        speed = rng.uniform(0.6, 1.6)
        heading = rng.uniform(0.0, 2.0 * np.pi)
        turn = rng.normal(scale=0.08)
        abs_positions = np.zeros((20, 2))
        for k in range(20):
            abs_positions[k] = pos
            pos = pos + speed * 0.4 * np.array([np.cos(heading), np.sin(heading)])
            heading += turn
        rel = np.zeros_like(abs_positions)
        rel[1:] = abs_positions[1:] - abs_positions[:-1]
        peds.append(
            WindowPedestrian(
                pedestrian_id=i + 1,
                abs_positions=abs_positions,
                rel_displacements=rel,
                velocity_at_obs=(abs_positions[7] - abs_positions[6]) / 0.4,
            )
        )
    return SceneWindow(dataset_id=dataset_id, start_frame=start_frame, pedestrians=peds)
