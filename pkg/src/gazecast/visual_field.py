"""Forward-cone constraint on attention weights.

A pedestrian only attends to neighbors inside a cone about its heading
(taken from the instantaneous velocity). Weights outside the cone are
zeroed and the survivors renormalized; the self weight always survives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

STATIONARY_SPEED = 1e-6  # below this, facing is undefined and the filter is a no-op
_BOUNDARY_EPS = 1e-12  # keeps the inclusive cone boundary robust to rounding


@dataclass
class VisualFieldConfig:
    field_angle_deg: float = 120.0
    inclusive: bool = True

    def __post_init__(self):
        if not (0.0 < self.field_angle_deg <= 360.0):
            raise ContractError(f"field angle must be in (0, 360], got {self.field_angle_deg}")


def visual_filter(weights, rel_positions, focal_velocity, focal, cfg=None):
    """Zero weights outside the forward cone and renormalize.

    A neighbor survives iff the angle between its relative position and
    the focal velocity is <= field_angle / 2 (inclusive). Stationary focal
    pedestrians keep all weights; if masking removes everything, the focal
    self weight gets everything.
    """
    cfg = cfg or VisualFieldConfig()
    weights = np.asarray(weights, dtype=np.float64)
    rel_positions = np.asarray(rel_positions, dtype=np.float64)
    focal_velocity = np.asarray(focal_velocity, dtype=np.float64)
    n = len(weights)
    if len(rel_positions) != n:
        raise ContractError(f"{n} weights but {len(rel_positions)} positions")

    speed = float(np.linalg.norm(focal_velocity))
    if speed < STATIONARY_SPEED:
        return weights.copy()

    cos_half = np.cos(np.deg2rad(cfg.field_angle_deg / 2.0))
    heading = focal_velocity / speed
    kept = np.zeros(n, dtype=bool)
    for j in range(n):
        if j == focal:
            kept[j] = True
            continue
        r = rel_positions[j]
        dist = float(np.linalg.norm(r))
        if dist < 1e-12:  # coincident with the focal pedestrian
            kept[j] = True
            continue
        cos_angle = float(r @ heading) / dist
        if cfg.inclusive:
            kept[j] = cos_angle >= cos_half - _BOUNDARY_EPS
        else:
            kept[j] = cos_angle > cos_half + _BOUNDARY_EPS

    masked = np.where(kept, weights, 0.0)
    total = masked.sum()
    if total <= 0.0:
        out = np.zeros(n)
        out[focal] = 1.0
        return out
    return masked / total


def compose_visual_attention(attention_params, window, focal, cfg=None):
    """Attention network output passed through the visual-field filter."""
    from .attention_net import AttentionInput, forward
    from .numerics import no_grad

    inp = AttentionInput.from_window(window, focal)
    with no_grad():
        out = forward(inp, attention_params)
    return visual_filter(
        out.weights_np,
        inp.rel_positions,
        window.pedestrians[focal].velocity_at_obs,
        focal,
        cfg,
    )
