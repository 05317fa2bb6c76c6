"""Displacement-error metrics, best-of-k protocol, and the ablation harness."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import ConfigError, ContractError
from .numerics import Rng
from .predictor import (
    AttentionConfig,
    PredictorTrainConfig,
    predict,
    train,
)
from .trajdata import STEP_SECONDS, leave_one_out_split, positions_from_displacements


def ade(pred_abs, gt_abs):
    """Mean Euclidean distance over all predicted steps (absolute coords)."""
    pred_abs = np.asarray(pred_abs, dtype=np.float64)
    gt_abs = np.asarray(gt_abs, dtype=np.float64)
    if pred_abs.shape != gt_abs.shape:
        raise ContractError(f"shape mismatch {pred_abs.shape} vs {gt_abs.shape}")
    return float(np.linalg.norm(pred_abs - gt_abs, axis=1).mean())


def fde(pred_abs, gt_abs):
    """Euclidean distance at the final predicted step."""
    pred_abs = np.asarray(pred_abs, dtype=np.float64)
    gt_abs = np.asarray(gt_abs, dtype=np.float64)
    if pred_abs.shape != gt_abs.shape:
        raise ContractError(f"shape mismatch {pred_abs.shape} vs {gt_abs.shape}")
    return float(np.linalg.norm(pred_abs[-1] - gt_abs[-1]))


def best_of_k(samples, gt_abs):
    """Independent minima of ADE and FDE over k sampled trajectories."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3 or len(samples) < 1:
        raise ContractError("need a (k, steps, 2) stack with k >= 1")
    ades = [ade(s, gt_abs) for s in samples]
    fdes = [fde(s, gt_abs) for s in samples]
    return min(ades), min(fdes)


def constant_velocity_baseline(window):
    """Extrapolate each pedestrian's last observed velocity; returns displacements."""
    out = np.zeros((window.n_pedestrians, window.t_pred, 2))
    for i, ped in enumerate(window.pedestrians):
        out[i, :] = ped.velocity_at_obs * STEP_SECONDS
    return out


class MetricRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset: str
    ade: float = Field(ge=0.0)
    fde: float = Field(ge=0.0)


class ReportConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    arm: str
    k: int = Field(ge=1)
    seeds: list[int]
    held_out: str | None = None
    field_angle_deg: float = 120.0


class MetricReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ReportConfig
    rows: list[MetricRow]
    average: MetricRow

    def to_table(self):
        lines = [f"arm={self.config.arm} k={self.config.k} seeds={self.config.seeds}"]
        lines.append(f"{'dataset':<10} {'ADE':>8} {'FDE':>8}")
        for row in self.rows + [self.average]:
            lines.append(f"{row.dataset:<10} {row.ade:>8.3f} {row.fde:>8.3f}")
        return "\n".join(lines)


def make_report(config, rows):
    """Assemble a report; the average row is the unweighted mean over rows."""
    if not rows:
        raise ContractError("report needs at least one row")
    avg = MetricRow(
        dataset="AVG",
        ade=float(np.mean([r.ade for r in rows])),
        fde=float(np.mean([r.fde for r in rows])),
    )
    return MetricReport(config=config, rows=list(rows), average=avg)


def evaluate_predictor(windows, params, attention_cfg, k=20, seed=0):
    """Best-of-k ADE/FDE averaged over all pedestrians of all windows."""
    if not windows:
        raise ContractError("evaluation needs at least one window")
    ades = []
    fdes = []
    rng = Rng(seed)
    for w_index, window in enumerate(windows):
        result = predict(window, params, attention_cfg, k=k, rng=rng.spawn(w_index))
        for i, ped in enumerate(window.pedestrians):
            last_obs = ped.abs_positions[window.t_obs - 1]
            gt_abs = ped.abs_positions[window.t_obs:]
            samples_abs = np.array(
                [positions_from_displacements(last_obs, s) for s in result.predictions[i].samples]
            )
            a, f = best_of_k(samples_abs, gt_abs)
            ades.append(a)
            fdes.append(f)
    return float(np.mean(ades)), float(np.mean(fdes))


def evaluate_baseline(windows):
    """Constant-velocity reference under plain (k=1) ADE/FDE."""
    ades = []
    fdes = []
    for window in windows:
        disp = constant_velocity_baseline(window)
        for i, ped in enumerate(window.pedestrians):
            last_obs = ped.abs_positions[window.t_obs - 1]
            gt_abs = ped.abs_positions[window.t_obs:]
            pred_abs = positions_from_displacements(last_obs, disp[i])
            ades.append(ade(pred_abs, gt_abs))
            fdes.append(fde(pred_abs, gt_abs))
    return float(np.mean(ades)), float(np.mean(fdes))


def run_experiment(
    datasets,
    arm,
    held_out,
    train_config=None,
    attention_params=None,
    k=20,
    seeds=(0,),
    field=None,
    validation_fraction=0.1,
):
    """Train the arm's predictor per seed and score the held-out windows.

    The learned-attention arms refuse to run without attention parameters.
    """
    attention_cfg = AttentionConfig.from_arm(arm, attention_params=attention_params, field=field)
    train_config = train_config or PredictorTrainConfig()
    split = leave_one_out_split(datasets, held_out, validation_fraction=validation_fraction)
    if not split.train:
        raise ConfigError("no training windows after the split")
    if not split.test:
        raise ConfigError(f"held-out dataset {held_out!r} has no windows")

    ades = []
    fdes = []
    for seed in seeds:
        cfg = PredictorTrainConfig(
            lr=train_config.lr,
            epochs=train_config.epochs,
            batch_size=train_config.batch_size,
            alpha=train_config.alpha,
            seed=seed,
        )
        params, _ = train(split.train, attention_cfg, cfg)
        a, f = evaluate_predictor(split.test, params, attention_cfg, k=k, seed=seed)
        ades.append(a)
        fdes.append(f)

    row = MetricRow(dataset=held_out, ade=float(np.mean(ades)), fde=float(np.mean(fdes)))
    config = ReportConfig(
        arm=arm,
        k=k,
        seeds=list(seeds),
        held_out=held_out,
        field_angle_deg=attention_cfg.field.field_angle_deg,
    )
    return make_report(config, [row])
