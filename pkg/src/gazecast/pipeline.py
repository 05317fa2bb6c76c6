"""End-to-end commands behind the CLI: train, evaluate, predict, serve.

Every command is reproducible from its RunConfig plus seed; the resolved
config is persisted next to each output artifact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import attention_net, checkpoint, evaluation, gaze, predictor, trajdata
from .config import RunConfig
from .errors import ConfigError
from .numerics import Rng
from .visual_field import VisualFieldConfig


def load_datasets(data_dir, frame_stride=10):
    """Parse every *.txt trajectory file in a directory into windows."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise ConfigError(f"data directory {data_dir} does not exist; generate one with synth-corpus")
    paths = sorted(data_dir.glob("*.txt"))
    if not paths:
        raise ConfigError(f"no *.txt trajectory files in {data_dir}")
    datasets = {}
    for path in paths:
        name = path.stem
        tracks = trajdata.parse_dataset(path, frame_stride=frame_stride)
        datasets[name] = trajdata.build_windows(tracks, dataset_id=name)
    return datasets


def load_sessions(sessions_dir):
    sessions_dir = Path(sessions_dir)
    if not sessions_dir.is_dir():
        raise ConfigError(f"sessions directory {sessions_dir} does not exist")
    sessions = []
    for path in sorted(sessions_dir.glob("*.json")):
        sessions.append(gaze.load_session(path))
    if not sessions:
        raise ConfigError(f"no session files in {sessions_dir}; record some with the capture UI")
    return sessions


def _attention_examples(config, windows, required=True):
    if config.gaze_source == "synthetic":
        provider = attention_net.synthetic_gaze_provider(config.seed)
        return attention_net.build_examples(windows, provider)
    if config.gaze_source == "sessions":
        if not config.sessions_dir:
            raise ConfigError("gaze_source=sessions needs sessions_dir")
        sessions = load_sessions(config.sessions_dir)
        index = {(w.dataset_id, w.start_frame): w for w in windows}
        examples = []
        for session in sessions:
            key = (session.scene_ref.dataset_id, session.scene_ref.start_frame)
            window = index.get(key)
            if window is not None:
                examples.extend(attention_net.session_examples(session, window))
        if not examples and required:
            raise ConfigError("no recorded session matches a training window")
        return examples
    raise ConfigError(f"unknown gaze_source {config.gaze_source!r}")


def _out_dir(config):
    out = Path(config.out_dir or "runs")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _persist_outputs(config, path, history=None):
    config.persist(Path(str(path) + ".config.json"))
    if history is not None:
        with open(Path(str(path) + ".losses.json"), "w", encoding="utf-8") as handle:
            json.dump([vars(h) for h in history], handle, indent=1)


def cmd_train_attention(config):
    """Train the attention network on the leave-one-out training split."""
    datasets = load_datasets(config.data_dir, config.frame_stride)
    split = trajdata.leave_one_out_split(
        datasets, config.held_out, validation_fraction=config.validation_fraction
    )
    train_examples = _attention_examples(config, split.train)
    val_examples = None
    if split.validation:
        val_examples = _attention_examples(config, split.validation, required=False) or None

    train_cfg = attention_net.AttentionTrainConfig(
        lr=config.attention_lr,
        epochs=config.attention_epochs,
        beta=config.beta,
        batch_size=config.attention_batch_size,
        seed=config.seed,
    )
    params, history = attention_net.train(train_examples, train_cfg, val_examples=val_examples)

    path = Path(config.attention_checkpoint or (_out_dir(config) / f"attention_{config.held_out}.json"))
    path.parent.mkdir(parents=True, exist_ok=True)
    checkpoint.save_attention(
        path, params, extra={"held_out": config.held_out, "beta": config.beta, "seed": config.seed}
    )
    _persist_outputs(config, path, history)
    return path


def cmd_train_predictor(config):
    """Train one ablation arm's predictor on the leave-one-out split."""
    datasets = load_datasets(config.data_dir, config.frame_stride)
    split = trajdata.leave_one_out_split(
        datasets, config.held_out, validation_fraction=config.validation_fraction
    )
    attention_params = _load_attention_if_needed(config)
    attention_cfg = predictor.AttentionConfig.from_arm(
        config.arm,
        attention_params=attention_params,
        field=VisualFieldConfig(config.field_angle),
    )
    train_cfg = predictor.PredictorTrainConfig(
        lr=config.predictor_lr,
        epochs=config.predictor_epochs,
        batch_size=config.batch_size,
        alpha=config.alpha,
        seed=config.seed,
    )
    params, history = predictor.train(
        split.train, attention_cfg, train_cfg, val_windows=split.validation or None
    )

    path = Path(
        config.predictor_checkpoint or (_out_dir(config) / f"predictor_{config.arm}_{config.held_out}.json")
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    checkpoint.save_predictor(
        path,
        params,
        extra={"arm": config.arm, "held_out": config.held_out, "seed": config.seed},
    )
    _persist_outputs(config, path, history)
    return path


def _load_attention_if_needed(config):
    if config.arm in ("AGCN", "AVGCN"):
        if not config.attention_checkpoint:
            raise ConfigError(
                f"arm {config.arm} needs --attention-ckpt; train one with train-attention first"
            )
        params, _ = checkpoint.load_attention(config.attention_checkpoint)
        return params
    return None


def cmd_eval(config):
    """Score a trained predictor on the held-out windows; emit a MetricReport."""
    if not config.predictor_checkpoint:
        raise ConfigError("eval needs --predictor-ckpt")
    datasets = load_datasets(config.data_dir, config.frame_stride)
    split = trajdata.leave_one_out_split(
        datasets, config.held_out, validation_fraction=config.validation_fraction
    )
    params, _ = checkpoint.load_predictor(config.predictor_checkpoint)
    attention_params = _load_attention_if_needed(config)
    attention_cfg = predictor.AttentionConfig.from_arm(
        config.arm,
        attention_params=attention_params,
        field=VisualFieldConfig(config.field_angle),
    )
    a, f = evaluation.evaluate_predictor(
        split.test, params, attention_cfg, k=config.k, seed=config.seed
    )
    report = evaluation.make_report(
        evaluation.ReportConfig(
            arm=config.arm,
            k=config.k,
            seeds=[config.seed],
            held_out=config.held_out,
            field_angle_deg=config.field_angle,
        ),
        [evaluation.MetricRow(dataset=config.held_out, ade=a, fde=f)],
    )
    path = _out_dir(config) / f"report_{config.arm}_{config.held_out}.json"
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(report.model_dump_json(indent=2) + "\n")
    _persist_outputs(config, path)
    return path, report


def cmd_predict(config, limit=10):
    """Dump observed/ground-truth/mean/sampled trajectories per test window."""
    if not config.predictor_checkpoint:
        raise ConfigError("predict needs --predictor-ckpt")
    datasets = load_datasets(config.data_dir, config.frame_stride)
    split = trajdata.leave_one_out_split(
        datasets, config.held_out, validation_fraction=config.validation_fraction
    )
    params, _ = checkpoint.load_predictor(config.predictor_checkpoint)
    attention_params = _load_attention_if_needed(config)
    attention_cfg = predictor.AttentionConfig.from_arm(
        config.arm,
        attention_params=attention_params,
        field=VisualFieldConfig(config.field_angle),
    )

    out = _out_dir(config) / "predictions"
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rng = Rng(config.seed)
    for index, window in enumerate(split.test[:limit]):
        result = predictor.predict(window, params, attention_cfg, k=config.k, rng=rng.spawn(index))
        doc = {
            "dataset_id": window.dataset_id,
            "start_frame": window.start_frame,
            "frame_interval": trajdata.STEP_SECONDS,
            "pedestrians": [],
        }
        for i, ped in enumerate(window.pedestrians):
            last_obs = ped.abs_positions[window.t_obs - 1]
            doc["pedestrians"].append(
                {
                    "id": ped.pedestrian_id,
                    "observed": ped.abs_positions[: window.t_obs].tolist(),
                    "ground_truth": ped.abs_positions[window.t_obs:].tolist(),
                    "mean": trajdata.positions_from_displacements(
                        last_obs, result.predictions[i].mean_trajectory
                    ).tolist(),
                    "samples": [
                        trajdata.positions_from_displacements(last_obs, s).tolist()
                        for s in result.predictions[i].samples
                    ],
                }
            )
        path = out / f"{window.dataset_id}_{window.start_frame}.json"
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(doc, handle)
        written.append(path)
    _persist_outputs(config, out / "run")
    return written


def build_service(config, frontend_dir=None):
    """Construct the FastAPI app from a config (scenes from the data dir)."""
    from .service import SessionStore, create_app

    datasets = load_datasets(config.data_dir, config.frame_stride)
    windows = [w for windows in datasets.values() for w in windows]
    sessions_dir = config.sessions_dir or str(_out_dir(config) / "sessions")
    store = SessionStore(sessions_dir)
    return create_app(
        windows,
        store,
        max_scene_pedestrians=config.max_scene_pedestrians,
        frontend_dir=frontend_dir,
    )
