"""Versioned JSON checkpoints shared by both networks.

Each tensor is dumped with an explicit shape header; loading validates
every shape against the expected parameter layout before accepting the
file. Serialization is byte-deterministic (sorted keys, repr floats), so
a rerun with the same seed produces an identical checkpoint.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError, ShapeError
from .numerics import Linear, LstmWeights, Tensor

FORMAT_VERSION = 1


def checkpoint_bytes(kind, tensors, extra=None):
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "extra": extra or {},
        "tensors": {
            name: {"shape": list(t.data.shape), "data": t.data.reshape(-1).tolist()}
            for name, t in tensors.items()
        },
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def save_checkpoint(path, kind, tensors, extra=None):
    with open(path, "wb") as handle:
        handle.write(checkpoint_bytes(kind, tensors, extra))


def load_checkpoint(path, kind, expected_shapes):
    """Read a checkpoint; validates kind, version, names, and every shape."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {doc.get('format_version')!r}")
    if doc.get("kind") != kind:
        raise ConfigError(f"checkpoint kind {doc.get('kind')!r}, expected {kind!r}")
    stored = doc.get("tensors", {})
    if set(stored) != set(expected_shapes):
        raise ShapeError(
            f"checkpoint tensors {sorted(stored)} do not match expected {sorted(expected_shapes)}"
        )
    arrays = {}
    for name, want in expected_shapes.items():
        entry = stored[name]
        got = tuple(entry["shape"])
        if got != tuple(want):
            raise ShapeError(f"tensor {name}: shape {got} != expected {tuple(want)}")
        arrays[name] = np.array(entry["data"], dtype=np.float64).reshape(got)
    return arrays, doc.get("extra", {})


def _expected_shapes(params):
    return {name: t.data.shape for name, t in params.tensors().items()}


def save_attention(path, params, extra=None):
    save_checkpoint(path, "attention", params.tensors(), extra)


def load_attention(path):
    from .attention_net import AttentionNetParams
    from .numerics import Rng

    template = AttentionNetParams.init(Rng(0))
    arrays, extra = load_checkpoint(path, "attention", _expected_shapes(template))
    params = AttentionNetParams(
        mlp1=_linear(arrays, "mlp1"),
        mlp2=_linear(arrays, "mlp2"),
        gcn1=_linear(arrays, "gcn1"),
        gcn2=_linear(arrays, "gcn2"),
        motion=_linear(arrays, "motion"),
    )
    return params, extra


def save_predictor(path, params, extra=None):
    save_checkpoint(path, "predictor", params.tensors(), extra)


def load_predictor(path):
    from .numerics import Rng
    from .predictor import PredictorParams

    template = PredictorParams.init(Rng(0))
    arrays, extra = load_checkpoint(path, "predictor", _expected_shapes(template))
    params = PredictorParams(
        mlp_mot=_linear(arrays, "mlp_mot"),
        lstm_en=_lstm(arrays, "lstm_en"),
        mlp_cont=_linear(arrays, "mlp_cont"),
        gcn1=_linear(arrays, "gcn1"),
        gcn2=_linear(arrays, "gcn2"),
        mlp_mean=_linear(arrays, "mlp_mean"),
        mlp_var=_linear(arrays, "mlp_var"),
        mlp_enc=_linear(arrays, "mlp_enc"),
        lstm_de=_lstm(arrays, "lstm_de"),
        mlp_dec=_linear(arrays, "mlp_dec"),
    )
    return params, extra


def _linear(arrays, prefix):
    return Linear(
        w=Tensor(arrays[f"{prefix}.w"], requires_grad=True),
        b=Tensor(arrays[f"{prefix}.b"], requires_grad=True),
    )


def _lstm(arrays, prefix):
    return LstmWeights(
        w_ih=Tensor(arrays[f"{prefix}.w_ih"], requires_grad=True),
        w_hh=Tensor(arrays[f"{prefix}.w_hh"], requires_grad=True),
        b=Tensor(arrays[f"{prefix}.b"], requires_grad=True),
    )
