"""Variational trajectory prediction over an attention-weighted crowd graph.

Per pedestrian, an LSTM encodes observed displacement history and an
attention-pooled embedding summarizes relative positions of the crowd. A
two-layer GCN whose adjacency rows are the (optionally visual-field
filtered) attention vectors mixes the per-pedestrian features, a pair of
linear heads produce a Gaussian over trajectory features, and a feedback
LSTM decodes sampled features into future displacements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .numerics import (
    Adam,
    Linear,
    LstmWeights,
    Rng,
    Tensor,
    concat,
    exp,
    lstm_cell,
    no_grad,
    sample_normal,
    stack_rows,
)
from .trajdata import relative_context
from .visual_field import VisualFieldConfig, visual_filter

MOT_EMBED = 16
ENC_HIDDEN = 32
CONT_EMBED = 16
NODE_DIM = ENC_HIDDEN + CONT_EMBED  # 48
GCN_HIDDEN = 128
FEATURE_DIM = 8
Z_DIM = 8
DEC_EMBED = 16
DEC_HIDDEN = 32

ARMS = ("GCN", "AGCN", "VGCN", "AVGCN")


@dataclass
class PredictorParams:
    mlp_mot: Linear  # 2 -> 16
    lstm_en: LstmWeights  # 16 -> 32
    mlp_cont: Linear  # 2 -> 16
    gcn1: Linear  # 48 -> 128
    gcn2: Linear  # 128 -> 8
    mlp_mean: Linear  # 8 -> 8
    mlp_var: Linear  # 8 -> 8
    mlp_enc: Linear  # 2 -> 16
    lstm_de: LstmWeights  # 24 -> 32
    mlp_dec: Linear  # 32 -> 2

    @classmethod
    def init(cls, rng):
        return cls(
            mlp_mot=Linear.init(rng, 2, MOT_EMBED),
            lstm_en=LstmWeights.init(rng, MOT_EMBED, ENC_HIDDEN),
            mlp_cont=Linear.init(rng, 2, CONT_EMBED),
            gcn1=Linear.init(rng, NODE_DIM, GCN_HIDDEN),
            gcn2=Linear.init(rng, GCN_HIDDEN, FEATURE_DIM),
            mlp_mean=Linear.init(rng, FEATURE_DIM, Z_DIM),
            mlp_var=Linear.init(rng, FEATURE_DIM, Z_DIM),
            mlp_enc=Linear.init(rng, 2, DEC_EMBED),
            lstm_de=LstmWeights.init(rng, Z_DIM + DEC_EMBED, DEC_HIDDEN),
            mlp_dec=Linear.init(rng, DEC_HIDDEN, 2),
        )

    @classmethod
    def zeros(cls):
        return cls(
            mlp_mot=Linear.zeros(2, MOT_EMBED),
            lstm_en=LstmWeights.zeros(MOT_EMBED, ENC_HIDDEN),
            mlp_cont=Linear.zeros(2, CONT_EMBED),
            gcn1=Linear.zeros(NODE_DIM, GCN_HIDDEN),
            gcn2=Linear.zeros(GCN_HIDDEN, FEATURE_DIM),
            mlp_mean=Linear.zeros(FEATURE_DIM, Z_DIM),
            mlp_var=Linear.zeros(FEATURE_DIM, Z_DIM),
            mlp_enc=Linear.zeros(2, DEC_EMBED),
            lstm_de=LstmWeights.zeros(Z_DIM + DEC_EMBED, DEC_HIDDEN),
            mlp_dec=Linear.zeros(DEC_HIDDEN, 2),
        )

    def tensors(self):
        out = {}
        for name in (
            "mlp_mot", "mlp_cont", "gcn1", "gcn2", "mlp_mean", "mlp_var", "mlp_enc", "mlp_dec"
        ):
            layer = getattr(self, name)
            out[f"{name}.w"] = layer.w
            out[f"{name}.b"] = layer.b
        for name in ("lstm_en", "lstm_de"):
            cell = getattr(self, name)
            out[f"{name}.w_ih"] = cell.w_ih
            out[f"{name}.w_hh"] = cell.w_hh
            out[f"{name}.b"] = cell.b
        return out

    def groups(self):
        """Parameter-group view used by the gradient suite."""
        return {
            "encoder": [self.mlp_mot.w, self.mlp_mot.b, self.lstm_en.w_ih, self.lstm_en.w_hh, self.lstm_en.b],
            "pooling": [self.mlp_cont.w, self.mlp_cont.b],
            "gcn": [self.gcn1.w, self.gcn1.b, self.gcn2.w, self.gcn2.b],
            "latent_head": [self.mlp_mean.w, self.mlp_mean.b, self.mlp_var.w, self.mlp_var.b],
            "decoder": [self.mlp_enc.w, self.mlp_enc.b, self.lstm_de.w_ih, self.lstm_de.w_hh,
                        self.lstm_de.b, self.mlp_dec.w, self.mlp_dec.b],
        }


@dataclass
class CrowdGraph:
    node_features: Tensor  # (N, 48)
    adjacency: np.ndarray  # (N, N), rows sum to 1

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=np.float64)
        n = self.node_features.shape[0]
        if self.adjacency.shape != (n, n):
            raise ContractError(f"adjacency shape {self.adjacency.shape} != ({n}, {n})")
        if np.max(np.abs(self.adjacency.sum(axis=1) - 1.0)) > 1e-9:
            raise ContractError("adjacency rows must sum to 1")


@dataclass
class LatentDistribution:
    mu: Tensor  # (1, 8)
    log_var: Tensor  # (1, 8)


@dataclass
class PedestrianPrediction:
    pedestrian_id: int
    samples: np.ndarray  # (k, t_pred, 2) relative displacements
    mean_trajectory: np.ndarray  # (t_pred, 2), decoded from mu


@dataclass
class PredictionSet:
    predictions: list[PedestrianPrediction]
    k: int


@dataclass
class AttentionConfig:
    """Which attention feeds a window's adjacency rows (the ablation arms)."""

    source: str = "uniform"  # "uniform" | "learned"
    use_visual_filter: bool = False
    attention_params: object = None
    field: VisualFieldConfig = None

    def __post_init__(self):
        if self.source not in ("uniform", "learned"):
            raise ConfigError(f"unknown attention source {self.source!r}")
        if self.source == "learned" and self.attention_params is None:
            raise ConfigError("learned attention needs a trained attention checkpoint")
        if self.field is None:
            self.field = VisualFieldConfig()

    @classmethod
    def from_arm(cls, arm, attention_params=None, field=None):
        if arm not in ARMS:
            raise ConfigError(f"unknown arm {arm!r}; expected one of {ARMS}")
        return cls(
            source="learned" if arm in ("AGCN", "AVGCN") else "uniform",
            use_visual_filter=arm in ("VGCN", "AVGCN"),
            attention_params=attention_params,
            field=field,
        )


def attention_rows(window, cfg):
    """Adjacency matrix whose row i is pedestrian i's attention vector."""
    from .attention_net import AttentionInput, forward

    n = window.n_pedestrians
    rows = np.zeros((n, n))
    for i in range(n):
        if cfg.source == "uniform":
            row = np.full(n, 1.0 / n)
        else:
            with no_grad():
                row = forward(AttentionInput.from_window(window, i), cfg.attention_params).weights_np
        if cfg.use_visual_filter:
            row = visual_filter(
                row,
                relative_context(window, i),
                window.pedestrians[i].velocity_at_obs,
                i,
                cfg.field,
            )
        rows[i] = row
    return rows


# -- network pieces -----------------------------------------------------------------


def encode_motion(rel_displacements, params, expected_steps=8):
    """LSTM over per-step displacement embeddings; returns the final hidden state."""
    rel = np.asarray(rel_displacements, dtype=np.float64)
    if rel.ndim != 2 or rel.shape[1] != 2 or rel.shape[0] != expected_steps:
        raise ContractError(f"expected ({expected_steps}, 2) displacements, got {rel.shape}")
    h = Tensor(np.zeros((1, ENC_HIDDEN)))
    c = Tensor(np.zeros((1, ENC_HIDDEN)))
    for step in rel:
        emb = params.mlp_mot(Tensor(step.reshape(1, 2))).relu()
        h, c = lstm_cell(emb, h, c, params.lstm_en)
    return h


def social_context(rel_context, attention, params):
    """Attention-weighted sum of embedded relative positions."""
    ctx = np.asarray(rel_context, dtype=np.float64)
    a = np.asarray(attention, dtype=np.float64)
    if len(ctx) != len(a):
        raise ContractError(f"{len(a)} attention weights but {len(ctx)} positions")
    embedded = params.mlp_cont(Tensor(ctx)).relu()  # (N, 16)
    return Tensor(a.reshape(1, -1)) @ embedded  # (1, 16)


def social_gcn(graph, params):
    """Two-layer graph convolution over the crowd graph; returns (N, 8)."""
    adj = Tensor(graph.adjacency)
    hidden = (adj @ graph.node_features @ params.gcn1.w + params.gcn1.b).relu()
    return adj @ hidden @ params.gcn2.w + params.gcn2.b


def latent_head(v_i, params):
    return LatentDistribution(mu=params.mlp_mean(v_i), log_var=params.mlp_var(v_i))


def decode(z, last_obs_rel, params, steps=12):
    """Feedback decoder: each step consumes z plus the previous output."""
    if steps < 1:
        raise ContractError(f"decoder needs steps >= 1, got {steps}")
    h = Tensor(np.zeros((1, DEC_HIDDEN)))
    c = Tensor(np.zeros((1, DEC_HIDDEN)))
    prev = last_obs_rel if isinstance(last_obs_rel, Tensor) else Tensor(np.asarray(last_obs_rel).reshape(1, 2))
    outputs = []
    for _ in range(steps):
        step_in = concat([z, params.mlp_enc(prev).relu()], axis=1)
        h, c = lstm_cell(step_in, h, c, params.lstm_de)
        prev = params.mlp_dec(h)
        outputs.append(prev)
    return stack_rows(outputs)  # (steps, 2)


def gaussian_kl_to_unit(latent):
    """KL(N(mu, diag(exp(log_var))) || N(0, I)) in closed form."""
    mu2 = latent.mu * latent.mu
    return ((mu2 + exp(latent.log_var) - latent.log_var - 1.0) * 0.5).sum()


def _loss_terms(predicted, gt, latents, alpha):
    if len(predicted) != len(gt) or len(predicted) != len(latents):
        raise ContractError("predicted/gt/latents must have equal length")
    n = len(predicted)
    rec = None
    for pred, target in zip(predicted, gt):
        pred_t = pred if isinstance(pred, Tensor) else Tensor(pred)
        diff = pred_t - Tensor(np.asarray(target, dtype=np.float64))
        step_dist = ((diff * diff).sum(axis=1, keepdims=True)).sqrt()
        term = step_dist.mean()
        rec = term if rec is None else rec + term
    rec = rec * (1.0 / n)
    kl = None
    for latent in latents:
        term = gaussian_kl_to_unit(latent)
        kl = term if kl is None else kl + term
    kl = kl * (1.0 / n)
    return rec + alpha * kl, rec, kl


def prediction_loss(predicted, gt, latents, alpha=0.001):
    """Mean per-step displacement error plus alpha * mean KL to the unit prior."""
    total, _, _ = _loss_terms(predicted, gt, latents, alpha)
    return total


def window_forward(window, params, adjacency, z_fn):
    """Shared forward pass; z_fn(index, latent) supplies the trajectory feature."""
    n = window.n_pedestrians
    if n < 1:
        raise ContractError("window has no pedestrians")
    t_obs = window.t_obs

    encodings = [
        encode_motion(p.rel_displacements[:t_obs], params, expected_steps=t_obs)
        for p in window.pedestrians
    ]
    nodes = []
    for i in range(n):
        p_i = social_context(relative_context(window, i), adjacency[i], params)
        nodes.append(concat([encodings[i], p_i], axis=1))
    features = social_gcn(CrowdGraph(node_features=stack_rows(nodes), adjacency=adjacency), params)

    trajectories = []
    latents = []
    for i, ped in enumerate(window.pedestrians):
        latent = latent_head(features[i:i + 1, :], params)
        z = z_fn(i, latent)
        trajectories.append(decode(z, ped.rel_displacements[t_obs - 1], params, steps=window.t_pred))
        latents.append(latent)
    return trajectories, latents


def window_loss(window, params, adjacency, rng, alpha=0.001):
    """Training loss for one window with one reparameterized sample per pedestrian."""

    def z_fn(_, latent):
        return sample_normal(rng, latent.mu, latent.log_var)

    trajectories, latents = window_forward(window, params, adjacency, z_fn)
    gt = [p.rel_displacements[window.t_obs:] for p in window.pedestrians]
    return _loss_terms(trajectories, gt, latents, alpha)


@dataclass
class PredictorTrainConfig:
    lr: float = 1e-4
    epochs: int = 200
    batch_size: int = 64
    alpha: float = 0.001
    seed: int = 0


@dataclass
class PredictorEpochStats:
    epoch: int
    train_loss: float
    train_rec: float
    train_kl: float
    val_rec: float | None = None


def mean_reconstruction(windows, params, attention_cfg, adjacency_cache=None):
    """Mean-z reconstruction error (meters) over a window set."""
    total = 0.0
    with no_grad():
        for window in windows:
            adjacency = _cached_adjacency(window, attention_cfg, adjacency_cache)
            trajectories, _ = window_forward(window, params, adjacency, lambda i, lat: lat.mu)
            gt = [p.rel_displacements[window.t_obs:] for p in window.pedestrians]
            errs = [
                float(np.sqrt(((t.data - g) ** 2).sum(axis=1)).mean())
                for t, g in zip(trajectories, gt)
            ]
            total += float(np.mean(errs))
    return total / len(windows)


def _cached_adjacency(window, attention_cfg, cache):
    if cache is None:
        return attention_rows(window, attention_cfg)
    key = id(window)
    if key not in cache:
        cache[key] = attention_rows(window, attention_cfg)
    return cache[key]


def train(windows, attention_cfg, config=None, val_windows=None, params=None):
    """Adam training across windows; adjacency per window is precomputed once.

    Deterministic given config.seed. Returns (params, history).
    """
    config = config or PredictorTrainConfig()
    if not windows:
        raise ConfigError("predictor training needs a non-empty window set")
    if params is None:
        params = PredictorParams.init(Rng(config.seed))
    opt = Adam(params.tensors(), lr=config.lr)
    shuffle_rng = np.random.default_rng(config.seed + 1)
    z_rng = Rng(config.seed + 2)

    cache = {}
    for window in windows:
        cache[id(window)] = attention_rows(window, attention_cfg)

    history = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(windows))
        tot = tot_rec = tot_kl = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [windows[i] for i in order[start:start + config.batch_size]]
            opt.zero_grad()
            for window in batch:
                loss, rec, kl = window_loss(
                    window, params, cache[id(window)], z_rng, alpha=config.alpha
                )
                tot += loss.item()
                tot_rec += rec.item()
                tot_kl += kl.item()
                (loss * (1.0 / len(batch))).backward()
            opt.step()
        stats = PredictorEpochStats(
            epoch=epoch,
            train_loss=tot / len(windows),
            train_rec=tot_rec / len(windows),
            train_kl=tot_kl / len(windows),
        )
        if val_windows:
            stats.val_rec = mean_reconstruction(val_windows, params, attention_cfg, cache)
        history.append(stats)
    return params, history


def predict(window, params, attention_cfg, k=20, rng=None):
    """k sampled futures per pedestrian plus the mean-feature trajectory."""
    if k < 1:
        raise ContractError(f"need k >= 1 samples, got {k}")
    rng = rng or Rng(0)
    adjacency = attention_rows(window, attention_cfg)

    with no_grad():
        trajectories, latents = window_forward(window, params, adjacency, lambda i, lat: lat.mu)
        predictions = []
        for i, ped in enumerate(window.pedestrians):
            latent = latents[i]
            mu = latent.mu.data[0]
            sigma = np.exp(latent.log_var.data[0] / 2.0)
            ped_rng = rng.spawn(ped.pedestrian_id)
            samples = np.zeros((k, window.t_pred, 2))
            for s in range(k):
                z = Tensor((mu + sigma * ped_rng.normal(Z_DIM)).reshape(1, Z_DIM))
                samples[s] = decode(z, ped.rel_displacements[window.t_obs - 1], params,
                                    steps=window.t_pred).data
            predictions.append(
                PedestrianPrediction(
                    pedestrian_id=ped.pedestrian_id,
                    samples=samples,
                    mean_trajectory=trajectories[i].data.copy(),
                )
            )
    return PredictionSet(predictions=predictions, k=k)
