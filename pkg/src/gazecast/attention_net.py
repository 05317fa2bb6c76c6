"""Gaze-supervised attention over neighboring pedestrians.

A star-topology graph convolution looks at each neighbor's position
relative to the focal pedestrian and its velocity, and produces one
attention weight per crowd member plus a learned log-variance for the
gaze-mixture bandwidth. Training mixes a next-step motion prediction error
with the divergence between predicted attention and the gaze-derived
ground truth, so the bandwidth is learned rather than hand-picked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .numerics import (
    Linear,
    Rng,
    Tensor,
    exp,
    log,
    maximum,
    mlp2,
    no_grad,
    softmax,
    stack_rows,
    tanh,
)
from .trajdata import STEP_SECONDS, velocity_at

INPUT_DIM = 4  # (dx, dy, vx, vy)
MLP_HIDDEN = 128
EMBED_DIM = 64
GCN_OUT = 2  # (bandwidth logit, attention logit) per node
MOTION_DIM = 4
KL_FLOOR = 1e-12

# The learned mixture bandwidth is squashed to log sigma^2 in
# [-LOG_SIGMA2_BOUND, +LOG_SIGMA2_BOUND]. Left unbounded, the divergence
# term has a runaway optimum: inflating sigma flattens the gaze mixture
# toward uniform, which turns the supervision into a uniformity pull on
# the attention weights and inverts its benefit. The bound keeps the
# bandwidth on a pedestrian-interaction scale (sigma between roughly 0.7
# and 1.4 m) while it stays learned and differentiable through the
# divergence term.
LOG_SIGMA2_BOUND = 0.7


@dataclass
class AttentionNetParams:
    mlp1: Linear  # 4 -> 128
    mlp2: Linear  # 128 -> 64
    gcn1: Linear  # 64 -> 64
    gcn2: Linear  # 64 -> 2
    motion: Linear  # 64 -> 4

    @classmethod
    def init(cls, rng):
        return cls(
            mlp1=Linear.init(rng, INPUT_DIM, MLP_HIDDEN),
            mlp2=Linear.init(rng, MLP_HIDDEN, EMBED_DIM),
            gcn1=Linear.init(rng, EMBED_DIM, EMBED_DIM),
            gcn2=Linear.init(rng, EMBED_DIM, GCN_OUT),
            motion=Linear.init(rng, EMBED_DIM, MOTION_DIM),
        )

    def tensors(self):
        return {
            "mlp1.w": self.mlp1.w, "mlp1.b": self.mlp1.b,
            "mlp2.w": self.mlp2.w, "mlp2.b": self.mlp2.b,
            "gcn1.w": self.gcn1.w, "gcn1.b": self.gcn1.b,
            "gcn2.w": self.gcn2.w, "gcn2.b": self.gcn2.b,
            "motion.w": self.motion.w, "motion.b": self.motion.b,
        }

    def groups(self):
        """Parameter-group view used by the gradient suite."""
        return {
            "mlp": [self.mlp1.w, self.mlp1.b, self.mlp2.w, self.mlp2.b],
            "gcn_layer1": [self.gcn1.w, self.gcn1.b],
            "gcn_layer2": [self.gcn2.w, self.gcn2.b],
            "motion_head": [self.motion.w, self.motion.b],
        }


@dataclass
class AttentionInput:
    """Per-node features around one focal pedestrian at the last observed step."""

    features: np.ndarray  # (N, 4): relative position (m), velocity (m/s)
    focal: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        n = len(self.features)
        if n < 1:
            raise ContractError("attention input needs at least one pedestrian")
        if not (0 <= self.focal < n):
            raise ContractError(f"focal index {self.focal} out of range for {n} nodes")
        if np.any(np.abs(self.features[self.focal, :2]) > 1e-9):
            raise ContractError("focal row must have zero relative position")

    @property
    def n(self):
        return len(self.features)

    @property
    def rel_positions(self):
        return self.features[:, :2]

    @classmethod
    def from_window(cls, window, focal):
        t = window.t_obs - 1
        focal_pos = window.pedestrians[focal].abs_positions[t]
        feats = np.zeros((window.n_pedestrians, INPUT_DIM))
        for j, ped in enumerate(window.pedestrians):
            feats[j, :2] = ped.abs_positions[t] - focal_pos
            feats[j, 2:] = velocity_at(window, j, t)
        return cls(features=feats, focal=focal)


@dataclass
class AttentionOutput:
    weights: Tensor  # (1, N) softmax attention
    log_sigma2: Tensor  # (1, 1) learned mixture bandwidth
    motion: Tensor  # (1, 4) predicted next-step motion of the focal pedestrian
    embeddings: Tensor  # (N, 64) first-GCN-layer node features
    node_inputs: Tensor  # (N, 64) MLP embeddings fed to the GCN
    rel_positions: np.ndarray  # (N, 2) carried through for supervision
    focal: int

    @property
    def weights_np(self):
        return self.weights.data[0].copy()


@dataclass
class AttentionExample:
    """One supervised case: node features, focal next motion, gaze (focal-relative)."""

    input: AttentionInput
    gt_motion: np.ndarray  # (4,)
    gaze_rel: np.ndarray | None  # (M, 2) or None when the gaze window was empty


def star_adjacency(n, focal):
    """Row-normalized star graph with self-loops, focal at the hub."""
    if not (0 <= focal < n):
        raise ContractError(f"focal index {focal} out of range for {n} nodes")
    adj = np.eye(n)
    adj[focal, :] = 1.0
    adj[:, focal] = 1.0
    return adj / adj.sum(axis=1, keepdims=True)


def forward(inp, params):
    """Run the attention network for one focal pedestrian."""
    adj = Tensor(star_adjacency(inp.n, inp.focal))
    x = Tensor(inp.features)
    b = mlp2(x, params.mlp1, params.mlp2)  # (N, 64)
    u = (adj @ b @ params.gcn1.w + params.gcn1.b).relu()  # (N, 64)
    out2 = adj @ u @ params.gcn2.w + params.gcn2.b  # (N, 2)
    raw_bandwidth = out2[:, 0:1].mean(axis=0, keepdims=True)  # (1, 1)
    log_sigma2 = tanh(raw_bandwidth * (1.0 / LOG_SIGMA2_BOUND)) * LOG_SIGMA2_BOUND
    weights = softmax(out2[:, 1:2].transpose(), axis=1)  # (1, N)
    pooled = weights @ u  # (1, 64)
    motion = params.motion(pooled)  # (1, 4)
    return AttentionOutput(
        weights=weights,
        log_sigma2=log_sigma2,
        motion=motion,
        embeddings=u,
        node_inputs=b,
        rel_positions=inp.rel_positions.copy(),
        focal=inp.focal,
    )


def gaze_mixture_weights(rel_positions, gaze_rel, log_sigma2):
    """Ground-truth attention as a tape expression of the learned bandwidth."""
    diff = rel_positions[:, None, :] - np.asarray(gaze_rel)[None, :, :]
    d2 = Tensor(np.sum(diff * diff, axis=2))  # (N, M) constants
    sigma2 = exp(log_sigma2)  # (1, 1)
    densities = exp(-d2 / (sigma2 * 2.0)).mean(axis=1, keepdims=True)  # (N, 1)
    total = maximum(densities.sum(axis=0, keepdims=True), 1e-300)
    return maximum(densities / total, KL_FLOOR).transpose()  # (1, N)


def attention_loss(output, gt_motion, gaze_rel, beta=0.5):
    """Squared motion error plus beta * KL(predicted || gaze ground truth).

    The ground-truth mixture uses sigma^2 = exp(log_sigma2) from the same
    forward pass, so the bandwidth is trained through the KL term. An
    empty gaze window drops the KL term entirely.
    """
    gt = Tensor(np.asarray(gt_motion, dtype=np.float64).reshape(1, MOTION_DIM))
    err = output.motion - gt
    loss = (err * err).sum()
    if gaze_rel is None or len(gaze_rel) == 0 or beta == 0.0:
        return loss
    a_gt = gaze_mixture_weights(output.rel_positions, gaze_rel, output.log_sigma2)
    kl = (output.weights * (log(output.weights) - log(a_gt))).sum()
    return loss + beta * kl


def build_examples(windows, gaze_provider):
    """Assemble training cases: one per (window, focal pedestrian).

    gaze_provider(window, focal) returns absolute gaze points (M, 2) or
    None; points are stored relative to the focal pedestrian.
    """
    examples = []
    for window in windows:
        t = window.t_obs - 1
        for focal in range(window.n_pedestrians):
            ped = window.pedestrians[focal]
            delta = ped.abs_positions[t + 1] - ped.abs_positions[t]
            gt = np.concatenate([delta, delta / STEP_SECONDS])
            gaze = gaze_provider(window, focal)
            gaze_rel = None
            if gaze is not None and len(gaze) > 0:
                points = gaze.points if hasattr(gaze, "points") else np.asarray(gaze)
                gaze_rel = points - ped.abs_positions[t]
            examples.append(
                AttentionExample(
                    input=AttentionInput.from_window(window, focal),
                    gt_motion=gt,
                    gaze_rel=gaze_rel,
                )
            )
    return examples


def session_examples(session, window):
    """Training cases from a recorded steering run over a window replay.

    The steered agent is the focal node (index 0); crowd members follow.
    One example per replay step where the agent's next state is known.
    """
    from .gaze import extract_window

    ts = np.array([s.t for s in session.samples])
    examples = []
    for k in range(1, window.length - 1):
        t_k = k * STEP_SECONDS
        t_next = (k + 1) * STEP_SECONDS
        if t_k < ts[0] or t_next > ts[-1] + 1e-9:
            continue
        agent = session.samples[int(np.argmin(np.abs(ts - t_k)))]
        agent_next = session.samples[int(np.argmin(np.abs(ts - t_next)))]

        feats = np.zeros((window.n_pedestrians + 1, INPUT_DIM))
        feats[0, 2:] = agent.agent_v
        for j, ped in enumerate(window.pedestrians):
            feats[j + 1, :2] = ped.abs_positions[k] - agent.agent_xy
            feats[j + 1, 2:] = velocity_at(window, j, k)

        delta = agent_next.agent_xy - agent.agent_xy
        gt = np.concatenate([delta, delta / STEP_SECONDS])
        gaze = extract_window(session, t_k)
        gaze_rel = gaze.points - agent.agent_xy if len(gaze) > 0 else None
        examples.append(
            AttentionExample(
                input=AttentionInput(features=feats, focal=0),
                gt_motion=gt,
                gaze_rel=gaze_rel,
            )
        )
    return examples


def synthetic_gaze_provider(seed):
    """Gaze provider backed by the synthetic oracle, keyed per window/focal."""
    import zlib

    from .gaze import synthetic_gaze_oracle

    base = Rng(seed)

    def provider(window, focal):
        # zlib.crc32 keeps the key stable across processes (hash() is not).
        key = (zlib.crc32(window.dataset_id.encode()), window.start_frame, focal)
        return synthetic_gaze_oracle(window, focal, base.spawn(*key))

    return provider


@dataclass
class AttentionTrainConfig:
    lr: float = 1e-3
    epochs: int = 100
    beta: float = 0.5
    batch_size: int = 32
    seed: int = 0


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float | None = None


def train(examples, config=None, val_examples=None, params=None):
    """Adam training over example-level losses; deterministic given the seed.

    Returns (params, history) where history holds per-epoch mean train and
    validation losses.
    """
    from .numerics import Adam

    config = config or AttentionTrainConfig()
    if not examples:
        raise ConfigError("attention training needs a non-empty dataset")
    if params is None:
        params = AttentionNetParams.init(Rng(config.seed))
    opt = Adam(params.tensors(), lr=config.lr)
    shuffle_rng = np.random.default_rng(config.seed + 1)

    history = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(examples))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [examples[i] for i in order[start:start + config.batch_size]]
            opt.zero_grad()
            for ex in batch:
                out = forward(ex.input, params)
                loss = attention_loss(out, ex.gt_motion, ex.gaze_rel, beta=config.beta)
                total += loss.item()
                (loss * (1.0 / len(batch))).backward()
            opt.step()
        stats = EpochStats(epoch=epoch, train_loss=total / len(examples))
        if val_examples:
            stats.val_loss = mean_loss(params, val_examples, beta=config.beta)
        history.append(stats)
    return params, history


def mean_loss(params, examples, beta=0.5):
    with no_grad():
        total = 0.0
        for ex in examples:
            out = forward(ex.input, params)
            total += attention_loss(out, ex.gt_motion, ex.gaze_rel, beta=beta).item()
    return total / len(examples)


def evaluate_motion_mae(params, examples):
    """Mean absolute error over the 4 motion components of a test set."""
    if not examples:
        raise ContractError("motion MAE needs a non-empty test set")
    with no_grad():
        total = 0.0
        for ex in examples:
            out = forward(ex.input, params)
            total += float(np.abs(out.motion.data[0] - ex.gt_motion).mean())
    return total / len(examples)
