"""Deterministic random streams and reparameterized sampling."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .tensor import Tensor, exp, mul, add


class Rng:
    """Counter-based random stream; identical seeds give identical draws.

    `spawn(*key)` derives an independent stream keyed by integers (e.g. a
    pedestrian id), so per-entity sampling does not depend on iteration
    order.
    """

    def __init__(self, seed, _entropy=None):
        self.seed = int(seed)
        self._entropy = _entropy if _entropy is not None else (self.seed & 0xFFFFFFFFFFFFFFFF,)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self._entropy)))

    def spawn(self, *key):
        masked = tuple(int(k) & 0xFFFFFFFFFFFFFFFF for k in key)
        return Rng(self.seed, _entropy=self._entropy + masked)

    def normal(self, shape=()):
        return self._gen.standard_normal(shape)

    def uniform(self, low, high, shape=()):
        return self._gen.uniform(low, high, shape)

    def integers(self, low, high):
        return int(self._gen.integers(low, high))

    def permutation(self, n):
        return self._gen.permutation(n)


def sample_normal(rng, mean_t, log_var_t):
    """Draw from N(mean, diag(exp(log_var))) with gradients through both.

    The reparameterization mean + exp(log_var / 2) * eps keeps the drawn
    noise constant on the tape, so backward reaches mean and log_var.
    """
    mean_t = mean_t if isinstance(mean_t, Tensor) else Tensor(mean_t)
    log_var_t = log_var_t if isinstance(log_var_t, Tensor) else Tensor(log_var_t)
    if mean_t.shape != log_var_t.shape:
        raise ShapeError(f"mean shape {mean_t.shape} != log_var shape {log_var_t.shape}")
    eps = Tensor(rng.normal(mean_t.shape))
    return add(mean_t, mul(exp(mul(log_var_t, 0.5)), eps))


def xavier_uniform(rng, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, (fan_in, fan_out))
