"""Parameterized building blocks: linear maps and the LSTM cell."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from .rng import xavier_uniform
from .tensor import Tensor, concat, sigmoid, tanh


@dataclass
class Linear:
    """y = x @ w + b with w of shape (d_in, d_out), b of shape (1, d_out)."""

    w: Tensor
    b: Tensor

    @classmethod
    def init(cls, rng, d_in, d_out):
        # Small nonzero bias keeps ReLU pre-activations off the exact kink
        # for all-zero inputs, which finite-difference checks cannot resolve.
        return cls(
            w=Tensor(xavier_uniform(rng, d_in, d_out), requires_grad=True),
            b=Tensor(rng.uniform(-0.1, 0.1, (1, d_out)), requires_grad=True),
        )

    @classmethod
    def zeros(cls, d_in, d_out):
        return cls(
            w=Tensor(np.zeros((d_in, d_out)), requires_grad=True),
            b=Tensor(np.zeros((1, d_out)), requires_grad=True),
        )

    def __call__(self, x):
        return x @ self.w + self.b

    @property
    def d_in(self):
        return self.w.shape[0]

    @property
    def d_out(self):
        return self.w.shape[1]


@dataclass
class LstmWeights:
    """Stacked gate weights, gate order (input, forget, candidate, output).

    w_ih: (d_in, 4*d_h), w_hh: (d_h, 4*d_h), b: (1, 4*d_h).
    """

    w_ih: Tensor
    w_hh: Tensor
    b: Tensor

    @classmethod
    def init(cls, rng, d_in, d_h):
        return cls(
            w_ih=Tensor(xavier_uniform(rng, d_in, 4 * d_h), requires_grad=True),
            w_hh=Tensor(xavier_uniform(rng, d_h, 4 * d_h), requires_grad=True),
            b=Tensor(np.zeros((1, 4 * d_h)), requires_grad=True),
        )

    @classmethod
    def zeros(cls, d_in, d_h):
        return cls(
            w_ih=Tensor(np.zeros((d_in, 4 * d_h)), requires_grad=True),
            w_hh=Tensor(np.zeros((d_h, 4 * d_h)), requires_grad=True),
            b=Tensor(np.zeros((1, 4 * d_h)), requires_grad=True),
        )

    @property
    def d_in(self):
        return self.w_ih.shape[0]

    @property
    def d_h(self):
        return self.w_hh.shape[0]


def lstm_cell(x, h, c, weights):
    """One step of standard LSTM gating; differentiable through the tape.

    x: (1, d_in), h and c: (1, d_h). Returns (h', c').
    """
    d_h = weights.d_h
    if x.shape != (1, weights.d_in):
        raise ShapeError(f"lstm input shape {x.shape} != (1, {weights.d_in})")
    if h.shape != (1, d_h) or c.shape != (1, d_h):
        raise ShapeError(f"lstm state shapes {h.shape}/{c.shape} != (1, {d_h})")

    gates = x @ weights.w_ih + h @ weights.w_hh + weights.b
    i = sigmoid(gates[:, 0:d_h])
    f = sigmoid(gates[:, d_h:2 * d_h])
    g = tanh(gates[:, 2 * d_h:3 * d_h])
    o = sigmoid(gates[:, 3 * d_h:4 * d_h])
    c_next = f * c + i * g
    h_next = o * tanh(c_next)
    return h_next, c_next


def run_lstm(sequence, weights):
    """Run lstm_cell over a list of (1, d_in) inputs from a zero state."""
    h = Tensor(np.zeros((1, weights.d_h)))
    c = Tensor(np.zeros((1, weights.d_h)))
    for x in sequence:
        h, c = lstm_cell(x, h, c, weights)
    return h, c


def mlp2(x, layer1, layer2):
    """Two linear layers with ReLU after each; the embedding idiom here."""
    return layer2(layer1(x).relu()).relu()


def stack_rows(rows):
    """Stack N tensors of shape (1, d) into an (N, d) tensor."""
    return concat(rows, axis=0)
