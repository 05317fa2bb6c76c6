"""Tensor arithmetic, reverse-mode differentiation, sampling, Adam."""

from .gradcheck import check_gradients, finite_difference_gradient, relative_error
from .layers import Linear, LstmWeights, lstm_cell, mlp2, run_lstm, stack_rows
from .optim import Adam, adam_step
from .rng import Rng, sample_normal, xavier_uniform
from .tensor import (
    Tensor,
    add,
    concat,
    div,
    exp,
    log,
    matmul,
    maximum,
    mean,
    mul,
    neg,
    no_grad,
    relu,
    reshape,
    sigmoid,
    softmax,
    sqrt,
    sub,
    sum_,
    take,
    tanh,
    transpose,
)

__all__ = [
    "Adam",
    "Linear",
    "LstmWeights",
    "Rng",
    "Tensor",
    "adam_step",
    "add",
    "check_gradients",
    "concat",
    "div",
    "exp",
    "finite_difference_gradient",
    "log",
    "lstm_cell",
    "matmul",
    "maximum",
    "mean",
    "mlp2",
    "mul",
    "neg",
    "no_grad",
    "relative_error",
    "relu",
    "reshape",
    "run_lstm",
    "sample_normal",
    "sigmoid",
    "softmax",
    "sqrt",
    "stack_rows",
    "sub",
    "sum_",
    "take",
    "tanh",
    "transpose",
    "xavier_uniform",
]
