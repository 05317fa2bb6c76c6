"""Finite-difference gradient verification.

This is a first-class operation, not test-only code: the acceptance gate
runs it against both networks. Central differences with the default step
1e-5 resolve gradients of O(1) losses to roughly 1e-10 absolute, so the
relative-error denominator is floored at 1.0 — below that the comparison
is effectively absolute, which is the honest regime for near-zero
gradients drowned in roundoff.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from .tensor import Tensor


def finite_difference_gradient(loss_fn, param, entries=None, step=1e-5, center=None):
    """Central-difference gradient of loss_fn() w.r.t. selected entries.

    loss_fn must rebuild the forward pass on each call (the tape is not
    reused). `entries` is an iterable of flat indices; None checks all.
    Returns ({flat_index: derivative}, {flat_index: smooth}); an entry is
    flagged non-smooth when its one-sided differences disagree, which
    happens when the step straddles a ReLU kink. Central differences are
    meaningless there, while a wrong analytic gradient leaves the loss
    smooth and cannot hide behind the flag.
    """
    flat = param.data.reshape(-1)
    if entries is None:
        entries = range(flat.size)
    if center is None:
        center = _loss_value(loss_fn)
    grads = {}
    smooth = {}
    for idx in entries:
        orig = flat[idx]
        flat[idx] = orig + step
        up = _loss_value(loss_fn)
        flat[idx] = orig - step
        down = _loss_value(loss_fn)
        flat[idx] = orig
        forward = (up - center) / step
        backward = (center - down) / step
        grads[int(idx)] = (up - down) / (2.0 * step)
        smooth[int(idx)] = abs(forward - backward) <= 1e-3 * max(abs(forward), abs(backward), 1.0)
    return grads, smooth


def _loss_value(loss_fn):
    value = loss_fn()
    if isinstance(value, Tensor):
        return value.item()
    return float(value)


def relative_error(a, b, floor=1.0):
    return abs(a - b) / max(abs(a), abs(b), floor)


def check_gradients(loss_fn, params, step=1e-5, max_entries_per_param=None, rng=None):
    """Compare backward-pass gradients against central finite differences.

    params: name -> Tensor mapping. Every parameter group is checked; when
    `max_entries_per_param` is set, a seeded sample of entries per tensor
    is probed instead of all of them (full sweeps over the real network
    shapes would cost tens of thousands of loss evaluations).

    Returns {param_name: max relative error}.
    """
    for p in params.values():
        p.zero_grad()
    loss = loss_fn()
    if not isinstance(loss, Tensor) or loss.size != 1:
        raise ContractError("loss_fn must return a scalar Tensor")
    loss.backward()
    analytic = {name: p.grad.copy() for name, p in params.items()}
    center = loss.item()

    errors = {}
    for name, p in params.items():
        n = p.data.size
        if max_entries_per_param is not None and n > max_entries_per_param:
            if rng is None:
                raise ContractError("sampled gradient check needs an rng")
            entries = sorted(set(int(i) for i in rng.permutation(n)[:max_entries_per_param]))
        else:
            entries = range(n)
        fd, smooth = finite_difference_gradient(loss_fn, p, entries=entries, step=step, center=center)
        a_flat = analytic[name].reshape(-1)
        errors[name] = max(
            (relative_error(a_flat[i], fd_val) for i, fd_val in fd.items() if smooth[i]),
            default=0.0,
        )
    return errors
