"""Reverse-mode autodiff over dense float64 arrays.

Every operation records itself on the implicit tape (the graph of parent
links held by its output), so calling :meth:`Tensor.backward` on a scalar
loss fills the ``grad`` slot of every tracked tensor that contributed to
it. Parameters that never touch the loss keep a gradient of exactly zero.

Values are float64 throughout and immutable by convention: ops return new
tensors and never write into operand data. Non-finite values (NaN/Inf) are
a contract violation and raise immediately at the op that produced them.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, ShapeError

# When False, ops skip recording parents/backward closures. Used for
# inference paths where gradients are never requested.
_GRAD_ENABLED = True


class no_grad:
    """Context manager that disables tape recording inside its block."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def _as_array(value):
    arr = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ContractError("tensor value contains NaN or Inf")
    return arr


class Tensor:
    """A dense float64 array plus its slot on the autodiff tape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad=False):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        # Zero-initialized so untouched parameters read exactly zero.
        self.grad = np.zeros_like(self.data) if self.requires_grad else None
        self._parents = ()
        self._backward_fn = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _from_op(cls, data, parents, backward_fn):
        out = cls.__new__(cls)
        out.data = _as_array(data)
        out.requires_grad = _GRAD_ENABLED and any(p.requires_grad for p in parents)
        out.grad = None
        if out.requires_grad:
            out._parents = tuple(parents)
            out._backward_fn = backward_fn
        else:
            out._parents = ()
            out._backward_fn = None
        return out

    # -- basic introspection ---------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def zero_grad(self):
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def _accumulate(self, grad):
        if self.requires_grad:
            if self.grad is None:
                self.grad = np.zeros_like(self.data)
            self.grad += grad

    # -- backward pass ---------------------------------------------------------

    def backward(self):
        """Run reverse accumulation from this scalar to all tracked inputs."""
        if self.data.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            return

        # Iterative topological order; graphs from long LSTM unrolls would
        # otherwise flirt with the recursion limit.
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            out_grad = grads.pop(id(node), None)
            if out_grad is None:
                continue
            if node._backward_fn is not None:
                for parent, pgrad in node._backward_fn(out_grad):
                    if not parent.requires_grad:
                        continue
                    if parent._backward_fn is None and not parent._parents:
                        parent._accumulate(pgrad)  # leaf: write the grad slot
                    else:
                        key = id(parent)
                        if key in grads:
                            grads[key] = grads[key] + pgrad
                        else:
                            grads[key] = pgrad
            else:
                # Tracked leaf reached directly (loss built on a parameter).
                node._accumulate(out_grad)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, exponent):
        return pow_(self, exponent)

    def __getitem__(self, key):
        return take(self, key)

    # Named ops as methods, mirroring the idiom of small autograd libraries.
    def relu(self):
        return relu(self)

    def tanh(self):
        return tanh(self)

    def sigmoid(self):
        return sigmoid(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)

    def sqrt(self):
        return sqrt(self)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, *shape)

    def transpose(self):
        return transpose(self)


def _wrap(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad, shape):
    """Sum `grad` back down to `shape` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# -- elementwise binary ops -----------------------------------------------------


def add(a, b):
    a, b = _wrap(a), _wrap(b)

    def backward(g):
        return ((a, _unbroadcast(g, a.shape)), (b, _unbroadcast(g, b.shape)))

    return Tensor._from_op(a.data + b.data, (a, b), backward)


def sub(a, b):
    a, b = _wrap(a), _wrap(b)

    def backward(g):
        return ((a, _unbroadcast(g, a.shape)), (b, _unbroadcast(-g, b.shape)))

    return Tensor._from_op(a.data - b.data, (a, b), backward)


def mul(a, b):
    a, b = _wrap(a), _wrap(b)

    def backward(g):
        return (
            (a, _unbroadcast(g * b.data, a.shape)),
            (b, _unbroadcast(g * a.data, b.shape)),
        )

    return Tensor._from_op(a.data * b.data, (a, b), backward)


def div(a, b):
    a, b = _wrap(a), _wrap(b)

    def backward(g):
        return (
            (a, _unbroadcast(g / b.data, a.shape)),
            (b, _unbroadcast(-g * a.data / (b.data * b.data), b.shape)),
        )

    return Tensor._from_op(a.data / b.data, (a, b), backward)


def neg(a):
    a = _wrap(a)

    def backward(g):
        return ((a, -g),)

    return Tensor._from_op(-a.data, (a,), backward)


def pow_(a, exponent):
    a = _wrap(a)
    p = float(exponent)

    def backward(g):
        return ((a, g * p * np.power(a.data, p - 1.0)),)

    return Tensor._from_op(np.power(a.data, p), (a,), backward)


def maximum(a, floor):
    """Elementwise max against a scalar floor; gradient is zero where clamped."""
    a = _wrap(a)
    f = float(floor)
    mask = a.data > f

    def backward(g):
        return ((a, g * mask),)

    return Tensor._from_op(np.maximum(a.data, f), (a,), backward)


# -- matmul -----------------------------------------------------------------------


def matmul(a, b):
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")

    def backward(g):
        return ((a, g @ b.data.T), (b, a.data.T @ g))

    return Tensor._from_op(a.data @ b.data, (a, b), backward)


def transpose(a):
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ShapeError(f"transpose needs a 2-D tensor, got {a.shape}")

    def backward(g):
        return ((a, g.T),)

    return Tensor._from_op(a.data.T, (a,), backward)


# -- unary nonlinearities ----------------------------------------------------------


def relu(a):
    a = _wrap(a)
    mask = a.data > 0

    def backward(g):
        return ((a, g * mask),)

    return Tensor._from_op(np.maximum(a.data, 0.0), (a,), backward)


def tanh(a):
    a = _wrap(a)
    out_data = np.tanh(a.data)

    def backward(g):
        return ((a, g * (1.0 - out_data * out_data)),)

    return Tensor._from_op(out_data, (a,), backward)


def sigmoid(a):
    a = _wrap(a)
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        return ((a, g * out_data * (1.0 - out_data)),)

    return Tensor._from_op(out_data, (a,), backward)


def exp(a):
    a = _wrap(a)
    out_data = np.exp(a.data)

    def backward(g):
        return ((a, g * out_data),)

    return Tensor._from_op(out_data, (a,), backward)


def log(a):
    a = _wrap(a)

    def backward(g):
        return ((a, g / a.data),)

    return Tensor._from_op(np.log(a.data), (a,), backward)


def sqrt(a):
    a = _wrap(a)
    out_data = np.sqrt(a.data)

    def backward(g):
        # Subgradient 0 at exactly zero keeps losses built on norms finite.
        denom = np.where(out_data > 0.0, 2.0 * out_data, np.inf)
        return ((a, g / denom),)

    return Tensor._from_op(out_data, (a,), backward)


# -- reductions ---------------------------------------------------------------------


def sum_(a, axis=None, keepdims=False):
    a = _wrap(a)

    def backward(g):
        if axis is None:
            return ((a, np.broadcast_to(g, a.shape).copy()),)
        g_exp = g if keepdims else np.expand_dims(g, axis)
        return ((a, np.broadcast_to(g_exp, a.shape).copy()),)

    return Tensor._from_op(a.data.sum(axis=axis, keepdims=keepdims), (a,), backward)


def mean(a, axis=None, keepdims=False):
    a = _wrap(a)
    count = a.data.size if axis is None else a.shape[axis]

    def backward(g):
        if axis is None:
            return ((a, np.broadcast_to(g / count, a.shape).copy()),)
        g_exp = g if keepdims else np.expand_dims(g, axis)
        return ((a, np.broadcast_to(g_exp / count, a.shape).copy()),)

    return Tensor._from_op(a.data.mean(axis=axis, keepdims=keepdims), (a,), backward)


# -- shape ops ------------------------------------------------------------------------


def reshape(a, *shape):
    a = _wrap(a)
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    orig = a.shape

    def backward(g):
        return ((a, g.reshape(orig)),)

    return Tensor._from_op(a.data.reshape(shape), (a,), backward)


def take(a, key):
    """Basic indexing/slicing; backward scatters the gradient back."""
    a = _wrap(a)
    out_data = a.data[key]

    def backward(g):
        full = np.zeros_like(a.data)
        full[key] = g
        return ((a, full),)

    return Tensor._from_op(out_data, (a,), backward)


def concat(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    if not tensors:
        raise ContractError("concat needs at least one tensor")
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        grads = []
        for t, start, stop in zip(tensors, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(start, stop)
            grads.append((t, g[tuple(index)]))
        return tuple(grads)

    return Tensor._from_op(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


# -- softmax ----------------------------------------------------------------------------


def softmax(a, axis=-1):
    """Numerically stable softmax along `axis`; rows sum to one."""
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out_data).sum(axis=axis, keepdims=True)
        return ((a, out_data * (g - dot)),)

    return Tensor._from_op(out_data, (a,), backward)
