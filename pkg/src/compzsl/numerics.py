"""Dense float64 matrices with reverse-mode differentiation, plus ADAM.

Everything downstream (both pathways, the losses, the training loop) is
built from the operations in this module. Each operation computes its
result eagerly with numpy and records a closure that produces exact
analytic gradients for its inputs; ``Tensor.backward()`` replays those
closures in reverse topological order. Internally everything is 64-bit
even though pack files store 32-bit floats, so finite-difference checks
can run at tight tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DimensionError, NumericError


def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise DimensionError(f"tensors are 2-d matrices, got ndim={arr.ndim}")
    return np.ascontiguousarray(arr)


class Tensor:
    """A rows x cols float64 matrix, optionally part of a recorded graph.

    ``data`` is the row-major value, ``grad`` the accumulated gradient
    buffer (allocated on demand during backward). Non-leaf tensors keep
    references to their parents and a backward closure.
    """

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, _parents: tuple = (), _backward: Callable | None = None):
        self.data = _as_matrix(data)
        if not np.isfinite(self.data).all():
            raise NumericError("tensor contains non-finite entries")
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every upstream tensor."""
        if self.data.size != 1:
            raise DimensionError(f"backward() starts from a 1x1 scalar, got {self.shape}")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # arithmetic sugar; elementwise ops broadcast like numpy over 2-d shapes
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self) -> str:
        return f"Tensor({self.rows}x{self.cols})"


def tensor(data) -> Tensor:
    return Tensor(data)


def zeros(rows: int, cols: int) -> Tensor:
    return Tensor(np.zeros((rows, cols)))


def eye(n: int) -> Tensor:
    return Tensor(np.eye(n))


def _coerce(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if g.shape == shape:
        return g
    out = g
    if shape[0] == 1 and out.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and out.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return out


def _check_broadcast(a: Tensor, b: Tensor, opname: str) -> None:
    for da, db in zip(a.shape, b.shape):
        if da != db and da != 1 and db != 1:
            raise DimensionError(f"{opname}: shapes {a.shape} and {b.shape} do not broadcast")


def add(a: Tensor, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    _check_broadcast(a, b, "add")
    out = Tensor(a.data + b.data, (a, b))

    def _bw(g: np.ndarray) -> None:
        a._accumulate(_unbroadcast(g, a.shape))
        b._accumulate(_unbroadcast(g, b.shape))

    out._backward = _bw
    return out


def sub(a: Tensor, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    _check_broadcast(a, b, "sub")
    out = Tensor(a.data - b.data, (a, b))

    def _bw(g: np.ndarray) -> None:
        a._accumulate(_unbroadcast(g, a.shape))
        b._accumulate(-_unbroadcast(g, b.shape))

    out._backward = _bw
    return out


def mul(a: Tensor, b) -> Tensor:
    """Elementwise product; either side may be a scalar or broadcastable."""
    a = _coerce(a)
    if isinstance(b, (int, float)):
        s = float(b)
        out = Tensor(a.data * s, (a,))
        out._backward = lambda g: a._accumulate(g * s)
        return out
    b = _coerce(b)
    _check_broadcast(a, b, "mul")
    out = Tensor(a.data * b.data, (a, b))

    def _bw(g: np.ndarray) -> None:
        a._accumulate(_unbroadcast(g * b.data, a.shape))
        b._accumulate(_unbroadcast(g * a.data, b.shape))

    out._backward = _bw
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    if a.cols != b.rows:
        raise DimensionError(f"matmul: {a.rows}x{a.cols} does not compose with {b.rows}x{b.cols}")
    out = Tensor(a.data @ b.data, (a, b))

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    out._backward = _bw
    return out


def transpose(a: Tensor) -> Tensor:
    out = Tensor(a.data.T, (a,))
    out._backward = lambda g: a._accumulate(g.T)
    return out


def power(a: Tensor, p: float) -> Tensor:
    out = Tensor(a.data**p, (a,))
    out._backward = lambda g: a._accumulate(g * p * a.data ** (p - 1.0))
    return out


def exp(a: Tensor) -> Tensor:
    val = np.exp(a.data)
    out = Tensor(val, (a,))
    out._backward = lambda g: a._accumulate(g * val)
    return out


def absval(a: Tensor) -> Tensor:
    out = Tensor(np.abs(a.data), (a,))
    out._backward = lambda g: a._accumulate(g * np.sign(a.data))
    return out


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    mask = np.where(a.data > 0.0, 1.0, slope)
    out = Tensor(a.data * mask, (a,))
    out._backward = lambda g: a._accumulate(g * mask)
    return out


def softmax_rows(m: Tensor) -> Tensor:
    """Row-wise softmax with max subtraction; rows sum to 1 and stay in (0, 1)."""
    m = _coerce(m)
    shifted = m.data - m.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)
    out = Tensor(s, (m,))

    def _bw(g: np.ndarray) -> None:
        # dL/dm = s * (g - sum_j g_j s_j) per row
        dot = (g * s).sum(axis=1, keepdims=True)
        m._accumulate(s * (g - dot))

    out._backward = _bw
    return out


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(np.array([[a.data.sum()]]), (a,))
    out._backward = lambda g: a._accumulate(np.full_like(a.data, g[0, 0]))
    return out


def sum_rows(a: Tensor) -> Tensor:
    """Sum along each row, returning a rows x 1 column."""
    out = Tensor(a.data.sum(axis=1, keepdims=True), (a,))
    out._backward = lambda g: a._accumulate(np.broadcast_to(g, a.shape).copy())
    return out


def mean_all(a: Tensor) -> Tensor:
    n = a.data.size
    out = Tensor(np.array([[a.data.mean()]]), (a,))
    out._backward = lambda g: a._accumulate(np.full_like(a.data, g[0, 0] / n))
    return out


def row_norms(a: Tensor) -> Tensor:
    """Per-row Euclidean norm as a rows x 1 column.

    The gradient at an exactly-zero row is taken as 0 (a valid
    subgradient), so losses built on norms stay finite everywhere.
    """
    norms = np.sqrt((a.data**2).sum(axis=1, keepdims=True))
    out = Tensor(norms, (a,))

    def _bw(g: np.ndarray) -> None:
        safe = np.where(norms > 0.0, norms, 1.0)
        a._accumulate(g * a.data / safe * (norms > 0.0))

    out._backward = _bw
    return out


@dataclass
class Parameter:
    """A named, trainable tensor. The gradient lives on ``value.grad``."""

    name: str
    value: Tensor

    @property
    def grad(self) -> np.ndarray | None:
        return self.value.grad

    def zero_grad(self) -> None:
        self.value.zero_grad()

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape


def linear_layer(
    x: Tensor,
    w: Parameter,
    bias: Parameter | None = None,
    activation: str = "linear",
    slope: float = 0.2,
) -> Tensor:
    """xW (+ bias broadcast per row), then the named activation."""
    if x.cols != w.value.rows:
        raise DimensionError(
            f"linear_layer: input {x.rows}x{x.cols} does not match weight {w.value.rows}x{w.value.cols}"
        )
    out = matmul(x, w.value)
    if bias is not None:
        out = add(out, bias.value)
    if activation == "linear":
        return out
    if activation == "leaky_relu":
        return leaky_relu(out, slope)
    raise ValueError(f"unknown activation {activation!r}")


@dataclass
class AdamState:
    """Per-parameter ADAM moments and hyperparameters."""

    first_moment: Tensor
    second_moment: Tensor
    step_count: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise NumericError("adam betas must lie in (0, 1)")

    @classmethod
    def for_parameter(cls, p: Parameter, lr: float = 1e-4, beta1: float = 0.9,
                      beta2: float = 0.999, epsilon: float = 1e-8) -> "AdamState":
        r, c = p.shape
        return cls(zeros(r, c), zeros(r, c), 0, lr, beta1, beta2, epsilon)


def adam_step(p: Parameter, s: AdamState) -> None:
    """Apply one bias-corrected ADAM update in place.

    The gradient buffer is left untouched so callers can inspect it; the
    training loop zeroes it before the next forward pass.
    """
    g = p.grad
    if g is None:
        raise NumericError(f"parameter {p.name!r} has no gradient for this step")
    if not np.isfinite(g).all():
        raise NumericError(f"parameter {p.name!r} has a non-finite gradient")
    if g.shape != p.value.data.shape:
        raise DimensionError(f"gradient shape {g.shape} != parameter shape {p.value.data.shape}")
    s.step_count += 1
    m, v = s.first_moment.data, s.second_moment.data
    m *= s.beta1
    m += (1.0 - s.beta1) * g
    v *= s.beta2
    v += (1.0 - s.beta2) * g * g
    m_hat = m / (1.0 - s.beta1**s.step_count)
    v_hat = v / (1.0 - s.beta2**s.step_count)
    p.value.data -= s.lr * m_hat / (np.sqrt(v_hat) + s.epsilon)
    if not np.isfinite(p.value.data).all():
        raise NumericError(f"parameter {p.name!r} became non-finite after the update")


def glorot_init(rows: int, cols: int, rng: np.random.Generator) -> Tensor:
    limit = np.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-limit, limit, size=(rows, cols)))


def parameters_entry_count(params: Iterable[Parameter]) -> int:
    return sum(p.value.data.size for p in params)
