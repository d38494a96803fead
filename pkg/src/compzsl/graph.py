"""Attribute-object semantic association graph and GCN propagation.

Four adjacency constructions are supported: two learnable random
variants (plain and L1-sparsified), a link graph derived from training
compositions, and an embedding graph from a Gaussian diffusion kernel
over the node word vectors. A fifth kind, "none", yields an empty graph
whose normalization is the identity, which turns the GCN into plain
fully connected layers for the non-graph ablation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DimensionError
from .numerics import (
    Parameter,
    Tensor,
    absval,
    add,
    leaky_relu,
    matmul,
    mul,
    power,
    sum_all,
    sum_rows,
    transpose,
)

GRAPH_KINDS = ("vanilla_random", "sparse_random", "link", "embedding", "none")
LEARNABLE_KINDS = ("vanilla_random", "sparse_random")

Composition = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class GraphSpec:
    """Adjacency construction strategy plus its hyperparameters."""

    kind: str = "sparse_random"
    sigma: float = 1.0          # embedding kind: Gaussian kernel width
    threshold: float = 0.5      # embedding kind: binarization cut
    l1_weight: float = 1e-4     # sparse_random kind: sparsity penalty
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in GRAPH_KINDS:
            raise ConfigError(f"unknown graph kind {self.kind!r}; choose one of {GRAPH_KINDS}")
        if self.sigma <= 0.0:
            raise ConfigError(f"graph sigma must be > 0, got {self.sigma}")
        if not (0.0 <= self.threshold <= 1.0):
            raise ConfigError(f"graph threshold must lie in [0, 1], got {self.threshold}")
        if self.l1_weight < 0.0:
            raise ConfigError(f"graph l1_weight must be >= 0, got {self.l1_weight}")


@dataclass
class Adjacency:
    """N x N connectivity, plus a cached normalization for fixed graphs."""

    matrix: Tensor
    learnable: bool
    kind: str
    normalized: Tensor | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.rows


def build_graph(
    spec: GraphSpec,
    z0: np.ndarray,
    train_compositions: list[Composition] | None = None,
    attribute_count: int | None = None,
) -> Adjacency:
    """Construct the adjacency for ``spec`` over N = z0.shape[0] nodes.

    Link graphs connect an attribute node to an object node exactly when
    they co-occur in a training composition, with self-loops and
    symmetry; embedding graphs threshold exp(-||Zi - Zj||^2 / sigma^2).
    Random kinds return a seeded learnable matrix.
    """
    n = int(z0.shape[0])
    if spec.kind in LEARNABLE_KINDS:
        rng = np.random.default_rng(spec.seed)
        return Adjacency(Tensor(0.1 * rng.standard_normal((n, n))), True, spec.kind)

    if spec.kind == "link":
        if not train_compositions:
            raise DataError("link graph needs a non-empty training composition list")
        if attribute_count is None:
            raise DataError("link graph needs the attribute count to offset object nodes")
        a = np.zeros((n, n))
        for attrs, obj in train_compositions:
            o = attribute_count + obj
            if o >= n:
                raise DataError(f"object node index {o} out of range for {n} nodes")
            for at in attrs:
                if at >= attribute_count:
                    raise DataError(f"attribute index {at} out of range for {attribute_count} attributes")
                a[at, o] = 1.0
                a[o, at] = 1.0
        np.fill_diagonal(a, 1.0)
        return Adjacency(Tensor(a), False, spec.kind)

    if spec.kind == "embedding":
        z = np.asarray(z0, dtype=np.float64)
        sq = ((z[:, None, :] - z[None, :, :]) ** 2).sum(axis=2)
        kernel = np.exp(-sq / spec.sigma**2)
        a = (kernel > spec.threshold).astype(np.float64)
        np.fill_diagonal(a, 1.0)
        return Adjacency(Tensor(a), False, spec.kind)

    if spec.kind == "none":
        return Adjacency(Tensor(np.zeros((n, n))), False, spec.kind)

    raise ConfigError(f"unknown graph kind {spec.kind!r}")


def gaussian_kernel_value(zi: np.ndarray, zj: np.ndarray, sigma: float) -> float:
    """Kernel entry for a single node pair, exp(-||zi - zj||^2 / sigma^2)."""
    diff = np.asarray(zi, dtype=np.float64) - np.asarray(zj, dtype=np.float64)
    return float(np.exp(-(diff @ diff) / sigma**2))


def normalize_adjacency(adj: Adjacency, mode: str = "symmetric") -> Tensor:
    """Self-loop normalization A-hat = D^(-1/2) (A + I) D^(-1/2).

    ``mode="row"`` uses the row-stochastic alternative D^(-1) (A + I).
    Learnable matrices pass through an absolute-value map first so
    degrees stay positive throughout training; their normalization is
    rebuilt on every call because the entries change. Fixed graphs cache
    the result.
    """
    if mode not in ("symmetric", "row"):
        raise ConfigError(f"unknown adjacency normalization {mode!r}")
    if not adj.learnable and adj.normalized is not None:
        return adj.normalized

    a = absval(adj.matrix) if adj.learnable else adj.matrix
    m = add(a, Tensor(np.eye(adj.size)))
    degrees = sum_rows(m)
    if mode == "symmetric":
        # (d_i d_j)^-0.5 rounds once per entry, so unit degrees of the
        # single-edge two-node graph normalize to exactly 0.5
        pair = matmul(degrees, transpose(degrees))
        normalized = mul(m, power(pair, -0.5))
    else:
        normalized = mul(power(degrees, -1.0), m)

    if not adj.learnable:
        # detached copy: fixed graphs never need gradients through A-hat
        adj.normalized = Tensor(normalized.data)
        return adj.normalized
    return normalized


def gcn_forward(
    z0: Tensor,
    adj: Adjacency,
    weights: list[Parameter],
    slope: float = 0.2,
    norm_mode: str = "symmetric",
) -> Tensor:
    """Stacked propagation Z^(l+1) = LeakyReLU(A-hat Z^l W^l).

    The final layer is linear so the output can match arbitrary-signed
    latent visual features.
    """
    if not weights:
        raise DimensionError("gcn_forward needs at least one layer")
    a_hat = normalize_adjacency(adj, norm_mode)
    h = z0
    for li, w in enumerate(weights):
        if h.cols != w.value.rows:
            raise DimensionError(
                f"gcn layer {li}: input {h.rows}x{h.cols} does not match weight "
                f"{w.value.rows}x{w.value.cols}"
            )
        h = matmul(matmul(a_hat, h), w.value)
        if li < len(weights) - 1:
            h = leaky_relu(h, slope)
    return h


def sparsity_penalty(adj: Adjacency, l1_weight: float) -> Tensor:
    """L1 penalty lambda * sum |A(i,j)| on a learnable adjacency."""
    if not adj.learnable:
        raise ConfigError("sparsity penalty only applies to a learnable adjacency")
    return mul(sum_all(absval(adj.matrix)), l1_weight)
