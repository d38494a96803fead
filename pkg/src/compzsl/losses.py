"""Mask matrices and the three training losses plus their combination.

A mask row selects the attribute and object nodes of one composition;
multiplying a mask by the node feature matrix sums (or averages) the
selected node embeddings, giving each image a composition target in the
latent space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError, NumericError
from .graph import Composition
from .numerics import Tensor, add, leaky_relu, matmul, mean_all, mul, row_norms, sub

MASK_KINDS = ("positive", "negative", "candidate")
POOLING_MODES = ("sum", "mean")


@dataclass
class MaskMatrix:
    """0-1 selector over the N graph nodes, one row per image or candidate."""

    matrix: np.ndarray
    kind: str
    attribute_count: int
    _pooled: dict[str, Tensor] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in MASK_KINDS:
            raise DataError(f"unknown mask kind {self.kind!r}")
        m = self.matrix
        if not np.isin(m, (0.0, 1.0)).all():
            raise DataError("mask entries must be 0 or 1")
        obj_block = m[:, self.attribute_count:]
        attr_block = m[:, : self.attribute_count]
        if m.shape[0] and not (obj_block.sum(axis=1) == 1.0).all():
            raise DataError("every mask row needs exactly one object node")
        if m.shape[0] and not (attr_block.sum(axis=1) >= 1.0).all():
            raise DataError("every mask row needs at least one attribute node")

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    def pooled(self, pooling: str = "sum") -> Tensor:
        """Constant tensor used in mask products; "mean" row-normalizes."""
        if pooling not in POOLING_MODES:
            raise DataError(f"unknown mask pooling {pooling!r}")
        if pooling not in self._pooled:
            if pooling == "sum":
                self._pooled[pooling] = Tensor(self.matrix)
            else:
                self._pooled[pooling] = Tensor(self.matrix / self.matrix.sum(axis=1, keepdims=True))
        return self._pooled[pooling]


@dataclass(frozen=True)
class LossWeights:
    """Coefficients of the overall objective and the triplet margin."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    margin: float = 0.5

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0.0:
            raise NumericError("loss weights must be >= 0")
        if self.alpha == self.beta == self.gamma == 0.0:
            raise NumericError("at least one loss weight must be positive")
        if self.margin <= 0.0:
            raise NumericError(f"triplet margin must be > 0, got {self.margin}")


def composition_mask_rows(
    comps: list[Composition], attribute_count: int, object_count: int
) -> np.ndarray:
    n = attribute_count + object_count
    rows = np.zeros((len(comps), n))
    for i, (attrs, obj) in enumerate(comps):
        if not (0 <= obj < object_count):
            raise DataError(f"object index {obj} out of range for {object_count} objects")
        if not attrs:
            raise DataError("a composition needs at least one attribute")
        for at in attrs:
            if not (0 <= at < attribute_count):
                raise DataError(f"attribute index {at} out of range for {attribute_count} attributes")
            rows[i, at] = 1.0
        rows[i, attribute_count + obj] = 1.0
    return rows


def build_positive_mask(
    labels: list[Composition], attribute_count: int, object_count: int
) -> MaskMatrix:
    """Mask with ones at each image's attribute nodes and object node."""
    rows = composition_mask_rows(labels, attribute_count, object_count)
    return MaskMatrix(rows, "positive", attribute_count)


def decode_mask_rows(mask: MaskMatrix) -> list[Composition]:
    comps: list[Composition] = []
    for row in mask.matrix:
        attrs = tuple(int(i) for i in np.flatnonzero(row[: mask.attribute_count]))
        obj = int(np.flatnonzero(row[mask.attribute_count:])[0])
        comps.append((attrs, obj))
    return comps


def normalize_composition(comp: Composition) -> Composition:
    attrs, obj = comp
    return tuple(sorted(set(attrs))), obj


def sample_negative_mask(
    positive: MaskMatrix,
    candidate_pool: list[Composition],
    rng: np.random.Generator,
    object_count: int,
) -> MaskMatrix:
    """Per row, a uniform draw from the pool minus the row's true composition.

    The pool is the seen (training) composition set; it is resampled on
    every optimization step by passing the training loop's generator.
    """
    pool = list(dict.fromkeys(normalize_composition(c) for c in candidate_pool))
    if len(pool) < 2:
        raise DataError("negative sampling needs at least two distinct compositions in the pool")
    true_comps = decode_mask_rows(positive)
    index_of = {c: i for i, c in enumerate(pool)}
    chosen: list[Composition] = []
    for comp in true_comps:
        skip = index_of.get(comp)
        if skip is None:
            chosen.append(pool[int(rng.integers(len(pool)))])
        else:
            j = int(rng.integers(len(pool) - 1))
            if j >= skip:
                j += 1
            chosen.append(pool[j])
    rows = composition_mask_rows(chosen, positive.attribute_count,
                                 object_count)
    neg = MaskMatrix(rows, "negative", positive.attribute_count)
    if (neg.matrix == positive.matrix).all(axis=1).any():
        raise DataError("negative mask duplicated a positive row")
    return neg


def fusion_loss(xc: Tensor, y: MaskMatrix, z: Tensor, pooling: str = "sum") -> Tensor:
    """Batch mean of per-row Euclidean distances between X^c and Y Z."""
    target = matmul(y.pooled(pooling), z)
    if target.shape != xc.shape:
        raise DimensionError(f"fusion loss: X^c {xc.shape} vs masked target {target.shape}")
    return mean_all(row_norms(sub(xc, target)))


def triplet_loss(
    xc: Tensor,
    y_pos: MaskMatrix,
    y_neg: MaskMatrix,
    z: Tensor,
    margin: float,
    pooling: str = "sum",
) -> Tensor:
    """Batch mean of max(0, d(X^c, YZ) - d(X^c, Y~Z) + margin)."""
    if y_pos.matrix.shape != y_neg.matrix.shape:
        raise DimensionError(
            f"triplet loss: positive mask {y_pos.matrix.shape} vs negative {y_neg.matrix.shape}"
        )
    d_pos = row_norms(sub(xc, matmul(y_pos.pooled(pooling), z)))
    d_neg = row_norms(sub(xc, matmul(y_neg.pooled(pooling), z)))
    hinge = leaky_relu(add(sub(d_pos, d_neg), Tensor([[margin]])), slope=0.0)
    return mean_all(hinge)


def decoding_loss(x0: Tensor, xhat: Tensor) -> Tensor:
    """Batch mean of per-row Euclidean reconstruction distances."""
    if x0.shape != xhat.shape:
        raise DimensionError(f"decoding loss: X^0 {x0.shape} vs reconstruction {xhat.shape}")
    return mean_all(row_norms(sub(x0, xhat)))


def total_loss(
    fusion: Tensor,
    triplet: Tensor,
    decoding: Tensor,
    weights: LossWeights,
    sparsity: Tensor | None = None,
) -> Tensor:
    """Weighted objective alpha*L_fus + beta*L_tri + gamma*L_de (+ L1 term)."""
    for name, component in (("fusion", fusion), ("triplet", triplet), ("decoding", decoding)):
        if not np.isfinite(component.data).all():
            raise NumericError(f"{name} loss is non-finite")
    total = add(
        add(mul(fusion, weights.alpha), mul(triplet, weights.beta)),
        mul(decoding, weights.gamma),
    )
    if sparsity is not None:
        if not np.isfinite(sparsity.data).all():
            raise NumericError("sparsity penalty is non-finite")
        total = add(total, sparsity)
    return total
