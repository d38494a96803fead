"""Visual pathway: encoder, composition clustering, decoder.

A batch of precomputed image features is projected into the latent
space by stacked linear layers, compacted by the self-representation
clustering operator, and reconstructed back to the input space by a
mirrored decoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .numerics import Parameter, Tensor, linear_layer, matmul, mul, softmax_rows, transpose


@dataclass(frozen=True)
class VisualPathwayConfig:
    """Layer sizes for both halves of the pathway.

    ``encoder_dims`` lists every encoder layer output size and must end
    at the latent dimension; ``decoder_dims`` must end back at the input
    dimension.
    """

    input_dim: int
    encoder_dims: tuple[int, ...]
    latent_dim: int
    decoder_dims: tuple[int, ...]
    clustering_enabled: bool = True
    cluster_temperature: bool = False
    use_bias: bool = True

    def __post_init__(self) -> None:
        dims = (self.input_dim, self.latent_dim, *self.encoder_dims, *self.decoder_dims)
        if any(d < 1 for d in dims):
            raise DimensionError(f"all pathway dimensions must be >= 1, got {dims}")
        if self.encoder_dims[-1] != self.latent_dim:
            raise DimensionError(
                f"last encoder dim {self.encoder_dims[-1]} must equal latent dim {self.latent_dim}"
            )
        if self.decoder_dims[-1] != self.input_dim:
            raise DimensionError(
                f"last decoder dim {self.decoder_dims[-1]} must equal input dim {self.input_dim}"
            )


Layer = tuple[Parameter, Parameter | None]


def _run_stack(x: Tensor, layers: list[Layer]) -> Tensor:
    h = x
    for w, b in layers:
        h = linear_layer(h, w, b, activation="linear")
    return h


def encode(x0: Tensor, layers: list[Layer], cfg: VisualPathwayConfig) -> Tensor:
    """Project initial features (b x m) into the latent space (b x k)."""
    if x0.cols != cfg.input_dim:
        raise DimensionError(f"encoder expects {cfg.input_dim} columns, got {x0.cols}")
    return _run_stack(x0, layers)


def composition_cluster(x: Tensor, temperature: bool = False) -> Tensor:
    """Self-representation clustering: softmax(X X^T) X.

    Each output row is a convex combination of the batch rows, weighted
    by row-normalized pairwise inner products, so features of the same
    composition are pulled toward each other. With ``temperature`` the
    inner products are scaled by 1/sqrt(k) before the softmax.
    """
    if x.rows < 1:
        raise DimensionError("composition clustering needs a batch of at least one row")
    scores = matmul(x, transpose(x))
    if temperature:
        scores = mul(scores, 1.0 / np.sqrt(x.cols))
    weights = softmax_rows(scores)
    return matmul(weights, x)


def clustering_weights(x: np.ndarray, temperature: bool = False) -> np.ndarray:
    """The convex-combination coefficients the clustering operator uses."""
    scores = x @ x.T
    if temperature:
        scores = scores / np.sqrt(x.shape[1])
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def decode(xc: Tensor, layers: list[Layer], cfg: VisualPathwayConfig) -> Tensor:
    """Reconstruct initial-space features (b x m) from latent ones (b x k)."""
    if xc.cols != cfg.latent_dim:
        raise DimensionError(f"decoder expects {cfg.latent_dim} columns, got {xc.cols}")
    return _run_stack(xc, layers)


def visual_forward(
    x0: Tensor,
    encoder: list[Layer],
    decoder: list[Layer],
    cfg: VisualPathwayConfig,
    apply_clustering: bool | None = None,
) -> tuple[Tensor, Tensor, Tensor]:
    """Full pathway pass: returns (encoded X, clustered X^c, reconstruction)."""
    x = encode(x0, encoder, cfg)
    clustered = cfg.clustering_enabled if apply_clustering is None else apply_clustering
    xc = composition_cluster(x, cfg.cluster_temperature) if (clustered and x.rows > 0) else x
    xhat = decode(xc, decoder, cfg)
    return x, xc, xhat
