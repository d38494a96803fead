"""The training loop: shuffled mini-batches, joint losses, ADAM updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig, seed_streams
from .errors import NumericError
from .model import ModelState, build_model, compute_batch_losses, node_embeddings
from .numerics import Tensor, adam_step
from .packs import FeaturePack


@dataclass(frozen=True)
class EpochStats:
    """Mean per-batch losses of one epoch."""

    epoch: int
    fusion: float
    triplet: float
    decoding: float
    total: float

    def line(self) -> str:
        return (f"epoch {self.epoch:4d}  fus {self.fusion:.6f}  tri {self.triplet:.6f}  "
                f"de {self.decoding:.6f}  total {self.total:.6f}")


@dataclass
class TrainResult:
    model: ModelState
    log: list[EpochStats]


def _batches(n: int, batch_size: int, order: np.ndarray) -> list[np.ndarray]:
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def train(pack: FeaturePack, config: RunConfig, log_fn=None) -> TrainResult:
    """Train a fresh model on the pack's train split.

    Bitwise deterministic in (pack, config): parameter init, shuffling,
    and negative sampling each draw from their own seeded stream.
    """
    pack.validate()
    model = build_model(pack, config)
    streams = seed_streams(config.seed)
    shuffle_rng, negative_rng = streams["shuffle"], streams["negative"]

    x_train = pack.visual.astype(np.float64)
    train_rows = [i for i, im in enumerate(pack.images) if im.split == "train"]
    labels = [pack.images[i].composition for i in train_rows]
    pool = pack.compositions("train")

    log: list[EpochStats] = []
    n = len(train_rows)
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        sums = np.zeros(4)
        batches = _batches(n, config.batch_size, order)
        for batch_index, batch in enumerate(batches):
            rows = [train_rows[j] for j in batch]
            x0 = Tensor(x_train[rows])
            batch_labels = [labels[j] for j in batch]
            model.zero_grads()
            try:
                z = node_embeddings(model, pack)
                losses = compute_batch_losses(model, x0, batch_labels, z,
                                              pool, negative_rng)
                losses.total.backward()
                for p in model.parameters():
                    if p.grad is None:
                        # a zero-weight loss leaves its pathway untouched
                        p.value.grad = np.zeros_like(p.value.data)
                    adam_step(p, model.adam[p.name])
            except NumericError as e:
                raise NumericError(
                    f"training aborted at epoch {epoch}, batch {batch_index}: {e}"
                ) from e
            sums += (losses.fusion.item(), losses.triplet.item(),
                     losses.decoding.item(), losses.total.item())
        stats = EpochStats(epoch, *(sums / max(len(batches), 1)))
        log.append(stats)
        if log_fn is not None:
            log_fn(stats.line())
    return TrainResult(model, log)
