"""Nearest-neighbor inference, the two metrics, and image retrieval.

Predictions pick the candidate composition whose pooled node embedding
is nearest (Euclidean) to the image's clustered latent feature. The
closed metric restricts candidates to test-split compositions; the open
metric ranks over train and test compositions together.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .graph import Composition
from .losses import MaskMatrix, composition_mask_rows, normalize_composition
from .model import ModelState, batch_visual_forward, node_embeddings
from .numerics import Tensor
from .packs import FeaturePack, ImageRecord

METRICS = ("closed", "open")


def h_mean(closed: float, open_: float) -> float:
    """Harmonic mean of the two accuracies; 0 when both are 0."""
    if closed < 0.0 or open_ < 0.0:
        raise ConfigError("accuracies must be >= 0")
    s = closed + open_
    return 2.0 * closed * open_ / s if s > 0.0 else 0.0


def candidate_compositions(pack: FeaturePack, metric: str) -> list[Composition]:
    """Candidate label sets, in deterministic first-appearance order."""
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}")
    test = pack.compositions("test")
    candidates = test if metric == "closed" else pack.compositions("train") + test
    if not candidates:
        raise DataError(f"no candidate compositions for the {metric} metric")
    return candidates


def _candidate_latents(model: ModelState, pack: FeaturePack,
                       candidates: list[Composition]) -> np.ndarray:
    z = node_embeddings(model, pack)
    rows = composition_mask_rows(candidates, model.attribute_count, model.object_count)
    mask = MaskMatrix(rows, "candidate", model.attribute_count)
    return (mask.pooled(model.config.mask_pooling).data @ z.data)


def _clustered_latents(model: ModelState, x0_rows: np.ndarray) -> np.ndarray:
    """Latent features for a feature block, batched in dataset order.

    Clustering mixes rows within a batch, so the batch size is part of
    the inference protocol; it comes from the config and is reported.
    """
    apply = model.config.clustering_enabled and model.config.clustering_at_eval
    b = model.config.effective_eval_batch()
    out = []
    for i in range(0, x0_rows.shape[0], b):
        x0 = Tensor(x0_rows[i:i + b])
        _, xc, _ = batch_visual_forward(model, x0, apply_clustering=apply)
        out.append(xc.data)
    return np.concatenate(out, axis=0) if out else np.zeros((0, model.latent_dim))


@dataclass(frozen=True)
class Prediction:
    image_id: str
    composition: Composition
    candidate_index: int
    distance: float


def predict(
    model: ModelState,
    pack: FeaturePack,
    metric: str = "closed",
    images: list[ImageRecord] | None = None,
) -> list[Prediction]:
    """Nearest-candidate composition per image; ties go to the lowest index."""
    candidates = candidate_compositions(pack, metric)
    cand_latents = _candidate_latents(model, pack, candidates)
    if images is None:
        images = pack.split_images("test")
    row_of = {im.id: i for i, im in enumerate(pack.images)}
    rows = [row_of[im.id] for im in images]
    latents = _clustered_latents(model, pack.visual.astype(np.float64)[rows])
    dists = np.sqrt(
        ((latents[:, None, :] - cand_latents[None, :, :]) ** 2).sum(axis=2)
    )
    picks = dists.argmin(axis=1)
    return [
        Prediction(im.id, candidates[int(j)], int(j), float(dists[i, int(j)]))
        for i, (im, j) in enumerate(zip(images, picks))
    ]


@dataclass(frozen=True)
class CompositionRow:
    name: str
    images: int
    closed_correct: int
    open_correct: int


@dataclass
class EvalReport:
    """Closed/open top-1 accuracy (percent) with their harmonic mean."""

    closed_top1: float
    open_top1: float
    h_mean: float
    closed_candidates: int
    open_candidates: int
    test_images: int
    eval_batch_size: int
    clustering_at_eval: bool
    per_composition: list[CompositionRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "closed_top1": self.closed_top1,
            "open_top1": self.open_top1,
            "h_mean": self.h_mean,
            "closed_candidates": self.closed_candidates,
            "open_candidates": self.open_candidates,
            "test_images": self.test_images,
            "eval_batch_size": self.eval_batch_size,
            "clustering_at_eval": self.clustering_at_eval,
            "per_composition": [
                {"name": r.name, "images": r.images, "closed_correct": r.closed_correct,
                 "open_correct": r.open_correct}
                for r in self.per_composition
            ],
        }

    def table(self) -> str:
        lines = [
            f"closed top-1:   {self.closed_top1:.2f}%   ({self.closed_candidates} candidates)",
            f"open top-1:     {self.open_top1:.2f}%   ({self.open_candidates} candidates)",
            f"h-mean:         {self.h_mean:.2f}%",
            f"test images:    {self.test_images}   "
            f"(eval batch {self.eval_batch_size}, clustering "
            f"{'on' if self.clustering_at_eval else 'off'})",
            "",
            f"{'composition':<28}{'images':>8}{'closed':>10}{'open':>10}",
        ]
        for r in self.per_composition:
            closed_pct = 100.0 * r.closed_correct / r.images if r.images else 0.0
            open_pct = 100.0 * r.open_correct / r.images if r.images else 0.0
            lines.append(f"{r.name:<28}{r.images:>8}{closed_pct:>9.1f}%{open_pct:>9.1f}%")
        return "\n".join(lines)


def evaluate(model: ModelState, pack: FeaturePack) -> EvalReport:
    """Both metrics over the test split; exact composition match counts."""
    test_images = pack.split_images("test")
    if not test_images:
        raise DataError("evaluation needs a non-empty test split")
    closed = predict(model, pack, "closed", test_images)
    open_ = predict(model, pack, "open", test_images)

    per: dict[Composition, list[int]] = {}
    closed_hits = open_hits = 0
    for im, pc, po in zip(test_images, closed, open_):
        truth = normalize_composition(im.composition)
        row = per.setdefault(truth, [0, 0, 0])
        row[0] += 1
        if normalize_composition(pc.composition) == truth:
            closed_hits += 1
            row[1] += 1
        if normalize_composition(po.composition) == truth:
            open_hits += 1
            row[2] += 1

    n = len(test_images)
    closed_pct = 100.0 * closed_hits / n
    open_pct = 100.0 * open_hits / n
    rows = [
        CompositionRow(pack.composition_name(c), v[0], v[1], v[2])
        for c, v in sorted(per.items(), key=lambda kv: pack.composition_name(kv[0]))
    ]
    return EvalReport(
        closed_top1=closed_pct,
        open_top1=open_pct,
        h_mean=h_mean(closed_pct, open_pct),
        closed_candidates=len(candidate_compositions(pack, "closed")),
        open_candidates=len(candidate_compositions(pack, "open")),
        test_images=n,
        eval_batch_size=model.config.effective_eval_batch(),
        clustering_at_eval=model.config.clustering_at_eval,
        per_composition=rows,
    )


def _resolve_name(name: str, known: list[str], kind: str) -> int:
    try:
        return known.index(name)
    except ValueError:
        near = difflib.get_close_matches(name, known, n=3)
        hint = f"; did you mean {', '.join(near)}?" if near else ""
        raise DataError(f"unknown {kind} name {name!r}{hint}") from None


def resolve_query(pack: FeaturePack, attr_names: list[str], obj_name: str) -> Composition:
    """Name-based query to index composition; the pair may be novel."""
    if not attr_names:
        raise DataError("a query needs at least one attribute name")
    attrs = tuple(sorted({_resolve_name(a, pack.attributes, "attribute")
                          for a in attr_names}))
    obj = _resolve_name(obj_name, pack.objects, "object")
    return attrs, obj


@dataclass(frozen=True)
class RetrievalHit:
    image_id: str
    distance: float


def retrieve(
    model: ModelState,
    pack: FeaturePack,
    attr_names: list[str],
    obj_name: str,
    top_k: int = 5,
) -> list[RetrievalHit]:
    """Test images nearest to a composed query embedding, ascending."""
    if top_k < 1:
        raise ConfigError("top_k must be >= 1")
    comp = resolve_query(pack, attr_names, obj_name)
    query = _candidate_latents(model, pack, [comp])[0]
    test_images = pack.split_images("test")
    if not test_images:
        raise DataError("retrieval needs a non-empty test split")
    row_of = {im.id: i for i, im in enumerate(pack.images)}
    rows = [row_of[im.id] for im in test_images]
    latents = _clustered_latents(model, pack.visual.astype(np.float64)[rows])
    dists = np.sqrt(((latents - query[None, :]) ** 2).sum(axis=1))
    order = np.argsort(dists, kind="stable")
    return [
        RetrievalHit(test_images[int(i)].id, float(dists[int(i)]))
        for i in order[: min(top_k, len(test_images))]
    ]
