"""Shared test helpers: acceptance line recording and pack builders."""

from __future__ import annotations

import numpy as np

from compzsl.packs import FeaturePack, ImageRecord

# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def make_pack(
    attribute_count: int = 2,
    object_count: int = 2,
    train: list[tuple[tuple[int, ...], int]] = (((0,), 0), ((1,), 1)),
    test: list[tuple[tuple[int, ...], int]] = (((0,), 1),),
    per_comp: int = 1,
    visual_dim: int = 4,
    embed_dim: int = 3,
    seed: int = 0,
) -> FeaturePack:
    """Hand-built pack with explicit compositions, for targeted cases."""
    rng = np.random.default_rng(seed)
    images, rows = [], []
    for split, comps in (("train", list(train)), ("test", list(test))):
        for ci, (attrs, obj) in enumerate(comps):
            for j in range(per_comp):
                images.append(ImageRecord(f"{split}_{ci}_{j}", tuple(attrs), obj, split))
                rows.append(rng.standard_normal(visual_dim))
    visual = np.stack(rows) if rows else np.zeros((0, visual_dim))
    embeddings = rng.standard_normal((attribute_count + object_count, embed_dim))
    return FeaturePack(
        [f"a{i}" for i in range(attribute_count)],
        [f"o{i}" for i in range(object_count)],
        images, visual, embeddings,
    )
