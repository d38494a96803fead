"""The export job: labels + images + embedding table in, pack out."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .backbone import build_backbone, extract_features
from .embeddings import load_table
from .errors import InputError
from .labels import check_disjoint_splits, name_lists, parse_labels
from .packwrite import PACK_VERSION, write_pack


@dataclass(frozen=True)
class ExportJob:
    image_root: str
    labels_path: str
    embeddings_path: str
    out_dir: str
    backbone: str = "resnet18"
    weights_path: str | None = None
    seed: int = 0


def export(job: ExportJob) -> dict:
    """Run the job; returns counts for the caller to report."""
    records = parse_labels(job.labels_path)
    check_disjoint_splits(records)
    attributes, objects = name_lists(records)

    table = load_table(job.embeddings_path)
    node_embeddings = table.embed_names(attributes + objects)

    root = Path(job.image_root)
    if not root.is_dir():
        raise InputError(f"image root is not a directory: {root}")
    bb = build_backbone(job.backbone, job.weights_path, job.seed)
    visual, kept = extract_features(bb, [root / r.path for r in records])
    written = [r for r, k in zip(records, kept) if k]
    skipped = len(records) - len(written)

    attr_index = {a: i for i, a in enumerate(attributes)}
    obj_index = {o: i for i, o in enumerate(objects)}
    images = [
        {
            "id": r.path,
            "attrs": sorted(attr_index[a] for a in set(r.attrs)),
            "obj": obj_index[r.obj],
            "split": r.split,
        }
        for r in written
    ]
    manifest = {
        "version": PACK_VERSION,
        "visual_dim": bb.feature_dim,
        "embed_dim": table.dim,
        "attributes": attributes,
        "objects": objects,
        "images": images,
        "provenance": f"{bb.note}; skipped {skipped} unreadable image(s)",
    }
    write_pack(job.out_dir, manifest, visual, node_embeddings)
    return {
        "images": len(written),
        "skipped": skipped,
        "visual_dim": bb.feature_dim,
        "embed_dim": table.dim,
        "attributes": len(attributes),
        "objects": len(objects),
    }
