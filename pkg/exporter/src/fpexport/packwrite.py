"""Feature-pack directory writer.

The format contract (shared with the training engine, which only ever
meets this package through these files):

    manifest.json    version=1, dims, name lists, image records,
                     optional provenance string
    visual.f32       row-major little-endian binary32, one row per image
    embeddings.f32   same encoding, node order attributes-then-objects

The write is atomic: everything lands in a temp directory next to the
target, which is renamed into place only when complete.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import InputError

PACK_VERSION = 1


def write_pack(out_dir: str | Path, manifest: dict, visual: np.ndarray,
               embeddings: np.ndarray) -> None:
    out = Path(out_dir)
    if out.exists():
        raise InputError(f"output {out} already exists; refusing to overwrite")
    if visual.dtype != np.float32 or embeddings.dtype != np.float32:
        raise InputError("feature blocks must be float32")
    if len(manifest["images"]) != visual.shape[0]:
        raise InputError(
            f"{len(manifest['images'])} image records but {visual.shape[0]} "
            "visual rows"
        )
    n_nodes = len(manifest["attributes"]) + len(manifest["objects"])
    if embeddings.shape[0] != n_nodes:
        raise InputError(
            f"{n_nodes} nodes but {embeddings.shape[0]} embedding rows"
        )

    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.parent / f".{out.name}.tmp-{os.getpid()}"
    tmp.mkdir()
    try:
        (tmp / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        (tmp / "visual.f32").write_bytes(
            visual.astype("<f4").tobytes(order="C"))
        (tmp / "embeddings.f32").write_bytes(
            embeddings.astype("<f4").tobytes(order="C"))
        os.replace(tmp, out)
    finally:
        if tmp.exists():
            for f in tmp.iterdir():
                f.unlink()
            tmp.rmdir()
