"""Word-embedding table in the whitespace text format: token then floats.

Multi-word names ("fountain pen") embed as the mean of their per-word
vectors. A name whose word is absent from the table is a hard error;
silent zero vectors would poison the linguistic pathway downstream.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InputError


class EmbeddingTable:
    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        self.vectors = vectors
        self.dim = dim

    def __len__(self) -> int:
        return len(self.vectors)

    def embed_name(self, name: str) -> np.ndarray:
        words = name.split()
        if not words:
            raise InputError("cannot embed an empty name")
        missing = [w for w in words if w not in self.vectors]
        if missing:
            raise InputError(
                f"no embedding for word(s) {', '.join(repr(w) for w in missing)} "
                f"in name {name!r}"
            )
        stack = np.stack([self.vectors[w] for w in words])
        return stack.mean(axis=0)

    def embed_names(self, names: list[str]) -> np.ndarray:
        return np.stack([self.embed_name(n) for n in names]).astype(np.float32)


def load_table(path: str | Path) -> EmbeddingTable:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"embedding table missing: {p}")
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        token, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise InputError(f"{p.name}:{lineno}: token {token!r} has no values")
        elif len(values) != dim:
            raise InputError(
                f"{p.name}:{lineno}: token {token!r} has {len(values)} values, "
                f"table width is {dim}"
            )
        if token in vectors:
            raise InputError(f"{p.name}:{lineno}: duplicate token {token!r}")
        try:
            vectors[token] = np.asarray([float(v) for v in values], dtype=np.float32)
        except ValueError as e:
            raise InputError(f"{p.name}:{lineno}: non-numeric value ({e})") from e
    if not vectors or dim is None:
        raise InputError(f"{p.name} holds no vectors")
    return EmbeddingTable(vectors, dim)
