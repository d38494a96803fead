"""Feature-pack files, split validation, and the synthetic generator.

A pack directory holds ``manifest.json`` plus two headerless row-major
little-endian binary32 blobs: ``visual.f32`` (one row per image) and
``embeddings.f32`` (one row per node, attributes then objects). The
format is deliberately writable from any language.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .graph import Composition

PACK_VERSION = 1
MANIFEST_NAME = "manifest.json"
VISUAL_NAME = "visual.f32"
EMBED_NAME = "embeddings.f32"
SPLITS = ("train", "val", "test")

_REQUIRED_KEYS = ("version", "visual_dim", "embed_dim", "attributes", "objects", "images")
_OPTIONAL_KEYS = ("provenance",)


@dataclass(frozen=True)
class ImageRecord:
    id: str
    attrs: tuple[int, ...]
    obj: int
    split: str

    @property
    def composition(self) -> Composition:
        return tuple(sorted(set(self.attrs))), self.obj


@dataclass
class FeaturePack:
    """In-memory dataset bundle: features, node embeddings, labels, splits."""

    attributes: list[str]
    objects: list[str]
    images: list[ImageRecord]
    visual: np.ndarray
    embeddings: np.ndarray
    provenance: str | None = None

    def __post_init__(self) -> None:
        self.visual = np.ascontiguousarray(self.visual, dtype=np.float32)
        self.embeddings = np.ascontiguousarray(self.embeddings, dtype=np.float32)
        self.validate()

    @property
    def attribute_count(self) -> int:
        return len(self.attributes)

    @property
    def object_count(self) -> int:
        return len(self.objects)

    @property
    def visual_dim(self) -> int:
        return self.visual.shape[1]

    @property
    def embed_dim(self) -> int:
        return self.embeddings.shape[1]

    @property
    def node_count(self) -> int:
        return self.attribute_count + self.object_count

    def split_images(self, split: str) -> list[ImageRecord]:
        if split not in SPLITS:
            raise DataError(f"unknown split {split!r}")
        return [im for im in self.images if im.split == split]

    def compositions(self, split: str) -> list[Composition]:
        """Distinct compositions of a split, in first-appearance order."""
        return list(dict.fromkeys(im.composition for im in self.split_images(split)))

    def composition_name(self, comp: Composition) -> str:
        attrs, obj = comp
        return "+".join(self.attributes[a] for a in attrs) + " " + self.objects[obj]

    def validate(self) -> None:
        if self.visual.ndim != 2 or self.embeddings.ndim != 2:
            raise DataError("feature blocks must be 2-d matrices")
        if self.visual.shape[0] != len(self.images):
            raise DataError(
                f"visual rows ({self.visual.shape[0]}) != image records ({len(self.images)})"
            )
        if self.embeddings.shape[0] != self.node_count:
            raise DataError(
                f"embedding rows ({self.embeddings.shape[0]}) != "
                f"attribute+object count ({self.node_count})"
            )
        if len(set(self.attributes)) != len(self.attributes):
            raise DataError("duplicate attribute names")
        if len(set(self.objects)) != len(self.objects):
            raise DataError("duplicate object names")
        if len({im.id for im in self.images}) != len(self.images):
            raise DataError("duplicate image ids")
        for im in self.images:
            if im.split not in SPLITS:
                raise DataError(f"image {im.id!r} has unknown split {im.split!r}")
            if not im.attrs:
                raise DataError(f"image {im.id!r} has no attributes")
            for a in im.attrs:
                if not (0 <= a < self.attribute_count):
                    raise DataError(f"image {im.id!r} attribute index {a} out of range")
            if not (0 <= im.obj < self.object_count):
                raise DataError(f"image {im.id!r} object index {im.obj} out of range")
        if not any(im.split == "train" for im in self.images):
            raise DataError("pack has no training images")
        overlap = set(self.compositions("train")) & set(self.compositions("test"))
        if overlap:
            names = ", ".join(sorted(self.composition_name(c) for c in overlap))
            raise DataError(f"compositions appear in both train and test splits: {names}")

    def manifest_dict(self) -> dict:
        doc = {
            "version": PACK_VERSION,
            "visual_dim": self.visual_dim,
            "embed_dim": self.embed_dim,
            "attributes": list(self.attributes),
            "objects": list(self.objects),
            "images": [
                {"id": im.id, "attrs": list(im.attrs), "obj": im.obj, "split": im.split}
                for im in self.images
            ],
        }
        if self.provenance is not None:
            doc["provenance"] = self.provenance
        return doc


def save_pack(pack: FeaturePack, path: str | Path) -> None:
    """Write the three pack files; floats go out little-endian binary32."""
    pack.validate()
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    manifest = json.dumps(pack.manifest_dict(), indent=2) + "\n"
    (out / MANIFEST_NAME).write_text(manifest, encoding="utf-8")
    (out / VISUAL_NAME).write_bytes(pack.visual.astype("<f4").tobytes(order="C"))
    (out / EMBED_NAME).write_bytes(pack.embeddings.astype("<f4").tobytes(order="C"))


def _read_blob(path: Path, rows: int, cols: int) -> np.ndarray:
    raw = path.read_bytes()
    count = len(raw) // 4
    if len(raw) % 4 or count != rows * cols:
        raise DataError(
            f"{path.name}: expected {rows * cols} binary32 values "
            f"({rows}x{cols}), file holds {len(raw)} bytes"
        )
    return np.frombuffer(raw, dtype="<f4").reshape(rows, cols).astype(np.float32)


def load_pack(path: str | Path) -> FeaturePack:
    """Read and fully validate a pack directory."""
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    for p in (manifest_path, root / VISUAL_NAME, root / EMBED_NAME):
        if not p.is_file():
            raise DataError(f"pack file missing: {p}")
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"{manifest_path.name} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise DataError(f"{manifest_path.name} must hold a JSON object")
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise DataError(f"{manifest_path.name} missing keys: {', '.join(missing)}")
    unknown = [k for k in doc if k not in _REQUIRED_KEYS and k not in _OPTIONAL_KEYS]
    if unknown:
        raise DataError(f"{manifest_path.name} has unknown keys: {', '.join(sorted(unknown))}")
    if doc["version"] != PACK_VERSION:
        raise DataError(f"unsupported pack version {doc['version']!r}, expected {PACK_VERSION}")
    attributes = list(doc["attributes"])
    objects = list(doc["objects"])
    try:
        images = [
            ImageRecord(str(r["id"]), tuple(int(a) for a in r["attrs"]), int(r["obj"]),
                        str(r["split"]))
            for r in doc["images"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed image record in {manifest_path.name}: {e}") from e
    visual = _read_blob(root / VISUAL_NAME, len(images), int(doc["visual_dim"]))
    embeddings = _read_blob(root / EMBED_NAME, len(attributes) + len(objects),
                            int(doc["embed_dim"]))
    return FeaturePack(attributes, objects, images, visual, embeddings,
                       provenance=doc.get("provenance"))


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic single-attribute benchmark generator."""

    attribute_count: int = 6
    object_count: int = 6
    seen_count: int = 20
    unseen_count: int = 8
    images_per_composition: int = 50
    visual_dim: int = 16
    embed_dim: int = 12
    noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("attribute_count", "object_count", "seen_count", "images_per_composition",
                     "visual_dim", "embed_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.unseen_count < 0:
            raise ConfigError("unseen_count must be >= 0")
        total = self.attribute_count * self.object_count
        if self.seen_count + self.unseen_count > total:
            raise ConfigError(
                f"seen_count + unseen_count = {self.seen_count + self.unseen_count} exceeds the "
                f"{self.attribute_count}x{self.object_count} composition grid ({total})"
            )
        if self.noise_std < 0.0:
            raise ConfigError("noise_std must be >= 0")


def _partition_compositions(spec: SynthSpec, rng: np.random.Generator) -> tuple[list, list]:
    """Split the grid so every attribute and object occurs in a seen pair."""
    cover_count = max(spec.attribute_count, spec.object_count)
    if spec.seen_count < cover_count:
        raise DataError(
            f"seen_count {spec.seen_count} cannot cover all {spec.attribute_count} attributes "
            f"and {spec.object_count} objects (needs >= {cover_count})"
        )
    cover = [(i % spec.attribute_count, i % spec.object_count) for i in range(cover_count)]
    cover = list(dict.fromkeys(cover))
    rest = [
        (a, o)
        for a in range(spec.attribute_count)
        for o in range(spec.object_count)
        if (a, o) not in set(cover)
    ]
    order = rng.permutation(len(rest))
    rest = [rest[i] for i in order]
    need = spec.seen_count - len(cover)
    seen = cover + rest[:need]
    unseen = rest[need:need + spec.unseen_count]
    if len(seen) != spec.seen_count or len(unseen) != spec.unseen_count:
        raise DataError("composition grid too small for the requested partition")
    return seen, unseen


def generate_synthetic(spec: SynthSpec) -> FeaturePack:
    """Deterministic compositional benchmark built from additive concepts.

    Each attribute and object gets a unit-norm concept vector; an image's
    pre-feature is the sum of its composition's concepts plus Gaussian
    noise, pushed through one fixed random linear map into visual space.
    Node embeddings are the concepts themselves under much smaller noise,
    so the linguistic pathway sees a faithful but not identical view.
    """
    root = np.random.SeedSequence(spec.seed)
    concept_rng, partition_rng, noise_rng, embed_rng, map_rng = (
        np.random.default_rng(s) for s in root.spawn(5)
    )
    n_nodes = spec.attribute_count + spec.object_count
    concepts = concept_rng.standard_normal((n_nodes, spec.embed_dim))
    concepts /= np.linalg.norm(concepts, axis=1, keepdims=True)
    seen, unseen = _partition_compositions(spec, partition_rng)
    visual_map = map_rng.standard_normal((spec.embed_dim, spec.visual_dim))
    visual_map /= np.sqrt(spec.embed_dim)

    attributes = [f"attr{{:0{len(str(spec.attribute_count - 1))}d}}".format(i)
                  for i in range(spec.attribute_count)]
    objects = [f"obj{{:0{len(str(spec.object_count - 1))}d}}".format(i)
               for i in range(spec.object_count)]

    images: list[ImageRecord] = []
    rows: list[np.ndarray] = []
    for split, comps in (("train", seen), ("test", unseen)):
        for a, o in comps:
            base = concepts[a] + concepts[spec.attribute_count + o]
            for j in range(spec.images_per_composition):
                pre = base + spec.noise_std * noise_rng.standard_normal(spec.embed_dim)
                rows.append(pre @ visual_map)
                images.append(ImageRecord(f"{split}_{attributes[a]}_{objects[o]}_{j:04d}",
                                          (a,), o, split))
    visual = np.stack(rows)
    embeddings = concepts + 0.1 * spec.noise_std * embed_rng.standard_normal(concepts.shape)
    return FeaturePack(attributes, objects, images, visual, embeddings)


def pack_stats(pack: FeaturePack) -> dict:
    """Counts and the attributes-per-image histogram, as plain data."""
    comps = {im.composition for im in pack.images}
    per_split = {s: len(pack.split_images(s)) for s in SPLITS}
    hist: dict[int, int] = {}
    for im in pack.images:
        k = len(set(im.attrs))
        hist[k] = hist.get(k, 0) + 1
    return {
        "attributes": pack.attribute_count,
        "objects": pack.object_count,
        "compositions": len(comps),
        "train_compositions": len(pack.compositions("train")),
        "test_compositions": len(pack.compositions("test")),
        "images": len(pack.images),
        "images_per_split": per_split,
        "attrs_per_image": dict(sorted(hist.items())),
        "visual_dim": pack.visual_dim,
        "embed_dim": pack.embed_dim,
    }


def format_stats(stats: dict) -> str:
    lines = [
        f"attributes:         {stats['attributes']}",
        f"objects:            {stats['objects']}",
        f"compositions:       {stats['compositions']} "
        f"(train {stats['train_compositions']}, test {stats['test_compositions']})",
        f"images:             {stats['images']}",
    ]
    for s in SPLITS:
        lines.append(f"  {s + ':':<18}{stats['images_per_split'][s]}")
    lines.append(f"visual_dim:         {stats['visual_dim']}")
    lines.append(f"embed_dim:          {stats['embed_dim']}")
    hist = ", ".join(f"{k}: {v}" for k, v in stats["attrs_per_image"].items())
    lines.append(f"attrs per image:    {hist}")
    return "\n".join(lines)
