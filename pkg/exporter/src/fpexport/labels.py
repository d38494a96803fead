"""The label list: one tab-separated record per image.

    relative/image/path.jpg<TAB>attr1,attr2<TAB>object<TAB>split

Attribute and object names may contain spaces ("fountain pen"); fields
are tab-delimited for that reason. Blank lines and ``#`` comments are
skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import InputError

SPLITS = ("train", "val", "test")

Composition = tuple[tuple[str, ...], str]


@dataclass(frozen=True)
class LabelRecord:
    path: str
    attrs: tuple[str, ...]
    obj: str
    split: str

    @property
    def composition(self) -> Composition:
        return tuple(sorted(set(self.attrs))), self.obj


def parse_labels(path: str | Path) -> list[LabelRecord]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"labels file missing: {p}")
    records: list[LabelRecord] = []
    seen_paths: set[str] = set()
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise InputError(
                f"{p.name}:{lineno}: expected 4 tab-separated fields "
                f"(path, attrs, object, split), got {len(fields)}"
            )
        img, attr_field, obj, split = (f.strip() for f in fields)
        attrs = tuple(a.strip() for a in attr_field.split(",") if a.strip())
        if not img:
            raise InputError(f"{p.name}:{lineno}: empty image path")
        if not attrs:
            raise InputError(f"{p.name}:{lineno}: record needs at least one attribute")
        if not obj:
            raise InputError(f"{p.name}:{lineno}: empty object name")
        if split not in SPLITS:
            raise InputError(
                f"{p.name}:{lineno}: split must be one of {SPLITS}, got {split!r}"
            )
        if img in seen_paths:
            raise InputError(f"{p.name}:{lineno}: duplicate image path {img!r}")
        seen_paths.add(img)
        records.append(LabelRecord(img, attrs, obj, split))
    if not records:
        raise InputError(f"{p.name} holds no records")
    return records


def check_disjoint_splits(records: list[LabelRecord]) -> None:
    """Refuse label lists whose train and test compositions overlap."""
    train = {r.composition for r in records if r.split == "train"}
    test = {r.composition for r in records if r.split == "test"}
    overlap = sorted(train & test)
    if overlap:
        names = ", ".join(f"{'+'.join(a)} {o}" for a, o in overlap[:5])
        raise InputError(
            f"{len(overlap)} composition(s) appear in both train and test "
            f"splits: {names}"
        )


def name_lists(records: list[LabelRecord]) -> tuple[list[str], list[str]]:
    """Attribute and object names in first-appearance order."""
    attrs: dict[str, None] = {}
    objs: dict[str, None] = {}
    for r in records:
        for a in r.attrs:
            attrs.setdefault(a)
        objs.setdefault(r.obj)
    return list(attrs), list(objs)
