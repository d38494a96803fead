"""Pretrained-CNN feature extraction over image files.

``resnet18`` yields the canonical 512-dim penultimate features. The
``resnet18-random`` variant keeps the same architecture and
preprocessing but seeds random weights instead of loading a checkpoint;
it exists so the full pipeline can be validated on machines without the
checkpoint, and its provenance string says so. No fine-tuning, no
augmentation: the network runs in eval mode over one deterministic
center crop per image.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import models, transforms

from .errors import InputError, JobError

log = logging.getLogger("fpexport")

BACKBONES = ("resnet18", "resnet18-random")

_PREPROCESS_NOTE = "resize 256, center crop 224, imagenet normalization"


@dataclass
class Backbone:
    model: torch.nn.Module
    preprocess: transforms.Compose
    feature_dim: int
    note: str


def _canonical_preprocess() -> transforms.Compose:
    return transforms.Compose([
        transforms.Resize(256),
        transforms.CenterCrop(224),
        transforms.ToTensor(),
        transforms.Normalize(mean=[0.485, 0.456, 0.406],
                             std=[0.229, 0.224, 0.225]),
    ])


def build_backbone(identifier: str, weights_path: str | None = None,
                   seed: int = 0) -> Backbone:
    if identifier not in BACKBONES:
        raise JobError(f"unknown backbone {identifier!r}; choices: {BACKBONES}")
    if identifier == "resnet18-random":
        torch.manual_seed(seed)
        model = models.resnet18(weights=None)
        note = f"resnet18-random seed={seed} (unpretrained, pipeline validation only)"
    elif weights_path is not None:
        model = models.resnet18(weights=None)
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
        note = f"resnet18 weights={Path(weights_path).name}"
    else:
        try:
            model = models.resnet18(weights=models.ResNet18_Weights.DEFAULT)
        except Exception as e:
            raise JobError(
                "could not fetch resnet18 default weights; pass --weights with "
                f"a local checkpoint or use resnet18-random ({e})"
            ) from e
        note = "resnet18 imagenet weights"
    model.fc = torch.nn.Identity()
    model.eval()
    return Backbone(model, _canonical_preprocess(), 512,
                    f"{note}; {_PREPROCESS_NOTE}")


def extract_features(backbone: Backbone, paths: list[Path],
                     batch_size: int = 16) -> tuple[np.ndarray, list[bool]]:
    """Features for every readable image, plus a kept-flag per input.

    Unreadable files are skipped with a warning; the caller drops their
    label records and reports the count.
    """
    tensors: list[torch.Tensor] = []
    kept: list[bool] = []
    for p in paths:
        try:
            with Image.open(p) as img:
                tensors.append(backbone.preprocess(img.convert("RGB")))
            kept.append(True)
        except (OSError, ValueError) as e:
            log.warning("skipping unreadable image %s (%s)", p, e)
            kept.append(False)
    if not tensors:
        raise InputError("no readable images; nothing to export")
    out: list[np.ndarray] = []
    with torch.no_grad():
        for i in range(0, len(tensors), batch_size):
            batch = torch.stack(tensors[i:i + batch_size])
            out.append(backbone.model(batch).numpy())
    return np.concatenate(out, axis=0).astype(np.float32), kept
