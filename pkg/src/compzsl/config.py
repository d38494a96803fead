"""Run configuration: one dataclass, one JSON schema, strict validation.

Every run is a pure function of (config, pack), so the resolved config
is embedded in model descriptors and evaluation reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .graph import GRAPH_KINDS, GraphSpec
from .losses import POOLING_MODES, LossWeights

NORM_MODES = ("symmetric", "row")
LOSS_SETS = ("fus", "fus+tri", "fus+de", "all")

CONFIG_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    """All hyperparameters of a training or evaluation run."""

    seed: int = 0
    lr: float = 1e-4
    epochs: int = 50
    batch_size: int = 128
    latent_dim: int = 1024
    encoder_hidden: tuple[int, ...] = (1024, 2048)
    decoder_hidden: tuple[int, ...] = (2048, 1024)
    gcn_hidden: tuple[int, ...] = (1024, 2048)
    use_bias: bool = True
    leaky_slope: float = 0.2
    clustering_enabled: bool = True
    clustering_at_eval: bool = True
    cluster_temperature: bool = False
    mask_pooling: str = "sum"
    graph_kind: str = "sparse_random"
    graph_sigma: float = 1.0
    graph_threshold: float = 0.5
    graph_l1_weight: float = 1e-4
    graph_norm: str = "symmetric"
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    margin: float = 0.5
    eval_batch_size: int = 0

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.lr < 0.0:
            raise ConfigError("lr must be >= 0")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.latent_dim < 1:
            raise ConfigError("latent_dim must be >= 1")
        for name in ("encoder_hidden", "decoder_hidden", "gcn_hidden"):
            dims = getattr(self, name)
            if any(d < 1 for d in dims):
                raise ConfigError(f"{name} entries must be >= 1")
        if self.leaky_slope < 0.0 or self.leaky_slope >= 1.0:
            raise ConfigError("leaky_slope must lie in [0, 1)")
        if self.mask_pooling not in POOLING_MODES:
            raise ConfigError(f"mask_pooling must be one of {POOLING_MODES}")
        if self.graph_kind not in GRAPH_KINDS:
            raise ConfigError(f"graph_kind must be one of {GRAPH_KINDS}")
        if self.graph_norm not in NORM_MODES:
            raise ConfigError(f"graph_norm must be one of {NORM_MODES}")
        if self.graph_sigma <= 0.0:
            raise ConfigError("graph_sigma must be > 0")
        if not (0.0 <= self.graph_threshold <= 1.0):
            raise ConfigError("graph_threshold must lie in [0, 1]")
        if self.graph_l1_weight < 0.0:
            raise ConfigError("graph_l1_weight must be >= 0")
        if min(self.alpha, self.beta, self.gamma) < 0.0:
            raise ConfigError("loss weights alpha/beta/gamma must be >= 0")
        if self.alpha == self.beta == self.gamma == 0.0:
            raise ConfigError("at least one loss weight must be positive")
        if self.margin <= 0.0:
            raise ConfigError("margin must be > 0")
        if self.eval_batch_size < 0:
            raise ConfigError("eval_batch_size must be >= 0 (0 means use batch_size)")

    def graph_spec(self) -> GraphSpec:
        return GraphSpec(self.graph_kind, self.graph_sigma, self.graph_threshold,
                         self.graph_l1_weight, self.seed)

    def loss_weights(self) -> LossWeights:
        return LossWeights(self.alpha, self.beta, self.gamma, self.margin)

    def effective_eval_batch(self) -> int:
        return self.eval_batch_size if self.eval_batch_size > 0 else self.batch_size

    def with_loss_set(self, loss_set: str) -> "RunConfig":
        """Zero the weights the named ablation turns off."""
        if loss_set not in LOSS_SETS:
            raise ConfigError(f"loss set must be one of {LOSS_SETS}")
        beta = self.beta if loss_set in ("fus+tri", "all") else 0.0
        gamma = self.gamma if loss_set in ("fus+de", "all") else 0.0
        alpha = self.alpha if self.alpha > 0.0 else 1.0
        return replace(self, alpha=alpha, beta=beta, gamma=gamma)

    def with_gcn_layers(self, layers: int) -> "RunConfig":
        """Resize the linguistic pathway depth, reusing configured widths."""
        if layers < 1:
            raise ConfigError("gcn layer count must be >= 1")
        hidden = tuple(
            self.gcn_hidden[i] if i < len(self.gcn_hidden)
            else (self.gcn_hidden[-1] if self.gcn_hidden else self.latent_dim)
            for i in range(layers - 1)
        )
        return replace(self, gcn_hidden=hidden)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_TUPLE_FIELDS = ("encoder_hidden", "decoder_hidden", "gcn_hidden")
_FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def config_from_dict(doc: dict, source: str = "config") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{source} must hold a JSON object")
    unknown = [k for k in doc if k not in _FIELD_NAMES]
    if unknown:
        raise ConfigError(f"{source} has unknown keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for f in fields(RunConfig):
        if f.name not in doc:
            continue
        v = doc[f.name]
        if f.name in _TUPLE_FIELDS:
            if not isinstance(v, (list, tuple)) or not all(isinstance(x, int) for x in v):
                raise ConfigError(f"{source}: {f.name} must be a list of integers")
            kwargs[f.name] = tuple(v)
        elif f.type in ("int", int.__name__):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{source}: {f.name} must be an integer")
            kwargs[f.name] = v
        elif f.type in ("float", float.__name__):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{source}: {f.name} must be a number")
            kwargs[f.name] = float(v)
        elif f.type in ("bool", bool.__name__):
            if not isinstance(v, bool):
                raise ConfigError(f"{source}: {f.name} must be a boolean")
            kwargs[f.name] = v
        else:
            if not isinstance(v, str):
                raise ConfigError(f"{source}: {f.name} must be a string")
            kwargs[f.name] = v
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p} is not valid JSON: {e}") from e
    return config_from_dict(doc, source=str(p))


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")


def seed_streams(seed: int) -> dict[str, np.random.Generator]:
    """The run's named random streams, all children of one root seed.

    Keeping the split here means initialization, shuffling, and negative
    sampling stay independent: consuming more draws in one stream never
    shifts another, so ablations with the same seed share initializations.
    """
    children = np.random.SeedSequence(seed).spawn(4)
    names = ("init", "shuffle", "negative", "reserved")
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}
