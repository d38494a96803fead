"""Model assembly, the joint forward pass, and on-disk serialization.

A model is the visual pathway (encoder/decoder layers), the linguistic
pathway (GCN weights plus the adjacency, learnable for the random graph
kinds), and one ADAM state per trainable parameter. Serialization is a
descriptor file plus a raw float64 blob with a trailing checksum.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, config_from_dict, seed_streams
from .errors import DataError, DimensionError, NumericError
from .graph import Adjacency, Composition, build_graph, gcn_forward, sparsity_penalty
from .losses import (
    LossWeights,
    MaskMatrix,
    build_positive_mask,
    fusion_loss,
    sample_negative_mask,
    total_loss,
    triplet_loss,
    decoding_loss,
)
from .numerics import AdamState, Parameter, Tensor, glorot_init
from .packs import FeaturePack
from .visual import VisualPathwayConfig, visual_forward

MODEL_VERSION = 1
DESC_NAME = "model.desc"
BLOB_NAME = "model.bin"
CHECKSUM_BYTES = 8

Layer = tuple[Parameter, Parameter | None]


@dataclass
class ModelState:
    """Everything a run owns: parameters, optimizer state, config snapshot."""

    config: RunConfig
    attribute_count: int
    object_count: int
    visual_dim: int
    embed_dim: int
    encoder: list[Layer]
    decoder: list[Layer]
    gcn_weights: list[Parameter]
    adjacency: Adjacency
    adam: dict[str, AdamState] = field(default_factory=dict)

    @property
    def latent_dim(self) -> int:
        return self.config.latent_dim

    @property
    def node_count(self) -> int:
        return self.attribute_count + self.object_count

    def visual_config(self) -> VisualPathwayConfig:
        c = self.config
        return VisualPathwayConfig(
            input_dim=self.visual_dim,
            encoder_dims=(*c.encoder_hidden, c.latent_dim),
            latent_dim=c.latent_dim,
            decoder_dims=(*c.decoder_hidden, self.visual_dim),
            clustering_enabled=c.clustering_enabled,
            cluster_temperature=c.cluster_temperature,
            use_bias=c.use_bias,
        )

    def parameters(self) -> list[Parameter]:
        """Trainable parameters in a fixed, serialization-stable order."""
        out: list[Parameter] = []
        for w, b in (*self.encoder, *self.decoder):
            out.append(w)
            if b is not None:
                out.append(b)
        out.extend(self.gcn_weights)
        if self.adjacency.learnable:
            out.append(Parameter("adjacency", self.adjacency.matrix))
        return out

    def zero_grads(self) -> None:
        for p in self.parameters():
            p.zero_grad()


def _make_layers(dims: list[int], prefix: str, rng: np.random.Generator,
                 use_bias: bool) -> list[Layer]:
    layers: list[Layer] = []
    for i in range(len(dims) - 1):
        w = Parameter(f"{prefix}.{i}.weight", glorot_init(dims[i], dims[i + 1], rng))
        b = Parameter(f"{prefix}.{i}.bias", Tensor(np.zeros((1, dims[i + 1])))) if use_bias else None
        layers.append((w, b))
    return layers


def build_model(pack: FeaturePack, config: RunConfig) -> ModelState:
    """Fresh parameters for a pack, deterministic in config.seed."""
    rng = seed_streams(config.seed)["init"]
    c = config
    enc_dims = [pack.visual_dim, *c.encoder_hidden, c.latent_dim]
    dec_dims = [c.latent_dim, *c.decoder_hidden, pack.visual_dim]
    gcn_dims = [pack.embed_dim, *c.gcn_hidden, c.latent_dim]

    encoder = _make_layers(enc_dims, "encoder", rng, c.use_bias)
    decoder = _make_layers(dec_dims, "decoder", rng, c.use_bias)
    gcn_weights = [
        Parameter(f"gcn.{i}.weight", glorot_init(gcn_dims[i], gcn_dims[i + 1], rng))
        for i in range(len(gcn_dims) - 1)
    ]
    adjacency = build_graph(
        config.graph_spec(),
        pack.embeddings.astype(np.float64),
        train_compositions=pack.compositions("train"),
        attribute_count=pack.attribute_count,
    )
    model = ModelState(
        config=config,
        attribute_count=pack.attribute_count,
        object_count=pack.object_count,
        visual_dim=pack.visual_dim,
        embed_dim=pack.embed_dim,
        encoder=encoder,
        decoder=decoder,
        gcn_weights=gcn_weights,
        adjacency=adjacency,
    )
    model.adam = {p.name: AdamState.for_parameter(p, lr=config.lr)
                  for p in model.parameters()}
    return model


def node_embeddings(model: ModelState, pack: FeaturePack) -> Tensor:
    """Propagate the pack's node features through the linguistic pathway."""
    if pack.embed_dim != model.embed_dim:
        raise DimensionError(
            f"pack embed_dim {pack.embed_dim} != model embed_dim {model.embed_dim}"
        )
    if pack.node_count != model.node_count:
        raise DimensionError(
            f"pack has {pack.node_count} nodes, model was built for {model.node_count}"
        )
    z0 = Tensor(pack.embeddings.astype(np.float64))
    return gcn_forward(z0, model.adjacency, model.gcn_weights,
                       slope=model.config.leaky_slope, norm_mode=model.config.graph_norm)


def batch_visual_forward(model: ModelState, x0: Tensor,
                         apply_clustering: bool | None = None) -> tuple[Tensor, Tensor, Tensor]:
    return visual_forward(x0, model.encoder, model.decoder, model.visual_config(),
                          apply_clustering=apply_clustering)


@dataclass
class BatchLosses:
    fusion: Tensor
    triplet: Tensor
    decoding: Tensor
    sparsity: Tensor | None
    total: Tensor


def compute_batch_losses(
    model: ModelState,
    x0: Tensor,
    labels: list[Composition],
    z: Tensor,
    negative_pool: list[Composition],
    rng: np.random.Generator,
) -> BatchLosses:
    """Forward pass plus every loss term for one mini-batch.

    Component losses with zero weight are still computed when possible so
    epoch logs stay comparable across ablations; the triplet term needs a
    viable negative pool and is replaced by an exact zero otherwise.
    """
    weights: LossWeights = model.config.loss_weights()
    _, xc, xhat = batch_visual_forward(model, x0)
    y_pos = build_positive_mask(labels, model.attribute_count, model.object_count)
    fus = fusion_loss(xc, y_pos, z, model.config.mask_pooling)
    if weights.beta > 0.0:
        y_neg: MaskMatrix = sample_negative_mask(y_pos, negative_pool, rng,
                                                 model.object_count)
        tri = triplet_loss(xc, y_pos, y_neg, z, weights.margin, model.config.mask_pooling)
    else:
        tri = Tensor([[0.0]])
    de = decoding_loss(x0, xhat)
    sp = None
    if model.adjacency.learnable and model.config.graph_l1_weight > 0.0:
        sp = sparsity_penalty(model.adjacency, model.config.graph_l1_weight)
    tot = total_loss(fus, tri, de, weights, sparsity=sp)
    return BatchLosses(fus, tri, de, sp, tot)


def batch_objective(
    model: ModelState,
    pack: FeaturePack,
    x0_data: np.ndarray,
    labels: list[Composition],
    rng: np.random.Generator,
):
    """A re-evaluatable closure over the full objective for one batch.

    The negative mask is sampled once, up front, so repeated evaluations
    are deterministic; finite-difference checking depends on that.
    """
    weights = model.config.loss_weights()
    y_pos = build_positive_mask(labels, model.attribute_count, model.object_count)
    y_neg = None
    if weights.beta > 0.0:
        y_neg = sample_negative_mask(y_pos, pack.compositions("train"), rng,
                                     model.object_count)

    def loss_fn() -> Tensor:
        x0 = Tensor(x0_data)
        z = node_embeddings(model, pack)
        _, xc, xhat = batch_visual_forward(model, x0)
        fus = fusion_loss(xc, y_pos, z, model.config.mask_pooling)
        if y_neg is not None:
            tri = triplet_loss(xc, y_pos, y_neg, z, weights.margin,
                               model.config.mask_pooling)
        else:
            tri = Tensor([[0.0]])
        de = decoding_loss(x0, xhat)
        sp = None
        if model.adjacency.learnable and model.config.graph_l1_weight > 0.0:
            sp = sparsity_penalty(model.adjacency, model.config.graph_l1_weight)
        return total_loss(fus, tri, de, weights, sparsity=sp)

    return loss_fn


# --- serialization ----------------------------------------------------------

def _serialized_tensors(model: ModelState) -> list[tuple[str, Tensor, AdamState | None]]:
    """Everything the blob holds, in order: trainables then a fixed graph."""
    rows: list[tuple[str, Tensor, AdamState | None]] = []
    for p in model.parameters():
        rows.append((p.name, p.value, model.adam[p.name]))
    if not model.adjacency.learnable:
        rows.append(("adjacency", model.adjacency.matrix, None))
    return rows


def save_model(model: ModelState, path: str | Path) -> None:
    """Write model.desc (JSON) and model.bin (float64 LE + checksum)."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    entries: list[dict] = []
    chunks: list[bytes] = []
    offset = 0
    for name, value, state in _serialized_tensors(model):
        r, c = value.shape
        entries.append({
            "name": name, "rows": r, "cols": c, "offset": offset,
            "trainable": state is not None,
            "step_count": state.step_count if state is not None else 0,
        })
        chunks.append(value.data.astype("<f8").tobytes(order="C"))
        span = r * c * 8
        if state is not None:
            chunks.append(state.first_moment.data.astype("<f8").tobytes(order="C"))
            chunks.append(state.second_moment.data.astype("<f8").tobytes(order="C"))
            span *= 3
        offset += span
    payload = b"".join(chunks)
    checksum = hashlib.sha256(payload).digest()[:CHECKSUM_BYTES]
    (out / BLOB_NAME).write_bytes(payload + checksum)

    desc = {
        "version": MODEL_VERSION,
        "attribute_count": model.attribute_count,
        "object_count": model.object_count,
        "visual_dim": model.visual_dim,
        "embed_dim": model.embed_dim,
        "latent_dim": model.latent_dim,
        "graph_kind": model.adjacency.kind,
        "loss_weights": {"alpha": model.config.alpha, "beta": model.config.beta,
                         "gamma": model.config.gamma, "margin": model.config.margin},
        "seed": model.config.seed,
        "config": model.config.to_dict(),
        "parameters": entries,
    }
    (out / DESC_NAME).write_text(json.dumps(desc, indent=2) + "\n", encoding="utf-8")


def _take(blob: bytes, offset: int, rows: int, cols: int, name: str) -> np.ndarray:
    span = rows * cols * 8
    if offset + span > len(blob):
        raise DataError(f"model blob truncated reading {name!r}")
    arr = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=offset)
    return arr.reshape(rows, cols).astype(np.float64)


def load_model(path: str | Path) -> ModelState:
    """Rebuild a ModelState; every tensor round-trips bit-exactly."""
    root = Path(path)
    desc_path, blob_path = root / DESC_NAME, root / BLOB_NAME
    for p in (desc_path, blob_path):
        if not p.is_file():
            raise DataError(f"model file missing: {p}")
    try:
        desc = json.loads(desc_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"{desc_path.name} is not valid JSON: {e}") from e
    if desc.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version {desc.get('version')!r}")
    config = config_from_dict(desc["config"], source=DESC_NAME)

    raw = blob_path.read_bytes()
    if len(raw) < CHECKSUM_BYTES:
        raise DataError("model blob shorter than its checksum")
    payload, stored = raw[:-CHECKSUM_BYTES], raw[-CHECKSUM_BYTES:]
    actual = hashlib.sha256(payload).digest()[:CHECKSUM_BYTES]
    if actual != stored:
        raise DataError("model blob checksum mismatch; file is corrupt")

    entries = desc["parameters"]
    expected = sum(
        (3 if e["trainable"] else 1) * e["rows"] * e["cols"] * 8 for e in entries
    )
    if expected != len(payload):
        raise DataError(
            f"model blob holds {len(payload)} bytes, descriptor declares {expected}"
        )

    params: dict[str, Parameter] = {}
    adam: dict[str, AdamState] = {}
    for e in entries:
        name, rows, cols, off = e["name"], e["rows"], e["cols"], e["offset"]
        value = _take(payload, off, rows, cols, name)
        params[name] = Parameter(name, Tensor(value))
        if e["trainable"]:
            span = rows * cols * 8
            m1 = _take(payload, off + span, rows, cols, name + ".m1")
            m2 = _take(payload, off + 2 * span, rows, cols, name + ".m2")
            adam[name] = AdamState(Tensor(m1), Tensor(m2), e["step_count"], lr=config.lr)

    def layer_list(prefix: str, dims: list[int]) -> list[Layer]:
        layers: list[Layer] = []
        for i in range(len(dims) - 1):
            w = params.get(f"{prefix}.{i}.weight")
            if w is None:
                raise DataError(f"descriptor missing parameter {prefix}.{i}.weight")
            b = params.get(f"{prefix}.{i}.bias")
            layers.append((w, b))
        return layers

    visual_dim = int(desc["visual_dim"])
    embed_dim = int(desc["embed_dim"])
    attribute_count = int(desc["attribute_count"])
    object_count = int(desc["object_count"])
    enc_dims = [visual_dim, *config.encoder_hidden, config.latent_dim]
    dec_dims = [config.latent_dim, *config.decoder_hidden, visual_dim]
    gcn_dims = [embed_dim, *config.gcn_hidden, config.latent_dim]

    encoder = layer_list("encoder", enc_dims)
    decoder = layer_list("decoder", dec_dims)
    gcn_weights = []
    for i in range(len(gcn_dims) - 1):
        w = params.get(f"gcn.{i}.weight")
        if w is None:
            raise DataError(f"descriptor missing parameter gcn.{i}.weight")
        gcn_weights.append(w)

    n = attribute_count + object_count
    adj_param = params.get("adjacency")
    if adj_param is None:
        raise DataError("descriptor missing the adjacency entry")
    adjacency = Adjacency(adj_param.value, "adjacency" in adam, config.graph_kind)

    model = ModelState(
        config=config,
        attribute_count=attribute_count,
        object_count=object_count,
        visual_dim=visual_dim,
        embed_dim=embed_dim,
        encoder=encoder,
        decoder=decoder,
        gcn_weights=gcn_weights,
        adjacency=adjacency,
    )
    model.adam = adam
    for p in model.parameters():
        if p.value.shape[0] * p.value.shape[1] == 0:
            raise NumericError(f"parameter {p.name!r} is empty")
    if adjacency.size != n:
        raise DataError(
            f"adjacency is {adjacency.size}x{adjacency.size}, "
            f"descriptor declares {n} nodes"
        )
    return model
