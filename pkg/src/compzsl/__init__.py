"""Compositional zero-shot recognition with two coupled pathways.

Visual features pass through an encoder, a self-representation
clustering step that averages each image with its batch neighbors, and
a decoder; attribute and object word embeddings pass through a graph
convolutional network whose adjacency can itself be learned. Training
pulls clustered image features toward the summed node embeddings of
their labeled composition, and inference labels an image with the
nearest candidate composition, including ones never seen in training.
"""

from .config import RunConfig, load_config, save_config
from .errors import (
    CompzslError,
    ConfigError,
    DataError,
    DeterminismError,
    DimensionError,
    NumericError,
    ToleranceError,
)
from .gradcheck import GradCheckReport, grad_check
from .graph import Adjacency, GraphSpec, build_graph, gcn_forward, normalize_adjacency
from .inference import EvalReport, Prediction, RetrievalHit, evaluate, h_mean, predict, retrieve
from .losses import (
    LossWeights,
    MaskMatrix,
    build_positive_mask,
    decoding_loss,
    fusion_loss,
    sample_negative_mask,
    total_loss,
    triplet_loss,
)
from .model import ModelState, batch_objective, build_model, load_model, save_model
from .numerics import AdamState, Parameter, Tensor, adam_step
from .packs import (
    FeaturePack,
    ImageRecord,
    SynthSpec,
    generate_synthetic,
    load_pack,
    pack_stats,
    save_pack,
)
from .train import TrainResult, train
from .visual import VisualPathwayConfig, composition_cluster, visual_forward

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "Adjacency",
    "CompzslError",
    "ConfigError",
    "DataError",
    "DeterminismError",
    "DimensionError",
    "EvalReport",
    "FeaturePack",
    "GradCheckReport",
    "GraphSpec",
    "ImageRecord",
    "LossWeights",
    "MaskMatrix",
    "ModelState",
    "NumericError",
    "Parameter",
    "Prediction",
    "RetrievalHit",
    "RunConfig",
    "SynthSpec",
    "Tensor",
    "ToleranceError",
    "TrainResult",
    "VisualPathwayConfig",
    "adam_step",
    "batch_objective",
    "build_graph",
    "build_model",
    "build_positive_mask",
    "composition_cluster",
    "decoding_loss",
    "evaluate",
    "fusion_loss",
    "gcn_forward",
    "generate_synthetic",
    "grad_check",
    "h_mean",
    "load_config",
    "load_model",
    "load_pack",
    "normalize_adjacency",
    "pack_stats",
    "predict",
    "retrieve",
    "sample_negative_mask",
    "save_config",
    "save_model",
    "save_pack",
    "total_loss",
    "train",
    "triplet_loss",
    "visual_forward",
]
