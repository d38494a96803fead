"""Feature-pack exporter: images + labels + word vectors to pack files."""

from .backbone import BACKBONES, Backbone, build_backbone, extract_features
from .embeddings import EmbeddingTable, load_table
from .errors import ExportError, InputError, JobError
from .export import ExportJob, export
from .labels import (
    SPLITS,
    LabelRecord,
    check_disjoint_splits,
    name_lists,
    parse_labels,
)
from .packwrite import PACK_VERSION, write_pack

__version__ = "0.1.0"

__all__ = [
    "BACKBONES",
    "Backbone",
    "EmbeddingTable",
    "ExportError",
    "ExportJob",
    "InputError",
    "JobError",
    "LabelRecord",
    "PACK_VERSION",
    "SPLITS",
    "build_backbone",
    "check_disjoint_splits",
    "export",
    "extract_features",
    "load_table",
    "name_lists",
    "parse_labels",
    "write_pack",
]
