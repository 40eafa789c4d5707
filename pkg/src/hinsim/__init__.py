"""Meta-path guided embedding and similarity search for heterogeneous
information networks."""

from .alias import AliasTable, sample_alias
from .counting import CountTable, precompute_counts
from .evaluation import Grouping, SyntheticSpec, auc, generate_planted_hin
from .graph import HIN, EdgeType, Relation, Schema, VertexType, load_hin, parse_schema
from .metapath import (
    MetaPath,
    PathInstance,
    parse_meta_path,
    render_meta_path,
    sub_meta_path,
    validate_instance,
)
from .model import (
    GradientSet,
    ModelParameters,
    load_embeddings,
    loss_and_gradients,
    path_score_pair,
    path_score_seq,
    save_embeddings,
    score,
    sgd_apply,
)
from .sampler import SamplerState, build_sampler, sample_negative, sample_positive
from .search import SimilarityIndex, cosine, top_k
from .trainer import TrainConfig, TrainReport, schedule_lr, train

__all__ = [
    "AliasTable",
    "CountTable",
    "EdgeType",
    "GradientSet",
    "Grouping",
    "HIN",
    "MetaPath",
    "ModelParameters",
    "PathInstance",
    "Relation",
    "SamplerState",
    "Schema",
    "SimilarityIndex",
    "SyntheticSpec",
    "TrainConfig",
    "TrainReport",
    "VertexType",
    "auc",
    "build_sampler",
    "cosine",
    "generate_planted_hin",
    "load_embeddings",
    "load_hin",
    "loss_and_gradients",
    "parse_meta_path",
    "parse_schema",
    "path_score_pair",
    "path_score_seq",
    "precompute_counts",
    "render_meta_path",
    "sample_alias",
    "sample_negative",
    "sample_positive",
    "save_embeddings",
    "schedule_lr",
    "score",
    "sgd_apply",
    "sub_meta_path",
    "top_k",
    "train",
    "validate_instance",
]

__version__ = "0.1.0"
