"""Joint clustering of nodes and time intervals of dynamic networks by exact ICL maximisation."""

from .core import (
    InteractionTensor,
    Move,
    Partition,
    Priors,
    SuffStats,
    aggregate_stream,
    apply_move,
    build_tensor,
    compute_suffstats,
    tensor_from_dense,
)
from .icl import IclValue, icl_full, log_block_likelihood, log_label_prior

__all__ = [
    "InteractionTensor",
    "Move",
    "Partition",
    "Priors",
    "SuffStats",
    "aggregate_stream",
    "apply_move",
    "build_tensor",
    "compute_suffstats",
    "tensor_from_dense",
    "IclValue",
    "icl_full",
    "log_block_likelihood",
    "log_label_prior",
]
