from .core import (
    Lattice,
    Marginals,
    Model,
    ScoreTable,
    best_outside,
    best_score_outside,
    constraint_lattice,
    decode,
    log_partition,
    marginals,
    path_score,
    projected_lattice,
    score_table,
    viterbi,
)
from .kernels import BACKEND_NAME

__all__ = [
    "BACKEND_NAME",
    "Lattice",
    "Marginals",
    "Model",
    "ScoreTable",
    "best_outside",
    "best_score_outside",
    "constraint_lattice",
    "decode",
    "log_partition",
    "marginals",
    "path_score",
    "projected_lattice",
    "score_table",
    "viterbi",
]
