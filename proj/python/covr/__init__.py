from ._covr import (
    DataError,
    TrainingError,
    TransportError,
    UsageError,
    alpha_ndcg_at_k,
    cov_at_k,
    covcon_loss,
    covdistil_loss,
    coverage_curve,
    coverage_score,
    fuse,
    ndcg_at_k,
    run_cli,
    softmax,
    teacher_distribution,
)

__all__ = [
    "DataError",
    "TrainingError",
    "TransportError",
    "UsageError",
    "alpha_ndcg_at_k",
    "cov_at_k",
    "covcon_loss",
    "covdistil_loss",
    "coverage_curve",
    "coverage_score",
    "fuse",
    "ndcg_at_k",
    "run_cli",
    "softmax",
    "teacher_distribution",
]
