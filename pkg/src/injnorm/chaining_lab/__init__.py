"""Chaining machinery: fiber metrics, Maurey sparsification, covers,
admissible partitions, ultrametrics and Euclidean embeddings."""

from .covering import (
    FiniteMetricSpace,
    GreedyCover,
    dudley_estimate,
    dyadic_grid,
    greedy_cover,
    greedy_cover_number,
    is_cover,
)
from .maurey import MaureyRetryError, maurey_sparsify, sample_size
from .metrics import (
    ball_sample,
    check_diag_lipschitz,
    check_tau_lipschitz,
    eta_distance,
    eta_distance_matrix,
    eta_product,
    psi_embed,
    sqrt_gap_bound,
)
from .partitions import (
    AdmissiblePartition,
    HilbertEmbedding,
    NotEmbeddableError,
    PartitionTree,
    UltrametricResult,
    build_admissible_sequence,
    chaining_functional,
    hilbert_embed,
    ultrametric_construct,
    ultrametric_violation,
)
