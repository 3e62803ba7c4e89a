"""Injective norms of random tensors with independent entries: bound
formulas, certified estimators, chaining tools and Monte Carlo checks."""

from .bounds import (
    BoundBreakdown,
    bvh_matrix_bound,
    concentration_tail_bound,
    corollary_bound,
    gaussian_tail_bound,
    latala_matrix_terms,
    remark_lower_bound,
    theorem_upper_bound,
)
from .experiments import (
    ExperimentReport,
    RunConfig,
    TrialRecord,
    comparison_experiment,
    run_monte_carlo,
    scaling_sweep,
)
from .inj_norm import (
    EstimateResult,
    EstimatorConfig,
    InjectiveNormEstimator,
    alt_max_estimate,
    grid_oracle,
    slice_witness_value,
    spectral_norm,
)
from .random_models import ModelSpec, SampleSeed, TensorSample, symmetrize_sample
from .tensor_core import (
    CoeffTensor,
    SliceStats,
    TensorFormatError,
    coeff_stats,
    diag_slice_matrix,
    rank1_inner,
    tau_norm,
)

__version__ = "0.1.0"
