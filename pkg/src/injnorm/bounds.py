"""Closed-form bounds on (expected) injective norms, split into named terms.

Universal constants are parameters (default 1.0); every breakdown records the
value it was evaluated with.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._validation import as_tensor_array, check_positive
from .tensor_core import SliceStats, coeff_stats


@dataclass(frozen=True)
class BoundBreakdown:
    total: float
    slice_term: float
    log_term: float
    constant_C: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "total": self.total,
            "slice_term": self.slice_term,
            "log_term": self.log_term,
            "constant_C": self.constant_C,
            "extra": dict(self.extra),
        }


def _log_d(d):
    return math.log(d) if d > 1 else 0.0


def _stats(stats):
    return stats if isinstance(stats, SliceStats) else coeff_stats(stats)


def theorem_upper_bound(stats, r, d, C=1.0):
    """sqrt(2r) * sum_k sigma_k + C r^3 (ln d)^2 b_max for the Gaussian model."""
    stats = _stats(stats)
    C = check_positive(C, "C")
    slice_term = math.sqrt(2 * r) * float(np.sum(stats.sigma))
    log_term = C * r**3 * _log_d(d) ** 2 * stats.b_max
    return BoundBreakdown(slice_term + log_term, slice_term, log_term, C,
                          {"r": r, "d": d, "b_max": stats.b_max})


def remark_lower_bound(stats):
    """max_k sigma_k, a lower bound on the root mean square Gaussian norm."""
    stats = _stats(stats)
    return float(np.max(stats.sigma))


def bvh_matrix_bound(stats, d, epsilon=0.5):
    """The (1 + eps)-weighted matrix bound with a sqrt(ln d) max-entry term."""
    stats = _stats(stats)
    if len(stats.sigma) != 2:
        raise ValueError("the matrix bound needs r = 2")
    if not 0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    factor = 1.0 + epsilon
    slice_term = factor * float(stats.sigma[0] + stats.sigma[1])
    log_term = factor * 5.0 * math.sqrt(_log_d(d)) / math.sqrt(math.log1p(epsilon)) * stats.b_max
    return BoundBreakdown(slice_term + log_term, slice_term, log_term, factor,
                          {"epsilon": epsilon, "d": d, "b_max": stats.b_max})


def latala_matrix_terms(b):
    """(max row l2, max column l2, l4 norm of all entries) of a matrix b.

    The bound itself is C times their sum with C left to the caller.
    """
    arr = as_tensor_array(b)
    if arr.ndim != 2:
        raise ValueError("Latala's terms need r = 2")
    sq = arr * arr
    row = float(np.sqrt(np.max(np.sum(sq, axis=1))))
    col = float(np.sqrt(np.max(np.sum(sq, axis=0))))
    fourth = float(np.sum(sq * sq) ** 0.25)
    return row, col, fourth


def corollary_bound(variance_stats, r, d, K, C=1.0):
    """4 sqrt(r) sum_k sqrt(max sum E X^2) + C r^3 (ln d)^2 K.

    ``variance_stats`` must be the slice statistics of the per-entry standard
    deviations sqrt(E X^2), so that sigma_k**2 is the largest fiber variance.
    Use K = 1 for centered Bernoulli entries.
    """
    stats = _stats(variance_stats)
    K = check_positive(K, "K")
    C = check_positive(C, "C")
    slice_term = 4.0 * math.sqrt(r) * float(np.sum(stats.sigma))
    log_term = C * r**3 * _log_d(d) ** 2 * K
    return BoundBreakdown(slice_term + log_term, slice_term, log_term, C,
                          {"r": r, "d": d, "K": K})


def gaussian_tail_bound(scale, t):
    """min(1, 2 exp(-t^2 / (2 scale^2)))."""
    scale = check_positive(scale, "scale")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return min(1.0, 2.0 * math.exp(-(t * t) / (2.0 * scale * scale)))


def concentration_tail_bound(K, t, C=2.0, c=0.5):
    """min(1, C exp(-c t^2 / K^2)); (C, c) default to the Gaussian analogue."""
    K = check_positive(K, "K")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return min(1.0, C * math.exp(-c * t * t / (K * K)))
