"""Empirical-method sparsification of points in a convex hull.

Given z = sum_s w_s s with s in [0, 1]^{d0}, averaging n i.i.d. draws from
the weights approximates sqrt(z) in sup norm to within sqrt(4 ln(4 d0) / n)
with probability at least 1/2, so a handful of redraws always succeeds.
"""

from dataclasses import dataclass
import math

import numpy as np

from .._validation import check_positive

MAX_ATTEMPTS = 64


class MaureyRetryError(RuntimeError):
    """All attempts failed; under the preconditions this has chance <= 2^-64."""


@dataclass
class SparsifyResult:
    chosen: np.ndarray
    approx: np.ndarray
    attempts: int
    n: int
    error: float


def sample_size(d0, epsilon):
    """ceil(4 ln(4 d0) / eps^2)."""
    epsilon = check_positive(epsilon, "epsilon")
    return math.ceil(4.0 * math.log(4.0 * d0) / epsilon**2)


def _check_inputs(S, weights, z):
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (S.shape[0],):
        raise ValueError("need one weight per point of S")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    if np.any(S < 0) or np.any(S > 1):
        raise ValueError("points of S must lie in [0, 1]^d0")
    zz = w @ S
    if z is not None:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != zz.shape or np.max(np.abs(z - zz)) > 1e-9:
            raise ValueError("z must equal the weighted average of S")
    else:
        z = zz
    return S, w, np.clip(z, 0.0, None)


def maurey_attempt(S, weights, z, n, epsilon, rng):
    """One draw of n points; returns (indices, sqrt(mean), sup error)."""
    chosen = rng.choice(S.shape[0], size=n, p=weights)
    counts = np.bincount(chosen, minlength=S.shape[0])
    mean = (counts / n) @ S
    approx = np.sqrt(np.clip(mean, 0.0, None))
    err = float(np.max(np.abs(approx - np.sqrt(z))))
    return chosen, approx, err


def maurey_sparsify(z, weights, S, d0, epsilon, seed):
    """Redraw until ||sqrt(mean) - sqrt(z)||_inf <= epsilon (at most 64 times).

    ``seed`` is a SampleSeed or anything :func:`numpy.random.default_rng` accepts.
    """
    epsilon = check_positive(epsilon, "epsilon")
    S, w, z = _check_inputs(S, weights, z)
    if S.shape[1] != d0:
        raise ValueError(f"points of S must have dimension d0 = {d0}")
    rng = seed.generator(11) if hasattr(seed, "generator") else np.random.default_rng(seed)
    n = sample_size(d0, epsilon)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        chosen, approx, err = maurey_attempt(S, w, z, n, epsilon, rng)
        if err <= epsilon:
            return SparsifyResult(chosen, approx, attempt, n, err)
    raise MaureyRetryError(f"no success in {MAX_ATTEMPTS} attempts; check the inputs")


def attempt_success_rate(S, weights, d0, epsilon, attempts, rng):
    """Fraction of independent single attempts meeting the epsilon target."""
    S, w, z = _check_inputs(S, weights, None)
    n = sample_size(d0, epsilon)
    wins = sum(maurey_attempt(S, w, z, n, epsilon, rng)[2] <= epsilon for _ in range(attempts))
    return wins / attempts
