"""Input validation helpers shared by every module."""

import math

import numpy as np

MAX_ENTRIES = 10**8
UNIT_BALL_SLACK = 1e-12


class DimensionMismatchError(ValueError):
    """Raised when a vector or tensor does not match the expected shape.

    ``axis`` is the 1-based axis that failed the check, or None when the
    mismatch concerns the number of vectors rather than one of them.
    """

    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


def check_order_dim(r, d):
    if int(r) != r or r < 1:
        raise ValueError(f"order r must be a positive integer, got {r!r}")
    if int(d) != d or d < 1:
        raise ValueError(f"dim d must be a positive integer, got {d!r}")
    r, d = int(r), int(d)
    if d**r > MAX_ENTRIES:
        raise ValueError(
            f"d^r = {d}^{r} exceeds the {MAX_ENTRIES:.0e} entry memory guard"
        )
    return r, d


def check_tensor_array(array):
    """Return ``array`` as a float64 ndarray of shape (d,)*r, validated."""
    array = np.asarray(array, dtype=np.float64)
    if array.ndim < 1:
        raise ValueError("tensor must have order r >= 1")
    d = array.shape[0]
    if any(s != d for s in array.shape):
        raise DimensionMismatchError(
            f"all axes must share one dimension, got shape {array.shape}"
        )
    check_order_dim(array.ndim, d)
    if not np.all(np.isfinite(array)):
        raise ValueError("tensor entries must be finite")
    return array


def as_tensor_array(T):
    """Extract the dense ndarray from a CoeffTensor, TensorSample or array."""
    arr = getattr(T, "array", None)
    if arr is None:
        arr = check_tensor_array(T)
    return arr


def check_axis(k, r):
    """Convert a 1-based axis to 0-based after range checking."""
    if int(k) != k or not 1 <= k <= r:
        raise ValueError(f"axis k must be in [1..{r}], got {k!r}")
    return int(k) - 1


def check_vector(x, d, axis=None, ball=True):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (d,):
        where = f" for axis {axis}" if axis is not None else ""
        raise DimensionMismatchError(
            f"vector{where} must have length {d}, got shape {x.shape}", axis=axis
        )
    if ball and np.linalg.norm(x) > 1.0 + UNIT_BALL_SLACK:
        where = f" for axis {axis}" if axis is not None else ""
        raise ValueError(f"vector{where} lies outside the unit ball")
    return x


def check_vectors(xs, r, d, axes=None, ball=True):
    """Validate a tuple of vectors.

    ``axes`` lists the 1-based axis label of each vector (defaults to
    1..len(xs)) so that errors name the offending axis.
    """
    xs = list(xs)
    if axes is None:
        axes = list(range(1, r + 1))
    if len(xs) != len(axes):
        raise DimensionMismatchError(
            f"expected {len(axes)} vectors, got {len(xs)}"
        )
    return [check_vector(x, d, axis=a, ball=ball) for x, a in zip(xs, axes)]


def check_distance_matrix(dist, tol=1e-9, triangle=True):
    """Validate a (relaxed) metric given as a square matrix."""
    dist = np.asarray(dist, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {dist.shape}")
    if not np.all(np.isfinite(dist)):
        raise ValueError("distance matrix contains non-finite values")
    if np.any(dist < -tol):
        raise ValueError("distances must be nonnegative")
    if np.any(np.abs(np.diag(dist)) > tol):
        raise ValueError("distance matrix must have a zero diagonal")
    if np.any(np.abs(dist - dist.T) > tol):
        raise ValueError("distance matrix must be symmetric")
    if triangle and dist.shape[0] <= 1024:
        worst = triangle_violation(dist)
        if worst > tol:
            raise ValueError(f"triangle inequality violated by {worst:.3g}")
    return dist


def triangle_violation(dist):
    """Largest value of dist(a,c) - dist(a,b) - dist(b,c) over all triples."""
    n = dist.shape[0]
    worst = 0.0
    for b in range(n):
        via = dist[:, b][:, None] + dist[b, :][None, :]
        worst = max(worst, float(np.max(dist - via)))
    return worst


def check_positive(value, name):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite real, got {value!r}")
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return float(value)
