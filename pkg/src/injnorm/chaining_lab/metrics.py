"""Square-root fiber embeddings, the sup-norm metrics they induce, and
residual checks for the Lipschitz relations between tau, D^(k) and eta."""

import numpy as np

from .._validation import as_tensor_array, check_axis, check_vector, check_vectors
from ..random_models import SampleSeed
from ..tensor_core import diag_slice_matrix, tau_norm


def _psi_matrix(arr, k0, X):
    """psi_k of every row of X at once; returns (n, d^(r-1))."""
    b2 = np.moveaxis(arr * arr, k0, -1).reshape(-1, arr.shape[0])
    return np.sqrt(np.maximum((X * X) @ b2.T, 0.0))


def psi_embed(b, k, x):
    """(sqrt(sum_{i_k} b^2 x_{i_k}^2)) over the off-axis tuples, row-major."""
    arr = as_tensor_array(b)
    k0 = check_axis(k, arr.ndim)
    x = check_vector(x, arr.shape[0])
    return _psi_matrix(arr, k0, x[None, :])[0]


def psi_embed_many(b, k, points):
    arr = as_tensor_array(b)
    k0 = check_axis(k, arr.ndim)
    return _psi_matrix(arr, k0, np.atleast_2d(np.asarray(points, dtype=np.float64)))


def eta_distance(b, k, x, y):
    return float(np.max(np.abs(psi_embed(b, k, x) - psi_embed(b, k, y))))


def eta_product(b, xs, ys):
    """Sum over axes of eta^(k)(x_k, y_k), the metric on tuples of ball points."""
    arr = as_tensor_array(b)
    r, d = arr.ndim, arr.shape[0]
    xs = check_vectors(xs, r, d)
    ys = check_vectors(ys, r, d)
    return sum(eta_distance(arr, k + 1, xs[k], ys[k]) for k in range(r))


def check_tau_lipschitz(b, xs, ys):
    """sum_k eta^(k)(x_k, y_k) - (tau_norm(xs) - tau_norm(ys)); never negative."""
    arr = as_tensor_array(b)
    if all(np.array_equal(x, y) for x, y in zip(xs, ys)):
        return 0.0
    return eta_product(arr, xs, ys) - (tau_norm(arr, xs) - tau_norm(arr, ys))


def check_diag_lipschitz(b, k, xs_minus_k, ys_minus_k):
    """sum_{j != k} eta^(j)(x_j, y_j) - ||D^(k)(xs) - D^(k)(ys)||_inf."""
    arr = as_tensor_array(b)
    r = arr.ndim
    k0 = check_axis(k, r)
    if all(np.array_equal(x, y) for x, y in zip(xs_minus_k, ys_minus_k)):
        return 0.0
    axes = [j for j in range(r) if j != k0]
    eta_sum = sum(
        eta_distance(arr, j + 1, x, y) for j, x, y in zip(axes, xs_minus_k, ys_minus_k)
    )
    Dx = diag_slice_matrix(arr, k, xs_minus_k).diag
    Dy = diag_slice_matrix(arr, k, ys_minus_k).diag
    return eta_sum - float(np.max(np.abs(Dx - Dy)))


def sqrt_gap_bound(alpha, beta, t0):
    """Whether |sqrt(a) - sqrt(b)| >= t0 implies |a - b| >= max(t0 sqrt(b), t0^2).

    Vacuously true when the premise fails. The conclusion is compared with a
    1e-12 relative slack so that rounding at exact equality does not count.
    """
    if alpha < 0 or beta < 0 or t0 < 0:
        raise ValueError("alpha, beta and t0 must be nonnegative")
    if abs(np.sqrt(alpha) - np.sqrt(beta)) < t0:
        return True
    rhs = max(t0 * np.sqrt(beta), t0 * t0)
    return bool(abs(alpha - beta) >= rhs - 1e-12 * max(1.0, rhs))


def random_ball_point(rng, d, on_sphere=False):
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    if on_sphere:
        return v
    return v * rng.random() ** (1.0 / d)


def ball_sample(d, n_random, seed, stream=7, include_basis=True):
    """Finite stand-in for B_2^d: seeded unit vectors, plus +-e_i and 0."""
    rng = seed.generator(stream) if isinstance(seed, SampleSeed) else np.random.default_rng(seed)
    pts = [random_ball_point(rng, d, on_sphere=True) for _ in range(n_random)]
    if include_basis:
        eye = np.eye(d)
        pts.extend(eye)
        pts.extend(-eye)
        pts.append(np.zeros(d))
    return np.array(pts).reshape(-1, d)


def eta_distance_matrix(b, k, points):
    """Pairwise eta^(k) distances of ``points`` (rows)."""
    from scipy.spatial.distance import cdist

    psi = psi_embed_many(b, k, points)
    return cdist(psi, psi, metric="chebyshev")
