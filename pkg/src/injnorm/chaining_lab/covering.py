"""Finite metric spaces, greedy epsilon-covers and a Dudley-integral estimate."""

from dataclasses import dataclass, field
import math

import numpy as np
from sklearn.base import BaseEstimator

from .._validation import check_distance_matrix, check_positive

DUDLEY_OCTAVES = 14


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Points with a symmetric, zero-diagonal distance matrix.

    Distinct points may sit at distance zero. ``labels`` are opaque payloads.
    """

    dist: np.ndarray
    labels: list = field(default=None, compare=False)

    def __post_init__(self):
        dist = np.array(check_distance_matrix(self.dist), dtype=np.float64)
        dist = 0.5 * (dist + dist.T)
        np.fill_diagonal(dist, 0.0)
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        if self.labels is not None and len(self.labels) != dist.shape[0]:
            raise ValueError("need one label per point")

    @property
    def n(self):
        return self.dist.shape[0]

    @property
    def diameter(self):
        return float(self.dist.max()) if self.n else 0.0

    @classmethod
    def from_points(cls, points, labels=None):
        from scipy.spatial.distance import cdist

        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return cls(cdist(pts, pts), labels)

    def to_dict(self):
        out = {"n": self.n, "dist": self.dist.tolist()}
        if self.labels is not None:
            out["labels"] = [_plain_label(x) for x in self.labels]
        return out

    @classmethod
    def from_dict(cls, data):
        from ..tensor_core import TensorFormatError

        if not isinstance(data, dict) or "dist" not in data:
            raise TensorFormatError("dist", "missing required field")
        dist = np.asarray(data["dist"], dtype=np.float64)
        if "n" in data and dist.shape != (data["n"], data["n"]):
            raise TensorFormatError("n", f"does not match a {dist.shape} distance matrix")
        try:
            return cls(dist, data.get("labels"))
        except ValueError as exc:
            raise TensorFormatError("dist", str(exc)) from None


def _plain_label(x):
    return x.tolist() if isinstance(x, np.ndarray) else x


def _as_dist(space):
    return space.dist if isinstance(space, FiniteMetricSpace) else FiniteMetricSpace(space).dist


def greedy_cover(dist, epsilon, max_centers=None):
    """Farthest-point greedy cover; returns (center indices, assignment).

    Seeds at the point of largest mean distance (lowest index on ties) and
    adds the point farthest from the current centers until every point is
    within epsilon, or ``max_centers`` is reached. ``assignment[i]`` is the
    position in the center list of the nearest center to point i.
    """
    n = dist.shape[0]
    if n == 0:
        return [], np.zeros(0, dtype=int)
    centers = [int(np.argmax(dist.mean(axis=1)))]
    nearest = dist[centers[0]].copy()
    owner = np.zeros(n, dtype=int)
    while True:
        far = int(np.argmax(nearest))
        if nearest[far] <= epsilon or (max_centers is not None and len(centers) >= max_centers):
            break
        centers.append(far)
        closer = dist[far] < nearest
        owner[closer] = len(centers) - 1
        nearest = np.minimum(nearest, dist[far])
    return centers, owner


def greedy_cover_number(space, epsilon):
    """Size and indices of a valid epsilon-cover (an upper bound on N(T, rho, eps))."""
    epsilon = check_positive(epsilon, "epsilon")
    centers, _ = greedy_cover(_as_dist(space), epsilon)
    return len(centers), centers


def is_cover(dist, centers, epsilon):
    if not len(centers):
        return dist.shape[0] == 0
    return bool(np.all(dist[:, centers].min(axis=1) <= epsilon))


def dyadic_grid(diameter, octaves=DUDLEY_OCTAVES):
    return [diameter / 2.0**j for j in range(octaves + 1)]


def dudley_estimate(space, eps_grid=None):
    """Upper Riemann sum of sqrt(ln N(eps)) from the diameter down the grid.

    On each interval [eps_{i+1}, eps_i] the integrand is taken at the left
    end, where the cover is largest. The default grid halves the diameter
    fourteen times. The piece below the last grid value is dropped.
    """
    dist = _as_dist(space)
    diam = float(dist.max()) if dist.size else 0.0
    if diam == 0.0:
        return 0.0
    if eps_grid is None:
        eps_grid = dyadic_grid(diam)
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise ValueError("eps_grid is empty")
    if len(grid) < 8:
        raise ValueError("eps_grid needs at least 8 points")
    if any(e <= 0 for e in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing and positive")
    grid = [diam] + [e for e in grid if e < diam]
    total = 0.0
    for hi, lo in zip(grid, grid[1:]):
        size = len(greedy_cover(dist, lo)[0])
        total += (hi - lo) * math.sqrt(math.log(size))
    return total


class GreedyCover(BaseEstimator):
    """Estimator-style epsilon-cover of a precomputed distance matrix."""

    def __init__(self, epsilon=0.5):
        self.epsilon = epsilon

    def fit(self, X, y=None):
        dist = _as_dist(X)
        epsilon = check_positive(self.epsilon, "epsilon")
        centers, owner = greedy_cover(dist, epsilon)
        self.centers_ = np.array(centers, dtype=int)
        self.n_centers_ = len(centers)
        self.labels_ = owner
        return self

    def predict(self, X):
        """Assign each row of a (n_samples, n_centers) distance block to a center."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "centers_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_centers_:
            raise ValueError("expected distances to each fitted center")
        return np.argmin(X, axis=1)
