"""Admissible partition sequences, the ultrametric they induce, and
isometric Euclidean embedding of finite metrics."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .covering import _as_dist, greedy_cover

MAX_TREE_POINTS = 4096
MAX_EMBED_POINTS = 2048
MAX_LEVELS = 64


class NotEmbeddableError(ValueError):
    """The centered Gram matrix of the metric has a clearly negative eigenvalue."""


def _relabel(labels):
    """Renumber block labels 0, 1, ... in order of first appearance."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True, axis=0)
    rank = np.empty_like(first)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.ravel()]


def level_cap(m):
    """Largest number of blocks allowed at level m (2^(2^m), level 0 has one)."""
    return 1 if m == 0 else 2 ** (2**m) if m < 6 else float("inf")


@dataclass(frozen=True)
class PartitionTree:
    """Nested partitions; ``levels[m][i]`` is the block label of point i at level m."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(np.asarray(lv, dtype=int) for lv in self.levels)
        object.__setattr__(self, "levels", levels)
        self.validate()

    @property
    def n(self):
        return self.levels[0].size

    @property
    def depth(self):
        return len(self.levels)

    def validate(self):
        if not self.levels:
            raise ValueError("a partition tree needs at least one level")
        n = self.levels[0].size
        if np.unique(self.levels[0]).size > 1:
            raise ValueError("level 0 must be the whole set")
        for m, lv in enumerate(self.levels):
            if lv.shape != (n,):
                raise ValueError(f"level {m} labels {lv.shape[0]} points, expected {n}")
            if np.unique(lv).size > level_cap(m):
                raise ValueError(f"level {m} has more than 2^(2^{m}) blocks")
            if m and np.unique(np.stack([self.levels[m - 1], lv], axis=1), axis=0).shape[0] != np.unique(lv).size:
                raise ValueError(f"level {m} does not refine level {m - 1}")

    def blocks(self, m):
        lv = self.levels[m]
        return [np.flatnonzero(lv == b).tolist() for b in np.unique(lv)]

    def to_dict(self):
        return {"levels": [self.blocks(m) for m in range(self.depth)]}

    @classmethod
    def from_dict(cls, data):
        from ..tensor_core import TensorFormatError

        if not isinstance(data, dict) or "levels" not in data:
            raise TensorFormatError("levels", "missing required field")
        levels = []
        n = sum(len(b) for b in data["levels"][0]) if data["levels"] else 0
        for m, blocks in enumerate(data["levels"]):
            lv = np.full(n, -1, dtype=int)
            for label, block in enumerate(blocks):
                lv[np.asarray(block, dtype=int)] = label
            if np.any(lv < 0) or sum(len(b) for b in blocks) != n:
                raise TensorFormatError("levels", f"level {m} is not a partition of {n} points")
            levels.append(lv)
        try:
            return cls(tuple(levels))
        except ValueError as exc:
            raise TensorFormatError("levels", str(exc)) from None


def block_diameters(dist, labels):
    """Diameter of each block, indexed by block label."""
    k = int(labels.max()) + 1 if labels.size else 0
    diam = np.zeros(k)
    for b in range(k):
        idx = np.flatnonzero(labels == b)
        if idx.size > 1:
            diam[b] = dist[np.ix_(idx, idx)].max()
    return diam


def chaining_functional(dist, tree):
    """sup_t sum_m 2^(m/2) diam(A_m(t)) for the given tree."""
    dist = _as_dist(dist)
    if tree.n != dist.shape[0]:
        raise ValueError("tree and space sizes differ")
    per_point = np.zeros(tree.n)
    for m, lv in enumerate(tree.levels):
        per_point += 2.0 ** (m / 2.0) * block_diameters(dist, lv)[lv]
    return float(per_point.max()) if per_point.size else 0.0


def build_admissible_sequence(space):
    """Nested greedy partitions at radii diam / 2^m.

    Level m intersects level m-1 with a greedy cover of at most 2^(2^(m-1))
    centers, which keeps it within the 2^(2^m) block cap. Levels are added
    until every block has zero diameter. Returns (tree, functional value),
    the latter an upper estimate of gamma_2.
    """
    dist = _as_dist(space)
    n = dist.shape[0]
    if n > MAX_TREE_POINTS:
        raise ValueError(f"at most {MAX_TREE_POINTS} points are supported, got {n}")
    levels = [np.zeros(n, dtype=int)]
    diam = float(dist.max()) if n else 0.0
    m = 0
    while n > 1 and block_diameters(dist, levels[-1]).max() > 0.0:
        m += 1
        budget = 2 ** (2 ** (m - 1)) if m <= 5 else n
        radius = diam / 2.0**m if m < MAX_LEVELS else 0.0
        _, owner = greedy_cover(dist, radius, max_centers=min(budget, n))
        levels.append(_relabel(np.stack([levels[-1], owner], axis=1)))
    tree = PartitionTree(tuple(levels))
    return tree, chaining_functional(dist, tree)


@dataclass(frozen=True)
class UltrametricResult:
    dist_hat: np.ndarray
    source: PartitionTree


def ultrametric_construct(space, tree):
    """rho_hat(t, s) = diam of the deepest block holding both t and s (0 if t = s).

    This dominates rho, satisfies the strong triangle inequality and never
    enlarges the diameter of a block of the tree.
    """
    dist = _as_dist(space)
    if tree.n != dist.shape[0]:
        raise ValueError(f"tree covers {tree.n} points, space has {dist.shape[0]}")
    hat = np.zeros_like(dist)
    for lv in tree.levels:
        same = lv[:, None] == lv[None, :]
        hat = np.where(same, block_diameters(dist, lv)[lv][:, None], hat)
    np.fill_diagonal(hat, 0.0)
    return UltrametricResult(hat, tree)


def ultrametric_violation(dist):
    """Largest dist(a,c) - max(dist(a,b), dist(b,c)) over all triples."""
    worst = 0.0
    for b in range(dist.shape[0]):
        via = np.maximum(dist[:, b][:, None], dist[b, :][None, :])
        worst = max(worst, float(np.max(dist - via)))
    return worst


def hilbert_embed(space, tol=1e-8):
    """Classical multidimensional scaling; rows reproduce the distances.

    Points at distance zero are embedded at the same location. Raises
    :class:`NotEmbeddableError` if the centered Gram matrix has an eigenvalue
    below -tol times its largest one.
    """
    dist = _as_dist(space)
    n = dist.shape[0]
    if n > MAX_EMBED_POINTS:
        raise ValueError(f"at most {MAX_EMBED_POINTS} points are supported, got {n}")
    if n == 0:
        return np.zeros((0, 0))
    rep = np.argmax(dist == 0.0, axis=1)
    uniq, inverse = np.unique(rep, return_inverse=True)
    sub = dist[np.ix_(uniq, uniq)]
    m = sub.shape[0]
    J = np.eye(m) - 1.0 / m
    gram = -0.5 * J @ (sub * sub) @ J
    vals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    top = max(float(vals.max()), 0.0)
    if vals.min() < -tol * top:
        raise NotEmbeddableError(
            f"Gram eigenvalue {vals.min():.3g} below -{tol:g} x {top:.3g}"
        )
    # tol only screens negative eigenvalues; dropping small positive ones
    # would shrink distances by up to sqrt(tol * top)
    keep = vals > 0.0
    coords = vecs[:, keep] * np.sqrt(vals[keep])
    if coords.shape[1] == 0:
        coords = np.zeros((m, 1))
    return coords[inverse.ravel()]


class AdmissiblePartition(BaseEstimator):
    """Fit an admissible sequence to a precomputed distance matrix."""

    def fit(self, X, y=None):
        self.tree_, self.functional_ = build_admissible_sequence(X)
        return self


class HilbertEmbedding(TransformerMixin, BaseEstimator):
    """Isometric embedding of a precomputed (Euclidean-embeddable) metric."""

    def __init__(self, tol=1e-8):
        self.tol = tol

    def fit(self, X, y=None):
        self.embedding_ = hilbert_embed(X, self.tol)
        self.n_components_ = self.embedding_.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "embedding_")
        dist = _as_dist(X)
        if dist.shape[0] != self.embedding_.shape[0]:
            raise ValueError("transform only supports the fitted distance matrix")
        return self.embedding_
