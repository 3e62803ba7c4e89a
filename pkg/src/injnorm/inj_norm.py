"""Injective-norm lower-bound certificates.

The estimator is multi-start alternating maximization (higher-order power
iteration). Every value it reports is attained at an explicit tuple of unit
vectors, so it never overstates the norm. Two independent checks sit beside
it: an angular-grid brute force for tiny tensors and the single-fiber witness.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_tensor_array, check_positive
from .random_models import STREAM_ESTIMATOR, SampleSeed
from .tensor_core import fiber_norms, rank1_inner

ZERO_CONTRACTION = 1e-14
MAX_SLICE_STARTS = 64


def default_num_starts(r, d):
    return 4 * r * math.ceil(math.log(d + 1))


@dataclass(frozen=True)
class EstimatorConfig:
    num_starts: int = None
    max_iterations: int = 500
    convergence_tol: float = 1e-10
    include_slice_witness_starts: bool = True

    def __post_init__(self):
        if self.num_starts is not None and (int(self.num_starts) != self.num_starts or self.num_starts < 1):
            raise ValueError("num_starts must be a positive integer")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        check_positive(self.convergence_tol, "convergence_tol")

    def starts_for(self, r, d):
        return self.num_starts if self.num_starts is not None else default_num_starts(r, d)

    def to_dict(self):
        return {
            "num_starts": self.num_starts,
            "max_iterations": self.max_iterations,
            "convergence_tol": self.convergence_tol,
            "include_slice_witness_starts": self.include_slice_witness_starts,
        }


@dataclass
class EstimateResult:
    value: float
    witness: tuple
    starts_used: int
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "value": self.value,
            "witness": [w.tolist() for w in self.witness],
            "starts_used": self.starts_used,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _random_unit(rng, d):
    v = rng.standard_normal(d)
    n = np.linalg.norm(v)
    while n < ZERO_CONTRACTION:
        v = rng.standard_normal(d)
        n = np.linalg.norm(v)
    return v / n


def _batched_contract(arr, X, k):
    """Contract ``arr`` with row s of X[j] for every j != k; returns (S, d)."""
    r = arr.ndim
    S = X[0].shape[0]
    others = [j for j in range(r) if j != k]
    if not others:
        return np.broadcast_to(arr, (S, arr.shape[0])).copy()
    j = others[-1]
    out = np.tensordot(X[j], arr, axes=([1], [j]))
    remaining = [a for a in range(r) if a != j]
    for j in reversed(others[:-1]):
        pos = remaining.index(j) + 1
        n = out.ndim
        out = np.einsum(out, list(range(n)), X[j], [0, pos], [a for a in range(n) if a != pos])
        remaining.remove(j)
    return out


def _slice_starts(arr, limit):
    """Unit tuples aligned with the ``limit`` largest fibers, largest first."""
    r, d = arr.ndim, arr.shape[0]
    cands = []
    for k in range(r):
        norms = fiber_norms(arr, k).ravel()
        cands.append(np.stack([norms, np.full(norms.shape, k), np.arange(norms.size)], axis=1))
    cands = np.concatenate(cands)
    order = np.argsort(-cands[:, 0], kind="stable")[:limit]
    starts = []
    for row in cands[order]:
        val, k, flat = row[0], int(row[1]), int(row[2])
        idx = np.unravel_index(flat, (d,) * (r - 1)) if r > 1 else ()
        xs = []
        it = iter(idx)
        for j in range(r):
            if j == k:
                xs.append(None)
            else:
                e = np.zeros(d)
                e[next(it)] = 1.0
                xs.append(e)
        fiber = arr[tuple(slice(None) if j == k else xs[j].argmax() for j in range(r))]
        xs[k] = fiber / val if val > ZERO_CONTRACTION else np.eye(d)[0]
        starts.append(xs)
    return starts


def alt_max_estimate(T, cfg=None, seed=None):
    """Best certificate over random and slice-aligned starts.

    Each sweep replaces x_k by the normalized contraction of T against the
    other vectors, which never decreases <T, x_1 (x) ... (x) x_r>.
    """
    arr = as_tensor_array(T)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor entries must be finite")
    cfg = cfg or EstimatorConfig()
    seed = seed if seed is not None else SampleSeed(0)
    r, d = arr.ndim, arr.shape[0]

    n_random = cfg.starts_for(r, d)
    gens = [seed.generator(STREAM_ESTIMATOR, s) for s in range(n_random)]
    starts = [[_random_unit(g, d) for _ in range(r)] for g in gens]
    if cfg.include_slice_witness_starts:
        sl = _slice_starts(arr, MAX_SLICE_STARTS)
        gens += [seed.generator(STREAM_ESTIMATOR, n_random + i) for i in range(len(sl))]
        starts += sl
    S = len(starts)
    X = [np.array([st[k] for st in starts]) for k in range(r)]

    obj = np.einsum("sd,sd->s", _batched_contract(arr, X, r - 1), X[r - 1])
    history = [obj.copy()]
    active = np.ones(S, dtype=bool)
    sweeps = np.zeros(S, dtype=int)
    converged = np.zeros(S, dtype=bool)

    for _ in range(cfg.max_iterations):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        Xa = [x[rows] for x in X]
        for k in range(r):
            v = _batched_contract(arr, Xa, k)
            nv = np.linalg.norm(v, axis=1)
            zero = nv < ZERO_CONTRACTION
            new = v / np.where(zero, 1.0, nv)[:, None]
            for i in np.flatnonzero(zero):
                new[i] = _random_unit(gens[rows[i]], d)
                nv[i] = 0.0
            Xa[k] = new
        for k in range(r):
            X[k][rows] = Xa[k]
        new_obj = obj.copy()
        new_obj[rows] = nv
        sweeps[rows] += 1
        done = new_obj[rows] - obj[rows] < cfg.convergence_tol
        converged[rows[done]] = True
        active[rows[done]] = False
        obj = new_obj
        history.append(obj.copy())

    values = np.array([rank1_inner(arr, [X[k][s] for k in range(r)]) for s in range(S)])
    best = int(np.argmax(values))
    return EstimateResult(
        value=float(values[best]),
        witness=tuple(X[k][best].copy() for k in range(r)),
        starts_used=S,
        iterations=int(sweeps[best]),
        converged=bool(converged[best]),
        history=[float(h[best]) for h in history[: sweeps[best] + 1]],
    )


def spectral_norm(M):
    """Exact largest singular value of a matrix (the r = 2 injective norm)."""
    return float(np.linalg.norm(np.asarray(as_tensor_array(M)), 2))


def sphere_grid(d, resolution):
    """Points of S^{d-1} on a hyperspherical-angle grid.

    Every sphere point lies within Euclidean distance resolution*pi of the grid.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]])
    h = resolution * math.pi * min(1.0, 2.0 / (d - 1))
    polar = [np.linspace(0.0, math.pi, math.ceil(math.pi / h) + 1) for _ in range(d - 2)]
    m = math.ceil(2 * math.pi / h)
    azimuth = np.arange(m) * (2 * math.pi / m)
    mesh = np.meshgrid(*polar, azimuth, indexing="ij")
    angles = [a.ravel() for a in mesh]
    pts = np.empty((angles[0].size, d))
    sin_prod = np.ones(angles[0].size)
    for i, a in enumerate(angles[:-1]):
        pts[:, i] = sin_prod * np.cos(a)
        sin_prod = sin_prod * np.sin(a)
    pts[:, d - 2] = sin_prod * np.cos(angles[-1])
    pts[:, d - 1] = sin_prod * np.sin(angles[-1])
    return pts


def grid_oracle(T, resolution):
    """Brute-force lower estimate of the injective norm for r <= 3, d <= 4.

    All but the last two vectors range over :func:`sphere_grid`; the last two
    are maximized exactly through the top singular value of the remaining
    matrix (the last vector alone when r = 1). The result is at most the true
    norm and at least the true norm minus frobenius(T) * resolution * pi * r.
    """
    arr = as_tensor_array(T)
    r, d = arr.ndim, arr.shape[0]
    if r > 3 or d > 4:
        raise ValueError(f"grid_oracle supports r <= 3 and d <= 4, got r={r}, d={d}")
    if not 0 < resolution <= 0.5:
        raise ValueError("resolution must lie in (0, 0.5]")
    if r == 1:
        return float(np.linalg.norm(arr))
    if r == 2:
        return spectral_norm(arr)
    grid = sphere_grid(d, resolution)
    mats = np.tensordot(grid, arr, axes=([1], [0]))
    return float(np.max(np.linalg.svd(mats, compute_uv=False)[:, 0]))


def slice_witness_value(T, b=None):
    """Largest single-fiber norm of T, with its 1-based axis and fixed indices.

    Fixing basis vectors on r-1 axes and aligning the last with the fiber
    gives a feasible tuple, so the value never exceeds the injective norm.
    """
    arr = as_tensor_array(T)
    if b is not None and as_tensor_array(b).shape != arr.shape:
        raise ValueError("sample and coefficient tensor shapes differ")
    best = (-1.0, 0, ())
    for k in range(arr.ndim):
        norms = fiber_norms(arr, k)
        flat = int(np.argmax(norms))
        val = float(norms.ravel()[flat])
        if val > best[0]:
            idx = np.unravel_index(flat, norms.shape) if norms.ndim else ()
            best = (val, k + 1, tuple(int(i) + 1 for i in idx))
    return best


def slice_value(T, k, index):
    """Fiber norm of T along 1-based axis k with the other indices fixed (1-based)."""
    arr = as_tensor_array(T)
    sel = list(i - 1 for i in index)
    sel.insert(k - 1, slice(None))
    return float(np.linalg.norm(arr[tuple(sel)]))


class InjectiveNormEstimator(BaseEstimator):
    """Scikit-learn style wrapper around :func:`alt_max_estimate`.

    ``fit(T)`` stores the certificate in ``norm_`` and its unit vectors in
    ``witness_``; ``score(T)`` evaluates another tensor at that witness.
    """

    def __init__(self, num_starts=None, max_iterations=500, convergence_tol=1e-10,
                 include_slice_witness_starts=True, random_state=0):
        self.num_starts = num_starts
        self.max_iterations = max_iterations
        self.convergence_tol = convergence_tol
        self.include_slice_witness_starts = include_slice_witness_starts
        self.random_state = random_state

    def fit(self, X, y=None):
        cfg = EstimatorConfig(self.num_starts, self.max_iterations,
                              self.convergence_tol, self.include_slice_witness_starts)
        res = alt_max_estimate(X, cfg, SampleSeed(int(self.random_state)))
        self.result_ = res
        self.norm_ = res.value
        self.witness_ = res.witness
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        return self

    def score(self, X, y=None):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "witness_")
        return rank1_inner(X, self.witness_)
