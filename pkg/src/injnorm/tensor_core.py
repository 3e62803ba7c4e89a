"""Dense order-r coefficient tensors and their multilinear statistics.

Tensors are stored as numpy arrays of shape ``(d,) * r`` (row-major, last index
fastest). Every user-facing index, including axis numbers, is 1-based so that
``b.entry(1, 2)`` is the coefficient usually written b_{1,2}.
"""

from dataclasses import dataclass
from functools import cached_property
import string

import numpy as np

from ._validation import (
    DimensionMismatchError,
    as_tensor_array,
    check_axis,
    check_order_dim,
    check_tensor_array,
    check_vectors,
)


class TensorFormatError(ValueError):
    """Malformed coefficient-tensor JSON; ``field`` names the bad key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class CoeffTensor:
    """Immutable coefficient tensor b over [d]^r."""

    def __init__(self, array):
        array = np.array(check_tensor_array(array), dtype=np.float64, copy=True)
        array.setflags(write=False)
        self._array = array

    @classmethod
    def from_flat(cls, r, d, entries):
        r, d = check_order_dim(r, d)
        entries = np.asarray(entries, dtype=np.float64)
        if entries.shape != (d**r,):
            raise DimensionMismatchError(
                f"entries must have length d^r = {d**r}, got {entries.size}"
            )
        return cls(entries.reshape((d,) * r))

    @classmethod
    def ones(cls, r, d):
        r, d = check_order_dim(r, d)
        return cls(np.ones((d,) * r))

    @classmethod
    def zeros(cls, r, d):
        r, d = check_order_dim(r, d)
        return cls(np.zeros((d,) * r))

    @classmethod
    def from_dict(cls, data):
        """Build from ``{"r": int, "d": int, "entries": [...]}``."""
        if not isinstance(data, dict):
            raise TensorFormatError("<root>", "expected a JSON object")
        for key in ("r", "d", "entries"):
            if key not in data:
                raise TensorFormatError(key, "missing required field")
        r, d = data["r"], data["d"]
        for key, value in (("r", r), ("d", d)):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise TensorFormatError(key, f"expected a positive integer, got {value!r}")
        entries = data["entries"]
        if not isinstance(entries, list):
            raise TensorFormatError("entries", "expected a list of reals")
        if len(entries) != d**r:
            raise TensorFormatError(
                "entries", f"expected d^r = {d**r} values, got {len(entries)}"
            )
        try:
            flat = np.asarray(entries, dtype=np.float64)
        except (TypeError, ValueError):
            raise TensorFormatError("entries", "values must be real numbers") from None
        if flat.ndim != 1 or not np.all(np.isfinite(flat)):
            raise TensorFormatError("entries", "values must be finite reals")
        try:
            return cls.from_flat(r, d, flat)
        except ValueError as exc:
            raise TensorFormatError("d", str(exc)) from None

    def to_dict(self):
        return {"r": self.order, "d": self.dim, "entries": self._array.ravel().tolist()}

    @property
    def array(self):
        return self._array

    @property
    def order(self):
        return self._array.ndim

    @property
    def dim(self):
        return self._array.shape[0]

    @property
    def entries(self):
        return self._array.ravel()

    def entry(self, *index):
        """Coefficient at a 1-based index tuple."""
        if len(index) != self.order:
            raise DimensionMismatchError(
                f"index tuple must have length r = {self.order}, got {len(index)}"
            )
        for pos, i in enumerate(index, start=1):
            if not 1 <= i <= self.dim:
                raise DimensionMismatchError(
                    f"index {i} out of range [1..{self.dim}]", axis=pos
                )
        return float(self._array[tuple(i - 1 for i in index)])

    @cached_property
    def stats(self):
        return coeff_stats(self)

    def scaled(self, factor):
        return CoeffTensor(self._array * factor)

    def __eq__(self, other):
        return isinstance(other, CoeffTensor) and np.array_equal(self._array, other._array)

    def __hash__(self):
        return hash((self._array.shape, self._array.tobytes()))

    def __repr__(self):
        return f"CoeffTensor(r={self.order}, d={self.dim})"


@dataclass(frozen=True)
class DiagonalSliceMatrix:
    """Diagonal of D^(k): ``diag[i]`` is the weighted l2 mass of fiber value i."""

    k: int
    diag: np.ndarray

    def apply(self, x):
        return self.diag * np.asarray(x, dtype=np.float64)

    @property
    def sup_norm(self):
        return float(np.max(np.abs(self.diag))) if self.diag.size else 0.0

    def to_matrix(self):
        return np.diag(self.diag)


@dataclass(frozen=True)
class SliceStats:
    """sigma[k] is the largest axis-(k+1) fiber l2 norm; b_max the largest |entry|."""

    sigma: np.ndarray
    b_max: float
    frobenius: float

    def to_dict(self):
        return {
            "sigma": [float(s) for s in self.sigma],
            "b_max": float(self.b_max),
            "frobenius": float(self.frobenius),
        }


def _letters(r):
    if r > 26:
        raise ValueError("orders above 26 are not supported")
    return string.ascii_lowercase[:r]


def _sequential_contract(array, xs):
    out = array
    for x in reversed(xs):
        out = out @ x
    return out


def rank1_inner(T, xs):
    """<T, x_1 (x) ... (x) x_r> by mode contraction from the last axis."""
    arr = as_tensor_array(T)
    r, d = arr.ndim, arr.shape[0]
    xs = check_vectors(xs, r, d, ball=False)
    return float(_sequential_contract(arr, xs))


def axis_contraction(T, xs, k):
    """Vector obtained by contracting T against every x_j with j != k (k is 1-based)."""
    arr = as_tensor_array(T)
    r, d = arr.ndim, arr.shape[0]
    k0 = check_axis(k, r)
    others = [j for j in range(r) if j != k0]
    vecs = check_vectors([xs[j] for j in others], r, d, axes=[j + 1 for j in others], ball=False)
    return _contract_others(arr, dict(zip(others, vecs)), k0)


def _contract_others(arr, vec_by_axis, k0):
    out = arr
    # Contract trailing axes first; axes before k0 keep their position.
    for j in range(arr.ndim - 1, k0, -1):
        out = out @ vec_by_axis[j]
    for j in range(k0 - 1, -1, -1):
        out = np.tensordot(vec_by_axis[j], out, axes=([0], [j]))
    return out


def _weighted_squares(b2, sq_by_axis, keep):
    """Sum b^2 * prod_j x_j^2 over every axis except those in ``keep``."""
    r = b2.ndim
    letters = _letters(r)
    operands = [b2]
    terms = [letters]
    for j in range(r):
        if j in keep:
            continue
        operands.append(sq_by_axis[j])
        terms.append(letters[j])
    out = "".join(letters[j] for j in range(r) if j in keep)
    return np.einsum(",".join(terms) + "->" + out, *operands)


def tau_norm(b, xs):
    """Euclidean norm of the map (b_i <x_1,e_i1>...<x_r,e_ir>)_i."""
    arr = as_tensor_array(b)
    r, d = arr.ndim, arr.shape[0]
    xs = check_vectors(xs, r, d)
    total = _weighted_squares(arr * arr, [x * x for x in xs], keep=set())
    return float(np.sqrt(max(float(total), 0.0)))


def diag_slice_matrix(b, k, xs_minus_k):
    """D^(k) for fixed vectors on every axis but k (1-based).

    ``xs_minus_k`` holds the r-1 vectors in axis order with axis k skipped.
    """
    arr = as_tensor_array(b)
    r, d = arr.ndim, arr.shape[0]
    k0 = check_axis(k, r)
    axes = [j + 1 for j in range(r) if j != k0]
    vecs = check_vectors(xs_minus_k, r, d, axes=axes)
    sq = {}
    for a, v in zip(axes, vecs):
        sq[a - 1] = v * v
    diag = _weighted_squares(arr * arr, sq, keep={k0})
    return DiagonalSliceMatrix(k=k0 + 1, diag=np.sqrt(np.maximum(diag, 0.0)))


def fiber_norms(array, k0):
    """l2 norms of the axis-k0 fibers, indexed by the remaining r-1 indices."""
    return np.sqrt(np.sum(array * array, axis=k0))


def coeff_stats(b):
    arr = as_tensor_array(b)
    sigma = np.array([float(np.max(fiber_norms(arr, k))) for k in range(arr.ndim)])
    return SliceStats(
        sigma=sigma,
        b_max=float(np.max(np.abs(arr))),
        frobenius=float(np.sqrt(np.sum(arr * arr))),
    )


def load_tensor(path):
    from ._io import read_json

    return CoeffTensor.from_dict(read_json(path))
