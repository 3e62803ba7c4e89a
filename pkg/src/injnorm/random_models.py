"""Seeded samplers for the Gaussian, bounded and centered-Bernoulli tensor models.

Every draw comes from a generator keyed by ``(master_seed, trial_index,
stream)`` via :class:`numpy.random.SeedSequence`, so a trial's randomness does
not depend on which worker runs it or in what order.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_tensor_array, check_positive
from .tensor_core import CoeffTensor, TensorFormatError

# Stream tags keep the sample, symmetrization and estimator draws disjoint.
STREAM_SAMPLE = 0
STREAM_SYMMETRIZE = 1
STREAM_ESTIMATOR = 2

VARIANTS = ("gaussian", "bounded", "bernoulli")


@dataclass(frozen=True)
class SampleSeed:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if int(self.trial_index) < 0:
            raise ValueError("trial_index must be nonnegative")

    def generator(self, *stream):
        seq = np.random.SeedSequence([int(self.master_seed), int(self.trial_index), *stream])
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, trial_index):
        return SampleSeed(self.master_seed, trial_index)


@dataclass(frozen=True)
class ModelSpec:
    """One of the three independent-entry models.

    ``tensor`` holds b for the Gaussian model, per-entry scale factors in
    [0, 1] for the bounded model and success probabilities for Bernoulli.
    """

    variant: str
    tensor: CoeffTensor
    K: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        arr = self.tensor.array
        if self.variant == "bounded":
            check_positive(self.K, "K")
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError("bounded-model scale factors must lie in [0, 1]")
        if self.variant == "bernoulli":
            _check_probabilities(arr)
            object.__setattr__(self, "K", 1.0)

    @classmethod
    def gaussian(cls, b):
        return cls("gaussian", b)

    @classmethod
    def bounded(cls, K, shape):
        return cls("bounded", shape, float(K))

    @classmethod
    def bernoulli(cls, p):
        return cls("bernoulli", p)

    @property
    def order(self):
        return self.tensor.order

    @property
    def dim(self):
        return self.tensor.dim

    def std_tensor(self):
        """Per-entry standard deviations sqrt(E X^2) as a coefficient tensor."""
        arr = self.tensor.array
        if self.variant == "gaussian":
            return CoeffTensor(np.abs(arr))
        if self.variant == "bounded":
            return CoeffTensor(self.K * arr)
        return CoeffTensor(np.sqrt(np.maximum(arr - arr * arr, 0.0)))

    def sample(self, seed):
        if self.variant == "gaussian":
            return sample_gaussian(self.tensor, seed)
        if self.variant == "bounded":
            return sample_bounded(self.K, self.tensor, seed)
        return sample_bernoulli_centered(self.tensor, seed)

    def to_dict(self):
        out = {"variant": self.variant}
        if self.variant == "bounded":
            out["K"] = float(self.K)
        out["tensor"] = self.tensor.to_dict()
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise TensorFormatError("<root>", "expected a JSON object")
        variant = data.get("variant")
        if variant not in VARIANTS:
            raise TensorFormatError("variant", f"expected one of {VARIANTS}, got {variant!r}")
        if "tensor" not in data:
            raise TensorFormatError("tensor", "missing required field")
        tensor = CoeffTensor.from_dict(data["tensor"])
        K = data.get("K", 1.0)
        if variant == "bounded" and "K" not in data:
            raise TensorFormatError("K", "required for the bounded model")
        try:
            return cls(variant, tensor, float(K))
        except (TypeError, ValueError) as exc:
            raise TensorFormatError("K" if "K" in str(exc) else "tensor", str(exc)) from None


@dataclass(frozen=True)
class TensorSample:
    """One realization of a model; ``array`` has the coefficient tensor's shape."""

    array: np.ndarray
    spec: ModelSpec = field(default=None, compare=False, repr=False)
    seed: SampleSeed = None

    @property
    def order(self):
        return self.array.ndim

    @property
    def dim(self):
        return self.array.shape[0]

    @property
    def entries(self):
        return self.array.ravel()


def _frozen(arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _check_probabilities(arr):
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("Bernoulli probabilities must lie in [0, 1]")


def sample_gaussian(b, seed):
    arr = as_tensor_array(b)
    g = seed.generator(STREAM_SAMPLE).standard_normal(arr.shape)
    spec = ModelSpec.gaussian(b if isinstance(b, CoeffTensor) else CoeffTensor(arr))
    return TensorSample(_frozen(arr * g), spec, seed)


def sample_bernoulli_centered(p, seed):
    arr = as_tensor_array(p)
    _check_probabilities(arr)
    u = seed.generator(STREAM_SAMPLE).random(arr.shape)
    x = (u < arr).astype(np.float64) - arr
    spec = ModelSpec.bernoulli(p if isinstance(p, CoeffTensor) else CoeffTensor(arr))
    return TensorSample(_frozen(x), spec, seed)


def sample_bounded(K, shape, seed):
    K = check_positive(K, "K")
    arr = as_tensor_array(shape)
    signs = seed.generator(STREAM_SAMPLE).integers(0, 2, size=arr.shape) * 2.0 - 1.0
    spec = ModelSpec.bounded(K, shape if isinstance(shape, CoeffTensor) else CoeffTensor(arr))
    return TensorSample(_frozen(K * arr * signs), spec, seed)


def symmetrize_sample(X, seed):
    """Multiply each entry by a fresh standard Gaussian."""
    arr = as_tensor_array(X)
    g = seed.generator(STREAM_SYMMETRIZE).standard_normal(arr.shape)
    return TensorSample(_frozen(arr * g), getattr(X, "spec", None), seed)
