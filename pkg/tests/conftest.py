import itertools

import numpy as np
import pytest


def brute_inner(arr, xs):
    """Sum over every index tuple of T_i * prod_k x_k[i_k]."""
    total = 0.0
    for idx in itertools.product(range(arr.shape[0]), repeat=arr.ndim):
        term = arr[idx]
        for k, i in enumerate(idx):
            term *= xs[k][i]
        total += term
    return total


def unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
