import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import unit
from injnorm.chaining_lab import (
    check_diag_lipschitz,
    check_tau_lipschitz,
    eta_distance,
    eta_product,
    psi_embed,
    sqrt_gap_bound,
)
from injnorm.chaining_lab.metrics import ball_sample, eta_distance_matrix, random_ball_point

B = np.array([[3.0, 4.0], [0.0, 5.0]])
E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def brute_psi(b, k, x):
    """psi_k by explicit loops over off-axis tuples in row-major order."""
    r, d = b.ndim, b.shape[0]
    out = []
    for off in itertools.product(range(d), repeat=r - 1):
        s = 0.0
        for i in range(d):
            idx = off[: k - 1] + (i,) + off[k - 1:]
            s += b[idx] ** 2 * x[i] ** 2
        out.append(math.sqrt(s))
    return np.array(out)


def test_psi_examples(rng):
    x = unit(rng, 3)
    assert np.allclose(psi_embed(np.ones((3, 3)), 1, x), 1.0)
    assert np.all(psi_embed(np.ones((3, 3)), 2, np.zeros(3)) == 0)
    assert np.allclose(psi_embed(B, 1, E1), [3.0, 4.0])


def test_psi_brute_force(rng):
    for r in (1, 2, 3):
        for k in range(1, r + 1):
            b = rng.standard_normal((3,) * r)
            x = unit(rng, 3) * 0.8
            assert np.allclose(psi_embed(b, k, x), brute_psi(b, k, x), atol=1e-12)


def test_eta_examples():
    assert eta_distance(B, 1, E1, E1) == 0.0
    assert eta_distance(np.ones((2, 2)), 1, E1, np.zeros(2)) == pytest.approx(1.0)
    assert eta_distance(B, 1, E1, E2) == pytest.approx(3.0)


def test_eta_constant_tensor_is_norm_gap(rng):
    x, y = random_ball_point(rng, 4), random_ball_point(rng, 4)
    assert eta_distance(np.ones((4, 4, 4)), 2, x, y) == pytest.approx(
        abs(np.linalg.norm(x) - np.linalg.norm(y)))


def test_eta_is_metric_and_lipschitz(rng):
    b = rng.standard_normal((4, 4, 4))
    bmax = np.max(np.abs(b))
    for _ in range(200):
        x, y, z = (random_ball_point(rng, 4) for _ in range(3))
        k = int(rng.integers(1, 4))
        dxy, dyx = eta_distance(b, k, x, y), eta_distance(b, k, y, x)
        assert abs(dxy - dyx) <= 1e-9
        assert eta_distance(b, k, x, x) == 0.0
        assert dxy <= eta_distance(b, k, x, z) + eta_distance(b, k, z, y) + 1e-9
        assert dxy <= bmax * np.linalg.norm(x - y) + 1e-10


def test_eta_product_sums_axes(rng):
    b = rng.standard_normal((3, 3))
    xs = [random_ball_point(rng, 3) for _ in range(2)]
    ys = [random_ball_point(rng, 3) for _ in range(2)]
    assert eta_product(b, xs, ys) == pytest.approx(
        eta_distance(b, 1, xs[0], ys[0]) + eta_distance(b, 2, xs[1], ys[1]))


def test_lipschitz_residual_examples(rng):
    xs = [random_ball_point(rng, 3) for _ in range(3)]
    ys = [random_ball_point(rng, 3) for _ in range(3)]
    b = rng.standard_normal((3, 3, 3))
    assert check_tau_lipschitz(b, xs, xs) == 0.0
    assert check_tau_lipschitz(np.zeros((3, 3, 3)), xs, ys) == 0.0
    assert check_diag_lipschitz(b, 2, xs[:2], xs[:2]) == 0.0
    assert check_diag_lipschitz(np.zeros((3, 3, 3)), 2, xs[:2], ys[:2]) == 0.0


def test_lipschitz_sweeps(rng):
    tau_min = diag_min = math.inf
    for _ in range(500):
        r, d = int(rng.integers(1, 4)), int(rng.integers(1, 6))
        b = rng.standard_normal((d,) * r)
        xs = [random_ball_point(rng, d) for _ in range(r)]
        ys = [random_ball_point(rng, d) for _ in range(r)]
        tau_min = min(tau_min, check_tau_lipschitz(b, xs, ys))
        b3 = rng.standard_normal((d,) * 3)
        k = int(rng.integers(1, 4))
        zs = [random_ball_point(rng, d) for _ in range(3)]
        ws = [random_ball_point(rng, d) for _ in range(3)]
        diag_min = min(diag_min, check_diag_lipschitz(b3, k, zs[: k - 1] + zs[k:], ws[: k - 1] + ws[k:]))
    assert tau_min >= -1e-10
    assert diag_min >= -1e-10


def test_sqrt_gap_examples():
    assert sqrt_gap_bound(4, 1, 1) is True
    assert sqrt_gap_bound(2.5, 2.5, 0.7) is True
    with pytest.raises(ValueError):
        sqrt_gap_bound(-1, 1, 1)


def test_sqrt_gap_grid():
    grid = np.round(np.arange(101) * 0.1, 10)
    ts = np.round(np.arange(31) * 0.1, 10)
    assert all(sqrt_gap_bound(a, b, t) for a in grid for b in grid for t in ts)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 10))
def test_sqrt_gap_property(a, b, t):
    assert sqrt_gap_bound(a, b, t)


def test_ball_sample_contents():
    pts = ball_sample(3, 5, 11)
    assert pts.shape == (5 + 6 + 1, 3)
    assert np.all(np.linalg.norm(pts, axis=1) <= 1 + 1e-12)
    assert np.array_equal(pts, ball_sample(3, 5, 11))


def test_eta_distance_matrix_matches_pairwise(rng):
    b = rng.standard_normal((3, 3))
    pts = ball_sample(3, 6, 2)
    D = eta_distance_matrix(b, 2, pts)
    for i, j in [(0, 1), (3, 7), (5, 11)]:
        assert D[i, j] == pytest.approx(eta_distance(b, 2, pts[i], pts[j]))
