"""Monte Carlo verification of the norm bounds and of the Gaussian comparison
inequality with a chaining correction.

Trials are independent given ``(master_seed, trial_index)``; results are
folded in trial order, so reports do not depend on the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import time

import numpy as np

from .bounds import (
    bvh_matrix_bound,
    concentration_tail_bound,
    corollary_bound,
    gaussian_tail_bound,
    remark_lower_bound,
    theorem_upper_bound,
)
from .chaining_lab.covering import FiniteMetricSpace, dudley_estimate
from .chaining_lab.metrics import (
    check_diag_lipschitz,
    check_tau_lipschitz,
    random_ball_point,
    sqrt_gap_bound,
)
from .chaining_lab.partitions import (
    block_diameters,
    build_admissible_sequence,
    chaining_functional,
    hilbert_embed,
    ultrametric_construct,
    ultrametric_violation,
)
from .inj_norm import EstimatorConfig, alt_max_estimate, slice_value, slice_witness_value, spectral_norm
from .random_models import ModelSpec, SampleSeed, symmetrize_sample
from .tensor_core import CoeffTensor

log = logging.getLogger(__name__)

SWEEP_GUARD = 10**7
CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    trials: int
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    master_seed: int = 0
    bound_constant_C: float = 1.0
    tail_grid: tuple = (0.5, 1.0, 2.0, 3.0)
    exact_matrix: bool = False
    symmetrization: bool = True
    tail_constants: tuple = (2.0, 0.5)

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        grid = tuple(float(t) for t in self.tail_grid)
        if any(t < 0 for t in grid) or any(a >= b for a, b in zip(grid, grid[1:])):
            raise ValueError("tail_grid must be nonnegative and increasing")
        object.__setattr__(self, "tail_grid", grid)

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "trials": self.trials,
            "estimator": self.estimator.to_dict(),
            "master_seed": self.master_seed,
            "bound_constant_C": self.bound_constant_C,
            "tail_grid": list(self.tail_grid),
            "exact_matrix": self.exact_matrix,
            "symmetrization": self.symmetrization,
            "tail_constants": list(self.tail_constants),
        }


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    norm_estimate: float
    witness_value: float
    remark_slice_value: float
    symmetrized_estimate: float = None
    wall_time: float = 0.0

    def to_dict(self, include_timing=False):
        out = {
            "trial_index": self.trial_index,
            "norm_estimate": self.norm_estimate,
            "witness_value": self.witness_value,
            "remark_slice_value": self.remark_slice_value,
        }
        if self.symmetrized_estimate is not None:
            out["symmetrized_estimate"] = self.symmetrized_estimate
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


@dataclass
class ExperimentReport:
    config: dict
    trials: list
    aggregates: dict
    bounds: dict
    verdicts: dict

    @property
    def passed(self):
        return all(v["holds"] for v in self.verdicts.values())

    def to_dict(self, include_timing=False):
        return {
            "config": self.config,
            "trials": [t.to_dict(include_timing) for t in self.trials],
            "aggregates": self.aggregates,
            "bounds": self.bounds,
            "verdicts": self.verdicts,
        }


def _norm(X, cfg, seed):
    if X.order == 1:
        return float(np.linalg.norm(X.array))
    if cfg.exact_matrix and X.order == 2:
        return spectral_norm(X)
    return alt_max_estimate(X, cfg.estimator, seed).value


def _run_trials(cfg, indices, remark_slice):
    k, idx = remark_slice
    out = []
    for i in indices:
        start = time.perf_counter()
        seed = SampleSeed(cfg.master_seed, i)
        X = cfg.model.sample(seed)
        est = _norm(X, cfg, seed)
        sym = None
        if cfg.symmetrization and cfg.model.variant != "gaussian":
            sym = _norm(symmetrize_sample(X, seed), cfg, seed)
        out.append(TrialRecord(
            trial_index=i,
            norm_estimate=est,
            witness_value=slice_witness_value(X)[0],
            remark_slice_value=slice_value(X, k, idx),
            symmetrized_estimate=sym,
            wall_time=time.perf_counter() - start,
        ))
    return out


def _map_trials(cfg, remark_slice, workers):
    indices = list(range(cfg.trials))
    if workers is None or workers <= 1 or cfg.trials < 2:
        return _run_trials(cfg, indices, remark_slice)
    chunks = [indices[w::workers] for w in range(workers) if indices[w::workers]]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = pool.map(_run_trials, [cfg] * len(chunks), chunks, [remark_slice] * len(chunks))
        records = [rec for part in parts for rec in part]
    return sorted(records, key=lambda rec: rec.trial_index)


def _tail_bound(cfg, scale, t):
    if scale == 0.0:
        return 1.0 if t == 0 else 0.0
    if cfg.model.variant == "gaussian":
        return gaussian_tail_bound(scale, t)
    C, c = cfg.tail_constants
    return concentration_tail_bound(scale, t, C, c)


def model_bounds(model, C=1.0):
    """Upper and lower bound breakdowns appropriate to the model variant."""
    r, d = model.order, model.dim
    std = model.std_tensor()
    out = {"remark_lower_bound": remark_lower_bound(std.stats)}
    if model.variant == "gaussian":
        out["upper"] = theorem_upper_bound(model.tensor.stats, r, d, C).to_dict()
        if r == 2:
            out["bvh_matrix"] = bvh_matrix_bound(model.tensor.stats, d, 0.5).to_dict()
    else:
        out["upper"] = corollary_bound(std.stats, r, d, model.K, C).to_dict()
    return out


def run_monte_carlo(cfg, workers=1):
    """Sample, certify and aggregate ``cfg.trials`` realizations."""
    model = cfg.model
    std = model.std_tensor()
    _, k_star, idx_star = slice_witness_value(std)
    records = _map_trials(cfg, (k_star, idx_star), workers)

    est = np.array([r.norm_estimate for r in records])
    wit = np.array([r.witness_value for r in records])
    rem = np.array([r.remark_slice_value for r in records])
    n = est.size
    mean = float(np.mean(est))
    aggregates = {
        "mean_estimate": mean,
        "mean_square_estimate": float(np.mean(est * est)),
        "rms_estimate": float(np.sqrt(np.mean(est * est))),
        "std_estimate": float(np.std(est, ddof=1)) if n > 1 else 0.0,
        "witness_rms": float(np.sqrt(np.mean(wit * wit))),
        "remark_slice_rms": float(np.sqrt(np.mean(rem * rem))),
    }
    if records[0].symmetrized_estimate is not None:
        sym = np.array([r.symmetrized_estimate for r in records])
        aggregates["symmetrized_mean"] = float(np.mean(sym))
        aggregates["symmetrization_bound"] = math.sqrt(2 * math.pi) * float(np.mean(sym))

    bounds = model_bounds(model, cfg.bound_constant_C)
    lower = bounds["remark_lower_bound"]
    aggregates["remark_ratio"] = aggregates["remark_slice_rms"] / lower if lower > 0 else 1.0

    scale = model.tensor.stats.b_max if model.variant == "gaussian" else model.K
    if model.variant != "gaussian" and std.stats.b_max == 0.0:
        scale = 0.0
    tails = []
    for t in cfg.tail_grid:
        freq = float(np.mean(np.abs(est - mean) >= t))
        se = math.sqrt(freq * (1 - freq) / n)
        bound = _tail_bound(cfg, scale, t)
        tails.append({"t": t, "frequency": freq, "bound": bound, "stderr": se,
                      "margin": bound + 3 * se - freq})
    aggregates["tails"] = tails

    upper_total = bounds["upper"]["total"]
    chain_gap = est - wit
    verdicts = {
        "upper_holds": {"holds": bool(mean <= upper_total), "margin": upper_total - mean},
        "lower_holds": {"holds": bool(np.all(chain_gap >= -CHAIN_TOL)),
                        "margin": float(np.min(chain_gap))},
        "concentration_holds": {"holds": all(t["margin"] >= 0 for t in tails),
                                "margin": min(t["margin"] for t in tails)},
    }
    log.info("mean %.6g, upper %.6g, witness chain margin %.3g", mean, upper_total,
             verdicts["lower_holds"]["margin"])
    return ExperimentReport(cfg.to_dict(), records, aggregates, bounds, verdicts)


def _factor(cov, name):
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or np.max(np.abs(cov - cov.T)) > 1e-9:
        raise ValueError(f"{name} must be a symmetric square matrix")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        if vals.min() < -1e-9 * max(1.0, vals.max()):
            raise ValueError(f"{name} is not positive semidefinite") from None
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def increment_matrix(cov):
    diag = np.diag(cov)
    return diag[:, None] + diag[None, :] - 2 * cov


def comparison_experiment(space, covZ, covW, trials, seed, C_check=10.0):
    """E sup Z - E sup W against C_check times the Dudley estimate of ``space``.

    Both processes are driven by the same standard normal draws (each through
    its own covariance factor), which leaves the two expectations unchanged
    and shrinks the noise of their difference.
    """
    space = space if isinstance(space, FiniteMetricSpace) else FiniteMetricSpace(space)
    LZ, LW = _factor(covZ, "covZ"), _factor(covW, "covW")
    if LZ.shape[0] != space.n or LW.shape[0] != space.n:
        raise ValueError("covariances and space sizes differ")
    excess = increment_matrix(np.asarray(covZ)) - increment_matrix(np.asarray(covW)) - space.dist**2
    if excess.max() > 1e-9:
        raise ValueError(f"increment condition violated by {excess.max():.3g}")
    seed = seed if isinstance(seed, SampleSeed) else SampleSeed(int(seed))
    g = seed.generator(21).standard_normal((trials, space.n))
    supZ = (g @ LZ.T).max(axis=1)
    supW = (g @ LW.T).max(axis=1)
    diff = supZ - supW
    dudley = dudley_estimate(space)
    gap = float(np.mean(diff))
    se = float(np.std(diff, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return {
        "trials": trials,
        "mean_sup_Z": float(np.mean(supZ)),
        "mean_sup_W": float(np.mean(supW)),
        "gap": gap,
        "gap_stderr": se,
        "dudley_estimate": dudley,
        "C_check": C_check,
        "allowance": C_check * dudley,
        "holds": bool(gap <= C_check * dudley),
    }


def perturbed_instance(n, rng, max_shift=0.5):
    """covW = A A^T / n, covZ = covW + diag(delta), rho(t, s) = sqrt(delta_t + delta_s)."""
    A = rng.standard_normal((n, n))
    covW = A @ A.T / n
    delta = rng.uniform(0.0, max_shift, n)
    covZ = covW + np.diag(delta)
    rho = np.sqrt(delta[:, None] + delta[None, :])
    np.fill_diagonal(rho, 0.0)
    return FiniteMetricSpace(rho), covZ, covW


SWEEP_HEADER = ["d", "r", "trials", "mean_estimate", "ratio_sqrt_d", "theorem_bound", "lower_bound"]


def scaling_sweep(d_list, r_list, trials, seed, estimator=None, workers=1):
    """Rows of (d, r, mean certificate, mean / sqrt d, bound at C = 1, sqrt d) for b = 1."""
    rows = []
    for r in r_list:
        for d in d_list:
            if d**r > SWEEP_GUARD:
                raise ValueError(f"d^r = {d}^{r} exceeds the sweep guard {SWEEP_GUARD:.0e}")
            b = CoeffTensor.ones(r, d)
            cfg = RunConfig(ModelSpec.gaussian(b), trials, estimator or EstimatorConfig(),
                            seed, exact_matrix=True)
            rep = run_monte_carlo(cfg, workers)
            mean = rep.aggregates["mean_estimate"]
            rows.append([d, r, trials, mean, mean / math.sqrt(d),
                         rep.bounds["upper"]["total"], rep.bounds["remark_lower_bound"]])
    return SWEEP_HEADER, rows


def _random_instance(rng, r_max=3, d_max=5, r_min=1):
    r = int(rng.integers(r_min, r_max + 1))
    d = int(rng.integers(1, d_max + 1))
    b = rng.standard_normal((d,) * r) * rng.random((d,) * r)
    xs = [random_ball_point(rng, d) for _ in range(r)]
    ys = [random_ball_point(rng, d) for _ in range(r)]
    return b, xs, ys


def lemma_sweep(n, seed, r_max=3, d_max=5):
    """Minimum residuals of the tau and D^(k) Lipschitz relations on seeded
    random instances, plus the square-root gap grid check."""
    seed = seed if isinstance(seed, SampleSeed) else SampleSeed(int(seed))
    rng = seed.generator(31)
    tau_min = min(check_tau_lipschitz(*_random_instance(rng, r_max, d_max)) for _ in range(n))
    diag_min = math.inf
    for _ in range(n):
        b, xs, ys = _random_instance(rng, r_max, d_max, r_min=2)
        k = int(rng.integers(1, b.ndim + 1))
        diag_min = min(diag_min, check_diag_lipschitz(b, k, xs[: k - 1] + xs[k:], ys[: k - 1] + ys[k:]))
    grid = np.round(np.arange(0, 101) * 0.1, 10)
    t_grid = np.round(np.arange(0, 31) * 0.1, 10)
    sqrt_ok = all(sqrt_gap_bound(a, b, t) for a in grid for b in grid for t in t_grid)
    return {
        "instances": n,
        "tau_min_residual": float(tau_min),
        "diag_min_residual": float(diag_min),
        "sqrt_gap_all_true": bool(sqrt_ok),
        "holds": bool(tau_min >= -1e-10 and diag_min >= -1e-10 and sqrt_ok),
    }


def random_metric_space(n, rng, dim=3):
    """Euclidean distances of n Gaussian points; a generic finite metric."""
    return FiniteMetricSpace.from_points(rng.standard_normal((n, dim)))


def ultrametric_check(space, tol=1e-9, iso_tol=1e-8):
    """Build the tree, its ultrametric and embedding; report each property."""
    tree, functional = build_admissible_sequence(space)
    hat = ultrametric_construct(space, tree).dist_hat
    dist = space.dist
    coords = hilbert_embed(hat)
    from scipy.spatial.distance import cdist

    iso = float(np.max(np.abs(cdist(coords, coords) - hat)))
    hat_functional = chaining_functional(hat, tree)
    block_ok = all(
        np.all(block_diameters(hat, lv) <= block_diameters(dist, lv) + tol) for lv in tree.levels
    )
    out = {
        "n": space.n,
        "levels": tree.depth,
        "functional": functional,
        "functional_hat": hat_functional,
        "domination_gap": float(np.min(hat - dist)),
        "ultrametric_violation": ultrametric_violation(hat),
        "block_diameters_ok": bool(block_ok),
        "isometry_error": iso,
    }
    out["holds"] = bool(
        out["domination_gap"] >= 0.0
        and out["ultrametric_violation"] <= tol
        and block_ok
        and hat_functional <= functional + tol
        and iso <= iso_tol
    )
    return out
