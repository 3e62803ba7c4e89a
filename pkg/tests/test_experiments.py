import csv
import io
import math

import numpy as np
import pytest

from injnorm._io import csv_text, dumps
from injnorm.chaining_lab import FiniteMetricSpace
from injnorm.experiments import (
    RunConfig,
    comparison_experiment,
    lemma_sweep,
    perturbed_instance,
    random_metric_space,
    run_monte_carlo,
    scaling_sweep,
    ultrametric_check,
)
from injnorm.inj_norm import EstimatorConfig, grid_oracle
from injnorm.random_models import ModelSpec, SampleSeed
from injnorm.tensor_core import CoeffTensor


def gaussian_cfg(r, d, trials, seed=1, **kw):
    return RunConfig(ModelSpec.gaussian(CoeffTensor.ones(r, d)), trials, master_seed=seed, **kw)


def test_zero_model_all_true():
    rep = run_monte_carlo(RunConfig(ModelSpec.gaussian(CoeffTensor.zeros(2, 4)), 7, master_seed=2))
    assert rep.aggregates["mean_estimate"] == 0.0
    assert rep.passed


def test_half_normal_moments():
    rep = run_monte_carlo(gaussian_cfg(1, 1, 10**5, seed=3))
    assert abs(rep.aggregates["mean_estimate"] - math.sqrt(2 / math.pi)) <= 0.01
    assert abs(rep.aggregates["mean_square_estimate"] - 1.0) <= 0.02


def test_aggregates_match_records():
    rep = run_monte_carlo(gaussian_cfg(3, 4, 12))
    est = [t.norm_estimate for t in rep.trials]
    assert abs(rep.aggregates["mean_estimate"] - sum(est) / len(est)) <= 1e-12
    assert abs(rep.aggregates["mean_square_estimate"] - sum(e * e for e in est) / len(est)) <= 1e-12
    assert [t.trial_index for t in rep.trials] == list(range(12))


def test_certificate_chain_against_grid_oracle():
    for r, d in [(2, 4), (3, 3)]:
        cfg = gaussian_cfg(r, d, 6, seed=4)
        rep = run_monte_carlo(cfg)
        for rec in rep.trials:
            X = cfg.model.sample(SampleSeed(4, rec.trial_index))
            slack = np.linalg.norm(X.array) * 0.05 * math.pi * r
            assert rec.witness_value <= rec.norm_estimate + 1e-9
            assert rec.norm_estimate <= grid_oracle(X, 0.05) + slack


def test_exact_matrix_path_uses_spectral_norm():
    cfg = gaussian_cfg(2, 6, 5, exact_matrix=True)
    rep = run_monte_carlo(cfg)
    for rec in rep.trials:
        X = cfg.model.sample(SampleSeed(1, rec.trial_index))
        assert rec.norm_estimate == np.linalg.norm(X.array, 2)


def test_report_determinism_and_workers():
    cfg = gaussian_cfg(3, 4, 6, seed=9)
    a = dumps(run_monte_carlo(cfg, workers=1).to_dict())
    b = dumps(run_monte_carlo(cfg, workers=2).to_dict())
    assert a == b
    assert "wall_time" not in a


def test_non_gaussian_report_has_symmetrization_column():
    p = CoeffTensor(np.full((4, 4, 4), 0.3))
    rep = run_monte_carlo(RunConfig(ModelSpec.bernoulli(p), 8, master_seed=5))
    agg = rep.aggregates
    assert agg["symmetrization_bound"] == pytest.approx(math.sqrt(2 * math.pi) * agg["symmetrized_mean"])
    assert "corollary" not in rep.bounds and rep.bounds["upper"]["slice_term"] > 0
    assert rep.verdicts["upper_holds"]["holds"]


def test_upper_margin_is_bound_minus_mean():
    rep = run_monte_carlo(gaussian_cfg(2, 10, 5, bound_constant_C=2.0))
    margin = rep.bounds["upper"]["total"] - rep.aggregates["mean_estimate"]
    assert rep.verdicts["upper_holds"]["margin"] == pytest.approx(margin)
    assert rep.bounds["upper"]["constant_C"] == 2.0


def test_run_config_validation():
    model = ModelSpec.gaussian(CoeffTensor.ones(2, 2))
    with pytest.raises(ValueError):
        RunConfig(model, 0)
    with pytest.raises(ValueError):
        RunConfig(model, 3, tail_grid=(1.0, 0.5))
    with pytest.raises(ValueError):
        RunConfig(model, 3, tail_grid=(-1.0, 0.5))


def test_comparison_identical_processes(rng):
    space, _, cov = perturbed_instance(8, rng)
    rep = comparison_experiment(FiniteMetricSpace(np.zeros((8, 8))), cov, cov, 500, 1)
    assert abs(rep["gap"]) <= 3 * rep["gap_stderr"] + 1e-12


def test_comparison_quarter_covariance(rng):
    _, _, cov = perturbed_instance(8, rng)
    rep = comparison_experiment(FiniteMetricSpace(np.zeros((8, 8))), cov / 4, cov, 2000, 2)
    assert rep["mean_sup_Z"] == pytest.approx(rep["mean_sup_W"] / 2, rel=1e-9)
    assert rep["gap"] < 0


def test_comparison_rejects_bad_inputs(rng):
    space, covZ, covW = perturbed_instance(6, rng)
    with pytest.raises(ValueError, match="increment"):
        comparison_experiment(FiniteMetricSpace(np.zeros((6, 6))), covZ, covW, 10, 0)
    bad = covW.copy()
    bad[0, 0] = -1.0
    with pytest.raises(ValueError, match="semidefinite"):
        comparison_experiment(space, bad, covW, 10, 0)
    with pytest.raises(ValueError, match="symmetric"):
        comparison_experiment(space, covZ + np.triu(np.ones((6, 6)), 1), covW, 10, 0)


def test_comparison_psd_singular_factor(rng):
    v = rng.standard_normal((5, 1))
    cov = v @ v.T
    rep = comparison_experiment(FiniteMetricSpace(np.zeros((5, 5))), cov, cov, 50, 3)
    assert rep["gap"] == 0.0


def test_scaling_sweep_rows():
    header, rows = scaling_sweep([25, 36], [1], 300, 4)
    assert header[:3] == ["d", "r", "trials"]
    for d, r, trials, mean, ratio, bound, lower in rows:
        assert ratio == pytest.approx(mean / math.sqrt(d))
        assert 0.9 <= ratio <= 1.05
        assert lower == pytest.approx(math.sqrt(d))
        assert mean <= bound
    text = csv_text(header, rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == header and len(parsed) == 3


def test_scaling_sweep_order_three():
    _, rows = scaling_sweep([10], [3], 20, 5)
    ratio = rows[0][4]
    assert 0.95 <= ratio <= 2 * math.sqrt(6 * math.log(3))


def test_scaling_sweep_guard():
    with pytest.raises(ValueError, match="guard"):
        scaling_sweep([100], [4], 1, 0)


def test_lemma_sweep_and_ultrametric_check(rng):
    rep = lemma_sweep(100, 3)
    assert rep["holds"] and rep["tau_min_residual"] >= -1e-10
    assert ultrametric_check(random_metric_space(24, rng))["holds"]
