#!/usr/bin/env python3
"""
Tests for correlation, CHSH, covariance and Leggett-Garg estimators
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the weakbell package to the path
sys.path.insert(0, str(Path(__file__).parent))

from weakbell import estimator
from weakbell.closedform import optimal_sigma
from weakbell.errors import InvalidParameterError, PlanShapeError
from weakbell.models import LgForm, RecordSet
from weakbell.qcore import basis_state
from weakbell.schedule import chsh_sequential_plan, lg_plan, run_ensemble

LABELS = ["A1", "B1", "A2", "B2"]


def _records(readings, labels=LABELS, choices=None) -> RecordSet:
    return RecordSet(readings=readings, labels=labels, choices=choices, plan_description="synthetic",
                     master_seed=0)


def test_constant_readings_have_zero_standard_error():
    records = _records(np.ones((50, 4)))
    estimate = estimator.bs_est(records)
    assert estimate.bs_hat == 2.0
    assert estimate.se == 0.0
    assert estimate.variance == 0.0
    with pytest.raises(InvalidParameterError) as excinfo:
        estimator.significance(estimate.bs_hat, estimate.se)
    assert excinfo.value.details.error_code == "ZERO_STANDARD_ERROR"


def test_single_cycle_estimate():
    estimate = estimator.bs_est(_records([[1.0, 2.0, -1.0, 0.5]]))
    assert estimate.signed_mean == pytest.approx(2.0 + 0.5 - 2.0 + 0.5)
    assert estimate.se == 0.0
    with pytest.raises(PlanShapeError):
        estimator.cov_check(_records([[1.0, 2.0, -1.0, 0.5]]))


def test_negative_combination_reports_magnitude():
    readings = np.tile([1.0, -1.0, 1.0, 1.0], (10, 1))
    estimate = estimator.bs_est(_records(readings))
    assert estimate.signed_mean == pytest.approx(-1 + 1 - 1 - 1)
    assert estimate.bs_hat == pytest.approx(2.0)


def test_correlations_of_synthetic_gaussians():
    rng = np.random.default_rng(0)
    n = 200_000
    shared = rng.standard_normal(n)
    readings = np.column_stack([shared + rng.standard_normal(n), shared, rng.standard_normal(n),
                                -shared])
    records = _records(readings)
    expected = {(1, 1): 1.0, (1, 2): -1.0, (2, 1): 0.0, (2, 2): 0.0}
    for est in estimator.all_correlations(records):
        assert est.n_used == n
        assert not est.strong
        assert abs(est.mean - expected[est.pair]) < 4 * est.se


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    readings = rng.normal(0.3, 2.0, size=(5000, 4))
    original = estimator.bs_est(_records(readings))
    shuffled = estimator.bs_est(_records(rng.permutation(readings)))
    assert shuffled.bs_hat == pytest.approx(original.bs_hat, abs=1e-12)
    assert shuffled.se == pytest.approx(original.se, rel=1e-10)


def test_standard_error_scales_as_inverse_root_n():
    plan = chsh_sequential_plan(2.0)
    small = estimator.bs_est(run_ensemble(plan, 25_000, 3))
    large = estimator.bs_est(run_ensemble(plan, 100_000, 3))
    assert large.se == pytest.approx(small.se / 2, rel=0.1)


def test_invalid_pair():
    with pytest.raises(InvalidParameterError):
        estimator.corr_est(_records(np.ones((5, 4))), (3, 1))


def test_regular_estimate_needs_choices():
    with pytest.raises(PlanShapeError) as excinfo:
        estimator.regular_bs_est(_records(np.ones((5, 4))))
    assert excinfo.value.details.error_code == "MISSING_CHOICES"


def test_empty_subsample():
    choices = np.ones((10, 2), dtype=np.int8)
    records = _records(np.ones((10, 2)), labels=["A", "B"], choices=choices)
    with pytest.raises(PlanShapeError) as excinfo:
        estimator.regular_correlations(records)
    assert excinfo.value.details.error_code == "EMPTY_SUBSAMPLE"


def test_significance():
    assert estimator.significance(2.5, 0.1) == pytest.approx(5.0)
    assert estimator.significance(1.9, 0.05) == pytest.approx(-2.0)
    with pytest.raises(InvalidParameterError):
        estimator.significance(2.5, -1.0)


def test_covariance_structure():
    sigma = 2.0
    report = estimator.cov_check(run_ensemble(chsh_sequential_plan(sigma), 400_000, 21), sigma)
    assert report.predicted_diagonal == pytest.approx(25.0)
    assert report.diagonal_ok
    assert report.zero_pattern_ok
    assert report.covariance.shape == (4, 4)
    np.testing.assert_allclose(report.covariance, report.covariance.T)


def test_covariance_without_sigma_skips_diagonal():
    report = estimator.cov_check(run_ensemble(chsh_sequential_plan(1.0), 10_000, 1))
    assert report.predicted_diagonal is None
    assert report.diagonal_ok is None


def test_lg_needs_enough_readings():
    records = run_ensemble(lg_plan([0.0, 1.0, 2.0], 10.0, basis_state("0")), 100, 0)
    with pytest.raises(PlanShapeError) as excinfo:
        estimator.lg_est(records, LgForm.K4)
    assert excinfo.value.details.error_code == "WRONG_PLAN_SHAPE"


def test_lg_three_time_violation():
    angles = [0.0, math.pi / 3, 2 * math.pi / 3]
    records = run_ensemble(lg_plan(angles, 10.0, basis_state("0")), 200_000, 31)
    estimate = estimator.lg_est(records, LgForm.K3)
    assert estimate.form is LgForm.K3
    assert abs(estimate.k_hat - 1.5) < 0.02 + 4 * estimate.se


@pytest.mark.slow
def test_lg_four_time_maximal_violation():
    angles = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4]
    records = run_ensemble(lg_plan(angles, 10.0, basis_state("0")), 1_000_000, 32)
    estimate = estimator.lg_est(records, LgForm.K4)
    assert abs(estimate.k_hat - 2 * math.sqrt(2)) < 0.03 + 4 * estimate.se


@pytest.mark.slow
def test_covariance_structure_large_ensemble():
    report = estimator.cov_check(run_ensemble(chsh_sequential_plan(2.0), 1_000_000, 22), 2.0)
    assert report.diagonal_ok
    assert report.zero_pattern_ok


@pytest.mark.slow
def test_planned_ensemble_reaches_target_significance():
    sigma_3, n_3 = optimal_sigma(0, 3.0)
    plan = chsh_sequential_plan(sigma_3)
    z_scores = []
    for k in range(200):
        estimate = estimator.bs_est(run_ensemble(plan, n_3, 1000 + k))
        z_scores.append(estimator.significance(estimate.bs_hat, estimate.se))
    z_scores = np.array(z_scores)
    assert abs(z_scores.mean() - 3.0) < 0.35
    assert np.mean((z_scores >= 1) & (z_scores <= 5)) >= 0.9
