#!/usr/bin/env python3
"""
Tests for hidden-variable adversaries and the strong-measurement certificate
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add the weakbell package to the path
sys.path.insert(0, str(Path(__file__).parent))

from weakbell import estimator
from weakbell.closedform import TSIRELSON, certificate_ratios
from weakbell.errors import PlanShapeError
from weakbell.lhv import (
    HiddenStrategy,
    NoiseModel,
    certificate_test,
    deterministic_strategy,
    random_strategy,
    run_additive_lhv,
    run_malicious_lhv,
)
from weakbell.models import NoiseKind, Verdict
from weakbell.schedule import certified_plan, run_ensemble
from weakbell.streams import BLOCK_SIZE


def test_strategy_validation():
    with pytest.raises(ValidationError):
        HiddenStrategy(probabilities=[0.5, 0.6], a_values=[[1, 1], [1, -1]], b_values=[[1, 1], [1, 1]])
    with pytest.raises(ValidationError):
        HiddenStrategy(probabilities=[1.0], a_values=[[1, 0]], b_values=[[1, 1]])
    with pytest.raises(ValidationError):
        HiddenStrategy(probabilities=[1.0], a_values=[[1, 1], [1, 1]], b_values=[[1, 1]])


def test_hidden_strategies_obey_chsh():
    assert deterministic_strategy((1, 1), (1, 1)).chsh() == 2.0
    rng = np.random.default_rng(0)
    for _ in range(200):
        assert abs(random_strategy(rng).chsh()) <= 2.0 + 1e-12


def test_noise_model_draw_counts():
    assert NoiseModel(kind=NoiseKind.INDEPENDENT, sigma=1.0).n_normal == 4
    assert NoiseModel(kind=NoiseKind.MALICIOUS, c=1.0).n_normal == 1


def test_additive_lhv_record_layout():
    strategy = random_strategy(np.random.default_rng(1))
    plain = run_additive_lhv(strategy, 2.0, 1000, seed=3, certify=False)
    assert plain.labels == ["A1", "B1", "A2", "B2"]
    assert plain.choices is None
    certified = run_additive_lhv(strategy, 2.0, 1000, seed=3)
    assert certified.labels[-2:] == ["A_s", "B_s"]
    assert set(np.unique(certified.column("B_s"))) <= {-1.0, 1.0}
    np.testing.assert_array_equal(plain.readings, run_additive_lhv(strategy, 2.0, 1000, seed=3,
                                                                   certify=False).readings)


def test_additive_lhv_tracks_its_strategy():
    strategy = random_strategy(np.random.default_rng(2))
    estimate = estimator.bs_est(run_additive_lhv(strategy, 1.0, 100_000, seed=4))
    assert abs(estimate.signed_mean - strategy.chsh()) < 4 * estimate.se


def test_additive_lhv_never_violates():
    rng = np.random.default_rng(3)
    for k in range(50):
        records = run_additive_lhv(random_strategy(rng), 2.0, 20_000, seed=100 + k, certify=False)
        estimate = estimator.bs_est(records)
        assert estimate.bs_hat <= 2 + 4 * estimate.se


def test_malicious_lhv_fakes_a_violation():
    c = 1.0
    records = run_malicious_lhv(c, 100_000, seed=5)
    estimate = estimator.bs_est(records)
    assert abs(estimate.bs_hat - (2 + 2 * c ** 2)) < 4 * estimate.se
    assert estimator.significance(estimate.bs_hat, estimate.se) > 5


def test_malicious_inflation_grows_with_c():
    mild = estimator.bs_est(run_malicious_lhv(1.0, 100_000, seed=15, certify=False))
    strong = estimator.bs_est(run_malicious_lhv(2.0, 100_000, seed=16, certify=False))
    assert abs(strong.signed_mean - 10.0) < 4 * strong.se
    assert strong.signed_mean - mild.signed_mean > 5 * math.hypot(mild.se, strong.se)
    assert (mild.signed_mean - TSIRELSON) / mild.se > 5


@pytest.mark.parametrize("run", [
    lambda n: run_malicious_lhv(1.0, n, seed=7),
    lambda n: run_additive_lhv(random_strategy(np.random.default_rng(1)), 2.0, n, seed=7),
])
def test_lhv_cycle_draws_do_not_depend_on_ensemble_size(run):
    short, full = run(10), run(BLOCK_SIZE)
    np.testing.assert_array_equal(short.readings[0], full.readings[0])
    np.testing.assert_array_equal(short.readings, full.readings[:10])
    np.testing.assert_array_equal(short.choices, full.choices[:10])


def test_certificate_detects_malicious_lhv():
    records = run_malicious_lhv(1.0, 100_000, seed=6)
    verdict = certificate_test(estimator.all_correlations(records),
                               estimator.all_correlations(records, strong=True))
    assert verdict.verdict is Verdict.INTERFERENCE
    assert verdict.strong_chsh == pytest.approx(2.0)
    assert verdict.strong_chsh_within_bound
    assert verdict.z_reject == 5.0


def test_certificate_accepts_quantum_run():
    sigma = 2.0
    records = run_ensemble(certified_plan(sigma), 400_000, 9)
    weak = estimator.all_correlations(records)
    strong = estimator.all_correlations(records, strong=True)
    assert all(est.strong for est in strong)
    assert sum(est.n_used for est in strong) == records.n
    verdict = certificate_test(weak, strong, ratios=certificate_ratios(sigma))
    assert verdict.verdict is Verdict.CONSISTENT
    assert set(verdict.z_scores) == {"11", "12", "21", "22"}


def test_certificate_accepts_additive_lhv():
    strategy = random_strategy(np.random.default_rng(7))
    records = run_additive_lhv(strategy, 1.5, 100_000, seed=8)
    verdict = certificate_test({est.pair: est for est in estimator.all_correlations(records)},
                               estimator.all_correlations(records, strong=True), z_reject=5)
    assert verdict.verdict is Verdict.CONSISTENT
    assert verdict.strong_chsh_within_bound


def test_certificate_needs_all_pairs():
    records = run_malicious_lhv(0.5, 1000, seed=1)
    weak = estimator.all_correlations(records)
    with pytest.raises(PlanShapeError):
        certificate_test(weak[:3], estimator.all_correlations(records, strong=True))


def test_strong_estimates_need_choices():
    records = run_malicious_lhv(0.5, 1000, seed=1, certify=False)
    with pytest.raises(PlanShapeError):
        estimator.corr_est(records, (1, 1), strong=True)


@pytest.mark.slow
def test_certificate_power_over_repeated_runs():
    sigma, seeds = 2.0, range(20)
    detected = [
        certificate_test(estimator.all_correlations(records), estimator.all_correlations(records, strong=True),
                         z_reject=5).verdict is Verdict.INTERFERENCE
        for records in (run_malicious_lhv(1.0, 100_000, seed=200 + s) for s in seeds)
    ]
    false_alarms = [
        certificate_test(estimator.all_correlations(records), estimator.all_correlations(records, strong=True),
                         z_reject=5, ratios=certificate_ratios(sigma)).verdict is Verdict.INTERFERENCE
        for records in (run_ensemble(certified_plan(sigma), 100_000, 300 + s) for s in seeds)
    ]
    assert sum(detected) / len(detected) > 0.99
    assert sum(false_alarms) / len(false_alarms) < 0.01
