#!/usr/bin/env python3
"""
Tests for the closed-form sequential CHSH analytics and the ensemble-size planner
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the weakbell package to the path
sys.path.insert(0, str(Path(__file__).parent))

from weakbell.closedform import (
    SIGMA_THRESHOLD,
    TSIRELSON,
    bs_exact,
    bs_n,
    certificate_ratios,
    chsh_analytics,
    chsh_sign_sum,
    exact_correlations,
    exact_strong_correlations,
    fig2_table,
    fig3_table,
    mixture_coefficients,
    mixture_state_norm,
    mixture_state_oracle,
    n_required,
    optimal_sigma,
    product_variance,
    sigma_min,
    var_bs,
    var_bs_n,
    y_factor,
)
from weakbell.errors import InvalidParameterError
from weakbell.models import CHSH_PAIRS, Setting


def test_threshold_sigma():
    assert SIGMA_THRESHOLD == pytest.approx(1.1425335, abs=1e-7)
    assert SIGMA_THRESHOLD == pytest.approx((-2 * math.log(2 ** 0.75 - 1)) ** -0.5, abs=1e-12)
    assert bs_exact(1.142539) == pytest.approx(2.0, abs=1e-5)
    assert bs_exact(SIGMA_THRESHOLD) == pytest.approx(2.0, abs=1e-12)
    assert sigma_min(0) == pytest.approx(SIGMA_THRESHOLD, abs=1e-9)


def test_bs_increases_toward_tsirelson():
    grid = np.linspace(0.3, 20, 200)
    values = [bs_exact(s) for s in grid]
    assert all(b < a for a, b in zip(values[1:], values))
    assert values[-1] < TSIRELSON
    assert bs_exact(1e4) == pytest.approx(TSIRELSON, abs=1e-6)
    assert bs_exact(8.0) == pytest.approx(2.8065, abs=1e-4)


def test_bs_n_reduces_to_bs_exact():
    for sigma in (0.7, 2.0, 9.0):
        assert bs_n(0, sigma) == pytest.approx(bs_exact(sigma), abs=1e-15)
        assert var_bs_n(0, sigma) == pytest.approx(var_bs(sigma), abs=1e-12)
    assert bs_n(1, 2.0) == pytest.approx(1.9518, abs=1e-3)


def test_bs_n_decreases_with_prior_sequences():
    values = [bs_n(n, 3.0) for n in range(10)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_variance_at_sigma_two():
    assert product_variance(2.0) == pytest.approx(25.0)
    assert var_bs(2.0) == pytest.approx(93.72, abs=0.01)


def test_correlations_sum_to_bs():
    for n in (0, 1, 4):
        for sigma in (0.9, 2.0, 6.0):
            assert chsh_sign_sum(exact_correlations(sigma, n)) == pytest.approx(bs_n(n, sigma), abs=1e-12)
    e11, e12, e21, e22 = exact_correlations(2.0)
    y = y_factor(2.0)
    assert (e11, e12, e21, e22) == pytest.approx((1 / math.sqrt(2), y / math.sqrt(2), y / math.sqrt(2),
                                                  -y ** 2 / math.sqrt(2)))


def test_certificate_ratios_map_strong_to_weak():
    sigma = 2.0
    ratios = certificate_ratios(sigma)
    for pair, weak, strong in zip(CHSH_PAIRS, exact_correlations(sigma), exact_strong_correlations(sigma)):
        assert ratios[pair] * strong == pytest.approx(weak, abs=1e-12)
    assert ratios[(2, 2)] == 1.0
    assert certificate_ratios() == {pair: 1.0 for pair in CHSH_PAIRS}


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 5.0])
def test_mixture_state_oracle(sigma):
    assert mixture_state_oracle(sigma) == pytest.approx(y_factor(sigma) / math.sqrt(2), abs=1e-10)
    assert mixture_state_norm(sigma) == pytest.approx(1.0, abs=1e-12)


def test_mixture_coefficients_normalised():
    alpha, beta = mixture_coefficients()
    assert 4 * (alpha ** 2 + beta ** 2) == pytest.approx(1.0, abs=1e-12)


def test_planner_optimum():
    sigma_3, n_3 = optimal_sigma(0, 3.0)
    assert abs(n_3 - 3088) <= 0.01 * 3088
    assert bs_exact(sigma_3) == pytest.approx(2.43, abs=0.02)
    # the optimum is a minimum of the planner over a neighbourhood
    for factor in (0.9, 1.1):
        assert n_required(sigma_3 * factor, 3.0) >= n_3


def test_regular_baseline():
    assert n_required(0, 3, Setting.REGULAR) == 105
    assert n_required(0.0, 3.0, "regular") == 105


def test_n_required_without_violation():
    assert n_required(1.0, 3.0) is None
    assert n_required(0.0, 3.0) is None
    assert n_required(2.0, 3.0, n_prior=5) is None


def test_n_required_meets_the_target():
    for sigma in (1.5, 2.0, 4.0):
        n = n_required(sigma, 3.0)
        margin = bs_exact(sigma) - 2
        assert 3 * math.sqrt(var_bs(sigma) / n) < margin
        assert 3 * math.sqrt(var_bs(sigma) / (n - 1)) >= margin


def test_n_required_rejects_bad_arguments():
    with pytest.raises(InvalidParameterError):
        n_required(2.0, 3.0, "parallel")
    with pytest.raises(InvalidParameterError):
        n_required(-1.0, 3.0)
    with pytest.raises(InvalidParameterError):
        n_required(2.0, 0.0)


def test_sigma_min_large_n():
    assert sigma_min(100) == pytest.approx(16.82, rel=0.05)
    assert bs_n(100, sigma_min(100)) == pytest.approx(2.0, abs=1e-9)


def test_sigma_min_rejects_negative_n():
    with pytest.raises(InvalidParameterError):
        sigma_min(-1)


def test_quadratic_scaling_of_n3():
    rows = fig3_table(range(10, 101), 3.0)
    n = np.array([row.abscissa for row in rows])
    n3 = np.array([row.n_3 for row in rows], dtype=float)
    c = np.sum(n ** 2 * n3) / np.sum(n ** 4)
    residual = np.sum((n3 - c * n ** 2) ** 2)
    total = np.sum((n3 - n3.mean()) ** 2)
    assert 1 - residual / total > 0.99


def test_bs_at_optimal_sigma_stays_near_2_4():
    rows = fig3_table(range(10, 101, 10), 3.0)
    bs = [row.bs for row in rows]
    assert all(2.3 <= b <= 2.5 for b in bs)
    assert bs[-1] <= bs[0] + 1e-3
    assert all(row.sigma_min < row.sigma_3 for row in rows)


def test_fig2_table_row_near_optimum():
    (row,) = fig2_table([1.78], 3.0)
    assert row.abscissa == 1.78
    assert row.bs == pytest.approx(2.43, abs=0.01)
    assert abs(row.n_3 - 3088) <= 0.01 * 3088


def test_fig2_table_below_threshold_has_no_ensemble_size():
    rows = fig2_table([0.5, 1.0, 1.2])
    assert [row.n_3 is None for row in rows] == [True, True, False]


def test_chsh_analytics():
    analytics = chsh_analytics(2.0)
    assert analytics.bs == pytest.approx(2.50588, abs=1e-4)
    assert analytics.var_bs == pytest.approx(93.72, abs=0.01)
    assert analytics.n_z == n_required(2.0, 3.0)
    assert chsh_analytics(1.0).n_z is None
