"""
Statistics over record sets: correlations, the sequential CHSH estimator,
covariance structure, Leggett-Garg combinations and z-scores
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from .errors import InvalidParameterError, PlanShapeError
from .models import (
    CERTIFICATE_LABELS,
    CHSH_PAIRS,
    CHSH_SIGNS,
    REGULAR_LABELS,
    BsEstimate,
    CorrelationEstimate,
    CovarianceReport,
    LgEstimate,
    LgForm,
    Pair,
    RecordSet,
)

DIAGONAL_TOLERANCE = 0.02
ZERO_BAND = 4.0


def _mean_se(values: np.ndarray) -> Tuple[float, float]:
    """Sample mean and its standard error (ddof=1); se is 0 for a single value"""
    n = values.shape[0]
    mean = float(np.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(n))


def _check_pair(pair: Pair) -> Pair:
    if tuple(pair) not in CHSH_PAIRS:
        raise InvalidParameterError(f"pair must be one of {CHSH_PAIRS}, got {pair!r}",
                                    field_path=["pair"], actual=pair)
    return (int(pair[0]), int(pair[1]))


def product_estimate(records: RecordSet, label_a: str, label_b: str) -> Tuple[float, float]:
    """Mean of the per-cycle product of two reading columns and its standard error"""
    return _mean_se(records.column(label_a) * records.column(label_b))


def _matched_rows(records: RecordSet, pair: Pair) -> np.ndarray:
    if records.choices is None:
        raise PlanShapeError("record set carries no random observable choices", code="MISSING_CHOICES",
                             suggestions=["Run a certified or regular plan"])
    return np.flatnonzero((records.choices[:, 0] == pair[0]) & (records.choices[:, 1] == pair[1]))


def _matched_estimate(records: RecordSet, pair: Pair, labels: Tuple[str, str]) -> CorrelationEstimate:
    rows = _matched_rows(records, pair)
    if rows.size == 0:
        raise PlanShapeError(f"no cycles chose pair {pair}", code="EMPTY_SUBSAMPLE", actual=pair)
    products = records.column(labels[0])[rows] * records.column(labels[1])[rows]
    mean, se = _mean_se(products)
    return CorrelationEstimate(pair=pair, mean=mean, se=se, n_used=int(rows.size),
                               strong=labels == CERTIFICATE_LABELS)


def corr_est(records: RecordSet, pair: Pair, strong: bool = False) -> CorrelationEstimate:
    """E(q^A_i q^B_j) from the weak readings, or from the certificate subsample that chose (i, j)"""
    pair = _check_pair(pair)
    if strong:
        return _matched_estimate(records, pair, CERTIFICATE_LABELS)
    mean, se = product_estimate(records, f"A{pair[0]}", f"B{pair[1]}")
    return CorrelationEstimate(pair=pair, mean=mean, se=se, n_used=records.n)


def all_correlations(records: RecordSet, strong: bool = False) -> List[CorrelationEstimate]:
    return [corr_est(records, pair, strong) for pair in CHSH_PAIRS]


def chsh_combination(records: RecordSet) -> np.ndarray:
    """Per-cycle q1A q1B + q1A q2B + q2A q1B - q2A q2B"""
    total = np.zeros(records.n)
    for pair in CHSH_PAIRS:
        total += CHSH_SIGNS[pair] * records.column(f"A{pair[0]}") * records.column(f"B{pair[1]}")
    return total


def bs_est(records: RecordSet) -> BsEstimate:
    """Sequential CHSH estimate; the per-cycle combination carries the cross-pair covariances"""
    combination = chsh_combination(records)
    mean, se = _mean_se(combination)
    variance = float(np.var(combination, ddof=1)) if records.n > 1 else 0.0
    return BsEstimate(bs_hat=abs(mean), signed_mean=mean, se=se, variance=variance, n_used=records.n)


def _combine(estimates: List[CorrelationEstimate], n_total: int) -> BsEstimate:
    signed = sum(CHSH_SIGNS[e.pair] * e.mean for e in estimates)
    se = math.sqrt(sum(e.se ** 2 for e in estimates))
    return BsEstimate(bs_hat=abs(signed), signed_mean=signed, se=se, variance=n_total * se ** 2,
                      n_used=n_total)


def regular_correlations(records: RecordSet) -> List[CorrelationEstimate]:
    """Per-pair means over the cycles that chose that pair in the regular setting"""
    return [_matched_estimate(records, pair, REGULAR_LABELS) for pair in CHSH_PAIRS]


def regular_bs_est(records: RecordSet) -> BsEstimate:
    """CHSH from one randomly chosen pair per cycle (matched-subsample means)"""
    return _combine(regular_correlations(records), records.n)


def cov_check(records: RecordSet, sigma: Optional[float] = None) -> CovarianceReport:
    """Second-moment structure of the four CHSH products.

    Mixed raw moments E(x_a x_b) of distinct products are expected to vanish
    and diagonal ones to equal (1 + sigma^2)^2.
    """
    products = np.column_stack([records.column(f"A{i}") * records.column(f"B{j}") for i, j in CHSH_PAIRS])
    n = records.n
    if n < 2:
        raise PlanShapeError("covariance needs at least two cycles", code="EMPTY_SUBSAMPLE", actual=n)
    covariance = np.cov(products, rowvar=False)
    moments = np.empty((4, 4))
    moment_se = np.empty((4, 4))
    for a in range(4):
        for b in range(4):
            moments[a, b], moment_se[a, b] = _mean_se(products[:, a] * products[:, b])

    off_diagonal = ~np.eye(4, dtype=bool)
    zero_pattern_ok = bool(np.all(np.abs(moments[off_diagonal]) <= ZERO_BAND * moment_se[off_diagonal]))
    predicted = diagonal_ok = None
    if sigma is not None:
        predicted = (1 + sigma ** 2) ** 2
        diagonal_ok = bool(np.all(np.abs(np.diag(moments) - predicted) <= DIAGONAL_TOLERANCE * predicted))
    return CovarianceReport(
        pairs=list(CHSH_PAIRS),
        covariance=covariance,
        second_moments=moments,
        second_moment_se=moment_se,
        predicted_diagonal=predicted,
        zero_pattern_ok=zero_pattern_ok,
        diagonal_ok=diagonal_ok,
    )


def lg_combination(records: RecordSet, form: LgForm) -> np.ndarray:
    """Per-cycle K3 = q1q2 + q2q3 - q1q3 or K4 = q1q2 + q2q3 + q3q4 - q1q4"""
    form = LgForm(form)
    m = form.length
    labels = [f"Q{k}" for k in range(1, m + 1)]
    if not all(records.has(label) for label in labels):
        raise PlanShapeError(
            f"{form.value} needs readings {', '.join(labels)}",
            code="WRONG_PLAN_SHAPE",
            expected=", ".join(labels),
            actual=records.labels,
            suggestions=[f"Run a Leggett-Garg plan with at least {m} angles"],
        )
    q = [records.column(label) for label in labels]
    total = sum(q[k] * q[k + 1] for k in range(m - 1))
    return total - q[0] * q[m - 1]


def lg_est(records: RecordSet, form: LgForm) -> LgEstimate:
    k_hat, se = _mean_se(lg_combination(records, form))
    return LgEstimate(form=LgForm(form), k_hat=k_hat, se=se, n_used=records.n)


def significance(bs_hat: float, se: float) -> float:
    """z = (bs_hat - 2) / se"""
    if not se > 0:
        raise InvalidParameterError(
            f"standard error must be > 0, got {se}",
            code="ZERO_STANDARD_ERROR",
            field_path=["se"],
            suggestions=["Use an ensemble with at least two cycles of non-constant readings"],
        )
    return (bs_hat - 2.0) / se
