"""
Closed-form finite-sigma analytics for the sequential CHSH test

Every prior measurement of a maximally non-commuting observable damps a
correlation by y = exp(-1 / (2 sigma^2)). These expressions are the oracles the
Monte Carlo estimates are tested against.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import optimize

from .errors import InvalidParameterError, require_positive
from .models import CHSH_PAIRS, CHSH_SIGNS, ChshAnalytics, CurvePoint, Pair, Setting

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
TSIRELSON = 2 * SQRT2
# sigma at which the sequential CHSH value crosses 2 with no prior sequences
SIGMA_THRESHOLD = (-2 * math.log(2 ** 0.75 - 1)) ** -0.5

GRID_POINTS = 400
GRID_SPAN = 30.0
GOLDEN_TOL = 1e-6


def _sigma(sigma: float) -> float:
    return require_positive(float(sigma), "sigma")


def _n_prior(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise InvalidParameterError(f"n must be a non-negative integer, got {n!r}", field_path=["n"], actual=n)
    return int(n)


def y_factor(sigma: float) -> float:
    """y = exp(-1 / (2 sigma^2))"""
    return math.exp(-1.0 / (2 * _sigma(sigma) ** 2))


def bs_exact(sigma: float) -> float:
    """(1 + y)^2 / sqrt(2)"""
    return (1 + y_factor(sigma)) ** 2 / SQRT2


def bs_n(n: int, sigma: float) -> float:
    """Sequential CHSH value after n prior CHSH sequences: y^(2n) (1 + y)^2 / sqrt(2)"""
    y = y_factor(sigma)
    return y ** (2 * _n_prior(n)) * (1 + y) ** 2 / SQRT2


def exact_correlations(sigma: float, n_prior: int = 0) -> Tuple[float, float, float, float]:
    """Signed E(q^A_i q^B_j) for pairs (1,1), (1,2), (2,1), (2,2).

    The (2,2) correlation is negative; the CHSH-signed sum equals bs_n.
    """
    y = y_factor(sigma)
    damping = y ** (2 * _n_prior(n_prior))
    return (damping / SQRT2, damping * y / SQRT2, damping * y / SQRT2, -damping * y ** 2 / SQRT2)


def exact_strong_correlations(sigma: float) -> Tuple[float, float, float, float]:
    """E(q^A_s q^B_s) per chosen pair after the four weak CHSH measurements.

    Each party's strong observable anticommutes with exactly one of its earlier
    weak observables, so every pair is damped by y^2.
    """
    y = y_factor(sigma)
    return (y ** 2 / SQRT2, y ** 2 / SQRT2, y ** 2 / SQRT2, -y ** 2 / SQRT2)


def certificate_ratios(sigma: Optional[float] = None) -> Dict[Pair, float]:
    """Expected weak / strong correlation ratio per pair: y^(i+j-4), or 1 in the weak limit"""
    if sigma is None:
        return {pair: 1.0 for pair in CHSH_PAIRS}
    y = y_factor(sigma)
    return {(i, j): y ** (i + j - 4) for i, j in CHSH_PAIRS}


def _gaussian_overlap(a: float, b: float, sigma: float) -> float:
    """Integral of phi(q - a) phi(q - b) over q"""
    return math.exp(-((a - b) ** 2) / (8 * sigma ** 2))


def mixture_coefficients() -> Tuple[float, float]:
    """(alpha, beta) of the post-measurement state after A measures sigma_x and B measures sigma_pi/4"""
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    return (c + s) / (2 * SQRT2), (s - c) / (2 * SQRT2)


def _mixture_branches() -> List[Tuple[int, int, float, float]]:
    """(a, b, c+, c-): eigenvalue a of A's sigma_z, b of B's sigma_pi/4, and the
    amplitudes of the q^A_1 pointer packets centred at +1 and -1"""
    alpha, beta = mixture_coefficients()
    return [(1, 1, alpha, -beta), (-1, 1, alpha, beta), (1, -1, beta, alpha), (-1, -1, beta, -alpha)]


def _mixture_moment(sigma: float, weight_ab) -> float:
    overlap = _gaussian_overlap(1.0, -1.0, sigma)
    total = 0.0
    for a, b, c_plus, c_minus in _mixture_branches():
        # integrating out q^A_1; the q^A_2 and q^B_1 packets are centred at a and b
        packet = c_plus ** 2 + c_minus ** 2 + 2 * c_plus * c_minus * overlap
        total += weight_ab(a, b) * packet
    return total


def mixture_state_oracle(sigma: float) -> float:
    """E(q^A_2 q^B_1) by Gaussian integration of the explicit four-branch post-measurement state"""
    return _mixture_moment(_sigma(sigma), lambda a, b: a * b)


def mixture_state_norm(sigma: float) -> float:
    """Norm of the four-branch state (1 for every sigma)"""
    return _mixture_moment(_sigma(sigma), lambda a, b: 1.0)


def product_variance(sigma: float) -> float:
    """Raw second moment E[(q^A_i q^B_j)^2] = (1 + sigma^2)^2 of any CHSH product"""
    return (1 + _sigma(sigma) ** 2) ** 2


def var_bs(sigma: float) -> float:
    """V(B_S) = 4 (1 + sigma^2)^2 - (1 + y)^4 / 2"""
    return 4 * product_variance(sigma) - 0.5 * (1 + y_factor(sigma)) ** 4


def var_bs_n(n: int, sigma: float) -> float:
    """V(B_S(n)) = 4 (1 + sigma^2)^2 - y^(2n) (1 + y)^4 / 2"""
    y = y_factor(sigma)
    return 4 * product_variance(sigma) - 0.5 * y ** (2 * _n_prior(n)) * (1 + y) ** 4


def _ensemble_ratio(sigma: float, z: float, n_prior: int) -> Optional[float]:
    """z^2 V / (B - 2)^2, or None without a violation"""
    bs = bs_n(n_prior, sigma)
    if bs <= 2:
        return None
    return z ** 2 * var_bs_n(n_prior, sigma) / (bs - 2) ** 2


def n_required(sigma: float, z: float = 3.0, setting: Union[Setting, str] = Setting.SEQUENTIAL,
               n_prior: int = 0) -> Optional[int]:
    """Smallest N with z sqrt(V / N) < B - 2; None when the setting shows no violation at sigma"""
    try:
        setting = Setting(setting)
    except ValueError:
        raise InvalidParameterError(
            f"unknown setting {setting!r}",
            field_path=["setting"],
            expected=" | ".join(s.value for s in Setting),
            actual=setting,
        ) from None
    require_positive(float(z), "z")
    require_positive(float(sigma), "sigma", allow_zero=True)

    if setting is Setting.REGULAR:
        # one of the four correlations per cycle
        v_total = 4 * (1 + sigma ** 2) ** 2 - 2
        return math.floor(4 * z ** 2 * v_total / (TSIRELSON - 2) ** 2) + 1

    if sigma == 0:
        return None
    ratio = _ensemble_ratio(sigma, z, _n_prior(n_prior))
    return None if ratio is None else math.floor(ratio) + 1


def sigma_min(n: int = 0) -> float:
    """Root in sigma of bs_n(n, sigma) = 2"""
    n = _n_prior(n)
    lo = SIGMA_THRESHOLD * 0.5
    hi = max(2.0, 2 * math.sqrt(n + 1))
    while bs_n(n, hi) <= 2:
        hi *= 2
    return optimize.bisect(lambda s: bs_n(n, s) - 2.0, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=500)


def optimal_sigma(n: int = 0, z: float = 3.0) -> Tuple[float, int]:
    """(sigma_3, N_3): the sigma minimising the ensemble size needed for a z-sigma violation"""
    n = _n_prior(n)
    require_positive(float(z), "z")
    floor = sigma_min(n) * (1 + 1e-9)

    def objective(log_sigma: float) -> float:
        ratio = _ensemble_ratio(math.exp(log_sigma), z, n)
        return math.inf if ratio is None else ratio

    grid = np.linspace(math.log(floor), math.log(floor * GRID_SPAN), GRID_POINTS)
    values = np.array([objective(g) for g in grid])
    k = int(np.clip(np.argmin(values), 1, GRID_POINTS - 2))
    result = optimize.minimize_scalar(objective, bracket=(grid[k - 1], grid[k], grid[k + 1]),
                                      method="golden", tol=GOLDEN_TOL)
    sigma_3 = math.exp(float(result.x))
    n_3 = math.floor(objective(float(result.x))) + 1
    logger.debug("optimal sigma for n=%d, z=%g: sigma_3=%.6f, N_3=%d", n, z, sigma_3, n_3)
    return sigma_3, n_3


def chsh_analytics(sigma: float, z: float = 3.0) -> ChshAnalytics:
    sigma = _sigma(sigma)
    return ChshAnalytics(sigma=sigma, y=y_factor(sigma), bs=bs_exact(sigma), var_bs=var_bs(sigma),
                         n_z=n_required(sigma, z))


def chsh_sign_sum(correlations: Iterable[float]) -> float:
    """E11 + E12 + E21 - E22 (signed)"""
    return sum(CHSH_SIGNS[pair] * value for pair, value in zip(CHSH_PAIRS, correlations))


def fig2_table(sigma_grid: Iterable[float], z: float = 3.0) -> List[CurvePoint]:
    """(sigma, B_S, V, N_z) rows"""
    rows = []
    for sigma in sigma_grid:
        sigma = _sigma(sigma)
        rows.append(CurvePoint(abscissa=sigma, bs=bs_exact(sigma), var_bs=var_bs(sigma),
                               n_3=n_required(sigma, z)))
    return rows


def fig3_table(n_grid: Iterable[int], z: float = 3.0) -> List[CurvePoint]:
    """(n, sigma_min, sigma_3, N_3, B_S at sigma_3) rows for n prior sequences"""
    rows = []
    for n in n_grid:
        n = _n_prior(n)
        sigma_3, n_3 = optimal_sigma(n, z)
        rows.append(CurvePoint(abscissa=float(n), bs=bs_n(n, sigma_3), var_bs=var_bs_n(n, sigma_3),
                               n_3=n_3, sigma_min=sigma_min(n), sigma_3=sigma_3))
    return rows
