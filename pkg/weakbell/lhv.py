"""
Local-hidden-variable adversaries and the strong-measurement certificate

Adversary record sets use the same column layout as quantum CHSH runs
(A1, B1, A2, B2 and optionally A_s, B_s with choices) so every estimator
applies unchanged.
"""

import logging
import math
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import streams
from .config import get_settings
from .errors import PlanShapeError, require_positive
from .models import (
    CERTIFICATE_LABELS,
    CHSH_PAIRS,
    CHSH_SIGNS,
    CertificateVerdict,
    CorrelationEstimate,
    NoiseKind,
    Pair,
    RecordSet,
    Verdict,
    frozen_array,
)

logger = logging.getLogger(__name__)

WEAK_LABELS = ["A1", "B1", "A2", "B2"]
STRONG_CHSH_BAND = 3.0


class HiddenStrategy(BaseModel):
    """Distribution over hidden variables lambda with deterministic +-1 values a_i(lambda), b_j(lambda)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probabilities: np.ndarray = Field(..., description="P(lambda) for K hidden variables")
    a_values: np.ndarray = Field(..., description="K x 2 values a_1, a_2")
    b_values: np.ndarray = Field(..., description="K x 2 values b_1, b_2")

    @field_validator("probabilities", "a_values", "b_values", mode="before")
    @classmethod
    def _to_array(cls, value) -> np.ndarray:
        return frozen_array(value, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "HiddenStrategy":
        k = self.probabilities.shape[0]
        if self.probabilities.ndim != 1 or k < 1:
            raise ValueError("probabilities must be a non-empty vector")
        if np.any(self.probabilities < 0) or abs(self.probabilities.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        for name, values in (("a_values", self.a_values), ("b_values", self.b_values)):
            if values.shape != (k, 2):
                raise ValueError(f"{name} must have shape ({k}, 2)")
            if not np.all(np.abs(values) == 1):
                raise ValueError(f"{name} must be +1 or -1")
        return self

    @property
    def size(self) -> int:
        return int(self.probabilities.shape[0])

    def correlation(self, pair: Pair) -> float:
        """E(a_i b_j)"""
        i, j = pair
        return float(np.sum(self.probabilities * self.a_values[:, i - 1] * self.b_values[:, j - 1]))

    def chsh(self) -> float:
        return sum(CHSH_SIGNS[pair] * self.correlation(pair) for pair in CHSH_PAIRS)


def random_strategy(rng: np.random.Generator, size: int = 8) -> HiddenStrategy:
    """Dirichlet-weighted strategy over `size` random deterministic value assignments"""
    return HiddenStrategy(
        probabilities=rng.dirichlet(np.ones(size)),
        a_values=rng.choice([-1.0, 1.0], size=(size, 2)),
        b_values=rng.choice([-1.0, 1.0], size=(size, 2)),
    )


def deterministic_strategy(a: Tuple[int, int], b: Tuple[int, int]) -> HiddenStrategy:
    """Single hidden variable with fixed values"""
    return HiddenStrategy(probabilities=[1.0], a_values=[list(a)], b_values=[list(b)])


class NoiseModel(BaseModel):
    """Noise added to the hidden values to form pointer readings"""
    model_config = ConfigDict(frozen=True)

    kind: NoiseKind
    sigma: float = Field(default=0.0, ge=0, description="Independent noise spread")
    c: float = Field(default=0.0, ge=0, description="Malicious shared-noise amplitude")
    s: Tuple[int, int] = Field(default=(1, 1), description="Sign pattern of A's shared noise")
    t: Tuple[int, int] = Field(default=(1, -1), description="Sign pattern of B's shared noise")

    def weak_readings(self, a: np.ndarray, b: np.ndarray, normals: np.ndarray) -> np.ndarray:
        """A1, B1, A2, B2 readings from B x 2 hidden values and the noise draws"""
        if self.kind is NoiseKind.INDEPENDENT:
            noise = self.sigma * normals[:, :4]
        else:
            g = normals[:, 0]
            noise = self.c * np.column_stack([self.s[0] * g, self.t[0] * g, self.s[1] * g, self.t[1] * g])
        values = np.column_stack([a[:, 0], b[:, 0], a[:, 1], b[:, 1]])
        return values + noise

    @property
    def n_normal(self) -> int:
        return 4 if self.kind is NoiseKind.INDEPENDENT else 1


def _lhv_block(strategy: HiddenStrategy, noise: NoiseModel, certify: bool):
    cumulative = np.cumsum(strategy.probabilities)

    def _work(rng: np.random.Generator, size: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        uniforms, normals = streams.draw_matrices(rng, size, 3, noise.n_normal)
        lam = np.minimum(np.searchsorted(cumulative, uniforms[:, 0], side="right"), strategy.size - 1)
        a, b = strategy.a_values[lam], strategy.b_values[lam]
        readings = noise.weak_readings(a, b, normals)
        if not certify:
            return readings, None
        choices = np.minimum((uniforms[:, 1:3] * 2).astype(int), 1)
        rows = np.arange(size)
        strong = np.column_stack([a[rows, choices[:, 0]], b[rows, choices[:, 1]]])
        return np.hstack([readings, strong]), (choices + 1).astype(np.int8)

    return _work


def _run(strategy: HiddenStrategy, noise: NoiseModel, n: int, seed: int, certify: bool,
         description: str, parameters: Dict[str, float], workers: Optional[int]) -> RecordSet:
    blocks = streams.run_blocks(n, seed, _lhv_block(strategy, noise, certify), workers)
    labels = WEAK_LABELS + (list(CERTIFICATE_LABELS) if certify else [])
    logger.info("ran %d cycles of %s (seed %d)", n, description, seed)
    return RecordSet(
        readings=np.concatenate([block[0] for block in blocks]),
        labels=labels,
        choices=np.concatenate([block[1] for block in blocks]) if certify else None,
        plan_description=description,
        master_seed=seed,
        parameters=parameters,
    )


def run_additive_lhv(strategy: HiddenStrategy, sigma: float, n: int, seed: int, certify: bool = True,
                     workers: Optional[int] = None) -> RecordSet:
    """q_i = a_i(lambda) + n_i with independent Normal(0, sigma^2) noise"""
    sigma = require_positive(float(sigma), "sigma", allow_zero=True)
    noise = NoiseModel(kind=NoiseKind.INDEPENDENT, sigma=sigma)
    return _run(strategy, noise, n, seed, certify, f"additive LHV, sigma={sigma:g}", {"sigma": sigma}, workers)


def run_malicious_lhv(c: float, n: int, seed: int, certify: bool = True,
                      workers: Optional[int] = None) -> RecordSet:
    """a_i = b_j = +1 with shared noise: q^A_i = 1 + s_i c g, q^B_j = 1 + t_j c g, so B_S = 2 + 2 c^2"""
    c = require_positive(float(c), "c", allow_zero=True)
    noise = NoiseModel(kind=NoiseKind.MALICIOUS, c=c)
    return _run(deterministic_strategy((1, 1), (1, 1)), noise, n, seed, certify,
                f"malicious LHV, c={c:g}", {"c": c}, workers)


def _by_pair(estimates: Union[Mapping[Pair, CorrelationEstimate], Iterable[CorrelationEstimate]],
             what: str) -> Dict[Pair, CorrelationEstimate]:
    if isinstance(estimates, Mapping):
        by_pair = {tuple(pair): est for pair, est in estimates.items()}
    else:
        by_pair = {est.pair: est for est in estimates}
    missing = [pair for pair in CHSH_PAIRS if pair not in by_pair]
    if missing:
        raise PlanShapeError(f"{what} estimates lack pairs {missing}", code="MISSING_PAIRS",
                             expected=str(list(CHSH_PAIRS)), actual=sorted(by_pair))
    return by_pair  # type: ignore[return-value]


def _z(diff: float, scale: float) -> float:
    if scale > 0:
        return diff / scale
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def certificate_test(weak, strong, z_reject: Optional[float] = None,
                     ratios: Optional[Mapping[Pair, float]] = None) -> CertificateVerdict:
    """Compare weak and strong pair correlations.

    `ratios` gives the expected weak / strong ratio per pair (1 in the weak
    limit); a pair is rejected when |weak - ratio * strong| exceeds z_reject
    combined standard errors.
    """
    weak_by_pair = _by_pair(weak, "weak")
    strong_by_pair = _by_pair(strong, "strong")
    z_reject = get_settings().z_reject if z_reject is None else require_positive(float(z_reject), "z_reject")
    ratios = ratios or {pair: 1.0 for pair in CHSH_PAIRS}

    z_scores: Dict[str, float] = {}
    for pair in CHSH_PAIRS:
        w, s, r = weak_by_pair[pair], strong_by_pair[pair], ratios[pair]
        z_scores[f"{pair[0]}{pair[1]}"] = _z(w.mean - r * s.mean, math.hypot(w.se, r * s.se))

    signed = sum(CHSH_SIGNS[pair] * strong_by_pair[pair].mean for pair in CHSH_PAIRS)
    chsh_se = math.sqrt(sum(strong_by_pair[pair].se ** 2 for pair in CHSH_PAIRS))
    interference = any(abs(z) > z_reject for z in z_scores.values())
    verdict = CertificateVerdict(
        verdict=Verdict.INTERFERENCE if interference else Verdict.CONSISTENT,
        z_scores=z_scores,
        z_reject=z_reject,
        strong_chsh=abs(signed),
        strong_chsh_se=chsh_se,
        strong_chsh_within_bound=abs(signed) <= 2 + STRONG_CHSH_BAND * chsh_se,
    )
    logger.info("certificate verdict: %s (max |z| = %.3g)", verdict.verdict.value,
                max(abs(z) for z in z_scores.values()))
    return verdict
