"""
Gaussian-pointer measurement engine for weakbell

Impulsive von Neumann coupling exp(-i p O) with a Gaussian pointer of spread sigma
is applied exactly in Kraus form: the reading q is drawn from the Gaussian mixture
sum_m w_m Normal(lambda_m, sigma^2) and the state is updated with
M_q = sum_m phi(q - lambda_m) Pi_m, keeping every branch amplitude.
Strong (projective) measurement is a separate exact path.
"""

import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg, stats

from .errors import DimensionMismatchError, SimulationError, require_positive
from .models import Reading, frozen_array
from .qcore import Observable, StateVector

DEGENERACY_TOL = 1e-9
SPECTRAL_TOL = 1e-10
# Branch weights below this are rounding noise from projecting onto an orthogonal eigenspace
WEIGHT_FLOOR = 1e-24


class PointerSpec(BaseModel):
    """Initial pointer wavepacket: phi(q) = (2 pi sigma^2)^(-1/4) exp(-q^2 / (4 sigma^2))"""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(..., description="Initial pointer spread Delta q(t=0)")

    @model_validator(mode="after")
    def _positive(self) -> "PointerSpec":
        require_positive(self.sigma, "sigma")
        return self

    @property
    def epsilon(self) -> float:
        return 1.0 / self.sigma ** 2

    def amplitude(self, q) -> np.ndarray:
        """phi(q)"""
        q = np.asarray(q, dtype=float)
        return (2 * math.pi * self.sigma ** 2) ** -0.25 * np.exp(-q ** 2 / (4 * self.sigma ** 2))


class SpectralDecomp(BaseModel):
    """Distinct eigenvalues of an observable with their orthogonal projectors"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray = Field(..., description="Distinct eigenvalues, ascending")
    projectors: np.ndarray = Field(..., description="M x d x d projectors onto the eigenspaces")

    @model_validator(mode="after")
    def _resolution_of_identity(self) -> "SpectralDecomp":
        dim = self.projectors.shape[-1]
        total = self.projectors.sum(axis=0)
        if np.max(np.abs(total - np.eye(dim))) > SPECTRAL_TOL:
            raise ValueError("projectors do not sum to the identity")
        for m, pm in enumerate(self.projectors):
            for n, pn in enumerate(self.projectors):
                expected = pm if m == n else np.zeros_like(pm)
                if np.max(np.abs(pm @ pn - expected)) > SPECTRAL_TOL:
                    raise ValueError("projectors are not orthogonal idempotents")
        return self

    @property
    def size(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        """sum_m lambda_m Pi_m"""
        return np.einsum("m,mij->ij", self.eigenvalues, self.projectors)


class PointerMixture(BaseModel):
    """Exact reading density p(q) = sum_m w_m Normal(q; lambda_m, sigma^2)"""
    model_config = ConfigDict(frozen=True)

    components: List[Tuple[float, float, float]] = Field(..., description="(weight, mean, variance) triples")

    @property
    def mean(self) -> float:
        return sum(w * mu for w, mu, _ in self.components)

    @property
    def variance(self) -> float:
        second = sum(w * (var + mu ** 2) for w, mu, var in self.components)
        return second - self.mean ** 2

    def density(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return sum(w * stats.norm.pdf(q, loc=mu, scale=math.sqrt(var)) for w, mu, var in self.components)


def spectral_decomposition(observable: Observable, tol: float = DEGENERACY_TOL) -> SpectralDecomp:
    """Eigen-decompose, merging eigenvalues closer than tol into one projector"""
    values, vectors = linalg.eigh(observable.matrix)
    groups: List[List[int]] = [[0]]
    for index in range(1, len(values)):
        if values[index] - values[groups[-1][-1]] <= tol:
            groups[-1].append(index)
        else:
            groups.append([index])
    eigenvalues = np.array([values[g].mean() for g in groups])
    # spin eigenvalues come out of eigh as 1 - 2e-16; readings of +-1 must be exact
    snapped = np.round(eigenvalues)
    eigenvalues = np.where(np.abs(eigenvalues - snapped) < 1e-12, snapped, eigenvalues)
    projectors = np.array([vectors[:, g] @ vectors[:, g].conj().T for g in groups])
    return SpectralDecomp(eigenvalues=frozen_array(eigenvalues), projectors=frozen_array(projectors))


def kraus_operator(observable: Observable, pointer: PointerSpec, q: float) -> np.ndarray:
    """M_q = sum_m phi(q - lambda_m) Pi_m"""
    decomp = spectral_decomposition(observable)
    return np.einsum("m,mij->ij", pointer.amplitude(q - decomp.eigenvalues), decomp.projectors)


def born_weights(states: np.ndarray, decomp: SpectralDecomp) -> Tuple[np.ndarray, np.ndarray]:
    """Projected branches Pi_m psi (B x M x d) and their weights (B x M)"""
    if states.shape[-1] != decomp.projectors.shape[-1]:
        raise DimensionMismatchError(
            f"state dimension {states.shape[-1]} does not match observable dimension "
            f"{decomp.projectors.shape[-1]}")
    branches = np.einsum("mij,bj->bmi", decomp.projectors, states)
    weights = np.clip(np.sum(np.abs(branches) ** 2, axis=-1), 0.0, None)
    weights /= weights.sum(axis=1, keepdims=True)
    return branches, weights


def choose_branches(weights: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF branch choice, one uniform per row"""
    cumulative = np.cumsum(weights, axis=1)
    chosen = np.sum(uniforms[:, None] >= cumulative, axis=1)
    return np.minimum(chosen, weights.shape[1] - 1)


def _normalize(states: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(states, axis=1)
    if np.any(norms <= 1e-300) or not np.all(np.isfinite(norms)):
        raise SimulationError("post-measurement state has zero norm", code="ZERO_NORM_STATE")
    return states / norms[:, None]


def weak_measure_batch(states: np.ndarray, decomp: SpectralDecomp, sigma: float,
                       uniforms: np.ndarray, normals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Weak measurement of many independent states at once.

    Branch m is chosen with probability w_m, then Normal(0, sigma^2) noise is
    added; the state update keeps all branches weighted by phi(q - lambda_m).
    """
    branches, weights = born_weights(states, decomp)
    chosen = choose_branches(weights, uniforms)
    q = decomp.eigenvalues[chosen] + sigma * normals

    log_coeff = -((q[:, None] - decomp.eigenvalues[None, :]) ** 2) / (4 * sigma ** 2)
    log_coeff = np.where(weights > WEIGHT_FLOOR, log_coeff, -np.inf)
    log_coeff -= log_coeff.max(axis=1, keepdims=True)
    updated = np.einsum("bm,bmi->bi", np.exp(log_coeff), branches)
    return q, _normalize(updated)


def strong_measure_batch(states: np.ndarray, decomp: SpectralDecomp,
                         uniforms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Projective measurement of many independent states at once"""
    branches, weights = born_weights(states, decomp)
    chosen = choose_branches(weights, uniforms)
    q = decomp.eigenvalues[chosen]
    collapsed = branches[np.arange(states.shape[0]), chosen]
    return q, _normalize(collapsed)


def weak_measure(state: StateVector, observable: Observable, pointer: PointerSpec,
                 rng: np.random.Generator, label: str = "") -> Tuple[Reading, StateVector]:
    """Sample one pointer reading and the post-measurement state"""
    decomp = spectral_decomposition(observable)
    uniform = np.array([rng.random()])
    normal = np.array([rng.standard_normal()])
    q, updated = weak_measure_batch(state.amplitudes[None, :], decomp, pointer.sigma, uniform, normal)
    return (Reading(q=float(q[0]), label=label or observable.label),
            StateVector.from_amplitudes(updated[0]))


def strong_measure(state: StateVector, observable: Observable, rng: np.random.Generator,
                   label: str = "") -> Tuple[Reading, StateVector]:
    """Born-rule eigenvalue reading and collapse"""
    decomp = spectral_decomposition(observable)
    q, collapsed = strong_measure_batch(state.amplitudes[None, :], decomp, np.array([rng.random()]))
    return (Reading(q=float(q[0]), label=label or observable.label),
            StateVector.from_amplitudes(collapsed[0]))


def pointer_pdf(state: StateVector, observable: Observable, pointer: PointerSpec) -> PointerMixture:
    """Mixture parameters {(w_m, lambda_m, sigma^2)} of the reading density"""
    decomp = spectral_decomposition(observable)
    _, weights = born_weights(state.amplitudes[None, :], decomp)
    variance = pointer.sigma ** 2
    return PointerMixture(components=[
        (float(w), float(lam), variance) for w, lam in zip(weights[0], decomp.eigenvalues) if w > WEIGHT_FLOOR
    ])
