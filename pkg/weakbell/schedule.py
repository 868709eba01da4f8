"""
Measurement plans and their execution for weakbell

A plan is an ordered list of measurement steps on a shared initial state with
free evolution under H0 between steps. Ensembles are executed in blocks of
independent cycles with all cycle states held in one (B, d) array.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import streams
from .errors import InvalidParameterError, require_positive
from .meter import SpectralDecomp, spectral_decomposition, strong_measure_batch, weak_measure_batch
from .models import (
    CERTIFICATE_LABELS,
    REGULAR_LABELS,
    CycleRecord,
    MeasurementMode,
    Party,
    Reading,
    RecordSet,
    Theorem1Result,
)
from .qcore import (
    Hamiltonian,
    Observable,
    StateVector,
    bloch_observable,
    epr_state,
    evolution_operator,
    expectation,
    heisenberg,
    random_direction,
    random_local_hamiltonian,
    random_state,
    spin_observable,
    two_time_corr,
)

logger = logging.getLogger(__name__)

# Angles of the CHSH observables in the x-z plane
A_ANGLES: Tuple[float, float] = (math.pi / 2, 0.0)
B_ANGLES: Tuple[float, float] = (math.pi / 4, 3 * math.pi / 4)


class MeasurementStep(BaseModel):
    """One scheduled measurement.

    A step with alternatives measures one of them, chosen uniformly per cycle
    from the cycle's own stream after all other draws; the 1-based index of the
    choice is recorded for the step's party.
    """
    model_config = ConfigDict(frozen=True)

    label: str = Field(..., description="Column label of the reading")
    party: Party
    observable: Optional[Observable] = Field(None, description="Measured observable (None when alternatives)")
    alternatives: List[Observable] = Field(default_factory=list, description="Uniformly chosen candidates")
    mode: MeasurementMode = MeasurementMode.WEAK
    sigma: Optional[float] = Field(None, description="Pointer spread for weak steps")
    time: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> "MeasurementStep":
        if (self.observable is None) == (not self.alternatives):
            raise ValueError(f"step {self.label}: give either an observable or alternatives")
        if self.mode is MeasurementMode.WEAK:
            if self.sigma is None:
                raise ValueError(f"weak step {self.label} needs a sigma")
            require_positive(self.sigma, "sigma")
        if not math.isfinite(self.time):
            raise ValueError(f"step {self.label}: time must be finite")
        return self

    @property
    def candidates(self) -> List[Observable]:
        return list(self.alternatives) if self.alternatives else [self.observable]  # type: ignore[list-item]

    @property
    def is_choice(self) -> bool:
        return bool(self.alternatives)


class MeasurementPlan(BaseModel):
    """Ordered measurement schedule on an initial state"""
    model_config = ConfigDict(frozen=True)

    steps: List[MeasurementStep] = Field(..., min_length=1)
    initial_state: StateVector
    h0: Hamiltonian
    description: str = ""
    parameters: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "MeasurementPlan":
        dim = self.initial_state.dim
        if self.h0.dim != dim:
            raise ValueError(f"H0 dimension {self.h0.dim} does not match state dimension {dim}")
        labels = [step.label for step in self.steps]
        if len(set(labels)) != len(labels):
            raise ValueError("step labels must be unique")
        times = [step.time for step in self.steps]
        if any(later < earlier for earlier, later in zip(times, times[1:])):
            raise ValueError("step times must be non-decreasing")
        choice_parties = [step.party for step in self.steps if step.is_choice]
        if len(set(choice_parties)) != len(choice_parties) or Party.SINGLE in choice_parties:
            raise ValueError("at most one choice step per party A and B")
        for step in self.steps:
            for observable in step.candidates:
                if observable.dim != dim:
                    raise ValueError(f"step {step.label}: observable dimension {observable.dim} != {dim}")
        return self

    @property
    def labels(self) -> List[str]:
        return [step.label for step in self.steps]

    @property
    def has_choices(self) -> bool:
        return any(step.is_choice for step in self.steps)

    @property
    def num_weak(self) -> int:
        return sum(1 for step in self.steps if step.mode is MeasurementMode.WEAK)


def _check_sigma(sigma: float) -> float:
    try:
        return require_positive(float(sigma), "sigma")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameterError):
            raise
        raise InvalidParameterError(f"sigma must be a real number, got {sigma!r}", field_path=["sigma"]) from exc


def _chsh_observables() -> Tuple[List[Observable], List[Observable]]:
    a_obs = [spin_observable(theta, Party.A) for theta in A_ANGLES]
    b_obs = [spin_observable(theta, Party.B) for theta in B_ANGLES]
    return a_obs, b_obs


def _chsh_steps(sigma: float, n_prior: int) -> List[MeasurementStep]:
    a_obs, b_obs = _chsh_observables()
    steps: List[MeasurementStep] = []
    for sequence in range(n_prior + 1):
        suffix = "" if sequence == n_prior else f"#{sequence + 1}"
        for k in range(2):
            time = float(2 * sequence + k)
            steps.append(MeasurementStep(label=f"A{k + 1}{suffix}", party=Party.A, observable=a_obs[k],
                                         sigma=sigma, time=time))
            steps.append(MeasurementStep(label=f"B{k + 1}{suffix}", party=Party.B, observable=b_obs[k],
                                         sigma=sigma, time=time))
    return steps


def chsh_sequential_plan(sigma: float, n_prior: int = 0) -> MeasurementPlan:
    """Sequential CHSH on the EPR state, preceded by n_prior identical sequences.

    Scored steps are labelled A1, B1, A2, B2; prior sequence k is labelled
    A1#k, B1#k, A2#k, B2#k. Each party measures its first observable before
    its second.
    """
    sigma = _check_sigma(sigma)
    if isinstance(n_prior, bool) or not isinstance(n_prior, (int, np.integer)) or n_prior < 0:
        raise InvalidParameterError(f"n_prior must be a non-negative integer, got {n_prior!r}",
                                    field_path=["n_prior"], actual=n_prior)
    return MeasurementPlan(
        steps=_chsh_steps(sigma, int(n_prior)),
        initial_state=epr_state(),
        h0=Hamiltonian.zero(2),
        description=f"sequential CHSH, sigma={sigma:g}, n_prior={n_prior}",
        parameters={"sigma": sigma, "n_prior": float(n_prior)},
    )


def certified_plan(sigma: float) -> MeasurementPlan:
    """Sequential CHSH followed by one strong measurement per party of a randomly chosen CHSH observable"""
    base = chsh_sequential_plan(sigma, 0)
    a_obs, b_obs = _chsh_observables()
    end = base.steps[-1].time + 1
    certificate = [
        MeasurementStep(label=CERTIFICATE_LABELS[0], party=Party.A, alternatives=a_obs,
                        mode=MeasurementMode.STRONG, time=end),
        MeasurementStep(label=CERTIFICATE_LABELS[1], party=Party.B, alternatives=b_obs,
                        mode=MeasurementMode.STRONG, time=end),
    ]
    return base.model_copy(update={
        "steps": list(base.steps) + certificate,
        "description": f"certified sequential CHSH, sigma={base.parameters['sigma']:g}",
    })


def regular_plan(sigma: Optional[float] = None) -> MeasurementPlan:
    """Regular CHSH: each party measures one uniformly chosen observable per cycle (strong if sigma is None)"""
    a_obs, b_obs = _chsh_observables()
    if sigma is None:
        mode, parameters = MeasurementMode.STRONG, {}
    else:
        sigma = _check_sigma(sigma)
        mode, parameters = MeasurementMode.WEAK, {"sigma": sigma}
    steps = [
        MeasurementStep(label=REGULAR_LABELS[0], party=Party.A, alternatives=a_obs, mode=mode, sigma=sigma),
        MeasurementStep(label=REGULAR_LABELS[1], party=Party.B, alternatives=b_obs, mode=mode, sigma=sigma),
    ]
    return MeasurementPlan(
        steps=steps,
        initial_state=epr_state(),
        h0=Hamiltonian.zero(2),
        description="regular CHSH, " + ("strong" if sigma is None else f"sigma={sigma:g}"),
        parameters=parameters,
    )


def lg_plan(angles: Sequence[float], sigma: float, psi0: StateVector,
            h0: Optional[Hamiltonian] = None) -> MeasurementPlan:
    """Single-qubit Leggett-Garg sequence of weak spin measurements Q1..Qm at unit time spacing"""
    angles = [float(theta) for theta in angles]
    if len(angles) < 3:
        raise InvalidParameterError(
            f"a Leggett-Garg plan needs at least 3 angles, got {len(angles)}",
            field_path=["angles"],
            expected=">= 3 angles",
            actual=angles,
            suggestions=["Pass angles such as 0,45,90,135 (degrees on the command line)"],
        )
    sigma = _check_sigma(sigma)
    if psi0.num_qubits != 1:
        raise InvalidParameterError(f"Leggett-Garg plans act on one qubit, got {psi0.num_qubits}",
                                    field_path=["psi0"], actual=psi0.num_qubits)
    steps = [
        MeasurementStep(label=f"Q{k + 1}", party=Party.SINGLE, sigma=sigma, time=float(k),
                        observable=spin_observable(theta, Party.SINGLE, num_qubits=1))
        for k, theta in enumerate(angles)
    ]
    return MeasurementPlan(
        steps=steps,
        initial_state=psi0,
        h0=h0 or Hamiltonian.zero(1),
        description=f"Leggett-Garg, {len(angles)} angles, sigma={sigma:g}",
        parameters={"sigma": sigma, "m": float(len(angles))},
    )


@dataclass(frozen=True)
class _CompiledStep:
    decomps: List[SpectralDecomp]
    evolve: Optional[np.ndarray]  # U(dt) applied before the step, None when trivial
    weak: bool
    sigma: float
    uniform_col: int
    normal_col: int
    choice_col: int
    party_slot: int


@dataclass(frozen=True)
class _CompiledPlan:
    steps: List[_CompiledStep]
    initial: np.ndarray
    n_uniform: int
    n_normal: int
    has_choices: bool


def _compile(plan: MeasurementPlan) -> _CompiledPlan:
    n_steps = len(plan.steps)
    choice_cols = iter(range(n_steps, n_steps + sum(step.is_choice for step in plan.steps)))
    compiled: List[_CompiledStep] = []
    previous_time = 0.0
    normal_col = 0
    for index, step in enumerate(plan.steps):
        dt = step.time - previous_time
        evolve = None if plan.h0.is_zero or dt == 0 else evolution_operator(plan.h0, dt)
        previous_time = step.time
        weak = step.mode is MeasurementMode.WEAK
        compiled.append(_CompiledStep(
            decomps=[spectral_decomposition(obs) for obs in step.candidates],
            evolve=evolve,
            weak=weak,
            sigma=step.sigma or 0.0,
            uniform_col=index,
            normal_col=normal_col if weak else -1,
            choice_col=next(choice_cols) if step.is_choice else -1,
            party_slot=0 if step.party is Party.A else 1,
        ))
        normal_col += int(weak)
    return _CompiledPlan(
        steps=compiled,
        initial=np.asarray(plan.initial_state.amplitudes, dtype=complex),
        n_uniform=n_steps + sum(step.is_choice for step in plan.steps),
        n_normal=normal_col,
        has_choices=plan.has_choices,
    )


def _measure(step: _CompiledStep, decomp: SpectralDecomp, states: np.ndarray, uniforms: np.ndarray,
             normals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = uniforms[:, step.uniform_col]
    if step.weak:
        return weak_measure_batch(states, decomp, step.sigma, u, normals[:, step.normal_col])
    return strong_measure_batch(states, decomp, u)


def _run_block(compiled: _CompiledPlan, uniforms: np.ndarray,
               normals: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    size = uniforms.shape[0]
    states = np.tile(compiled.initial, (size, 1))
    readings = np.empty((size, len(compiled.steps)))
    choices = np.zeros((size, 2), dtype=np.int8) if compiled.has_choices else None
    for k, step in enumerate(compiled.steps):
        if step.evolve is not None:
            states = states @ step.evolve.T
        if step.choice_col < 0:
            readings[:, k], states = _measure(step, step.decomps[0], states, uniforms, normals)
            continue
        n_alt = len(step.decomps)
        chosen = np.minimum((uniforms[:, step.choice_col] * n_alt).astype(int), n_alt - 1)
        choices[:, step.party_slot] = chosen + 1  # type: ignore[index]
        updated = states.copy()
        for alt, decomp in enumerate(step.decomps):
            rows = np.flatnonzero(chosen == alt)
            if rows.size == 0:
                continue
            q, post = _measure(step, decomp, states[rows], uniforms[rows], normals[rows])
            readings[rows, k] = q
            updated[rows] = post
        states = updated
    return readings, choices


def run_cycle(plan: MeasurementPlan, rng: np.random.Generator, seed_index: int = 0) -> CycleRecord:
    """Execute one cycle with draws from rng, in step order"""
    compiled = _compile(plan)
    uniforms, normals = streams.draw_matrices(rng, 1, compiled.n_uniform, compiled.n_normal, rows=1)
    readings, choices = _run_block(compiled, uniforms, normals)
    choice = None if choices is None else (int(choices[0, 0]), int(choices[0, 1]))
    return CycleRecord(
        readings={label: Reading(q=float(q), label=label) for label, q in zip(plan.labels, readings[0])},
        certificate_choice=choice,
        seed_index=seed_index,
    )


def run_ensemble(plan: MeasurementPlan, n: int, master_seed: int,
                 workers: Optional[int] = None) -> RecordSet:
    """N independent cycles; cycle i depends only on (master_seed, i)"""
    compiled = _compile(plan)

    def _work(rng: np.random.Generator, size: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        uniforms, normals = streams.draw_matrices(rng, size, compiled.n_uniform, compiled.n_normal)
        return _run_block(compiled, uniforms, normals)

    blocks = streams.run_blocks(n, master_seed, _work, workers)
    readings = np.concatenate([block[0] for block in blocks])
    choices = np.concatenate([block[1] for block in blocks]) if compiled.has_choices else None  # type: ignore[misc]
    logger.info("ran %d cycles of '%s' (seed %d)", n, plan.description, master_seed)
    return RecordSet(
        readings=readings,
        labels=plan.labels,
        choices=choices,
        plan_description=plan.description,
        master_seed=master_seed,
        parameters=dict(plan.parameters),
    )


def theorem1_plan(rng: np.random.Generator, sigma: float, local_h0: bool = False) -> MeasurementPlan:
    """Random two-qubit state with four weak spin measurements A1, B1 (t1) then A2, B2 (t2)"""
    sigma = _check_sigma(sigma)
    psi = random_state(rng, 2)
    h0 = random_local_hamiltonian(rng) if local_h0 else Hamiltonian.zero(2)
    t1, t2 = (np.sort(rng.uniform(0.0, 2.0, size=2)) if local_h0 else (0.0, 1.0))
    steps = []
    for k, time in enumerate((float(t1), float(t2))):
        for party in (Party.A, Party.B):
            observable = bloch_observable(random_direction(rng), party)
            steps.append(MeasurementStep(label=f"{party.value}{k + 1}", party=party,
                                         observable=observable, sigma=sigma, time=time))
    return MeasurementPlan(
        steps=steps,
        initial_state=psi,
        h0=h0,
        description=f"random four-step schedule, sigma={sigma:g}" + (", local H0" if local_h0 else ""),
        parameters={"sigma": sigma},
    )


def theorem1_trial(seed: int, sigma: float, n: int, local_h0: bool = False,
                   workers: Optional[int] = None) -> Theorem1Result:
    """Compare pointer moments of a random schedule with Heisenberg-picture expectations"""
    from .estimator import product_estimate

    streams.check_seed(seed)
    plan = theorem1_plan(np.random.default_rng(seed), sigma, local_h0)
    records = run_ensemble(plan, n, seed, workers)
    evolved = [heisenberg(step.observable, plan.h0, step.time)  # type: ignore[arg-type]
               for step in plan.steps]
    psi = plan.initial_state

    pair_errors: Dict[str, float] = {}
    pair_se: Dict[str, float] = {}
    for i in range(len(plan.steps)):
        for j in range(i + 1, len(plan.steps)):
            key = f"{plan.steps[i].label}*{plan.steps[j].label}"
            mean, se = product_estimate(records, plan.steps[i].label, plan.steps[j].label)
            pair_errors[key] = abs(mean - two_time_corr(psi, evolved[i], evolved[j]))
            pair_se[key] = se

    moment_errors: Dict[str, float] = {}
    moment_se: Dict[str, float] = {}
    for step, observable in zip(plan.steps, evolved):
        column = records.column(step.label)
        moment_errors[step.label] = abs(float(np.mean(column)) - expectation(psi, observable))
        moment_se[step.label] = float(np.std(column, ddof=1) / math.sqrt(n)) if n > 1 else 0.0

    result = Theorem1Result(
        sigma=float(sigma), n=n, seed=seed, local_h0=local_h0,
        pair_errors=pair_errors, pair_se=pair_se,
        moment_errors=moment_errors, moment_se=moment_se,
        bias_budget=2.0 / float(sigma) ** 2,
    )
    logger.debug("theorem1 trial seed=%d: max pair error %.4g, within budget %s",
                 seed, result.max_pair_error, result.within_budget)
    return result
