"""
Dense quantum core for weakbell
States, observables, tensor embedding, free evolution and exact expectation oracles
"""

import math
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg

from .errors import DimensionMismatchError, InvalidParameterError, InvalidSubsystemError, NonHermitianError
from .models import Party, frozen_array

MAX_QUBITS = 4
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

Subsystem = Union[Party, int]


def _num_qubits_for(dim: int) -> int:
    k = int(round(math.log2(dim))) if dim > 0 else -1
    if k < 1 or 2 ** k != dim or k > MAX_QUBITS:
        raise DimensionMismatchError(
            f"dimension {dim} is not 2^k for 1 <= k <= {MAX_QUBITS}",
            expected=f"2^k, k <= {MAX_QUBITS}",
            actual=dim,
        )
    return k


def _hermitian_matrix(value, what: str) -> np.ndarray:
    matrix = np.array(value, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"{what} must be a square matrix", actual=matrix.shape)
    _num_qubits_for(matrix.shape[0])
    deviation = np.max(np.abs(matrix - matrix.conj().T))
    if deviation > HERMITIAN_TOL:
        raise NonHermitianError(
            f"{what} is not Hermitian (max deviation {deviation:.3e})",
            expected=f"|M - M^dagger| <= {HERMITIAN_TOL}",
            actual=deviation,
        )
    return frozen_array((matrix + matrix.conj().T) / 2)


class StateVector(BaseModel):
    """Normalized pure state of k <= 4 qubits (qubit 0 = party A is the most significant bit)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amplitudes: np.ndarray = Field(..., description="Complex amplitudes in the z basis")
    num_qubits: int = Field(..., ge=1, le=MAX_QUBITS)

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _to_array(cls, value) -> np.ndarray:
        return frozen_array(np.ravel(np.asarray(value, dtype=complex)))

    @model_validator(mode="after")
    def _check(self) -> "StateVector":
        if self.amplitudes.shape[0] != 2 ** self.num_qubits:
            raise ValueError(f"expected {2 ** self.num_qubits} amplitudes, got {self.amplitudes.shape[0]}")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} differs from 1")
        return self

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        """Normalize and wrap arbitrary nonzero amplitudes"""
        vector = np.ravel(np.asarray(amplitudes, dtype=complex))
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise InvalidParameterError("cannot normalize the zero vector", code="ZERO_STATE")
        return cls(amplitudes=vector / norm, num_qubits=_num_qubits_for(vector.shape[0]))

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])


class Observable(BaseModel):
    """Hermitian operator on the full system"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray = Field(..., description="Hermitian matrix on the full system")
    label: str = Field(default="O", description="Display label")

    @field_validator("matrix", mode="before")
    @classmethod
    def _hermitian(cls, value) -> np.ndarray:
        return _hermitian_matrix(value, "observable")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.dim)


class Hamiltonian(BaseModel):
    """Free Hamiltonian H0 on the full system (angular frequency units, hbar = 1)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray = Field(..., description="Hermitian matrix on the full system")

    @field_validator("matrix", mode="before")
    @classmethod
    def _hermitian(cls, value) -> np.ndarray:
        return _hermitian_matrix(value, "Hamiltonian")

    @classmethod
    def zero(cls, num_qubits: int) -> "Hamiltonian":
        dim = 2 ** num_qubits
        return cls(matrix=np.zeros((dim, dim), dtype=complex))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


def qubit_index(target: Subsystem, num_qubits: int) -> int:
    """Resolve a party tag or qubit index to a qubit index"""
    if isinstance(target, Party):
        if target is Party.SINGLE:
            index = 0
        else:
            index = 0 if target is Party.A else 1
    elif isinstance(target, (int, np.integer)) and not isinstance(target, bool):
        index = int(target)
    else:
        raise InvalidSubsystemError(f"unknown subsystem {target!r}", actual=target)
    if not 0 <= index < num_qubits:
        raise InvalidSubsystemError(
            f"subsystem {target!r} is outside a {num_qubits}-qubit system",
            field_path=["target"],
            expected=f"qubit index in [0, {num_qubits - 1}]",
            actual=target,
        )
    return index


def embed(op: np.ndarray, target: Subsystem, num_qubits: int = 2) -> np.ndarray:
    """Place a single-qubit operator on one qubit, identity elsewhere"""
    index = qubit_index(target, num_qubits)
    factors = [IDENTITY_2] * num_qubits
    factors[index] = np.asarray(op, dtype=complex)
    full = factors[0]
    for factor in factors[1:]:
        full = np.kron(full, factor)
    return full


def epr_state() -> StateVector:
    """(|00> + |11>)/sqrt(2)"""
    amplitude = 1 / math.sqrt(2)
    return StateVector(amplitudes=[amplitude, 0, 0, amplitude], num_qubits=2)


def basis_state(bits: str) -> StateVector:
    """Computational basis state, e.g. '0' for spin up along z"""
    dim = 2 ** len(bits)
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[int(bits, 2)] = 1.0
    return StateVector(amplitudes=amplitudes, num_qubits=len(bits))


def spin_matrix(theta: float) -> np.ndarray:
    """sin(theta) sigma_x + cos(theta) sigma_z"""
    if not math.isfinite(theta):
        raise InvalidParameterError(f"angle must be finite, got {theta}", field_path=["theta"])
    return math.sin(theta) * SIGMA_X + math.cos(theta) * SIGMA_Z


def spin_observable(theta: float, target: Subsystem, num_qubits: int = 2) -> Observable:
    """Spin along theta in the x-z plane on one subsystem (theta = 0 is sigma_z, pi/2 is sigma_x)"""
    label = f"sigma_{theta:.6g}@{target.value if isinstance(target, Party) else target}"
    return Observable(matrix=embed(spin_matrix(theta), target, num_qubits), label=label)


def bloch_observable(direction, target: Subsystem, num_qubits: int = 2) -> Observable:
    """Spin along an arbitrary unit Bloch direction (nx, ny, nz)"""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    op = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return Observable(matrix=embed(op, target, num_qubits), label="sigma_n")


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionMismatchError(f"dimensions do not match: {dims}", actual=dims)


def evolution_operator(h0: Hamiltonian, t: float) -> np.ndarray:
    """U(t) = exp(-i H0 t) from the Hermitian eigendecomposition of H0"""
    energies, vectors = linalg.eigh(h0.matrix)
    return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T


def heisenberg(observable: Observable, h0: Hamiltonian, t: float) -> Observable:
    """O(t) = U^dagger(t) O U(t)"""
    _check_dims(observable.dim, h0.dim)
    if h0.is_zero or t == 0:
        return observable
    u = evolution_operator(h0, t)
    evolved = u.conj().T @ observable.matrix @ u
    return Observable(matrix=(evolved + evolved.conj().T) / 2, label=f"{observable.label}(t={t:g})")


def expectation(psi: StateVector, observable: Observable) -> float:
    """<psi|O|psi>"""
    _check_dims(psi.dim, observable.dim)
    return float(np.real(np.vdot(psi.amplitudes, observable.matrix @ psi.amplitudes)))


def two_time_corr(psi: StateVector, oi: Observable, oj: Observable) -> float:
    """Re <psi| Oi Oj |psi> for operators already in Heisenberg form"""
    _check_dims(psi.dim, oi.dim, oj.dim)
    return float(np.real(np.vdot(psi.amplitudes, oi.matrix @ (oj.matrix @ psi.amplitudes))))


def random_state(rng: np.random.Generator, num_qubits: int = 2) -> StateVector:
    """Haar-random pure state"""
    dim = 2 ** num_qubits
    return StateVector.from_amplitudes(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_direction(rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vector on the Bloch sphere"""
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_local_hamiltonian(rng: np.random.Generator, scale: float = 1.0) -> Hamiltonian:
    """H_A (x) I + I (x) H_B with random single-qubit Hermitian terms"""
    def _term() -> np.ndarray:
        c = rng.standard_normal(3) * scale
        return c[0] * SIGMA_X + c[1] * SIGMA_Y + c[2] * SIGMA_Z

    return Hamiltonian(matrix=embed(_term(), Party.A) + embed(_term(), Party.B))
