"""
Data models for weakbell
Shared records, estimates and table rows passed between modules
"""

import hashlib
import json
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Pair = Tuple[int, int]
CHSH_PAIRS: Tuple[Pair, ...] = ((1, 1), (1, 2), (2, 1), (2, 2))
CHSH_SIGNS: Dict[Pair, int] = {(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): -1}

# Column labels of certificate (strong, randomly chosen) readings
CERTIFICATE_LABELS: Tuple[str, str] = ("A_s", "B_s")
# Column labels of the regular (one randomly chosen observable per party) setting
REGULAR_LABELS: Tuple[str, str] = ("A", "B")


def frozen_array(value, dtype=None) -> np.ndarray:
    """Copy into a read-only numpy array"""
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class Party(str, Enum):
    """Which observer performs a measurement"""
    A = "A"
    B = "B"
    SINGLE = "single"


class MeasurementMode(str, Enum):
    """Pointer coupling regime of a measurement step"""
    WEAK = "weak"
    STRONG = "strong"


class Setting(str, Enum):
    """CHSH protocol variant"""
    SEQUENTIAL = "sequential"
    REGULAR = "regular"


class NoiseKind(str, Enum):
    """Noise added to hidden-variable values"""
    INDEPENDENT = "independent"
    MALICIOUS = "malicious"


class Verdict(str, Enum):
    """Outcome of the strong-measurement certificate"""
    CONSISTENT = "consistent"
    INTERFERENCE = "hidden-variable interference"


class LgForm(str, Enum):
    """Leggett-Garg combination"""
    K3 = "K3"
    K4 = "K4"

    @property
    def length(self) -> int:
        return int(self.value[1:])


class Reading(BaseModel):
    """One pointer reading"""
    model_config = ConfigDict(frozen=True)

    q: float = Field(..., description="Pointer position; may lie outside [-1, +1]")
    label: str = Field(..., description="Plan step that produced the reading")

    @field_validator("q")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"reading must be finite, got {value}")
        return value


class CycleRecord(BaseModel):
    """Readings of one ensemble member"""
    model_config = ConfigDict(frozen=True)

    readings: Dict[str, Reading] = Field(..., description="Step label -> reading, in step order")
    certificate_choice: Optional[Pair] = Field(None, description="1-based (i, j) of the strongly measured pair")
    seed_index: int = Field(..., ge=0, description="Cycle index used to derive the random stream")


class RecordSet(BaseModel):
    """Ensemble of cycle records, stored column-wise"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    readings: np.ndarray = Field(..., description="N x S matrix of pointer readings")
    labels: List[str] = Field(..., description="Step label of each readings column")
    choices: Optional[np.ndarray] = Field(None, description="N x 2 certificate choices (1-based), if any")
    plan_description: str = Field(..., description="Human-readable description of the generating plan")
    master_seed: int = Field(..., description="Seed the per-cycle streams were derived from")
    parameters: Dict[str, float] = Field(default_factory=dict, description="Plan parameters such as sigma")

    @field_validator("readings", mode="before")
    @classmethod
    def _readings_array(cls, value) -> np.ndarray:
        return frozen_array(value, dtype=float)

    @field_validator("choices", mode="before")
    @classmethod
    def _choices_array(cls, value) -> Optional[np.ndarray]:
        return None if value is None else frozen_array(value, dtype=np.int8)

    @model_validator(mode="after")
    def _check_shape(self) -> "RecordSet":
        if self.readings.ndim != 2 or self.readings.shape[1] != len(self.labels):
            raise ValueError(
                f"readings shape {self.readings.shape} does not match {len(self.labels)} labels")
        if self.readings.shape[0] < 1:
            raise ValueError("a record set holds at least one cycle")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("step labels must be unique")
        if not np.all(np.isfinite(self.readings)):
            raise ValueError("readings must be finite")
        if self.choices is not None and self.choices.shape != (self.readings.shape[0], 2):
            raise ValueError("choices must be an N x 2 matrix")
        return self

    @property
    def n(self) -> int:
        return int(self.readings.shape[0])

    def __len__(self) -> int:
        return self.n

    @property
    def seed_index(self) -> np.ndarray:
        return np.arange(self.n)

    def has(self, label: str) -> bool:
        return label in self.labels

    def column(self, label: str) -> np.ndarray:
        """Readings of one plan step across all cycles"""
        from .errors import PlanShapeError

        if label not in self.labels:
            raise PlanShapeError(
                f"record set has no readings labelled '{label}'",
                code="MISSING_READINGS",
                field_path=["labels"],
                expected=label,
                actual=self.labels,
            )
        return self.readings[:, self.labels.index(label)]

    def cycle(self, index: int) -> CycleRecord:
        """Materialise one cycle as a CycleRecord"""
        row = self.readings[index]
        choice = None
        if self.choices is not None:
            choice = (int(self.choices[index, 0]), int(self.choices[index, 1]))
        return CycleRecord(
            readings={label: Reading(q=float(q), label=label) for label, q in zip(self.labels, row)},
            certificate_choice=choice,
            seed_index=int(index),
        )


class CorrelationEstimate(BaseModel):
    """Sample estimate of a two-party correlation"""
    model_config = ConfigDict(frozen=True)

    pair: Pair = Field(..., description="1-based (i, j): A's i-th and B's j-th observable")
    mean: float = Field(..., description="Sample mean of the reading products")
    se: float = Field(..., ge=0, description="Standard error of the mean")
    n_used: int = Field(..., ge=0, description="Cycles entering the estimate")
    strong: bool = Field(default=False, description="Estimated from certificate readings")


class BsEstimate(BaseModel):
    """Sequential CHSH estimate from per-cycle combinations"""
    model_config = ConfigDict(frozen=True)

    bs_hat: float = Field(..., description="|mean of per-cycle CHSH combination|")
    signed_mean: float = Field(..., description="Mean of the signed combination")
    se: float = Field(..., ge=0, description="Standard error of the mean combination")
    variance: float = Field(..., ge=0, description="Sample variance of the per-cycle combination")
    n_used: int = Field(..., ge=1)


class LgEstimate(BaseModel):
    """Leggett-Garg combination estimate"""
    model_config = ConfigDict(frozen=True)

    form: LgForm
    k_hat: float
    se: float = Field(..., ge=0)
    n_used: int = Field(..., ge=1)


class CovarianceReport(BaseModel):
    """Second-moment structure of the four CHSH reading products"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pairs: List[Pair]
    covariance: np.ndarray = Field(..., description="4 x 4 sample covariance of the products")
    second_moments: np.ndarray = Field(..., description="4 x 4 raw moments E(x_a x_b) of the products")
    second_moment_se: np.ndarray = Field(..., description="Standard errors of the raw moments")
    predicted_diagonal: Optional[float] = Field(None, description="(1 + sigma^2)^2 when sigma is known")
    zero_pattern_ok: bool = Field(..., description="All off-diagonal raw moments within 4 SE of zero")
    diagonal_ok: Optional[bool] = Field(None, description="Diagonal raw moments within 2% of the prediction")


class CertificateVerdict(BaseModel):
    """Comparison of weak and strong pair correlations"""
    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    z_scores: Dict[str, float] = Field(..., description="Pair label 'ij' -> (weak - ratio*strong) z statistic")
    z_reject: float
    strong_chsh: float = Field(..., description="CHSH combination of the strong correlations")
    strong_chsh_se: float
    strong_chsh_within_bound: bool = Field(..., description="strong CHSH <= 2 + 3 SE")


class ChshAnalytics(BaseModel):
    """Closed-form sequential CHSH quantities at one sigma"""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(..., gt=0)
    y: float = Field(..., gt=0, lt=1)
    bs: float
    var_bs: float
    n_z: Optional[int] = Field(None, description="Ensemble size for a z-sigma violation; None if bs <= 2")

    @model_validator(mode="after")
    def _n_z_iff_violation(self) -> "ChshAnalytics":
        if (self.n_z is not None) != (self.bs > 2):
            raise ValueError("n_z is present exactly when bs > 2")
        return self


class CurvePoint(BaseModel):
    """One row of a curve table over sigma or over the prior-sequence count n"""
    model_config = ConfigDict(frozen=True)

    abscissa: float
    bs: float
    var_bs: float
    n_3: Optional[int] = Field(None, ge=1)
    sigma_min: Optional[float] = None
    sigma_3: Optional[float] = None


class Theorem1Result(BaseModel):
    """Monte Carlo check of pointer moments against Heisenberg-picture expectations"""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(..., gt=0)
    n: int = Field(..., ge=1, description="Cycles in the trial ensemble")
    seed: int
    local_h0: bool = Field(default=False, description="Random local free evolution between steps")
    pair_errors: Dict[str, float] = Field(..., description="'Li*Lj' -> |E(q_i q_j) - Re<O_i(t_i) O_j(t_j)>|")
    pair_se: Dict[str, float]
    moment_errors: Dict[str, float] = Field(..., description="Step label -> |E(q_i) - <O_i(t_i)>|")
    moment_se: Dict[str, float]
    bias_budget: float = Field(..., description="2 / sigma^2")

    @property
    def max_pair_error(self) -> float:
        return max(self.pair_errors.values())

    @property
    def max_moment_error(self) -> float:
        return max(self.moment_errors.values())

    @property
    def within_budget(self) -> bool:
        pairs_ok = all(err <= self.bias_budget + 4 * self.pair_se[key] for key, err in self.pair_errors.items())
        moments_ok = all(err <= self.bias_budget + 4 * self.moment_se[key]
                         for key, err in self.moment_errors.items())
        return pairs_ok and moments_ok


class CommandName(str, Enum):
    """Command-line subcommands"""
    CHSH = "chsh"
    CURVE = "curve"
    LHV = "lhv"
    LG = "lg"
    THEOREM1 = "theorem1"


class OutputFormat(str, Enum):
    TEXT = "text"
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Parsed command line; checked by RunConfigTripwires before any compute starts"""
    model_config = ConfigDict(frozen=True)

    command: CommandName
    sigma: Optional[float] = Field(None, description="Pointer spread")
    ensemble: Optional[int] = Field(None, description="Number of cycles N")
    n_prior: int = Field(default=0, description="Prior CHSH sequences")
    z: float = Field(default=3.0, description="Target significance in standard errors")
    seed: int = Field(default=0, description="Master seed")
    certify: bool = Field(default=False, description="Append the strong-measurement certificate")
    setting: Setting = Setting.SEQUENTIAL
    figure: Optional[int] = Field(None, description="Curve table: 2 (over sigma) or 3 (over n)")
    grid: Optional[str] = Field(None, description="Comma list 'a,b,c' or 'start:stop:count'")
    model: Optional[NoiseKind] = Field(None, description="LHV adversary")
    c: Optional[float] = Field(None, description="Malicious shared-noise amplitude")
    angles: Optional[str] = Field(None, description="Comma-separated Leggett-Garg angles in degrees")
    trials: int = Field(default=20, description="Random instances for the theorem1 command")
    local_h0: bool = Field(default=False, description="Random local free evolution in theorem1 trials")
    z_reject: Optional[float] = Field(None, description="Certificate rejection threshold")
    out: Optional[str] = Field(None, description="Output file; stdout when absent")
    format: OutputFormat = OutputFormat.TEXT

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the run parameters (output location excluded)"""
        payload = self.model_dump(mode="json", exclude={"out", "format"})
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()
