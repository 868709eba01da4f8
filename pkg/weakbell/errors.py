"""
Error types for weakbell
Every error carries an ErrorDetails record so the CLI can report field paths and fixes
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class ErrorDetails:
    """Detailed error information for debugging and resolution"""
    error_type: str  # "VALIDATION_ERROR", "SHAPE_ERROR", "SIMULATION_ERROR"
    error_code: str  # Specific error code
    error_message: str  # Human-readable description
    field_path: List[str] = field(default_factory=list)  # Path to problematic field
    expected_format: Optional[str] = None  # What was expected
    actual_value: Optional[Any] = None  # What was received
    suggestions: List[str] = field(default_factory=list)  # How to fix it

    def to_dict(self) -> Dict[str, Any]:
        """Convert error details to dictionary"""
        return {
            'error_type': self.error_type,
            'error_code': self.error_code,
            'error_message': self.error_message,
            'field_path': self.field_path,
            'expected_format': self.expected_format,
            'actual_value': str(self.actual_value) if self.actual_value is not None else None,
            'suggestions': self.suggestions,
        }


@dataclass
class ValidationResults:
    """Aggregated outcome of the run-configuration tripwires"""
    is_valid: bool
    validation_errors: List[ErrorDetails] = field(default_factory=list)
    validation_warnings: List[ErrorDetails] = field(default_factory=list)
    validation_passed: List[str] = field(default_factory=list)  # Tripwires that passed

    def to_dict(self) -> Dict[str, Any]:
        """Convert validation results to dictionary"""
        return {
            'is_valid': self.is_valid,
            'validation_errors': [error.to_dict() for error in self.validation_errors],
            'validation_warnings': [warning.to_dict() for warning in self.validation_warnings],
            'validation_passed': self.validation_passed,
        }


class WeakBellError(Exception):
    """Base class for all weakbell errors"""

    error_type = "WEAKBELL_ERROR"
    default_code = "ERROR"

    def __init__(self, message: str, *, code: Optional[str] = None,
                 field_path: Optional[List[str]] = None,
                 expected: Optional[str] = None, actual: Any = None,
                 suggestions: Optional[List[str]] = None):
        super().__init__(message)
        self.details = ErrorDetails(
            error_type=self.error_type,
            error_code=code or self.default_code,
            error_message=message,
            field_path=field_path or [],
            expected_format=expected,
            actual_value=actual,
            suggestions=suggestions or [],
        )


class InvalidParameterError(WeakBellError, ValueError):
    """A precondition on an operation argument does not hold"""
    error_type = "VALIDATION_ERROR"
    default_code = "INVALID_PARAMETER"


class InvalidSubsystemError(InvalidParameterError):
    """Subsystem tag does not name a qubit of the system"""
    default_code = "INVALID_SUBSYSTEM"


class DimensionMismatchError(InvalidParameterError):
    """Operator and state dimensions disagree"""
    default_code = "DIMENSION_MISMATCH"


class NonHermitianError(InvalidParameterError):
    """Matrix is not Hermitian within tolerance"""
    default_code = "NON_HERMITIAN"


class PlanShapeError(WeakBellError, ValueError):
    """A record set does not carry the readings an estimator needs"""
    error_type = "SHAPE_ERROR"
    default_code = "WRONG_PLAN_SHAPE"


class SimulationError(WeakBellError, AssertionError):
    """Internal invariant broken during simulation"""
    error_type = "SIMULATION_ERROR"
    default_code = "ASSERTION_FAILED"


def require_positive(value: float, name: str, *, allow_zero: bool = False) -> float:
    """Raise InvalidParameterError unless value is a finite positive number"""
    ok = value >= 0 if allow_zero else value > 0
    if not (ok and value == value and value != float("inf")):
        bound = ">= 0" if allow_zero else "> 0"
        raise InvalidParameterError(
            f"{name} must be finite and {bound}, got {value}",
            field_path=[name],
            expected=f"finite real {bound}",
            actual=value,
            suggestions=[f"Pass a finite {name} {bound}"],
        )
    return value
