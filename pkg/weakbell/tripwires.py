"""
Run configuration tripwires
Independent checks on a parsed command line, aggregated before any compute starts
"""

import math
from pathlib import Path
from typing import Callable, List, Optional

from .errors import ErrorDetails, InvalidParameterError, ValidationResults
from .models import CommandName, NoiseKind, RunConfig, Setting

GRID_DEFAULTS = {2: "0.5:8:76", 3: "1:100:100"}


def parse_grid(text: Optional[str], integer: bool = False) -> List[float]:
    """Grid from 'a,b,c' or 'start:stop:count' (inclusive, evenly spaced); '' is the empty grid"""
    text = (text or "").strip()
    if not text:
        return []
    try:
        if ":" in text:
            start_text, stop_text, count_text = text.split(":")
            start, stop, count = float(start_text), float(stop_text), int(count_text)
            if count < 1:
                raise ValueError("count must be >= 1")
            step = 0.0 if count == 1 else (stop - start) / (count - 1)
            values = [start + k * step for k in range(count)]
        else:
            values = [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise InvalidParameterError(
            f"cannot parse grid '{text}': {exc}",
            code="INVALID_GRID",
            field_path=["grid"],
            expected="'a,b,c' or 'start:stop:count'",
            actual=text,
        ) from exc
    if integer:
        rounded = [round(v) for v in values]
        if any(abs(v - r) > 1e-9 or r < 0 for v, r in zip(values, rounded)):
            raise InvalidParameterError(f"grid '{text}' must hold non-negative integers", code="INVALID_GRID",
                                        field_path=["grid"], actual=text)
        return [float(r) for r in rounded]
    if any(not math.isfinite(v) or v <= 0 for v in values):
        raise InvalidParameterError(f"grid '{text}' must hold positive finite values", code="INVALID_GRID",
                                    field_path=["grid"], actual=text)
    return values


def parse_angles(text: Optional[str]) -> List[float]:
    """Comma-separated degrees to radians"""
    try:
        degrees = [float(part) for part in (text or "").split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidParameterError(f"cannot parse angles '{text}'", code="INVALID_ANGLES",
                                    field_path=["angles"], expected="comma-separated degrees",
                                    actual=text) from exc
    if len(degrees) < 3 or not all(math.isfinite(d) for d in degrees):
        raise InvalidParameterError(
            f"need at least 3 finite angles, got '{text}'",
            code="INVALID_ANGLES",
            field_path=["angles"],
            expected=">= 3 comma-separated degrees",
            actual=text,
            suggestions=["Try --angles 0,45,90,135"],
        )
    return [math.radians(d) for d in degrees]


def _error(code: str, message: str, field: str, expected: str, actual, suggestion: str) -> ErrorDetails:
    return ErrorDetails(
        error_type="VALIDATION_ERROR",
        error_code=code,
        error_message=message,
        field_path=[field],
        expected_format=expected,
        actual_value=actual,
        suggestions=[suggestion],
    )


class RunConfigTripwires:
    """Run configuration validation using multiple tripwires"""

    REQUIRED = {
        CommandName.CHSH: ["ensemble"],
        CommandName.CURVE: ["figure"],
        CommandName.LHV: ["model", "ensemble"],
        CommandName.LG: ["angles", "sigma", "ensemble"],
        CommandName.THEOREM1: ["sigma"],
    }

    def validate(self, config: RunConfig) -> ValidationResults:
        """Run all tripwires on the configuration"""
        tripwires: List[Callable[[RunConfig], ValidationResults]] = [
            self._check_required_fields,  # TRIPWIRE 1
            self._check_ranges,  # TRIPWIRE 2
            self._check_combinations,  # TRIPWIRE 3
            self._check_grid,  # TRIPWIRE 4
            self._check_angles,  # TRIPWIRE 5
            self._check_output,  # TRIPWIRE 6
        ]
        all_results = [tripwire(config) for tripwire in tripwires]

        all_errors, all_warnings, all_passed = [], [], []
        for result in all_results:
            all_errors.extend(result.validation_errors)
            all_warnings.extend(result.validation_warnings)
            all_passed.extend(result.validation_passed)

        return ValidationResults(
            is_valid=all(result.is_valid for result in all_results),
            validation_errors=all_errors,
            validation_warnings=all_warnings,
            validation_passed=all_passed,
        )

    def _check_required_fields(self, config: RunConfig) -> ValidationResults:
        """Tripwire: flags each command cannot run without"""
        required = list(self.REQUIRED[config.command])
        if config.command is CommandName.CHSH and config.setting is Setting.SEQUENTIAL:
            required.append("sigma")
        if config.command is CommandName.LHV:
            if config.model is NoiseKind.INDEPENDENT:
                required.append("sigma")
            elif config.model is NoiseKind.MALICIOUS:
                required.append("c")
        missing = [name for name in required if getattr(config, name) is None]
        if missing:
            return ValidationResults(is_valid=False, validation_errors=[
                _error("MISSING_REQUIRED_FLAG", f"{config.command.value} needs --{name.replace('_', '-')}",
                       name, "flag present", None, f"Add --{name.replace('_', '-')}")
                for name in missing
            ])
        return ValidationResults(is_valid=True, validation_passed=["required_fields"])

    def _check_ranges(self, config: RunConfig) -> ValidationResults:
        """Tripwire: numeric preconditions"""
        checks = [
            ("sigma", config.sigma, lambda v: math.isfinite(v) and v > 0, "finite real > 0"),
            ("ensemble", config.ensemble, lambda v: v >= 1, "integer >= 1"),
            ("n_prior", config.n_prior, lambda v: v >= 0, "integer >= 0"),
            ("z", config.z, lambda v: math.isfinite(v) and v > 0, "finite real > 0"),
            ("seed", config.seed, lambda v: v >= 0, "integer >= 0"),
            ("c", config.c, lambda v: math.isfinite(v) and v >= 0, "finite real >= 0"),
            ("trials", config.trials, lambda v: v >= 1, "integer >= 1"),
            ("z_reject", config.z_reject, lambda v: math.isfinite(v) and v > 0, "finite real > 0"),
            ("figure", config.figure, lambda v: v in (2, 3), "2 or 3"),
        ]
        errors = [
            _error("OUT_OF_RANGE", f"--{name.replace('_', '-')} must be {expected}, got {value}",
                   name, expected, value, f"Pass --{name.replace('_', '-')} as a {expected}")
            for name, value, ok, expected in checks
            if value is not None and not ok(value)
        ]
        if errors:
            return ValidationResults(is_valid=False, validation_errors=errors)
        return ValidationResults(is_valid=True, validation_passed=["ranges"])

    def _check_combinations(self, config: RunConfig) -> ValidationResults:
        """Tripwire: flags that cannot be combined"""
        errors = []
        if config.certify and config.command is CommandName.CHSH:
            if config.n_prior > 0:
                errors.append(_error("INCOMPATIBLE_FLAGS", "--certify runs without prior sequences",
                                     "certify", "--n-prior 0", config.n_prior, "Drop --n-prior or --certify"))
            if config.setting is Setting.REGULAR:
                errors.append(_error("INCOMPATIBLE_FLAGS", "--certify applies to the sequential setting",
                                     "certify", "--setting sequential", config.setting.value,
                                     "Drop --certify or use --setting sequential"))
        if config.setting is Setting.REGULAR and config.n_prior > 0:
            errors.append(_error("INCOMPATIBLE_FLAGS", "--n-prior applies to the sequential setting",
                                 "n_prior", "0", config.n_prior, "Drop --n-prior"))
        if errors:
            return ValidationResults(is_valid=False, validation_errors=errors)
        return ValidationResults(is_valid=True, validation_passed=["combinations"])

    def _check_grid(self, config: RunConfig) -> ValidationResults:
        """Tripwire: curve grids parse"""
        if config.command is not CommandName.CURVE or config.figure not in GRID_DEFAULTS:
            return ValidationResults(is_valid=True, validation_passed=["grid"])
        return self._parse_check(lambda: parse_grid(
            GRID_DEFAULTS[config.figure] if config.grid is None else config.grid,
            integer=config.figure == 3), "grid")

    def _check_angles(self, config: RunConfig) -> ValidationResults:
        """Tripwire: Leggett-Garg angles parse"""
        if config.command is not CommandName.LG or config.angles is None:
            return ValidationResults(is_valid=True, validation_passed=["angles"])
        return self._parse_check(lambda: parse_angles(config.angles), "angles")

    def _check_output(self, config: RunConfig) -> ValidationResults:
        """Tripwire: output directory exists (writing itself fails with exit code 4)"""
        if config.out is None or Path(config.out).parent.exists():
            return ValidationResults(is_valid=True, validation_passed=["output"])
        return ValidationResults(is_valid=True, validation_warnings=[
            _error("OUTPUT_DIRECTORY_MISSING", f"directory of '{config.out}' does not exist", "out",
                   "existing directory", config.out, "Create the directory or change --out")
        ])

    @staticmethod
    def _parse_check(parse: Callable[[], object], name: str) -> ValidationResults:
        try:
            parse()
        except InvalidParameterError as exc:
            return ValidationResults(is_valid=False, validation_errors=[exc.details])
        return ValidationResults(is_valid=True, validation_passed=[name])
