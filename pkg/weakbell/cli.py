"""
weakbell command line

Exit codes: 0 success, 2 invalid flags or parameters, 3 internal assertion
failure, 4 output could not be written.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .commands import build_handlers
from .config import get_settings, init_env
from .errors import ErrorDetails, SimulationError, WeakBellError
from .models import CommandName, NoiseKind, OutputFormat, RunConfig, Setting
from .tripwires import RunConfigTripwires

logger = logging.getLogger("weakbell")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INTERNAL = 3
EXIT_OUTPUT = 4

MODEL_NAMES = {"additive": NoiseKind.INDEPENDENT, "malicious": NoiseKind.MALICIOUS}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TEXT.value,
                        help="report format (default: text)")
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")

    ensemble = argparse.ArgumentParser(add_help=False)
    ensemble.add_argument("--ensemble", type=int, help="number of cycles N")
    ensemble.add_argument("--sigma", type=float, help="pointer spread sigma")

    certify = argparse.ArgumentParser(add_help=False)
    certify.add_argument("--certify", action="store_true",
                         help="append one strong measurement of a randomly chosen observable per party")
    certify.add_argument("--z-reject", type=float, help="certificate rejection threshold (default: 5)")

    parser = argparse.ArgumentParser(prog="weakbell", description="Sequential weak-measurement CHSH simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    chsh = sub.add_parser("chsh", parents=[common, seeded, ensemble, certify],
                          help="run a sequential or regular CHSH ensemble")
    chsh.add_argument("--n-prior", type=int, default=0, help="CHSH sequences measured before the scored one")
    chsh.add_argument("--setting", choices=[s.value for s in Setting], default=Setting.SEQUENTIAL.value)
    chsh.add_argument("--z", type=float, default=3.0, help="significance used for planning notes")

    curve = sub.add_parser("curve", parents=[common], help="closed-form curve tables")
    curve.add_argument("--figure", type=int, help="2: over sigma, 3: over prior sequences n")
    curve.add_argument("--grid", help="'a,b,c' or 'start:stop:count' (defaults: 0.5:8:76 and 1:100:100)")
    curve.add_argument("--z", type=float, default=3.0, help="significance in standard errors (default: 3)")

    lhv = sub.add_parser("lhv", parents=[common, seeded, ensemble, certify], help="hidden-variable adversaries")
    lhv.add_argument("--model", choices=sorted(MODEL_NAMES), help="additive noise or malicious shared noise")
    lhv.add_argument("--c", type=float, help="malicious shared-noise amplitude")

    lg = sub.add_parser("lg", parents=[common, seeded, ensemble], help="weak Leggett-Garg sequence")
    lg.add_argument("--angles", help="comma-separated measurement angles in DEGREES, e.g. 0,45,90,135")

    theorem1 = sub.add_parser("theorem1", parents=[common, seeded, ensemble],
                              help="random schedules against Heisenberg-picture expectations")
    theorem1.add_argument("--trials", type=int, default=20, help="random instances (default: 20)")
    theorem1.add_argument("--local-h0", action="store_true", help="random local free evolution between steps")
    return parser


def to_config(args: argparse.Namespace) -> RunConfig:
    values: Dict[str, Any] = {"command": CommandName(args.command), "format": OutputFormat(args.format)}
    for name in ("sigma", "ensemble", "n_prior", "z", "seed", "certify", "setting", "figure", "grid",
                 "c", "angles", "trials", "local_h0", "z_reject", "out"):
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    if getattr(args, "model", None):
        values["model"] = MODEL_NAMES[args.model]
    return RunConfig(**values)


def _report_errors(errors: List[ErrorDetails]) -> None:
    for error in errors:
        print(f"🚨 {error.error_code}: {error.error_message}", file=sys.stderr)
        for suggestion in error.suggestions:
            print(f"   → {suggestion}", file=sys.stderr)


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    init_env()
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else settings.log_level,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = to_config(args)
    except ValidationError as exc:
        print(f"🚨 invalid arguments: {exc}", file=sys.stderr)
        return EXIT_INVALID

    results = RunConfigTripwires().validate(config)
    for warning in results.validation_warnings:
        logger.warning("%s: %s", warning.error_code, warning.error_message)
    if not results.is_valid:
        _report_errors(results.validation_errors)
        return EXIT_INVALID

    handler = build_handlers()[config.command.value]
    try:
        report = handler.execute_with_timing(config)
    except (SimulationError, AssertionError) as exc:
        logger.error("internal assertion failed: %s", exc)
        return EXIT_INTERNAL
    except WeakBellError as exc:
        _report_errors([exc.details])
        return EXIT_INVALID
    except ValueError as exc:
        print(f"🚨 invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        _write(report.render(config.format), config.out)
    except OSError as exc:
        print(f"🚨 cannot write report to '{config.out}': {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
