"""
theorem1 command: random schedules checked against Heisenberg-picture expectations
"""

from .. import schedule
from ..models import RunConfig
from ..report import Report
from .base_handler import BaseCommandHandler

COLUMNS = ["trial", "seed", "max_pair_error", "max_moment_error", "max_pair_se", "budget", "within_budget"]
DEFAULT_ENSEMBLE = 100_000


class Theorem1Handler(BaseCommandHandler):
    """Repeated random-instance convergence checks"""

    def __init__(self) -> None:
        super().__init__("theorem1")

    def execute(self, config: RunConfig) -> Report:
        sigma = float(config.sigma)  # type: ignore[arg-type]
        n = config.ensemble or DEFAULT_ENSEMBLE
        report = Report.for_config(config, COLUMNS)
        passed = 0
        for trial in range(config.trials):
            seed = config.seed + trial
            result = schedule.theorem1_trial(seed, sigma, n, local_h0=config.local_h0)
            passed += int(result.within_budget)
            report.add_row(trial=trial, seed=seed, max_pair_error=result.max_pair_error,
                           max_moment_error=result.max_moment_error,
                           max_pair_se=max(result.pair_se.values()),
                           budget=result.bias_budget, within_budget=result.within_budget)
        message = f"{passed}/{config.trials} trials within 2/sigma^2 + 4 SE (sigma = {sigma:g}, N = {n})"
        if passed == config.trials:
            report.ok(message)
        else:
            report.alert(message)
        return report
