"""
CHSH command: sequential (optionally certified) and regular ensembles
"""

import math
from typing import Optional

from .. import closedform, estimator, schedule
from ..lhv import certificate_test
from ..models import CHSH_PAIRS, CHSH_SIGNS, BsEstimate, RecordSet, RunConfig, Setting, Verdict
from ..report import Report
from .base_handler import BaseCommandHandler

COLUMNS = ["pair", "kind", "mean", "se", "n_used", "exact"]


def add_significance(report: Report, estimate: BsEstimate, label: str) -> Optional[float]:
    """Summary lines for a CHSH estimate; the z-score uses the signed combination"""
    report.note(f"{label} = {estimate.bs_hat!r} (se {estimate.se!r}, N = {estimate.n_used})")
    if estimate.se == 0:
        report.note("z undefined (zero standard error)")
        return None
    z = estimator.significance(estimate.signed_mean, estimate.se)
    if z > 0:
        report.ok(f"violation of CHSH by {z:.2f} standard errors")
    else:
        report.alert(f"no CHSH violation (z = {z:.2f})")
    return z


class ChshHandler(BaseCommandHandler):
    """Sequential and regular CHSH ensembles"""

    def __init__(self) -> None:
        super().__init__("chsh")

    def execute(self, config: RunConfig) -> Report:
        if config.setting is Setting.REGULAR:
            return self._regular(config)
        return self._sequential(config)

    def _sequential(self, config: RunConfig) -> Report:
        sigma = float(config.sigma)  # type: ignore[arg-type]
        plan = (schedule.certified_plan(sigma) if config.certify
                else schedule.chsh_sequential_plan(sigma, config.n_prior))
        records = schedule.run_ensemble(plan, int(config.ensemble), config.seed)  # type: ignore[arg-type]
        report = Report.for_config(config, COLUMNS)

        exact = closedform.exact_correlations(sigma, config.n_prior)
        for pair, expected in zip(CHSH_PAIRS, exact):
            est = estimator.corr_est(records, pair)
            report.add_row(pair=f"{pair[0]}{pair[1]}", kind="weak", mean=est.mean, se=est.se,
                           n_used=est.n_used, exact=expected)

        estimate = estimator.bs_est(records)
        report.note(f"plan: {plan.description}")
        add_significance(report, estimate, "B_S")
        report.note(f"closed form B_S = {closedform.bs_n(config.n_prior, sigma)!r}")

        if config.certify:
            self._certify(config, records, sigma, report)
        return report

    def _certify(self, config: RunConfig, records: RecordSet, sigma: float, report: Report) -> None:
        strong = estimator.all_correlations(records, strong=True)
        for est, expected in zip(strong, closedform.exact_strong_correlations(sigma)):
            report.add_row(pair=f"{est.pair[0]}{est.pair[1]}", kind="strong", mean=est.mean, se=est.se,
                           n_used=est.n_used, exact=expected)
        verdict = certificate_test(estimator.all_correlations(records), strong, config.z_reject,
                                   ratios=closedform.certificate_ratios(sigma))
        if verdict.verdict is Verdict.CONSISTENT:
            report.ok("certificate consistent: weak correlations match the strong ones")
        else:
            report.alert("certificate failed: hidden-variable interference detected")
        report.note(f"strong CHSH = {verdict.strong_chsh!r} (se {verdict.strong_chsh_se!r})")

    def _regular(self, config: RunConfig) -> Report:
        plan = schedule.regular_plan(config.sigma)
        records = schedule.run_ensemble(plan, int(config.ensemble), config.seed)  # type: ignore[arg-type]
        report = Report.for_config(config, COLUMNS)
        for est in estimator.regular_correlations(records):
            # a single measurement per party leaves every correlation undamped
            report.add_row(pair=f"{est.pair[0]}{est.pair[1]}", kind="regular", mean=est.mean, se=est.se,
                           n_used=est.n_used, exact=CHSH_SIGNS[est.pair] / math.sqrt(2))
        report.note(f"plan: {plan.description}")
        add_significance(report, estimator.regular_bs_est(records), "B")
        planned = closedform.n_required(config.sigma or 0.0, config.z, Setting.REGULAR)
        report.note(f"planned N for {config.z:g} standard errors: {planned}")
        return report
