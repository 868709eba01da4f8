"""
LHV command: additive-noise and malicious hidden-variable adversaries
"""

import numpy as np

from .. import estimator, lhv
from ..models import CHSH_PAIRS, NoiseKind, RunConfig, Verdict
from ..report import Report
from .base_handler import BaseCommandHandler
from .chsh_handler import COLUMNS, add_significance


class LhvHandler(BaseCommandHandler):
    """Hidden-variable ensembles in the CHSH record layout"""

    def __init__(self) -> None:
        super().__init__("lhv")

    def execute(self, config: RunConfig) -> Report:
        n = int(config.ensemble)  # type: ignore[arg-type]
        report = Report.for_config(config, COLUMNS)
        if config.model is NoiseKind.MALICIOUS:
            c = float(config.c)  # type: ignore[arg-type]
            records = lhv.run_malicious_lhv(c, n, config.seed, certify=config.certify)
            expected = {pair: 1.0 + (1 if pair[1] == 1 else -1) * c ** 2 for pair in CHSH_PAIRS}
        else:
            # strategy stream is separate from the per-cycle streams
            strategy = lhv.random_strategy(np.random.default_rng([config.seed, 1]))
            records = lhv.run_additive_lhv(strategy, float(config.sigma), n, config.seed,  # type: ignore[arg-type]
                                           certify=config.certify)
            expected = {pair: strategy.correlation(pair) for pair in CHSH_PAIRS}

        weak = estimator.all_correlations(records)
        for est in weak:
            report.add_row(pair=f"{est.pair[0]}{est.pair[1]}", kind="weak", mean=est.mean, se=est.se,
                           n_used=est.n_used, exact=expected[est.pair])
        report.note(f"model: {records.plan_description}")
        add_significance(report, estimator.bs_est(records), "B_S")

        if config.certify:
            strong = estimator.all_correlations(records, strong=True)
            for est in strong:
                report.add_row(pair=f"{est.pair[0]}{est.pair[1]}", kind="strong", mean=est.mean, se=est.se,
                               n_used=est.n_used, exact=None)
            verdict = lhv.certificate_test(weak, strong, config.z_reject)
            if verdict.verdict is Verdict.INTERFERENCE:
                report.alert("interference detected: weak correlations differ from the strong ones")
            else:
                report.ok("certificate consistent: weak correlations match the strong ones")
            report.note(f"strong CHSH = {verdict.strong_chsh!r} (se {verdict.strong_chsh_se!r})")
        return report
