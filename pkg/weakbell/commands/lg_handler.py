"""
LG command: weak Leggett-Garg sequences on a single qubit
"""

import math

from .. import estimator, schedule
from ..models import LgForm, RunConfig
from ..qcore import basis_state
from ..report import Report
from ..tripwires import parse_angles
from .base_handler import BaseCommandHandler

COLUMNS = ["quantity", "estimate", "se", "weak_limit"]


class LgHandler(BaseCommandHandler):
    """Two-time correlators and K3 / K4 combinations"""

    def __init__(self) -> None:
        super().__init__("lg")

    def execute(self, config: RunConfig) -> Report:
        angles = parse_angles(config.angles)
        plan = schedule.lg_plan(angles, float(config.sigma), basis_state("0"))  # type: ignore[arg-type]
        records = schedule.run_ensemble(plan, int(config.ensemble), config.seed)  # type: ignore[arg-type]
        report = Report.for_config(config, COLUMNS)

        m = len(angles)
        pairs = [(k, k + 1) for k in range(1, m)] + [(1, m)]
        for a, b in pairs:
            mean, se = estimator.product_estimate(records, f"Q{a}", f"Q{b}")
            report.add_row(quantity=f"C{a}{b}", estimate=mean, se=se,
                           weak_limit=math.cos(angles[a - 1] - angles[b - 1]))

        report.note(f"plan: {plan.description}")
        for form in LgForm:
            if form.length > m:
                continue
            est = estimator.lg_est(records, form)
            limit = sum(math.cos(angles[k] - angles[k + 1]) for k in range(form.length - 1))
            limit -= math.cos(angles[0] - angles[form.length - 1])
            report.add_row(quantity=form.value, estimate=est.k_hat, se=est.se, weak_limit=limit)
            bound = form.length - 2
            if est.k_hat > bound:
                report.ok(f"{form.value} = {est.k_hat:.4f} exceeds the macrorealist bound {bound}")
            else:
                report.alert(f"{form.value} = {est.k_hat:.4f} within the macrorealist bound {bound}")
        return report
