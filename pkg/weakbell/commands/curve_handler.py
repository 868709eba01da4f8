"""
Curve command: closed-form tables over sigma (figure 2) or over prior sequences n (figure 3)
"""

from .. import closedform
from ..models import RunConfig
from ..report import Report
from ..tripwires import GRID_DEFAULTS, parse_grid
from .base_handler import BaseCommandHandler

FIG2_COLUMNS = ["sigma", "bs", "var_bs", "n3"]
FIG3_COLUMNS = ["n", "sigma_min", "sigma3", "n3", "bs_at_sigma3"]


class CurveHandler(BaseCommandHandler):
    """Sequential CHSH curves and ensemble-size planning tables"""

    def __init__(self) -> None:
        super().__init__("curve")

    def execute(self, config: RunConfig) -> Report:
        figure = int(config.figure)  # type: ignore[arg-type]
        grid = parse_grid(GRID_DEFAULTS[figure] if config.grid is None else config.grid, integer=figure == 3)
        if figure == 2:
            return self._over_sigma(config, grid)
        return self._over_n(config, [int(n) for n in grid])

    def _over_sigma(self, config: RunConfig, grid) -> Report:
        report = Report.for_config(config, FIG2_COLUMNS)
        for point in closedform.fig2_table(grid, config.z):
            report.add_row(sigma=point.abscissa, bs=point.bs, var_bs=point.var_bs, n3=point.n_3)
        report.note(f"violation threshold sigma = {closedform.sigma_min(0)!r}")
        sigma_3, n_3 = closedform.optimal_sigma(0, config.z)
        report.ok(f"smallest ensemble N = {n_3} at sigma = {sigma_3:.4f} "
                  f"(B_S = {closedform.bs_exact(sigma_3):.4f})")
        report.note(f"regular setting at sigma = 0 needs N = {closedform.n_required(0.0, config.z, 'regular')}")
        return report

    def _over_n(self, config: RunConfig, grid) -> Report:
        report = Report.for_config(config, FIG3_COLUMNS)
        for point in closedform.fig3_table(grid, config.z):
            report.add_row(n=int(point.abscissa), sigma_min=point.sigma_min, sigma3=point.sigma_3,
                           n3=point.n_3, bs_at_sigma3=point.bs)
        report.note(f"{len(report.rows)} rows over prior sequence counts")
        return report
