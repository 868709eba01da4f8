"""
weakbell - sequential weak-measurement CHSH simulator
"""

__version__ = "0.1.0"
__description__ = "Monte Carlo and closed-form analysis of sequential weak-measurement Bell tests"

from .closedform import bs_exact, bs_n, n_required, sigma_min, var_bs  # noqa: E402
from .errors import InvalidParameterError, PlanShapeError, SimulationError, WeakBellError  # noqa: E402
from .estimator import bs_est, corr_est, cov_check, lg_est, significance  # noqa: E402
from .schedule import certified_plan, chsh_sequential_plan, lg_plan, run_ensemble  # noqa: E402

__all__ = [
    "__version__",
    "bs_exact",
    "bs_n",
    "bs_est",
    "certified_plan",
    "chsh_sequential_plan",
    "corr_est",
    "cov_check",
    "InvalidParameterError",
    "lg_est",
    "lg_plan",
    "n_required",
    "PlanShapeError",
    "run_ensemble",
    "sigma_min",
    "significance",
    "SimulationError",
    "var_bs",
    "WeakBellError",
]
