"""Experiment orchestration and numerical verifiers."""

from .assumptions import AssumptionReport, verify_assumptions
from .occupancy import OccupancyStats, balls_bins_sim
from .ratefit import RateFit, RatePoint, rate_fit
from .sweep import CSV_COLUMNS, ExperimentConfig, run_sweep
from .tails import TailReport, fit_subexp, subexp_tail_bound, subexp_tail_check

__all__ = [
    "AssumptionReport",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "OccupancyStats",
    "RateFit",
    "RatePoint",
    "TailReport",
    "balls_bins_sim",
    "fit_subexp",
    "rate_fit",
    "run_sweep",
    "subexp_tail_bound",
    "subexp_tail_check",
    "verify_assumptions",
]
