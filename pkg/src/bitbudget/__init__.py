"""Simulator for nonparametric estimation from bit-limited distributed samples."""

from .inner import BudgetTooSmall, ProtocolVariant, Transcript
from .models import ModelKind, Sample, SieveFunction, make_truth
from .protocol import EstimateResult, mse_trials, run_protocol, worst_case_mse
from .regimes import RegimeCase, RegimeParams, RegimePlan, classify, n_ess, plan
from .wavelet import HAAR, CoeffVector, WaveletFamily

__version__ = "0.1.0"

__all__ = [
    "BudgetTooSmall",
    "CoeffVector",
    "EstimateResult",
    "HAAR",
    "ModelKind",
    "ProtocolVariant",
    "RegimeCase",
    "RegimeParams",
    "RegimePlan",
    "Sample",
    "SieveFunction",
    "Transcript",
    "WaveletFamily",
    "classify",
    "make_truth",
    "mse_trials",
    "n_ess",
    "plan",
    "run_protocol",
    "worst_case_mse",
]
