"""Log-log least-squares fit of error against effective sample size."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..regimes import RegimeCase, RegimeParams


@dataclass(frozen=True)
class RatePoint:
    params: RegimeParams
    n_ess: float
    mean_mse: float
    stderr: float
    case_id: RegimeCase

    def __post_init__(self):
        if not self.mean_mse > 0:
            raise ValueError(f"mean_mse must be positive, got {self.mean_mse}")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")


class RateFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def rate_fit(points, weighted=False):
    """Regress log(mean_mse) on log(n_ess).

    With ``weighted`` each point gets weight (mean/stderr)^2, the inverse
    delta-method variance of log(mean_mse).
    """
    points = list(points)
    if len(points) < 4:
        raise ValueError(f"need at least 4 points, got {len(points)}")
    x = np.log([p.n_ess for p in points])
    y = np.log([p.mean_mse for p in points])
    if (x.max() - x.min()) / np.log(10) < 1 - 1e-9:
        raise ValueError("points must span at least one decade of n_ess")
    if weighted:
        se = np.array([p.stderr for p in points])
        if np.any(se <= 0):
            raise ValueError("weighted fit needs positive stderr")
        w = (np.exp(y) / se) ** 2
    else:
        w = np.ones_like(x)
    X = np.column_stack([x, np.ones_like(x)])
    sw = np.sqrt(w)
    (slope, intercept), *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    resid = y - (slope * x + intercept)
    ybar = np.average(y, weights=w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(w * resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2)
