"""Empirical checks of sub-exponential tail bounds.

A centred variable is sub-exponential with parameters (nu, beta) when
P[|X - EX| >= t] <= 2 exp(-t^2 / (2 nu^2)) for t <= nu^2 / beta and
2 exp(-t / (2 beta)) beyond.  beta = 0 is the sub-Gaussian case.
"""

from dataclasses import dataclass
import math

import numpy as np

MIN_SAMPLES = 1000
# normal-consistent MAD factor
_MAD_SCALE = 1.4826


def subexp_tail_bound(t, nu, beta):
    t = np.asarray(t, dtype=float)
    if nu <= 0 or beta < 0:
        raise ValueError("need nu > 0 and beta >= 0")
    gauss = 2 * np.exp(-(t**2) / (2 * nu**2))
    if beta == 0:
        out = gauss
    else:
        out = np.where(t <= nu**2 / beta, gauss, 2 * np.exp(-t / (2 * beta)))
    return np.minimum(out, 1.0)


def _thresholds(dev):
    """Order statistics leaving 0, 1, 3, 10, 30, ... samples strictly beyond them, plus the median."""
    s = np.sort(dev)
    N = s.size
    counts = [0]
    c = 1
    while c < N // 2:
        counts.append(c)
        c = c * 3 if str(c)[0] == "1" else c * 10 // 3
    idx = sorted({N - 1 - c for c in counts} | {N // 2})
    return s[idx]


@dataclass(frozen=True)
class TailReport:
    passed: bool
    nu: float
    beta: float
    thresholds: np.ndarray
    empirical: np.ndarray
    bound: np.ndarray
    slack: np.ndarray  # 3 binomial standard errors, taken at the bound
    degenerate: bool = False

    def worst_margin(self):
        if self.thresholds.size == 0:
            return 0.0
        return float(np.max(self.empirical - self.bound - self.slack))


def _prepare(samples):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    return np.abs(x - x.mean())


def _degenerate(dev):
    return not np.any(dev > 1e-12 * max(1.0, float(np.max(dev, initial=0.0))))


def _report(dev, nu, beta, thresholds):
    N = dev.size
    empirical = np.array([np.mean(dev >= t) for t in thresholds])
    bound = subexp_tail_bound(thresholds, nu, beta)
    slack = 3 * np.sqrt(bound * (1 - bound) / N)
    passed = bool(np.all(empirical <= bound + slack))
    return TailReport(passed, nu, beta, thresholds, empirical, bound, slack)


def subexp_tail_check(samples, nu, beta, thresholds=None):
    """Compare empirical two-sided tail frequencies with the (nu, beta) bound on a threshold grid."""
    dev = _prepare(samples)
    if _degenerate(dev):
        empty = np.zeros(0)
        return TailReport(True, nu, beta, empty, empty, empty, empty, degenerate=True)
    grid = _thresholds(dev) if thresholds is None else np.asarray(thresholds, dtype=float)
    return _report(dev, nu, beta, grid)


def robust_scale(samples):
    x = np.asarray(samples, dtype=float)
    return _MAD_SCALE * float(np.median(np.abs(x - np.median(x))))


def fit_subexp(samples, steps=8, cap=16.0):
    """Smallest (nu, beta) on a half-octave grid around the robust scale that passes the check.

    The grid is sigma * 2^{j/2} for |j| <= 2 * steps, capped at ``cap * sigma``
    with sigma = 1.4826 MAD, and beta also takes the value 0.  beta is
    minimised first (as close to sub-Gaussian as the data allow), then nu.
    Returns a failing report at the largest grid point when
    nothing passes.
    """
    dev = _prepare(samples)
    if _degenerate(dev):
        return subexp_tail_check(samples, 1.0, 0.0)
    sigma = robust_scale(samples)
    if sigma == 0:
        # more than half the mass at one point; fall back to the standard deviation
        sigma = float(np.std(samples))
    grid = sigma * 2.0 ** (np.arange(-2 * steps, 2 * steps + 1) / 2)
    grid = grid[grid <= cap * sigma * (1 + 1e-12)]
    betas = np.concatenate([[0.0], grid])
    thresholds = _thresholds(dev)
    for beta in betas:
        for nu in grid:
            rep = _report(dev, float(nu), float(beta), thresholds)
            if rep.passed:
                return rep
    return _report(dev, float(grid[-1]), float(grid[-1]), thresholds)
