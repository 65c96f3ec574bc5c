"""Monte-Carlo checks of the estimator, marginal and likelihood-ratio assumptions."""

from dataclasses import dataclass, field
import math

import numpy as np

from ..models import (
    ModelKind,
    cellwise_loglr,
    father_coefficient,
    make_truth,
    sample,
    samplewise_estimator,
)
from ..wavelet import cell_index
from .tails import fit_subexp, subexp_tail_check

SIGMAS = 4.0
SCALING_RATIO = 10.0


@dataclass
class ScaleResult:
    k: int
    max_z_estimator: float  # worst |mean - f_Hs| / se over cells
    max_z_marginal: float  # worst cell-count deviation from N/k in binomial se
    mean_loglr: float
    nu: float
    beta: float
    tail_fit_passed: bool


@dataclass
class AssumptionReport:
    model: ModelKind
    r: float
    scales: list
    checks: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def summary(self):
        lines = [f"{self.model.value} r={self.r}"]
        for name, ok in self.checks.items():
            lines.append(f"  {name}: {'pass' if ok else 'FAIL'}")
        for name, val in self.constants.items():
            lines.append(f"  {name} = {val:.4g}")
        return "\n".join(lines)


def _ratio(values):
    v = np.abs(np.asarray(values, dtype=float))
    if np.all(v == 0):
        return 1.0
    if np.any(v == 0):
        return math.inf
    return float(v.max() / v.min())


def _scale_check(model, r, k, size, rng, eps):
    f = make_truth(model, k, r, rng, eps=eps)
    x = sample(model, f, rng, size=size)
    H = k.bit_length() - 1
    cells = cell_index(x.t, k)

    # unbiasedness of h(y) phi_{Hs}(t) for f_{Hs}, cell by cell
    z_est = 0.0
    for s in range(1, k + 1):
        est = samplewise_estimator(model, H, s, x)
        se = est.std(ddof=1) / math.sqrt(size)
        dev = abs(est.mean() - father_coefficient(f, H, s))
        z_est = max(z_est, dev / se if se > 0 else (0.0 if dev < 1e-12 else math.inf))

    # the marginal of T puts mass 1/k on every sieve cell
    counts = np.bincount(cells - 1, minlength=k)
    se = math.sqrt(size * (1 / k) * (1 - 1 / k))
    z_marg = float(np.max(np.abs(counts - size / k)) / se) if se > 0 else 0.0

    L = cellwise_loglr(model, f, x)
    fit = fit_subexp(L)
    return ScaleResult(k, z_est, z_marg, float(L.mean()), fit.nu, fit.beta, fit.passed), L


def verify_assumptions(model, r, k_grid=(8, 16, 32), samples_per_k=100_000, rng=None, eps="auto"):
    """Run the estimator, marginal and log-likelihood-ratio checks over ``k_grid``.

    The log-likelihood ratio checks are: |mean L| k^{2r} stays within a
    factor 10 across the grid, and every scale's centred ratio passes the
    tail check at (nu, beta) = (C_nu k^{-r}, C_beta k^{-r}) with the
    constants fitted as the largest scaled per-scale fits.
    """
    model = ModelKind.parse(model)
    rng = np.random.default_rng() if rng is None else rng
    results, ratios = [], []
    for k in k_grid:
        res, L = _scale_check(model, r, int(k), samples_per_k, rng, eps)
        results.append(res)
        ratios.append(L)

    rep = AssumptionReport(model, r, results)
    rep.checks["estimator unbiased"] = all(s.max_z_estimator <= SIGMAS for s in results)
    rep.checks["cell marginal uniform"] = all(s.max_z_marginal <= SIGMAS for s in results)
    scaled_mean = [abs(s.mean_loglr) * s.k ** (2 * r) for s in results]
    ratio = _ratio(scaled_mean)
    rep.checks["loglr mean scaling"] = ratio <= SCALING_RATIO
    rep.constants["loglr mean ratio"] = ratio

    c_nu = max(s.nu * s.k**r for s in results)
    c_beta = max(s.beta * s.k**r for s in results)
    rep.constants["C_nu"] = c_nu
    rep.constants["C_beta"] = c_beta
    tails_ok = all(s.tail_fit_passed for s in results)
    for s, L in zip(results, ratios):
        check = subexp_tail_check(L, c_nu * s.k ** (-r), c_beta * s.k ** (-r))
        tails_ok = tails_ok and check.passed
    rep.checks["loglr sub-exponential"] = tails_ok
    return rep
