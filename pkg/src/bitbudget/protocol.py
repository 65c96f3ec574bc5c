"""Outer layer: wavelet quantization into W-symbols, the inner round, linear decoding.

A W-symbol is ``(S, V)`` with cell ``S`` in ``1..K`` and ``V`` a
``2S+2``-bit vector; slot ``j`` of ``V`` belongs to the ``j``-th element of
the ascending neighbourhood of ``S`` and unused slots carry fair coin
flips.  The flat symbol index is ``(S-1) * 2^{2S+2} + int(V)`` with ``V``
read big-endian.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple, Optional

import numpy as np

from . import inner as inner_mod
from .inner import ProtocolVariant, Transcript
from .models import ModelKind, father_coefficient, response_transform, sample
from .regimes import DEFAULT_C3, RegimePlan, plan as make_plan
from .wavelet import HAAR, CoeffVector, approximation_tail, cell_index, l2_error_exact, neighborhood


@dataclass(frozen=True)
class WSample:
    S: int
    V: tuple

    def index(self, slots=HAAR.slots):
        return (self.S - 1) * (1 << slots) + int("".join(map(str, self.V)), 2)


@dataclass(frozen=True)
class OuterConfig:
    plan: RegimePlan
    model: ModelKind
    K0: float
    variant: ProtocolVariant
    inner_params: dict

    def __post_init__(self):
        if not self.K0 > 0:
            raise ValueError("K0 must be positive")
        if self.plan.K < 1:
            raise ValueError("K must be at least 1")


@dataclass(frozen=True)
class EstimateResult:
    coeffs: CoeffVector
    l2_error: float
    transcript_bits: int
    config: OuterConfig
    transcript: Optional[Transcript] = None


def truncate(w, K0):
    """(w ∧ K0) ∨ (-K0)."""
    out = np.clip(w, -K0, K0)
    return float(out) if np.ndim(out) == 0 else out


def neighbor_table(H, family=HAAR):
    """(K, 2S+2) array of 1-based neighbour indices per cell, 0 for an unused slot."""
    K = 1 << H
    table = np.zeros((K, family.slots), dtype=np.int64)
    for s in range(1, K + 1):
        nb = neighborhood(family, H, s)
        table[s - 1, : len(nb)] = nb
    return table


def _slot_bits(slots):
    v = np.arange(1 << slots)
    return (v[:, None] >> np.arange(slots - 1, -1, -1)) & 1


def quantize(model, H, x, K0, rng, family=HAAR):
    """Vectorised quantizer: returns (cells S, bit matrix V, flat symbol indices)."""
    K = 1 << H
    slots = family.slots
    t = np.atleast_1d(np.asarray(x.t, dtype=float))
    hy = response_transform(model, np.atleast_1d(np.asarray(x.y, dtype=float)))
    S = cell_index(t, K)
    nb = neighbor_table(H, family)[S - 1]
    # Haar: phi_{Hs'}(t) is 2^{H/2} exactly when s' is t's own cell
    phi = np.where(nb == S[:, None], 2.0 ** (H / 2), 0.0)
    q = (truncate(hy[:, None] * phi, K0) + K0) / (2 * K0)
    q = np.where(nb > 0, q, 0.5)
    V = (rng.random(q.shape) < q).astype(np.int64)
    weights = 1 << np.arange(slots - 1, -1, -1)
    return S, V, (S - 1) * (1 << slots) + V @ weights


def quantize_sample(model, H, x, K0, rng, family=HAAR):
    """Quantize a single observation into a :class:`WSample`."""
    S, V, _ = quantize(model, H, x, K0, rng, family)
    return WSample(int(S[0]), tuple(int(b) for b in V[0]))


def decode_coeffs(p_hat, K, K0, family=HAAR):
    """bar f_{Hs} = sum over s' with s in N_{Hs'} of 2 K0 (sum_{v: v(s)=1} p(s', v) - p(s') / 2)."""
    slots = family.slots
    p = np.asarray(p_hat, dtype=float)
    if p.shape != (K << slots,):
        raise ValueError(f"expected {K << slots} symbol probabilities, got shape {p.shape}")
    p = p.reshape(K, 1 << slots)
    H = K.bit_length() - 1
    table = neighbor_table(H, family)
    ones = p @ _slot_bits(slots)  # (K, slots): mass with slot j set
    marginal = p.sum(axis=1)
    contrib = 2 * K0 * (ones - 0.5 * marginal[:, None])
    out = np.zeros(K)
    used = table > 0
    np.add.at(out, table[used] - 1, contrib[used])
    return CoeffVector(H, out)


def _piece_truncated(model, mean, scale, K0):
    """E[trunc(h(Y) phi)] where phi = ``scale`` and the response law has mean function value ``mean``."""
    from scipy import stats

    c = K0 / scale  # truncation threshold on h(y)
    if model is ModelKind.DENSITY:
        return np.full(mean.shape, min(scale, K0))
    if model is ModelKind.GAUSSIAN:
        a, b = -c - mean, c - mean
        # E[clip(Y, -c, c)] for Y ~ N(mean, 1)
        inner = (
            -c * stats.norm.cdf(a)
            + c * stats.norm.sf(b)
            + mean * (stats.norm.cdf(b) - stats.norm.cdf(a))
            + stats.norm.pdf(a)
            - stats.norm.pdf(b)
        )
    elif model is ModelKind.BINARY:
        inner = mean * min(1.0, c)
    elif model is ModelKind.POISSON:
        cap = math.floor(c)
        ys = np.arange(cap + 1)
        pmf = stats.poisson.pmf(ys[None, :], mean[:, None])
        inner = (pmf * ys).sum(axis=1) + c * stats.poisson.sf(cap, mean)
    else:
        # Y^2 = mean * chi2_1 and x f_1(x) = f_3(x), so E[min(Y^2, c)] has a closed form
        u = c / mean
        inner = mean * (stats.chi2.cdf(u, 3) + u * stats.chi2.sf(u, 1))
    return scale * inner


def _pieces(model, f, H):
    """Split [0, 1] into equal pieces on which both the truth and phi_{H.} are constant.

    Returns (value of f, probability that T falls in the piece, owning father cell).
    """
    K = 1 << H
    vals = f.piecewise_values()
    grid = max(vals.size, K)
    fine = np.repeat(vals, grid // vals.size)
    owner = np.repeat(np.arange(K), grid // K)
    mass = fine / grid if model is ModelKind.DENSITY else np.full(grid, 1.0 / grid)
    return fine, mass, owner


def expected_truncated(model, f, H, K0):
    """E[trunc(f_hat_{Hs}(X))] for every s, integrated exactly over the sieve's pieces."""
    model = ModelKind.parse(model)
    fine, mass, owner = _pieces(model, f, H)
    e = _piece_truncated(model, fine, 2.0 ** (H / 2), K0)
    return np.bincount(owner, weights=mass * e, minlength=1 << H)


def exact_symbol_law(model, f, H, K0, family=HAAR):
    """Exact joint law of the W-symbol (S, V) under a sieve truth.

    Within a piece the informative slot is Bern(Q(Y)) with Y random, so its
    marginal success probability is E[Q]; padding slots are fair coins.
    """
    model = ModelKind.parse(model)
    K = 1 << H
    fine, mass, owner = _pieces(model, f, H)
    eq = (_piece_truncated(model, fine, 2.0 ** (H / 2), K0) + K0) / (2 * K0)
    table = neighbor_table(H, family)
    bits = _slot_bits(family.slots)
    law = np.zeros((K, 1 << family.slots))
    for s in range(K):
        sel = owner == s
        # rows: pieces of cell s; probability of every bit pattern v
        probs = np.where(table[s] > 0, eq[sel][:, None], 0.5)
        pv = np.prod(np.where(bits[None, :, :] == 1, probs[:, None, :], 1 - probs[:, None, :]), axis=2)
        law[s] = mass[sel] @ pv
    return law.ravel()


def _streams(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(c) for c in ss.spawn(4)]


def configure(params, model, c3=DEFAULT_C3, theory_constants=False, c_inner=1.0,
              variant=None, inner_params=None, family=HAAR):
    """Preparation step: plan, truncation level and inner protocol."""
    model = ModelKind.parse(model)
    pl = make_plan(params, c3, family, theory_constants, c_inner)
    alphabet = pl.K << family.slots
    if variant is None:
        variant, chosen = inner_mod.select_protocol(pl.case_id, alphabet, params.m, params.n, params.l)
        inner_params = {**chosen, **(inner_params or {})}
    return OuterConfig(pl, model, pl.K0, ProtocolVariant(variant), dict(inner_params or {}))


def run_protocol(params, model, truth, seed=None, keep_transcript=False, family=HAAR, **overrides):
    """One end-to-end execution; deterministic given ``seed``.

    ``overrides`` go to :func:`configure` (c3, theory_constants, c_inner,
    variant, inner_params).
    """
    params.require_protocol_range()
    family.check_regularity(params.r)
    if abs(truth.r - params.r) > 1e-12:
        raise ValueError(f"truth regularity {truth.r} differs from r={params.r}")
    cfg = configure(params, model, family=family, **overrides)
    data_rng, quant_rng, public_rng, private_rng = _streams(seed)
    m, n, l = params.m, params.n, params.l
    H, K, K0 = cfg.plan.H, cfg.plan.K, cfg.K0

    # terminals are non-interactive, so all m encoders are evaluated in one batch, in index order
    x = sample(cfg.model, truth, data_rng, size=m * n)
    _, _, symbols = quantize(cfg.model, H, x, K0, quant_rng, family)
    transcript, p_hat = inner_mod.run_inner(
        cfg.variant, K << family.slots, m, n, l, symbols.reshape(m, n), public_rng, private_rng,
        **cfg.inner_params,
    )
    if transcript.total_bits != m * l:
        raise AssertionError("transcript violates the bit budget")
    coeffs = decode_coeffs(p_hat, K, K0, family)
    return EstimateResult(
        coeffs, l2_error_exact(truth, coeffs), transcript.total_bits, cfg,
        transcript if keep_transcript else None,
    )


class TrialStats(NamedTuple):
    mean_mse: float
    stderr: float
    errors: np.ndarray


def mse_trials(params, model, truth, trials, seed=None, **overrides):
    """Mean and standard error of the L2 error over independent trials."""
    if trials < 2:
        raise ValueError("need at least two trials")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    errors = np.array([
        run_protocol(params, model, truth, child, **overrides).l2_error for child in ss.spawn(trials)
    ])
    return TrialStats(float(errors.mean()), float(errors.std(ddof=1) / math.sqrt(trials)), errors)


def truncation_rate(model, truth, H, K0, size, rng):
    """Fraction of samples whose own-cell estimate exceeds K0 in magnitude."""
    x = sample(model, truth, rng, size=size)
    est = response_transform(model, x.y) * 2.0 ** (H / 2)
    return float(np.mean(np.abs(est) > K0))


def error_decomposition(params, model, truth, trials, seed=None, **overrides):
    """Split the mean L2 error into truncation bias, variance and approximation tail."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    runs = [run_protocol(params, model, truth, child, **overrides) for child in ss.spawn(trials)]
    cfg = runs[0].config
    H, K0 = cfg.plan.H, cfg.K0
    coeffs = np.array([r.coeffs.coeffs for r in runs])
    errors = np.array([r.l2_error for r in runs])
    exact = np.array([father_coefficient(truth, H, s) for s in range(1, (1 << H) + 1)])
    shifted = expected_truncated(cfg.model, truth, H, K0)
    return {
        "total": float(errors.mean()),
        "total_se": float(errors.std(ddof=1) / math.sqrt(trials)),
        "truncation_bias2": float(np.sum((exact - shifted) ** 2)),
        "variance": float(np.sum(coeffs.var(axis=0, ddof=1))),
        "empirical_bias2": float(np.sum((coeffs.mean(axis=0) - exact) ** 2)),
        "tail": approximation_tail(truth, H),
        "coeffs": coeffs,
        "config": cfg,
    }


def truth_grid(model, r, scales, rng, signs=1, C0=None):
    """Sieve truths at every scale in ``scales``, ``signs`` random sign vectors each."""
    from .models import make_truth

    return [make_truth(model, k, r, rng, C0=C0) for k in scales for _ in range(signs)]


class WorstCase(NamedTuple):
    mean_mse: float
    stderr: float
    errors: np.ndarray  # per-trial errors of the worst truth
    index: int  # position of the worst truth in the grid
    means: np.ndarray  # mean error of every truth


def worst_case_mse(params, model, truths, trials, seed=None, **overrides):
    """Largest mean error over a grid of truths, a finite stand-in for the sup over the class.

    Every truth reuses the same per-trial seeds, so results for different
    configurations with the same ``seed`` are paired trial by trial.
    """
    runs = [mse_trials(params, model, f, trials, seed, **overrides) for f in truths]
    means = np.array([s.mean_mse for s in runs])
    worst = int(np.argmax(means))
    s = runs[worst]
    return WorstCase(s.mean_mse, s.stderr, s.errors, worst, means)
