"""The five sample-generating models, the sieve truth family and their likelihood ratios."""

from dataclasses import dataclass, field
import enum
from typing import NamedTuple

import numpy as np

from .wavelet import HAAR, cell_index, eval_father, sieve_psi


class ModelKind(str, enum.Enum):
    DENSITY = "density"
    GAUSSIAN = "gaussian"
    BINARY = "binary"
    POISSON = "poisson"
    HETEROSKEDASTIC = "heteroskedastic"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "gaussianregression": "gaussian",
            "binaryregression": "binary",
            "classification": "binary",
            "poissonregression": "poisson",
            "heteroskedasticregression": "heteroskedastic",
        }
        return cls(aliases.get(key, key))


ALL_MODELS = tuple(ModelKind)

_POSITIVE = (ModelKind.DENSITY, ModelKind.POISSON, ModelKind.HETEROSKEDASTIC)


class Sample(NamedTuple):
    """Observations ``X = (T, Y)``; fields are scalars or equal-length arrays."""

    t: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class SieveFunction:
    """f(t) = C0 + eps k^{-(r+1/2)} sum_s z_s psi^k_s(t) with Haar mothers.

    Under Haar the function is constant on each half cell, taking
    ``C0 + eps k^{-r} z_s`` on the left half of cell s and
    ``C0 - eps k^{-r} z_s`` on the right half.
    """

    k: int
    C0: float
    eps: float
    z: np.ndarray = field(repr=False)
    r: float = 0.8

    def __post_init__(self):
        if self.k < 1 or self.k & (self.k - 1):
            raise ValueError(f"k={self.k} is not a power of two")
        z = np.asarray(self.z, dtype=float)
        if z.shape != (self.k,) or not np.all(np.abs(z) == 1.0):
            raise ValueError("z must hold k entries in {-1, +1}")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"eps={self.eps} outside [0, 1]")
        if self.C0 > 0 and self.amplitude > self.C0 / 2 * (1 + 1e-12):
            raise ValueError("eps too large: f leaves [C0/2, 3C0/2]")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @classmethod
    def random(cls, k, C0, eps, r, rng):
        z = rng.choice(np.array([-1.0, 1.0]), size=k)
        return cls(k=k, C0=C0, eps=eps, z=z, r=r)

    @property
    def amplitude(self):
        """Height eps k^{-r} of each Haar bump."""
        return self.eps * self.k ** (-self.r)

    def piecewise_values(self):
        a = self.amplitude * self.z
        return np.column_stack([self.C0 + a, self.C0 - a]).ravel()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        half = np.minimum(np.floor(2 * self.k * t).astype(np.int64), 2 * self.k - 1)
        out = self.piecewise_values()[half]
        return float(out) if out.ndim == 0 else out

    def with_z(self, z):
        return SieveFunction(self.k, self.C0, self.eps, z, self.r)


def default_C0(model):
    model = ModelKind.parse(model)
    return {
        ModelKind.DENSITY: 1.0,
        ModelKind.GAUSSIAN: 0.0,
        ModelKind.BINARY: 0.5,
        ModelKind.POISSON: 1.0,
        ModelKind.HETEROSKEDASTIC: 1.0,
    }[model]


def eps_max(model, k, C0, r):
    """Largest eps <= 1 keeping the sieve valid for ``model``."""
    model = ModelKind.parse(model)
    if k < 1 or k & (k - 1):
        raise ValueError(f"k={k} is not a power of two")
    if model in _POSITIVE and C0 <= 0:
        raise ValueError(f"{model.value} model needs C0 > 0, got {C0}")
    if model is ModelKind.DENSITY and C0 != 1.0:
        raise ValueError("a density sieve needs C0 = 1")
    if model is ModelKind.BINARY and not 0.0 < C0 < 1.0:
        raise ValueError(f"binary model needs 0 < C0 < 1, got {C0}")
    bound = 1.0
    # sup|psi^k_s| = sqrt(k) for Haar, so the bump height is eps k^{-r}
    if C0 > 0:
        bound = min(bound, C0 / 2 * k**r)
    if model is ModelKind.BINARY:
        bound = min(bound, min(C0, 1.0 - C0) * k**r)
    return bound


def make_truth(model, k, r, rng, C0=None, eps="auto"):
    """Random-sign sieve truth with model defaults."""
    model = ModelKind.parse(model)
    C0 = default_C0(model) if C0 is None else float(C0)
    e = eps_max(model, k, C0, r) if eps == "auto" else float(eps)
    return SieveFunction.random(k, C0, e, r, rng)


def _check_truth(model, f):
    if model is ModelKind.DENSITY and f.C0 != 1.0:
        raise ValueError("density truth must have C0 = 1")
    if model in _POSITIVE and f.C0 <= 0:
        raise ValueError(f"{model.value} truth must have C0 > 0")
    if model is ModelKind.BINARY:
        lo, hi = f.C0 - f.amplitude, f.C0 + f.amplitude
        if lo < 0 or hi > 1:
            raise ValueError("binary truth leaves [0, 1]")


def sample(model, f, rng, size=None):
    """Draw ``size`` observations (one scalar observation when ``size`` is None)."""
    model = ModelKind.parse(model)
    _check_truth(model, f)
    n = 1 if size is None else int(size)
    if model is ModelKind.DENSITY:
        # uniform cell, then the left/right half by its mass, then uniform within the half
        cell = rng.integers(0, f.k, size=n)
        p_left = 0.5 * (1.0 + f.amplitude * f.z[cell] / f.C0)
        right = (rng.random(n) >= p_left).astype(float)
        t = (cell + 0.5 * (right + rng.random(n))) / f.k
        y = np.ones(n)
    else:
        t = rng.random(n)
        ft = f(t)
        if model is ModelKind.GAUSSIAN:
            y = ft + rng.standard_normal(n)
        elif model is ModelKind.BINARY:
            y = (rng.random(n) < ft).astype(float)
        elif model is ModelKind.POISSON:
            y = rng.poisson(ft).astype(float)
        else:
            y = np.sqrt(ft) * rng.standard_normal(n)
    if size is None:
        return Sample(float(t[0]), float(y[0]))
    return Sample(t, y)


def response_transform(model, y):
    """h(y): 1 for densities, y for the mean regressions, y^2 for the variance model."""
    model = ModelKind.parse(model)
    y = np.asarray(y, dtype=float)
    if model is ModelKind.DENSITY:
        return np.ones_like(y)
    if model is ModelKind.HETEROSKEDASTIC:
        return y * y
    return y


def samplewise_estimator(model, H, s, x):
    """Unbiased one-sample estimate h(y) phi_{Hs}(t) of f_{Hs}."""
    val = response_transform(model, x.y) * eval_father(HAAR, H, s, x.t)
    return float(val) if np.ndim(val) == 0 else val


def _log_ratio(c, u):
    # log((c - u) / (c + u)) without cancellation for small u / c
    return np.log1p(-u / c) - np.log1p(u / c)


def _loglr_closed(model, f, u, y):
    C0 = f.C0
    if model is ModelKind.DENSITY:
        return _log_ratio(C0, u)
    if model is ModelKind.GAUSSIAN:
        return -2.0 * u * (y - C0)
    if model is ModelKind.BINARY:
        return y * _log_ratio(C0, u) - (1.0 - y) * _log_ratio(1.0 - C0, u)
    if model is ModelKind.POISSON:
        return 2.0 * u + y * _log_ratio(C0, u)
    return -0.5 * _log_ratio(C0, u) - y * y * u / (C0 * C0 - u * u)


def samplewise_loglr(model, f, s, z_s, x):
    """log(p_{s,-z_s}(x) / p_{s,z_s}(x)) for observations in cell s of the sieve."""
    model = ModelKind.parse(model)
    t = np.asarray(x.t, dtype=float)
    if np.any(cell_index(t, f.k) != s):
        raise ValueError(f"observation outside sieve cell {s}")
    u = f.eps * f.k ** (-(f.r + 0.5)) * z_s * sieve_psi(HAAR, f.k, s, t)
    val = _loglr_closed(model, f, u, np.asarray(x.y, dtype=float))
    return float(val) if np.ndim(val) == 0 else val


def cellwise_loglr(model, f, x):
    """L_{s,z_s}(x) evaluated at each observation's own sieve cell, with z from ``f``."""
    model = ModelKind.parse(model)
    t = np.asarray(x.t, dtype=float)
    cell = cell_index(t, f.k)
    half = np.minimum(np.floor(2 * f.k * t).astype(np.int64), 2 * f.k - 1) - 2 * (cell - 1)
    u = f.amplitude * f.z[cell - 1] * np.where(half == 0, 1.0, -1.0)
    return _loglr_closed(model, f, u, np.asarray(x.y, dtype=float))


def terminal_loglr(model, f, s, x_batch):
    """log of the terminal-wise likelihood ratio: sum of in-cell sample ratios."""
    t = np.atleast_1d(np.asarray(x_batch.t, dtype=float))
    if t.size == 0:
        return 0.0
    y = np.atleast_1d(np.asarray(x_batch.y, dtype=float))
    inside = cell_index(t, f.k) == s
    if not np.any(inside):
        return 0.0
    vals = samplewise_loglr(model, f, s, f.z[s - 1], Sample(t[inside], y[inside]))
    return float(np.sum(vals))


def father_coefficient(f, H, s):
    """Exact f_{Hs} for a sieve truth."""
    K = 1 << H
    vals = f.piecewise_values()
    G = vals.size
    if K <= G:
        mean = vals.reshape(K, G // K)[s - 1].mean()
    else:
        mean = vals[(s - 1) // (K // G)]
    return float(mean) * 2.0 ** (-H / 2)

