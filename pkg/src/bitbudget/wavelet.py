"""Haar multiresolution machinery on [0, 1].

Cells are half-open ``[(s-1)/K, s/K)`` with ``t = 1`` assigned to the last
cell, and indices ``s`` are 1-based throughout to match the protocol's
symbol layout.  Functions that are piecewise constant on a dyadic grid are
represented by their array of cell values, which keeps projections and L2
errors exact.
"""

from dataclasses import dataclass, field
import math

import numpy as np


@dataclass(frozen=True)
class WaveletFamily:
    """Father/mother pair with ``S`` vanishing moments.

    Only Haar (``S = 1``) is implemented; a smooth boundary-corrected
    family would be needed for regularity ``r >= 1``.
    """

    name: str = "haar"
    S: int = 1

    def __post_init__(self):
        if self.name != "haar" or self.S != 1:
            raise NotImplementedError("only the Haar family (S=1) is available")

    @property
    def father_support(self):
        return (0.0, float(2 * self.S - 1))

    @property
    def mother_support(self):
        return (float(-self.S + 1), float(self.S))

    @property
    def h0(self):
        return math.ceil(math.log2(2 * self.S + 2))

    @property
    def slots(self):
        """Length of the neighbourhood bit vector, ``2S + 2``."""
        return 2 * self.S + 2

    def check_regularity(self, r):
        if not 0.5 < r < min(1.0, self.S):
            raise ValueError(f"regularity r={r} outside the supported range (1/2, {min(1.0, self.S)})")

    def father(self, x):
        x = np.asarray(x, dtype=float)
        return ((x >= 0.0) & (x < 1.0)).astype(float)

    def mother(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x < 0.5), 1.0, 0.0) - np.where((x >= 0.5) & (x < 1.0), 1.0, 0.0)


HAAR = WaveletFamily()


def cell_index(t, K):
    """1-based dyadic cell of ``t`` at ``K`` cells, with ``t = 1`` in cell ``K``."""
    t = np.asarray(t, dtype=float)
    return np.minimum(np.floor(K * t).astype(np.int64), K - 1) + 1


def _check_index(H, s):
    K = 1 << H
    if not 1 <= s <= K:
        raise IndexError(f"cell index s={s} outside 1..{K}")
    return K


def eval_father(family, H, s, t):
    """phi_{Hs}(t) = 2^{H/2} on cell s, 0 elsewhere."""
    K = _check_index(H, s)
    t = np.asarray(t, dtype=float)
    val = np.where(cell_index(t, K) == s, 2.0 ** (H / 2), 0.0)
    return float(val) if val.ndim == 0 else val


def neighborhood(family, H, s):
    """Indices s' whose father support meets cell s in positive measure, ascending."""
    _check_index(H, s)
    # Haar supports are the cells themselves.
    return (s,)


@dataclass(frozen=True)
class CoeffVector:
    """Father coefficients ``f_{Hs}``, ``s = 1..2^H`` stored 0-based."""

    H: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (1 << self.H,):
            raise ValueError(f"expected {1 << self.H} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise FloatingPointError("non-finite coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self):
        return 1 << self.H


def cell_means(values, K):
    """Means over K dyadic cells of a function piecewise constant on ``len(values)`` cells."""
    values = np.asarray(values, dtype=float)
    G = values.size
    if G & (G - 1) or K & (K - 1):
        raise ValueError("grids must be powers of two")
    if K <= G:
        return values.reshape(K, G // K).mean(axis=1)
    return np.repeat(values, K // G)


def project(f, H, quadrature_points=None):
    """Father coefficients of ``f`` at resolution H.

    ``f`` is a vectorised callable or any object exposing
    ``piecewise_values()`` (values on a dyadic grid), in which case the
    projection is exact.  Callables use a composite midpoint rule with
    ``quadrature_points`` nodes (default ``2^{H+6}``).
    """
    K = 1 << H
    if hasattr(f, "piecewise_values"):
        means = cell_means(f.piecewise_values(), K)
    else:
        npts = quadrature_points or (1 << (H + 6))
        per_cell = max(1, npts // K)
        nodes = (np.arange(K * per_cell) + 0.5) / (K * per_cell)
        vals = np.asarray(f(nodes), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("function returned non-finite values")
        means = vals.reshape(K, per_cell).mean(axis=1)
    return CoeffVector(H, means * 2.0 ** (-H / 2))


def reconstruct(c, t):
    """Evaluate sum_s c_s phi_{Hs}(t)."""
    idx = cell_index(t, c.K) - 1
    val = c.coeffs[idx] * 2.0 ** (c.H / 2)
    return float(val) if np.ndim(val) == 0 else val


def l2_error_exact(truth, est, H=None):
    """Exact ||f - sum_s est_s phi_{Hs}||^2 for a dyadic piecewise-constant truth.

    Split as coefficient error plus the approximation tail ``||f - f^H||^2``,
    the latter by Parseval.
    """
    H = est.H if H is None else H
    if H != est.H:
        raise ValueError(f"estimate has resolution {est.H}, requested {H}")
    values = np.asarray(truth.piecewise_values(), dtype=float)
    G = values.size
    if G & (G - 1):
        raise ValueError("truth is not piecewise constant on a dyadic grid")
    exact = cell_means(values, est.K) * 2.0 ** (-H / 2)
    norm2 = float(np.mean(values**2))
    tail = max(norm2 - float(np.sum(exact**2)), 0.0)
    return float(np.sum((exact - est.coeffs) ** 2)) + tail


def approximation_tail(truth, H):
    """||f - f^H||^2 for a dyadic piecewise-constant truth."""
    return l2_error_exact(truth, project(truth, H))


def sieve_psi(family, k, s, t):
    """psi^k_s(t) = sqrt(k) psi(k t - (s - 1)), supported on cell s of k."""
    if k < 1 or k & (k - 1):
        raise ValueError(f"k={k} is not a power of two")
    if not 1 <= s <= k:
        raise IndexError(f"s={s} outside 1..{k}")
    t = np.asarray(t, dtype=float)
    half = np.minimum(np.floor(2 * k * t).astype(np.int64), 2 * k - 1) - 2 * (s - 1)
    val = math.sqrt(k) * (np.where(half == 0, 1.0, 0.0) - np.where(half == 1, 1.0, 0.0))
    return float(val) if val.ndim == 0 else val
