"""Finite-alphabet distribution estimation with exactly ``l`` bits per encoder.

Symbols are 0-based integers ``0..k-1``; ``samples`` is an ``(m, n)``
integer array holding each encoder's local draws.  Every protocol returns
the bit-exact :class:`Transcript` together with the decoder's estimate,
and the decoder reads only the transcript plus public randomness.
"""

from dataclasses import dataclass, field
import enum
import math
import struct

import numpy as np

from . import _accel


class BudgetTooSmall(ValueError):
    """The bit budget cannot give every symbol at least one frame."""


class ProtocolVariant(str, enum.Enum):
    COUNT_FRAMES = "count_frames"
    QUANTIZED_FRAMES = "quantized_frames"
    RANDOM_PARTITION = "random_partition"
    IDEALIZED = "idealized"


@dataclass(frozen=True)
class Transcript:
    """Messages B_1..B_m, one row of exactly ``l`` bits each."""

    l: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 2 or b.shape[1] != self.l:
            raise ValueError(f"every message must have exactly l={self.l} bits, got shape {b.shape}")
        if b.size and b.max() > 1:
            raise ValueError("bits must be 0/1")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def m(self):
        return self.bits.shape[0]

    @property
    def total_bits(self):
        return self.bits.size

    def to_bytes(self):
        """Header (m, l) as little-endian uint32, then m messages of ceil(l/8) bytes, MSB first."""
        body = np.packbits(self.bits, axis=1, bitorder="big") if self.l else np.zeros((self.m, 0), np.uint8)
        return struct.pack("<II", self.m, self.l) + body.tobytes()

    @classmethod
    def from_bytes(cls, data):
        m, l = struct.unpack_from("<II", data, 0)
        width = (l + 7) // 8
        body = np.frombuffer(data, dtype=np.uint8, offset=8)
        if body.size != m * width:
            raise ValueError(f"expected {m * width} payload bytes, found {body.size}")
        bits = np.unpackbits(body.reshape(m, width), axis=1, bitorder="big")[:, :l]
        return cls(l, bits)


def count_bits(n):
    """Frame width able to hold any count in 0..n."""
    return max(1, math.ceil(math.log2(n + 1)))


def project_simplex(v):
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _frame_plan(k, m, l, width):
    n_frames = min(l // width, k)
    per_symbol = (m * n_frames) // k
    if per_symbol < 1:
        raise BudgetTooSmall(f"m={m} encoders with {n_frames} frame(s) each cannot cover k={k} symbols")
    # round-robin: slot g = i * n_frames + f carries symbol g mod k, first per_symbol * k slots only
    g = np.arange(m * n_frames, dtype=np.int64).reshape(m, n_frames)
    frame_symbols = np.where(g < per_symbol * k, g % k, -1)
    return n_frames, per_symbol, frame_symbols


def _assemble(payload, l):
    m, used = payload.shape
    bits = np.zeros((m, l), dtype=np.uint8)
    bits[:, :used] = payload
    return Transcript(l, bits)


def _check_samples(samples, k, m, n):
    samples = np.asarray(samples, dtype=np.int64)
    if samples.shape != (m, n):
        raise ValueError(f"samples must have shape ({m}, {n}), got {samples.shape}")
    if samples.size and (samples.min() < 0 or samples.max() >= k):
        raise ValueError(f"symbols must lie in 0..{k - 1}")
    return samples


def count_frames_round(k, m, n, l, samples, rng=None):
    """Each frame carries one encoder's exact count of its allocated symbol.

    ``rng`` is unused (the protocol is deterministic); it is accepted so
    every round shares one calling convention.
    """
    samples = _check_samples(samples, k, m, n)
    width = count_bits(n)
    if l < width:
        raise BudgetTooSmall(f"l={l} bits cannot hold a {width}-bit count")
    n_frames, per_symbol, frame_symbols = _frame_plan(k, m, l, width)
    counts = _accel.frame_counts(samples, frame_symbols)
    transcript = _assemble(_accel.pack_bits(counts, width), l)

    received = _accel.unpack_bits(transcript.bits, width, n_frames)
    live = frame_symbols >= 0
    num = np.bincount(frame_symbols[live], weights=received[live], minlength=k)
    return transcript, num / (per_symbol * n)


def quantized_frames_round(k, m, n, l, b_bits, samples, rng):
    """Frames carry a b-bit unbiased stochastic rounding of the local frequency."""
    samples = _check_samples(samples, k, m, n)
    if not 1 <= b_bits <= l:
        raise BudgetTooSmall(f"need 1 <= b_bits <= l, got b_bits={b_bits}, l={l}")
    n_frames, per_symbol, frame_symbols = _frame_plan(k, m, l, b_bits)
    levels = (1 << b_bits) - 1
    counts = _accel.frame_counts(samples, frame_symbols)
    # q = count/n on a grid of `levels` steps, rounded up with probability frac (exact integer arithmetic)
    scaled = counts * levels
    base, rem = np.divmod(scaled, n)
    q = base + (rng.random(counts.shape) * n < rem)
    q[frame_symbols < 0] = 0
    transcript = _assemble(_accel.pack_bits(q, b_bits), l)

    received = _accel.unpack_bits(transcript.bits, b_bits, n_frames)
    live = frame_symbols >= 0
    total = np.bincount(frame_symbols[live], weights=received[live], minlength=k)
    return transcript, total / (levels * per_symbol)


def partition_layout(k, l):
    """(padded alphabet, cell size) for equal-size random partitions into at most 2^l cells."""
    if k < 2:
        raise ValueError("random partition needs k >= 2")
    cells = 1 << l
    size = -(-k // cells)
    return (k if size == 1 else size * cells), size


def partition_coefficients(k_pad, size):
    """(a, c) with E[a 1{w in announced cell} + c] = p(w) for every p.

    For uniform equal-size partitions P(w in cell | sample = w') is 1 when
    w' = w and alpha = (size - 1)/(k_pad - 1) otherwise; requiring
    unbiasedness at p(w) = 0 and p(w) = 1 fixes both coefficients.
    """
    alpha = (size - 1) / (k_pad - 1)
    moments = np.array([[alpha, 1.0], [1.0, 1.0]])
    a, c = np.linalg.solve(moments, np.array([0.0, 1.0]))
    return float(a), float(c)


def random_partition_round(k, m, n, l, samples, public_rng, rng=None, chunk=4096):
    """Each encoder announces which public random cell holds one of its samples."""
    samples = _check_samples(samples, k, m, n)
    rng = public_rng if rng is None else rng
    k_pad, size = partition_layout(k, l)
    a, c = partition_coefficients(k_pad, size)
    pick = samples[np.arange(m), rng.integers(0, n, size=m)]

    bits = np.zeros((m, l), dtype=np.uint8)
    hits = np.zeros(k_pad, dtype=np.int64)
    # public permutations are drawn chunk by chunk; the decoder reads each chunk's
    # messages while that chunk's permutations are still in memory
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        perms = _accel.shuffle_rows(public_rng.random((stop - start, k_pad)))
        cells = _accel.locate(perms, pick[start:stop]) // size
        bits[start:stop] = _accel.pack_bits(cells[:, None], l)
        announced = _accel.unpack_bits(bits[start:stop], l, 1)[:, 0]
        hits += _accel.partition_hits(perms, announced, size, k_pad)
    return Transcript(l, bits), a * hits[:k] / m + c


def idealized_round(samples, k):
    """Pooled empirical distribution of all samples (no budget)."""
    samples = np.asarray(samples, dtype=np.int64)
    return np.bincount(samples.ravel(), minlength=k) / samples.size


def _frames_feasible(k, m, l, width):
    return l >= width and (m * min(l // width, k)) // k >= 1


def select_protocol(case_id, k, m, n, l):
    """Inner protocol and its parameters for a regime case.

    Frame protocols need k <= n to be efficient: with more symbols than
    local samples most frames report zero counts.  Case 2 therefore uses
    random partitions once k > n, which for 2^l >= k forward one raw
    sample per encoder.  Frame protocols that cannot give every symbol a
    frame also fall back to random partitions, which work with any budget.
    """
    case_id = int(case_id)
    width = count_bits(n)
    if case_id == 1:
        choice = (ProtocolVariant.RANDOM_PARTITION, {})
    elif case_id == 2 and k > n:
        choice = (ProtocolVariant.RANDOM_PARTITION, {})
    elif case_id in (2, 4):
        choice = (ProtocolVariant.QUANTIZED_FRAMES, {"b_bits": min(l, width)})
    elif case_id == 3:
        if l >= width:
            choice = (ProtocolVariant.COUNT_FRAMES, {})
        else:
            choice = (ProtocolVariant.QUANTIZED_FRAMES, {"b_bits": min(l, 4)})
    elif case_id == 5:
        if l >= width:
            choice = (ProtocolVariant.COUNT_FRAMES, {})
        else:
            choice = (ProtocolVariant.QUANTIZED_FRAMES, {"b_bits": l})
    else:
        raise ValueError(f"unknown case {case_id}")
    variant, params = choice
    frame_width = width if variant is ProtocolVariant.COUNT_FRAMES else params.get("b_bits", 0)
    if variant is not ProtocolVariant.RANDOM_PARTITION and not _frames_feasible(k, m, l, frame_width):
        return ProtocolVariant.RANDOM_PARTITION, {}
    return variant, params


def run_inner(variant, k, m, n, l, samples, public_rng, rng, **params):
    """Dispatch one round; the idealized variant returns an all-zero l-bit transcript."""
    variant = ProtocolVariant(variant)
    if variant is ProtocolVariant.COUNT_FRAMES:
        return count_frames_round(k, m, n, l, samples, rng)
    if variant is ProtocolVariant.QUANTIZED_FRAMES:
        return quantized_frames_round(k, m, n, l, params["b_bits"], samples, rng)
    if variant is ProtocolVariant.RANDOM_PARTITION:
        return random_partition_round(k, m, n, l, samples, public_rng, rng)
    return Transcript(l, np.zeros((m, l), dtype=np.uint8)), idealized_round(samples, k)
