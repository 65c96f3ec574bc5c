"""Hot inner loops of the simulator.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical outputs.  The numba path is used when numba imports
and ``BITBUDGET_DISABLE_NUMBA`` is unset (or ``0``); otherwise the numpy
path is bound.  Randomness never enters a kernel, so both paths are
bit-for-bit interchangeable given the same inputs.
"""

import os

import numpy as np

_DISABLED = os.environ.get("BITBUDGET_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by BITBUDGET_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# ---------------------------------------------------------------- numpy ---


def _np_frame_counts(symbols, frame_symbols):
    # symbols (m, n); frame_symbols (m, f) with -1 marking an unused frame
    hits = symbols[:, :, None] == frame_symbols[:, None, :]
    out = hits.sum(axis=1).astype(np.int64)
    out[frame_symbols < 0] = 0
    return out


def _np_pack_bits(values, width):
    m, f = values.shape
    if width == 0:
        return np.zeros((m, 0), dtype=np.uint8)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    bits = (values[:, :, None] >> shifts) & 1
    return bits.reshape(m, f * width).astype(np.uint8)


def _np_unpack_bits(bits, width, n_fields):
    m = bits.shape[0]
    if width == 0 or n_fields == 0:
        return np.zeros((m, n_fields), dtype=np.int64)
    b = bits[:, : n_fields * width].reshape(m, n_fields, width).astype(np.int64)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return (b * weights).sum(axis=2)


def _np_locate(perms, targets):
    return np.argmax(perms == targets[:, None], axis=1).astype(np.int64)


def _np_partition_hits(perms, cells, cell_size, n_symbols):
    m = perms.shape[0]
    cols = cells[:, None] * cell_size + np.arange(cell_size)
    members = perms[np.arange(m)[:, None], cols]
    return np.bincount(members.ravel(), minlength=n_symbols).astype(np.int64)


def _np_shuffle_rows(u):
    # Fisher-Yates on every row of arange(k), with swap index floor(u[:, i] * (i + 1))
    m, k = u.shape
    perms = np.tile(np.arange(k, dtype=np.int64), (m, 1))
    rows = np.arange(m)
    for i in range(k - 1, 0, -1):
        j = (u[:, i] * (i + 1)).astype(np.int64)
        tmp = perms[rows, j]
        perms[rows, j] = perms[:, i]
        perms[:, i] = tmp
    return perms


def _np_max_load(balls, k):
    trials = balls.shape[0]
    flat = balls + k * np.arange(trials)[:, None]
    counts = np.bincount(flat.ravel(), minlength=trials * k).reshape(trials, k)
    return counts.max(axis=1).astype(np.int64)


# ---------------------------------------------------------------- numba ---

if HAS_NUMBA:

    @njit(cache=True)
    def _nb_frame_counts(symbols, frame_symbols):
        m, n = symbols.shape
        f = frame_symbols.shape[1]
        out = np.zeros((m, f), dtype=np.int64)
        for i in range(m):
            for j in range(f):
                w = frame_symbols[i, j]
                if w < 0:
                    continue
                c = 0
                for t in range(n):
                    if symbols[i, t] == w:
                        c += 1
                out[i, j] = c
        return out

    @njit(cache=True)
    def _nb_pack_bits(values, width):
        m, f = values.shape
        out = np.zeros((m, f * width), dtype=np.uint8)
        for i in range(m):
            for j in range(f):
                v = values[i, j]
                for b in range(width):
                    out[i, j * width + b] = (v >> (width - 1 - b)) & 1
        return out

    @njit(cache=True)
    def _nb_unpack_bits(bits, width, n_fields):
        m = bits.shape[0]
        out = np.zeros((m, n_fields), dtype=np.int64)
        for i in range(m):
            for j in range(n_fields):
                v = 0
                for b in range(width):
                    v = (v << 1) | np.int64(bits[i, j * width + b])
                out[i, j] = v
        return out

    @njit(cache=True)
    def _nb_locate(perms, targets):
        m, kp = perms.shape
        out = np.zeros(m, dtype=np.int64)
        for i in range(m):
            w = targets[i]
            for j in range(kp):
                if perms[i, j] == w:
                    out[i] = j
                    break
        return out

    @njit(cache=True)
    def _nb_partition_hits(perms, cells, cell_size, n_symbols):
        m = perms.shape[0]
        out = np.zeros(n_symbols, dtype=np.int64)
        for i in range(m):
            base = cells[i] * cell_size
            for j in range(cell_size):
                out[perms[i, base + j]] += 1
        return out

    @njit(cache=True)
    def _nb_shuffle_rows(u):
        m, k = u.shape
        perms = np.empty((m, k), dtype=np.int64)
        for r in range(m):
            for i in range(k):
                perms[r, i] = i
            for i in range(k - 1, 0, -1):
                j = np.int64(u[r, i] * (i + 1))
                tmp = perms[r, j]
                perms[r, j] = perms[r, i]
                perms[r, i] = tmp
        return perms

    @njit(cache=True)
    def _nb_max_load(balls, k):
        trials, n = balls.shape
        out = np.zeros(trials, dtype=np.int64)
        counts = np.zeros(k, dtype=np.int64)
        for t in range(trials):
            counts[:] = 0
            best = 0
            for j in range(n):
                b = balls[t, j]
                counts[b] += 1
                if counts[b] > best:
                    best = counts[b]
            out[t] = best
        return out


def _dispatch(name):
    if HAS_NUMBA:
        return globals()["_nb_" + name]
    return globals()["_np_" + name]


def frame_counts(symbols, frame_symbols):
    """Count, per encoder and frame, how often the frame's symbol occurs."""
    return _dispatch("frame_counts")(
        np.ascontiguousarray(symbols, dtype=np.int64),
        np.ascontiguousarray(frame_symbols, dtype=np.int64),
    )


def pack_bits(values, width):
    """Write each non-negative integer as ``width`` big-endian bits."""
    return _dispatch("pack_bits")(np.ascontiguousarray(values, dtype=np.int64), int(width))


def unpack_bits(bits, width, n_fields):
    """Inverse of :func:`pack_bits` on the first ``n_fields * width`` bits of each row."""
    return _dispatch("unpack_bits")(np.ascontiguousarray(bits, dtype=np.uint8), int(width), int(n_fields))


def locate(perms, targets):
    """Column index of ``targets[i]`` in row ``perms[i]``."""
    return _dispatch("locate")(
        np.ascontiguousarray(perms, dtype=np.int64),
        np.ascontiguousarray(targets, dtype=np.int64),
    )


def partition_hits(perms, cells, cell_size, n_symbols):
    """Number of rows whose announced cell ``perms[i, c*size:(c+1)*size]`` holds each symbol."""
    return _dispatch("partition_hits")(
        np.ascontiguousarray(perms, dtype=np.int64),
        np.ascontiguousarray(cells, dtype=np.int64),
        int(cell_size),
        int(n_symbols),
    )


def shuffle_rows(u):
    """One uniform permutation of 0..k-1 per row of the uniforms ``u`` (shape (m, k))."""
    return _dispatch("shuffle_rows")(np.ascontiguousarray(u, dtype=np.float64))


def max_load(balls, k):
    """Maximum bin occupancy per row of ball placements."""
    return _dispatch("max_load")(np.ascontiguousarray(balls, dtype=np.int64), int(k))
