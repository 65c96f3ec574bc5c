"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Both implementations are called directly, so the result does not depend on
BITBUDGET_DISABLE_NUMBA.  Outputs are compared before timing.
"""

import argparse
import timeit

import numpy as np

from bitbudget import _accel


def cases(rng):
    m, n, k, f = 65536, 16, 64, 4
    symbols = rng.integers(0, k, size=(m, n))
    frames = rng.integers(-1, k, size=(m, f))
    counts = rng.integers(0, n + 1, size=(m, f))
    packed = _accel._np_pack_bits(counts, 5)
    perms = np.argsort(rng.random((8192, 128)), axis=1)
    targets = rng.integers(0, 128, size=8192)
    cells = rng.integers(0, 32, size=8192)
    balls = rng.integers(0, 64, size=(10_000, 256))
    uniforms = rng.random((8192, 128))
    return {
        "frame_counts": (symbols, frames),
        "pack_bits": (counts, 5),
        "unpack_bits": (packed, 5, f),
        "locate": (perms, targets),
        "partition_hits": (perms, cells, 4, 128),
        "shuffle_rows": (uniforms,),
        "max_load": (balls, 64),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is unavailable (or disabled); nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':16s} {'numpy ms':>10s} {'numba ms':>10s} {'speed-up':>9s}")
    for name, argv in cases(rng).items():
        np_fn = getattr(_accel, "_np_" + name)
        nb_fn = getattr(_accel, "_nb_" + name)
        # warm-up compiles the numba version and checks agreement
        if not np.array_equal(np_fn(*argv), nb_fn(*argv)):
            raise SystemExit(f"{name}: numba and numpy outputs differ")
        t_np = min(timeit.repeat(lambda: np_fn(*argv), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: nb_fn(*argv), number=1, repeat=args.repeat))
        print(f"{name:16s} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
