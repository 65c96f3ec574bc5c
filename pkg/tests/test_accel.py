import os
import subprocess
import sys

import numpy as np
import pytest

from bitbudget import _accel

pytestmark = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba unavailable")


def _pair(name):
    return getattr(_accel, f"_np_{name}"), getattr(_accel, f"_nb_{name}")


def test_frame_counts():
    rng = np.random.default_rng(0)
    symbols = rng.integers(0, 6, size=(9, 13))
    frames = rng.integers(-1, 6, size=(9, 4))
    a, b = _pair("frame_counts")
    np.testing.assert_array_equal(a(symbols, frames), b(symbols, frames))


@pytest.mark.parametrize("width", [1, 3, 7])
def test_pack_unpack(width):
    rng = np.random.default_rng(width)
    vals = rng.integers(0, 1 << width, size=(5, 3))
    pa, pb = _pair("pack_bits")
    ua, ub = _pair("unpack_bits")
    bits = pa(vals, width)
    np.testing.assert_array_equal(bits, pb(vals, width))
    np.testing.assert_array_equal(ua(bits, width, 3), ub(bits, width, 3))
    np.testing.assert_array_equal(ua(bits, width, 3), vals)


def test_locate_and_hits():
    rng = np.random.default_rng(1)
    perms = rng.permuted(np.broadcast_to(np.arange(12), (20, 12)), axis=1)
    targets = rng.integers(0, 12, size=20)
    la, lb = _pair("locate")
    pos = la(perms, targets)
    np.testing.assert_array_equal(pos, lb(perms, targets))
    assert np.all(perms[np.arange(20), pos] == targets)
    ha, hb = _pair("partition_hits")
    cells = pos // 3
    np.testing.assert_array_equal(ha(perms, cells, 3, 12), hb(perms, cells, 3, 12))


def test_shuffle_rows():
    u = np.random.default_rng(4).random((40, 17))
    a, b = _pair("shuffle_rows")
    perms = a(u)
    np.testing.assert_array_equal(perms, b(u))
    np.testing.assert_array_equal(np.sort(perms, axis=1), np.tile(np.arange(17), (40, 1)))


def test_shuffle_rows_uniform():
    # every symbol lands in every position with probability 1/k
    k, rows = 5, 50_000
    perms = _accel.shuffle_rows(np.random.default_rng(5).random((rows, k)))
    freq = np.stack([(perms == w).mean(axis=0) for w in range(k)])
    assert np.all(np.abs(freq - 1 / k) <= 4.5 * np.sqrt((1 / k) * (1 - 1 / k) / rows))


def test_max_load():
    balls = np.random.default_rng(2).integers(0, 7, size=(50, 30))
    a, b = _pair("max_load")
    np.testing.assert_array_equal(a(balls, 7), b(balls, 7))


def test_env_flag_selects_numpy():
    env = dict(os.environ, BITBUDGET_DISABLE_NUMBA="1")
    code = "from bitbudget import _accel; print(_accel.HAS_NUMBA, _accel.max_load.__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == "False"


def test_protocol_identical_without_numba():
    from bitbudget.models import make_truth
    from bitbudget.protocol import run_protocol
    from bitbudget.regimes import RegimeParams

    code = (
        "import numpy as np\n"
        "from bitbudget.models import make_truth\n"
        "from bitbudget.protocol import run_protocol\n"
        "from bitbudget.regimes import RegimeParams\n"
        "for v in ('count_frames', 'random_partition'):\n"
        "    f = make_truth('density', 8, 0.8, np.random.default_rng(0))\n"
        "    print(repr(run_protocol(RegimeParams(256, 16, 12, 0.8), 'density', f, seed=3, variant=v).l2_error))\n"
    )
    env = dict(os.environ, BITBUDGET_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    want = []
    for v in ("count_frames", "random_partition"):
        f = make_truth("density", 8, 0.8, np.random.default_rng(0))
        want.append(repr(run_protocol(RegimeParams(256, 16, 12, 0.8), "density", f, seed=3, variant=v).l2_error))
    assert out.stdout.split() == want
