import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bitbudget.models import (
    ALL_MODELS,
    ModelKind,
    Sample,
    SieveFunction,
    cellwise_loglr,
    default_C0,
    eps_max,
    father_coefficient,
    make_truth,
    sample,
    samplewise_estimator,
    samplewise_loglr,
    terminal_loglr,
)
from bitbudget.wavelet import project


def raw_loglik(model, f, x):
    """Log density of (T, Y) written from the model definitions, no shortcuts."""
    ft = f(x.t)
    y = np.asarray(x.y, dtype=float)
    if model is ModelKind.DENSITY:
        return np.log(ft)
    if model is ModelKind.GAUSSIAN:
        return stats.norm.logpdf(y, loc=ft)
    if model is ModelKind.BINARY:
        return stats.bernoulli.logpmf(y, ft)
    if model is ModelKind.POISSON:
        return stats.poisson.logpmf(y, ft)
    return stats.norm.logpdf(y, scale=np.sqrt(ft))


def flip(f, s):
    z = f.z.copy()
    z[s - 1] = -z[s - 1]
    return f.with_z(z)


def test_parse_aliases():
    assert ModelKind.parse("Classification") is ModelKind.BINARY
    assert ModelKind.parse("GaussianRegression") is ModelKind.GAUSSIAN
    with pytest.raises(ValueError):
        ModelKind.parse("laplace")


def test_default_C0():
    assert [default_C0(m) for m in ALL_MODELS] == [1.0, 0.0, 0.5, 1.0, 1.0]


def test_eps_max():
    assert eps_max("density", 4, 1.0, 0.8) == 1.0
    assert eps_max("gaussian", 64, 0.0, 0.8) == 1.0
    assert eps_max("density", 1, 1.0, 0.8) == 0.5
    assert eps_max("binary", 1, 0.2, 0.8) == pytest.approx(0.1)
    assert eps_max("binary", 8, 0.9, 0.8) == pytest.approx(0.1 * 8**0.8)
    with pytest.raises(ValueError):
        eps_max("poisson", 4, 0.0, 0.8)
    with pytest.raises(ValueError):
        eps_max("binary", 4, 1.0, 0.8)


def test_sieve_validation():
    with pytest.raises(ValueError):
        SieveFunction(k=3, C0=1.0, eps=0.5, z=[1, 1, 1])
    with pytest.raises(ValueError):
        SieveFunction(k=2, C0=1.0, eps=0.5, z=[1, 0])
    with pytest.raises(ValueError):
        SieveFunction(k=1, C0=1.0, eps=1.0, z=[1])  # amplitude 1 > C0/2


def test_sieve_shape_and_integral():
    f = SieveFunction(k=2, C0=1.0, eps=0.8, z=[1, -1], r=0.8)
    a = 0.8 * 2**-0.8
    np.testing.assert_allclose(f([0.1, 0.3, 0.6, 0.9]), [1 + a, 1 - a, 1 - a, 1 + a])
    assert np.mean(f.piecewise_values()) == pytest.approx(1.0)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_sampled_truth_is_valid(model):
    f = make_truth(model, 8, 0.8, np.random.default_rng(0))
    v = f.piecewise_values()
    if model in (ModelKind.DENSITY, ModelKind.POISSON, ModelKind.HETEROSKEDASTIC):
        assert v.min() > 0
    if model is ModelKind.BINARY:
        assert 0 <= v.min() and v.max() <= 1


def test_density_sampler_matches_half_cell_masses():
    rng = np.random.default_rng(1)
    f = make_truth("density", 4, 0.8, rng)
    x = sample("density", f, rng, size=200_000)
    half = np.minimum(np.floor(8 * x.t).astype(int), 7)
    counts = np.bincount(half, minlength=8)
    expected = f.piecewise_values() / 8 * x.t.size
    assert stats.chisquare(counts, expected).pvalue > 1e-4
    np.testing.assert_array_equal(x.y, 1.0)


@pytest.mark.parametrize("model", [m for m in ALL_MODELS if m is not ModelKind.DENSITY])
def test_regression_samplers_conditional_moments(model):
    rng = np.random.default_rng(2)
    f = make_truth(model, 2, 0.8, rng)
    x = sample(model, f, rng, size=400_000)
    half = np.minimum(np.floor(4 * x.t).astype(int), 3)
    target = x.y**2 if model is ModelKind.HETEROSKEDASTIC else x.y
    for h, fv in enumerate(f.piecewise_values()):
        sel = target[half == h]
        assert abs(sel.mean() - fv) <= 5 * sel.std() / math.sqrt(sel.size)


def test_scalar_sample():
    x = sample("gaussian", make_truth("gaussian", 2, 0.8, np.random.default_rng(0)), np.random.default_rng(1))
    assert isinstance(x.t, float) and isinstance(x.y, float)


def test_samplewise_estimator():
    assert samplewise_estimator("density", 2, 1, Sample(0.1, 1.0)) == pytest.approx(2.0)
    assert samplewise_estimator("heteroskedastic", 2, 2, Sample(0.3, 3.0)) == pytest.approx(18.0)
    assert samplewise_estimator("gaussian", 2, 2, Sample(0.1, 3.0)) == 0.0


def test_gaussian_loglr_value():
    # k=4, eps=0.5, z_s=+1, y=1, t in the left half of cell 1 so psi = 2
    f = SieveFunction(k=4, C0=0.0, eps=0.5, z=[1, 1, 1, 1], r=0.8)
    got = samplewise_loglr("gaussian", f, 1, 1, Sample(0.05, 1.0))
    oracle = raw_loglik(ModelKind.GAUSSIAN, flip(f, 1), Sample(0.05, 1.0)) - raw_loglik(
        ModelKind.GAUSSIAN, f, Sample(0.05, 1.0)
    )
    assert got == pytest.approx(float(oracle), rel=1e-12)
    assert got == pytest.approx(-2 * 4**-1.3, rel=1e-12)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_loglr_matches_raw_likelihoods(model):
    rng = np.random.default_rng(3)
    f = make_truth(model, 8, 0.8, rng)
    x = sample(model, f, rng, size=5000)
    fast = cellwise_loglr(model, f, x)
    cells = np.minimum(np.floor(8 * x.t).astype(int), 7) + 1
    for s in (1, 4, 8):
        sel = cells == s
        xs = Sample(x.t[sel], x.y[sel])
        oracle = raw_loglik(model, flip(f, s), xs) - raw_loglik(model, f, xs)
        np.testing.assert_allclose(samplewise_loglr(model, f, s, f.z[s - 1], xs), oracle, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(fast[sel], oracle, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_loglr_zero_when_eps_zero(model):
    f = make_truth(model, 4, 0.8, np.random.default_rng(0), eps=0.0)
    x = sample(model, f, np.random.default_rng(1), size=100)
    np.testing.assert_allclose(cellwise_loglr(model, f, x), 0.0, atol=1e-15)


def test_loglr_outside_cell():
    f = make_truth("density", 4, 0.8, np.random.default_rng(0))
    with pytest.raises(ValueError):
        samplewise_loglr("density", f, 1, 1, Sample(0.6, 1.0))


def test_terminal_loglr():
    f = make_truth("poisson", 4, 0.8, np.random.default_rng(0))
    empty = Sample(np.zeros(0), np.zeros(0))
    assert terminal_loglr("poisson", f, 2, empty) == 0.0
    one = Sample(np.array([0.3]), np.array([2.0]))
    assert terminal_loglr("poisson", f, 2, one) == pytest.approx(samplewise_loglr("poisson", f, 2, f.z[1], one)[0])
    mixed = Sample(np.array([0.3, 0.9, 0.4]), np.array([2.0, 1.0, 0.0]))
    want = float(np.sum(samplewise_loglr("poisson", f, 2, f.z[1], Sample(np.array([0.3, 0.4]), np.array([2.0, 0.0])))))
    assert terminal_loglr("poisson", f, 2, mixed) == pytest.approx(want)


@settings(max_examples=40, deadline=None)
@given(logk=st.integers(0, 5), H=st.integers(0, 7), seed=st.integers(0, 2**32 - 1))
def test_father_coefficient_matches_projection(logk, H, seed):
    f = make_truth("density", 1 << logk, 0.8, np.random.default_rng(seed))
    proj = project(f, H).coeffs
    got = [father_coefficient(f, H, s) for s in range(1, (1 << H) + 1)]
    np.testing.assert_allclose(got, proj, atol=1e-14)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_estimator_unbiased(model):
    rng = np.random.default_rng(5)
    f = make_truth(model, 4, 0.8, rng)
    x = sample(model, f, rng, size=200_000)
    H = 3
    for s in (1, 6):
        est = samplewise_estimator(model, H, s, x)
        assert abs(est.mean() - father_coefficient(f, H, s)) <= 4 * est.std() / math.sqrt(est.size)
