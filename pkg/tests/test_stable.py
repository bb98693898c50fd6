import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from betacoal import stable
from betacoal.errors import DomainError, RegimeError
from betacoal.stats import empirical_laplace, ks_two_sample


def test_streams_reproducible_and_distinct():
    a = stable.rng_stream(7, 3).random(5)
    b = stable.rng_stream(7, 3).random(5)
    c = stable.rng_stream(7, 4).random(5)
    d = stable.rng_stream(8, 3).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    with pytest.raises(DomainError):
        stable.rng_stream(0, -1)


@pytest.mark.parametrize("alpha", (1.2, 1.5, 1.8))
@pytest.mark.parametrize("lam", (0.5, 1.0))
def test_laplace_transform(alpha, lam):
    x = stable.sample_standard_stable(alpha, stable.rng_stream(1, 0), size=200_000)
    est, se = empirical_laplace(x, lam)
    assert abs(est - math.exp(lam**alpha)) < 4 * se


@pytest.mark.parametrize("alpha", (1.3, 1.7))
def test_no_negative_jumps_means_light_left_tail(alpha):
    x = stable.sample_standard_stable(alpha, stable.rng_stream(2, 0), size=100_000)
    assert x.mean() == pytest.approx(0.0, abs=0.1)
    assert np.quantile(x, 0.999) > -np.quantile(x, 0.001)


def test_alpha_near_two_is_gaussian_like():
    # at alpha=1.99 the variance is infinite but the bulk is close to N(0, 2)
    x = stable.sample_standard_stable(1.99, stable.rng_stream(3, 0), size=100_000)
    iqr = np.subtract(*np.quantile(x, [0.75, 0.25]))
    assert iqr == pytest.approx(2 * math.sqrt(2) * sps.norm.ppf(0.75), rel=0.02)


def test_scalar_and_array_paths_agree_in_law():
    g = stable.rng_stream(4, 0)
    scalars = np.array([stable.sample_standard_stable(1.5, g) for _ in range(5000)])
    array = stable.sample_standard_stable(1.5, stable.rng_stream(4, 1), size=5000)
    assert ks_two_sample(scalars, array).p_value > 1e-3


def test_scalar_and_array_paths_same_stream():
    g1, g2 = stable.rng_stream(5, 0), stable.rng_stream(5, 0)
    a = stable.sample_standard_stable(1.5, g1)
    b = stable.sample_standard_stable(1.5, g2, size=1)[0]
    # one uniform then one exponential in both cases
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("alpha", (1.2, 1.8))
def test_self_similarity(alpha):
    # an increment over dt has the law of dt^(1/alpha) times a unit draw
    dt = 0.01
    inc = stable.sample_increment(alpha, dt, stable.rng_stream(6, 0), size=20_000)
    unit = stable.sample_standard_stable(alpha, stable.rng_stream(6, 1), size=20_000)
    assert ks_two_sample(inc / dt ** (1 / alpha), unit).p_value > 1e-3


def test_increment_sum_rule():
    # Y(2h) - Y(0) equals in law the sum of two independent h-increments
    alpha, h = 1.5, 0.3
    g = stable.rng_stream(9, 0)
    two = stable.sample_increment(alpha, h, g, size=20_000) + stable.sample_increment(
        alpha, h, g, size=20_000)
    one = stable.sample_increment(alpha, 2 * h, stable.rng_stream(9, 1), size=20_000)
    assert ks_two_sample(two, one).p_value > 1e-3


def test_scalar_increment_returns_draw():
    d = stable.sample_increment(1.5, 0.25, stable.rng_stream(0, 0))
    assert isinstance(d, stable.StableDraw)
    assert d.alpha == 1.5 and d.time_scale == 0.25 and math.isfinite(d.value)


@pytest.mark.parametrize("alpha", (1.2, 1.5, 1.8))
def test_limit_X_laplace(alpha):
    x = stable.sample_limit_X(alpha, stable.rng_stream(10, 0), size=200_000)
    est, se = empirical_laplace(x, 1.0)
    assert abs(est - math.exp(1 / (alpha + 1))) < 4 * se


def test_sampler_domain_checks():
    with pytest.raises(RegimeError):
        stable.sample_standard_stable(1.0, stable.rng_stream(0))
    with pytest.raises(DomainError):
        stable.sample_increment(1.5, 0.0, stable.rng_stream(0))
    with pytest.raises(DomainError):
        stable.sample_poisson(-1.0, stable.rng_stream(0))


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(min_value=1.05, max_value=1.99), seed=st.integers(0, 2**32))
def test_draws_finite(alpha, seed):
    x = stable.sample_standard_stable(alpha, stable.rng_stream(seed), size=1000)
    assert np.all(np.isfinite(x))


@pytest.mark.parametrize("theta", (0.0, 3.0, 25.0, 1e3))
def test_poisson_chi_square(theta):
    d = stable.sample_poisson(theta, stable.rng_stream(11, 0), size=100_000)
    if theta == 0:
        assert np.all(d == 0)
        return
    lo, hi = sps.poisson.ppf([1e-4, 1 - 1e-4], theta).astype(int)
    edges = np.arange(lo, hi + 2)
    obs, _ = np.histogram(np.clip(d, lo, hi), bins=edges)
    probs = sps.poisson.pmf(np.arange(lo, hi + 1), theta)
    probs[0] += sps.poisson.cdf(lo - 1, theta)
    probs[-1] += sps.poisson.sf(hi, theta)
    exp = probs * d.size
    keep = exp > 5
    stat = ((obs[keep] - exp[keep]) ** 2 / exp[keep]).sum()
    pval = sps.chi2.sf(stat, keep.sum() - 1)
    assert pval > 1e-4


def test_poisson_scalar_returns_int():
    assert isinstance(stable.sample_poisson(4.0, stable.rng_stream(0)), int)
