import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from betacoal import rates
from betacoal.errors import DomainError, RegimeError

ALPHAS = (1.2, 1.5, 1.8)
alphas = st.floats(min_value=1.05, max_value=1.95)


def mp_lambda_bk(b, k, alpha):
    a = mpmath.mpf(alpha)
    return mpmath.beta(k - a, b - k + a) / mpmath.beta(2 - a, a)


def mp_psi(q, alpha):
    # independent oracle: direct high-precision integral against the density
    mpmath.mp.dps = 40
    a, q = mpmath.mpf(alpha), mpmath.mpf(q)
    norm = 1 / mpmath.beta(2 - a, a)

    def f(x):
        y = q * x
        if y < mpmath.mpf("1e-6"):
            ker = 1 / mpmath.mpf(2) - y / 6 + y**2 / 24
        else:
            ker = (mpmath.exp(-y) - 1 + y) / y**2
        return q**2 * ker * x ** (1 - a) * (1 - x) ** (a - 1)

    pts = [0] + [min(1, mpmath.mpf(10) ** j / q) for j in range(0, 8)] + [1]
    pts = sorted(set(pts))
    val = norm * mpmath.quad(f, pts)
    mpmath.mp.dps = 15
    return float(val)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("b,k", [(2, 2), (3, 2), (3, 3), (10, 4), (50, 2), (50, 50), (100, 37)])
def test_lambda_bk_against_mpmath(alpha, b, k):
    assert rates.lambda_bk(b, k, alpha) == pytest.approx(float(mp_lambda_bk(b, k, alpha)),
                                                         rel=1e-12)


def test_lambda_22_is_one():
    # Lambda is a probability measure, so two blocks merge at rate 1
    for a in (0.3, 1.0, 1.5, 1.9):
        assert rates.lambda_bk(2, 2, a) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_quadrature_matches_closed_form(alpha):
    for b, k in [(2, 2), (7, 3), (40, 20), (100, 2), (100, 99)]:
        assert rates.lambda_bk_quad(b, k, alpha) == pytest.approx(
            rates.lambda_bk(b, k, alpha), rel=1e-8)


def test_kingman_limit():
    # alpha -> 2 puts Lambda at 0: only pairwise mergers survive
    assert rates.lambda_bk(3, 3, 1.9999) < 1e-3
    assert rates.lambda_bk(5, 2, 1.9999) == pytest.approx(1.0, rel=1e-3)


@settings(max_examples=40, deadline=None)
@given(alpha=alphas, b=st.integers(2, 60), data=st.data())
def test_consistency_identity(alpha, b, data):
    k = data.draw(st.integers(2, b))
    lhs = rates.lambda_bk(b, k, alpha)
    rhs = rates.lambda_bk(b + 1, k, alpha) + rates.lambda_bk(b + 1, k + 1, alpha)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_merger_law_b3_example():
    law = rates.merger_law(3, 1.5)
    assert law.total_rate == pytest.approx(2.5, rel=1e-12)
    np.testing.assert_allclose(law.pmf, [0.9, 0.1], rtol=1e-12)
    assert list(law.sizes) == [2, 3]


@settings(max_examples=40, deadline=None)
@given(alpha=alphas, b=st.integers(2, 400))
def test_merger_law_matches_direct_sum(alpha, b):
    law = rates.merger_law(b, alpha)
    direct = np.array([math.comb(b, k) * rates.lambda_bk(b, k, alpha) for k in range(2, b + 1)])
    assert law.total_rate == pytest.approx(direct.sum(), rel=1e-10)
    np.testing.assert_allclose(law.pmf, direct / direct.sum(), rtol=1e-9, atol=1e-300)
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(law.pmf >= 0)


@pytest.mark.parametrize("alpha", (0.5, 1.0, 1.5, 1.8))
def test_total_rate_table_matches_merger_law(alpha):
    g = rates.total_rate_table(300, alpha)
    assert g[0] == 0 and g[1] == 0
    assert g[2] == pytest.approx(1.0, rel=1e-13)
    for b in (2, 3, 17, 128, 300):
        assert g[b] == pytest.approx(rates.merger_law(b, alpha).total_rate, rel=1e-10)
    assert np.all(np.diff(g[1:]) > 0)


def test_total_rate_table_read_only():
    g = rates.total_rate_table(10, 1.5)
    with pytest.raises(ValueError):
        g[3] = 0.0


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("q", (0.01, 0.7, 30.0, 1e3, 1e5))
def test_psi_against_mpmath(alpha, q):
    assert rates.psi(q, alpha) == pytest.approx(mp_psi(q, alpha), rel=1e-8)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("q", (0.5, 10.0, 1e4))
def test_psi_second_derivative_is_hypergeometric(alpha, q):
    # int_0^1 e^{-qx} Beta(2-a, a)(dx) = 1F1(2 - a; 2; -q)
    assert rates.psi_second_derivative(q, alpha) == pytest.approx(
        float(special.hyp1f1(2 - alpha, 2, -q)), rel=1e-8)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_psi_asymptotic_expansion(alpha):
    for q in (1e3, 1e5, 1e6):
        assert rates.psi_asymptotic(q, alpha) == pytest.approx(rates.psi(q, alpha), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(alpha=alphas, q=st.floats(min_value=1e-3, max_value=1e5))
def test_psi_convex_and_positive(alpha, q):
    p = rates.psi(q, alpha)
    assert p > 0
    # psi(q) <= q^2 / 2 and psi is superadditive-ish: psi(2q) >= 2 psi(q)
    assert p <= q * q / 2 * (1 + 1e-12)
    assert rates.psi(2 * q, alpha) >= 2 * p * (1 - 1e-10)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_inverse_psi_tail_against_quadrature(alpha):
    # independent check on a window: difference of tails equals a plain integral
    s1, s2 = 10.0, 1e4
    diff = rates.inverse_psi_tail(s1, alpha) - rates.inverse_psi_tail(s2, alpha)
    mpmath.mp.dps = 20
    direct = mpmath.quad(lambda q: 1 / rates.psi(float(q), alpha), [s1, 100, 1000, s2])
    mpmath.mp.dps = 15
    assert diff == pytest.approx(float(direct), rel=1e-8)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_inverse_psi_tail_asymptote(alpha):
    # int_s^inf dq / (q^a / C_a) = C_a s^(1-a) / (a - 1) to leading order
    c = rates.constants(alpha).c_alpha
    s = 1e9
    lead = c * s ** (1 - alpha) / (alpha - 1)
    assert rates.inverse_psi_tail(s, alpha) == pytest.approx(lead, rel=0.05)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("t", (1e-4, 1e-2, 0.5))
def test_v_psi_inverts_tail(alpha, t):
    v = rates.v_psi(t, alpha)
    assert rates.inverse_psi_tail(v, alpha) == pytest.approx(t, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(alpha=alphas, t=st.floats(min_value=1e-4, max_value=1.0))
def test_v_psi_decreasing(alpha, t):
    assert rates.v_psi(t, alpha) > rates.v_psi(1.5 * t, alpha)


def test_constants_alpha_15():
    c = rates.constants(1.5)
    g = math.gamma(1.5)
    assert c.gamma_alpha == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert c.c_alpha == pytest.approx(0.75 * g, rel=1e-15)
    assert c.speed_const == pytest.approx((1.5 * g) ** 2, rel=1e-15)
    assert c.speed_const == pytest.approx(1.767145867644258, rel=1e-12)
    assert c.d_alpha == pytest.approx(
        (1.5 * g) ** (2 / 1.5) * 0.5 ** (-1 / 1.5), rel=1e-14)
    assert c.d_alpha == pytest.approx(2.3202507947101014, rel=1e-12)
    assert c.x_scale == pytest.approx(2.5 ** (-1 / 1.5), rel=1e-15)
    assert set(c.as_dict()) >= {"c_alpha", "d_alpha", "speed_const", "x_scale", "gamma_alpha"}


def test_constants_reject_outside_regime():
    with pytest.raises(RegimeError):
        rates.constants(1.0)
    with pytest.raises(DomainError):
        rates.lambda_bk(3, 2, 2.0)
    with pytest.raises(DomainError):
        rates.lambda_bk(3, 4, 1.5)


@pytest.mark.parametrize("alpha,expected", [(0.5, False), (1.0, False), (1.2, True),
                                            (1.5, True), (1.8, True)])
def test_comes_down_from_infinity(alpha, expected):
    assert rates.comes_down_from_infinity(alpha) is expected


@settings(max_examples=30, deadline=None)
@given(alpha=alphas, lam=st.floats(min_value=1e-2, max_value=1e3),
       t=st.floats(min_value=1e-3, max_value=5.0))
def test_u_flow_solves_ode(alpha, lam, t):
    h = 1e-6 * max(t, 1e-3)
    d = (rates.u_flow(t + h, lam, alpha) - rates.u_flow(t - h, lam, alpha)) / (2 * h)
    u = rates.u_flow(t, lam, alpha)
    assert d == pytest.approx(-u**alpha, rel=1e-5)
    assert rates.u_flow(0.0, lam, alpha) == pytest.approx(lam, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(alpha=alphas, r=st.floats(min_value=1e-3, max_value=10.0))
def test_poisson_parameter_is_flow_from_infinity(alpha, r):
    assert rates.u_flow(r, 1e300, alpha) == pytest.approx(
        rates.poisson_parameter(r, alpha), rel=1e-9)


def test_beta_density_normalised():
    from scipy import integrate

    for a in (0.5, 1.5):
        val, _ = integrate.quad(lambda x: rates.beta_density(x, a), 0, 1, limit=200)
        assert val == pytest.approx(1.0, rel=1e-6)
