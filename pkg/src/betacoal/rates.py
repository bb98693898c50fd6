"""Merge rates, branching mechanism and constants of the Beta(2-a, a)-coalescent.

All Gamma-function work goes through log-gamma (``math.lgamma`` for scalars,
``scipy.special.gammaln`` for arrays).
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, IndeterminateError, check_alpha

# Above this point the branching mechanism is evaluated from its large-q
# expansion instead of quadrature.
PSI_TAIL_CUTOFF = 1e6

_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-11, limit=200)


@dataclass(frozen=True)
class CoalescentConstants:
    alpha: float
    gamma_alpha: float
    c_alpha: float
    d_alpha: float
    speed_const: float
    x_scale: float

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "gamma_alpha": self.gamma_alpha,
            "c_alpha": self.c_alpha,
            "d_alpha": self.d_alpha,
            "speed_const": self.speed_const,
            "x_scale": self.x_scale,
        }


@dataclass(frozen=True)
class MergerLaw:
    """Law of the next merger when ``b`` blocks are present.

    ``pmf[j]`` is the probability that the merger involves ``k = j + 2`` blocks.
    """

    b: int
    total_rate: float
    pmf: np.ndarray

    @property
    def sizes(self):
        return np.arange(2, self.b + 1)

    def as_dict(self):
        return {int(k): float(p) for k, p in zip(self.sizes, self.pmf)}


def _log_beta_norm(alpha):
    # log(Gamma(alpha) Gamma(2 - alpha)) = log B(2 - alpha, alpha)
    return math.lgamma(alpha) + math.lgamma(2.0 - alpha)


def beta_density(x, alpha):
    """Density of Beta(2 - alpha, alpha) at ``x`` in (0, 1)."""
    alpha = check_alpha(alpha)
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    return math.exp(
        (1.0 - alpha) * math.log(x)
        + (alpha - 1.0) * math.log1p(-x)
        - _log_beta_norm(alpha)
    )


def _check_bk(b, k):
    if int(b) != b or int(k) != k:
        raise DomainError("b and k must be integers")
    if not 2 <= k <= b:
        raise DomainError(f"need 2 <= k <= b, got b={b}, k={k}")
    return int(b), int(k)


def lambda_bk(b, k, alpha):
    """Rate at which one given set of ``k`` out of ``b`` blocks merges.

    Closed form B(k - alpha, b - k + alpha) / B(2 - alpha, alpha).
    """
    alpha = check_alpha(alpha)
    b, k = _check_bk(b, k)
    log_num = math.lgamma(k - alpha) + math.lgamma(b - k + alpha) - math.lgamma(b)
    return math.exp(log_num - _log_beta_norm(alpha))


def lambda_bk_quad(b, k, alpha):
    """Same rate as :func:`lambda_bk`, by adaptive quadrature of
    ``x**(k-2) (1-x)**(b-k) Lambda(dx)``.

    The Beta density is passed to QUADPACK as an algebraic endpoint weight.
    """
    alpha = check_alpha(alpha)
    b, k = _check_bk(b, k)
    norm = math.exp(-_log_beta_norm(alpha))
    val, _ = integrate.quad(
        lambda x: x ** (k - 2) * (1.0 - x) ** (b - k),
        0.0,
        1.0,
        weight="alg",
        wvar=(1.0 - alpha, alpha - 1.0),
        **_QUAD_OPTS,
    )
    return norm * val


def merger_law(b, alpha):
    """Total merger rate and merger-size law with ``b`` blocks.

    The unnormalised weights ``C(b, k) lambda_{b,k}`` are built from ``k = 2``
    with the ratio recurrence, accumulated in log space.
    """
    alpha = check_alpha(alpha)
    if int(b) != b or b < 2:
        raise DomainError(f"b must be an integer >= 2, got {b}")
    b = int(b)
    log_q2 = (
        math.log(b * (b - 1) / 2.0)
        + math.lgamma(b - 2.0 + alpha)
        - math.lgamma(b)
        - math.lgamma(alpha)
    )
    k = np.arange(2, b, dtype=float)
    log_ratio = (
        np.log(b - k) - np.log(k + 1.0) + np.log(k - alpha) - np.log(b - k - 1.0 + alpha)
    )
    log_q = np.concatenate(([log_q2], log_q2 + np.cumsum(log_ratio)))
    log_total = special.logsumexp(log_q)
    return MergerLaw(b=b, total_rate=math.exp(log_total), pmf=np.exp(log_q - log_total))


@lru_cache(maxsize=8)
def _total_rate_table(n, alpha):
    b = np.arange(1, n, dtype=float)
    inc = np.exp(np.log(b) + special.gammaln(b + alpha - 1.0) - special.gammaln(b + 1.0)
                 - math.lgamma(alpha))
    table = np.zeros(n + 1)
    table[2:] = np.cumsum(inc)
    table.setflags(write=False)
    return table


def total_rate_table(n, alpha):
    """Array ``g`` with ``g[b]`` the total merger rate with ``b`` blocks, for
    ``0 <= b <= n`` (``g[0] = g[1] = 0``).

    Uses the first-difference identity
    ``g[b+1] - g[b] = b Gamma(b + alpha - 1) / (Gamma(alpha) Gamma(b + 1))``,
    which follows from the integral representation of the rates.
    """
    alpha = check_alpha(alpha)
    if n < 1:
        raise DomainError("n must be >= 1")
    return _total_rate_table(int(n), alpha)


def _kernel_ratio(y):
    """(exp(-y) - 1 + y) / y**2 without cancellation."""
    if y < 0.1:
        # Taylor series; 13 terms reach double precision for y < 0.1
        term = 0.5
        acc = 0.5
        for j in range(3, 16):
            term *= -y / j
            acc += term
        return acc
    return (y + math.expm1(-y)) / (y * y)


def _weighted_integral(f, q, alpha):
    """Integral of ``f(x) Lambda(dx)`` over (0, 1) for an ``f`` whose scale of
    variation is ``1/q``.

    The interval is cut at ``1/q`` and then at decades up to 1 so each piece
    is well resolved; the endpoint singularities of the Beta density go into
    QUADPACK's algebraic weight on the first and last piece.
    """
    norm = math.exp(-_log_beta_norm(alpha))
    a = 1.0 / q if q > 1.0 else 1.0
    if a >= 1.0:
        val, _ = integrate.quad(f, 0.0, 1.0, weight="alg",
                                wvar=(1.0 - alpha, alpha - 1.0), **_QUAD_OPTS)
        return norm * val

    cuts = [a]
    # stop short of 1 so the last piece is never a sliver
    while cuts[-1] * 10.0 < 0.5:
        cuts.append(cuts[-1] * 10.0)
    cuts.append(1.0)

    total, _ = integrate.quad(lambda x: f(x) * (1.0 - x) ** (alpha - 1.0), 0.0, a,
                              weight="alg", wvar=(1.0 - alpha, 0.0), **_QUAD_OPTS)
    for lo, hi in zip(cuts[:-2], cuts[1:-1]):
        val, _ = integrate.quad(
            lambda x: f(x) * x ** (1.0 - alpha) * (1.0 - x) ** (alpha - 1.0),
            lo, hi, **_QUAD_OPTS)
        total += val
    val, _ = integrate.quad(lambda x: f(x) * x ** (1.0 - alpha), cuts[-2], 1.0,
                            weight="alg", wvar=(0.0, alpha - 1.0), **_QUAD_OPTS)
    return norm * (total + val)


def psi(q, alpha):
    """Branching mechanism ``int_0^1 (exp(-qx) - 1 + qx) x**-2 Lambda(dx)``."""
    alpha = check_alpha(alpha)
    q = float(q)
    if q < 0 or not math.isfinite(q):
        raise DomainError(f"q must be finite and >= 0, got {q}")
    if q == 0.0:
        return 0.0
    return q * q * _weighted_integral(lambda x: _kernel_ratio(q * x), q, alpha)


def psi_second_derivative(q, alpha):
    """``psi''(q) = int_0^1 exp(-qx) Lambda(dx)``, the Laplace transform of Lambda.

    Unlike ``psi`` it carries no linear part, so its log-log slope exposes the
    power-law growth of ``psi`` directly.
    """
    alpha = check_alpha(alpha)
    q = float(q)
    if q < 0:
        raise DomainError(f"q must be >= 0, got {q}")
    if q == 0.0:
        return 1.0
    return _weighted_integral(lambda x: math.exp(-q * x), q, alpha)


def psi_asymptotic(q, alpha, terms=8):
    """Large-q expansion of ``psi``:

        q**a / C_a * sum_m (-a)_m (1-a)_m / m! * q**-m  -  q / (a - 1)

    (a Mellin-transform expansion; the omitted remainder is exponentially small
    in q). Valid for ``alpha`` in (1, 2) and large ``q``.
    """
    alpha = check_alpha(alpha, regime=True)
    return q * _psi_over_q_asym(math.log(q), alpha, terms)


def _psi_over_q_asym(u, alpha, terms=8):
    # psi(e^u) / e^u from the large-q expansion, safe for very large u
    c_alpha = alpha * (alpha - 1.0) * math.gamma(alpha)
    series = 0.0
    coef = 1.0
    for m in range(terms):
        series += coef * math.exp(-m * u)
        coef *= (m - alpha) * (m + 1.0 - alpha) / (m + 1.0)
    return math.exp((alpha - 1.0) * u) / c_alpha * series - 1.0 / (alpha - 1.0)


def _tail_asym(u0, alpha):
    """``int_{e^u0}^inf dq / psi(q)`` for ``e^u0 >= PSI_TAIL_CUTOFF``, integrating
    the expansion in ``u = log q`` and closing with the pure power tail once the
    first correction is below 1e-14 relative."""
    c_alpha = alpha * (alpha - 1.0) * math.gamma(alpha)
    # linear correction relative to the leading term: c_alpha q**(1-a) / (a-1)
    u_far = max(u0, math.log(c_alpha / (alpha - 1.0) * 1e14) / (alpha - 1.0))
    body = 0.0
    if u_far > u0:
        body, _ = integrate.quad(lambda u: 1.0 / _psi_over_q_asym(u, alpha), u0, u_far,
                                 epsabs=0.0, epsrel=1e-12, limit=400)
    return body + c_alpha * math.exp(-(alpha - 1.0) * u_far) / (alpha - 1.0)


@lru_cache(maxsize=32)
def _tail_at_cutoff(alpha):
    return _tail_asym(math.log(PSI_TAIL_CUTOFF), alpha)


def inverse_psi_tail(s, alpha):
    """``int_s^inf dq / psi(q)`` for ``s > 0``."""
    alpha = check_alpha(alpha, regime=True)
    if s <= 0:
        raise DomainError("s must be positive")
    u = math.log(s)
    u_cut = math.log(PSI_TAIL_CUTOFF)
    if u >= u_cut:
        return _tail_asym(u, alpha)
    body, _ = integrate.quad(lambda v: math.exp(v) / psi(math.exp(v), alpha), u, u_cut,
                             epsabs=0.0, epsrel=1e-10, limit=200)
    return body + _tail_at_cutoff(alpha)


def v_psi(t, alpha):
    """Speed of coming down from infinity: the ``s`` with
    ``int_s^inf dq / psi(q) = t``."""
    alpha = check_alpha(alpha, regime=True)
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"t must be positive and finite, got {t}")

    def gap(u):
        return math.log(inverse_psi_tail(math.exp(u), alpha)) - math.log(t)

    u0 = math.log(alpha * math.gamma(alpha) / t) / (alpha - 1.0)
    lo, hi = u0 - 1.0, u0 + 1.0
    while gap(lo) < 0:
        lo -= 2.0
    while gap(hi) > 0:
        hi += 2.0
    u = optimize.brentq(gap, lo, hi, xtol=1e-12, rtol=1e-14)
    return math.exp(u)


def growth_exponent(alpha, q_lo=1e3, q_hi=1e6):
    """Power-law growth exponent of ``psi`` beyond its linear part, estimated
    as ``2 +`` the log-log slope of ``psi''`` between ``q_lo`` and ``q_hi``."""
    alpha = check_alpha(alpha)
    slope = (math.log(psi_second_derivative(q_hi, alpha))
             - math.log(psi_second_derivative(q_lo, alpha))) / math.log(q_hi / q_lo)
    return 2.0 + slope


def comes_down_from_infinity(alpha):
    """Whether ``int_1^inf dq / psi(q)`` converges, decided numerically.

    Exponents above 1.001 give True and below 0.999 give False. Inside that
    band only the exact boundary (``psi`` growing like ``q log q``, exponent 1
    to 1e-9) is decided, as False; anything else raises IndeterminateError.
    """
    alpha = check_alpha(alpha)
    e = growth_exponent(alpha)
    if e > 1.001:
        return True
    if e < 0.999 or abs(e - 1.0) < 1e-9:
        return False
    raise IndeterminateError(f"growth exponent {e:.6f} too close to 1")


def constants(alpha):
    alpha = check_alpha(alpha, regime=True)
    lg = math.lgamma(alpha)
    log_speed = (math.log(alpha) + lg) / (alpha - 1.0)
    return CoalescentConstants(
        alpha=alpha,
        gamma_alpha=math.exp(lg),
        c_alpha=alpha * (alpha - 1.0) * math.exp(lg),
        d_alpha=math.exp(log_speed / alpha - math.log(alpha - 1.0) / alpha),
        speed_const=math.exp(log_speed),
        x_scale=math.exp(-math.log1p(alpha) / alpha),
    )


def u_flow(t, lam, alpha):
    """Laplace exponent flow of the alpha-stable CSBP:
    ``E exp(-lam Z_x(t)) = exp(-x u_t(lam))``.

    Solves ``du/dt = -u**alpha`` with ``u_0 = lam``; the flow decreases in t.
    """
    alpha = check_alpha(alpha, regime=True)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return (lam ** (1.0 - alpha) + (alpha - 1.0) * t) ** (-1.0 / (alpha - 1.0))


def poisson_parameter(r, alpha):
    """``((alpha - 1) r) ** (-1 / (alpha - 1))``, the limit of ``u_flow`` as
    lambda grows, i.e. the mean number of ancestors at time ``r``."""
    alpha = check_alpha(alpha, regime=True)
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    return ((alpha - 1.0) * r) ** (-1.0 / (alpha - 1.0))
