"""Grid paths of the stable Levy process started at 1 and its Lamperti time changes.

``Y`` is sampled exactly in law at the grid times ``0, h, 2h, ...``; between
grid points every time change is computed by the trapezoid rule, i.e. by
linear interpolation of the cumulative integrals.

Notation used below: ``A(s) = int_0^s du / Y(u)`` (the Lamperti clock, with
``U = A^{-1}``) and ``G(s) = int_0^s Y(u)**-alpha du``, so that
``R(t) = C_alpha G(U(t))``.
"""

from dataclasses import dataclass
import math

import numba
import numpy as np

from . import rates
from .errors import AbsorbedError, DomainError, HorizonError, check_alpha
from .stable import draw_standard, sample_increment

ABSORPTION_LEVEL = 1e-9


@dataclass(frozen=True)
class LevyPath:
    alpha: float
    step: float
    values: np.ndarray
    absorbed_at: int | None = None

    @property
    def times(self):
        return self.step * np.arange(len(self.values))

    @property
    def horizon(self):
        return self.step * (len(self.values) - 1)

    @property
    def alive(self):
        """Values up to, not including, the absorption index."""
        if self.absorbed_at is None:
            return self.values
        return self.values[: self.absorbed_at]


@dataclass(frozen=True)
class TimeChangeCache:
    cumulative_inverse: np.ndarray
    cumulative_neg_alpha: np.ndarray


def _first_absorbed(values):
    hit = np.flatnonzero(values <= ABSORPTION_LEVEL)
    return int(hit[0]) if hit.size else None


def make_path(values, step, alpha):
    """Wrap given grid values (``values[0]`` must be 1) as a :class:`LevyPath`."""
    alpha = check_alpha(alpha, regime=True)
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise DomainError("need at least two grid values")
    if values[0] != 1.0:
        raise DomainError("paths start at 1")
    if not step > 0:
        raise DomainError("step must be positive")
    return LevyPath(alpha, float(step), values, _first_absorbed(values))


def simulate_path(alpha, horizon, step, rng):
    """Simulate ``Y`` on ``0, step, ..., ceil(horizon/step) * step``.

    The whole horizon is simulated even after absorption so that functionals
    of the free process (``integral_X``) stay available.
    """
    alpha = check_alpha(alpha, regime=True)
    if not (step > 0 and horizon > 0):
        raise DomainError("step and horizon must be positive")
    if step > horizon:
        raise DomainError("step must not exceed horizon")
    n = int(math.ceil(horizon / step - 1e-9))
    inc = sample_increment(alpha, step, rng, size=n)
    values = np.empty(n + 1)
    values[0] = 1.0
    np.cumsum(inc, out=values[1:])
    values[1:] += 1.0
    return LevyPath(alpha, float(step), values, _first_absorbed(values))


def time_change_cache(path):
    """Trapezoid cumulatives of ``1/Y`` and ``Y**-alpha`` on the alive part."""
    y = path.alive
    h = path.step
    inv = 1.0 / y
    neg = y ** (-path.alpha)
    cum_inv = np.zeros(len(y))
    cum_neg = np.zeros(len(y))
    np.cumsum(0.5 * h * (inv[1:] + inv[:-1]), out=cum_inv[1:])
    np.cumsum(0.5 * h * (neg[1:] + neg[:-1]), out=cum_neg[1:])
    return TimeChangeCache(cum_inv, cum_neg)


def hitting_time(path):
    """Grid time of the first value at or below the absorption level, or None."""
    if path.absorbed_at is None:
        return None
    return path.absorbed_at * path.step


def _locate(cum, level):
    # smallest grid position p (fractional) with cum(p) >= level
    j = int(np.searchsorted(cum, level, side="left"))
    if j == 0:
        return 0, 0.0
    lo, hi = cum[j - 1], cum[j]
    return j - 1, (level - lo) / (hi - lo)


def _exhausted(path, what):
    if path.absorbed_at is not None:
        raise AbsorbedError(f"{what}: path absorbed before the requested time")
    raise HorizonError(f"{what}: grid horizon {path.horizon} too short")


def _clock_position(path, cache, t):
    if t < 0:
        raise DomainError("t must be >= 0")
    cum = cache.cumulative_inverse
    if t > cum[-1]:
        _exhausted(path, "lamperti_U")
    return _locate(cum, t)


def lamperti_U(path, cache, t):
    """``U(t) = inf{s : A(s) >= t}``."""
    i, frac = _clock_position(path, cache, t)
    return (i + frac) * path.step


def compute_R(path, cache, t):
    """``R(t) = C_alpha G(U(t))``."""
    i, frac = _clock_position(path, cache, t)
    g = cache.cumulative_neg_alpha
    g_at = g[i] if frac == 0.0 else g[i] + frac * (g[i + 1] - g[i])
    return rates.constants(path.alpha).c_alpha * g_at


def r_inverse(path, cache, t):
    """``R^{-1}(t) = inf{s : R(s) >= t}``.

    With ``u* = inf{u : C_alpha G(u) >= t}`` in Levy time this is ``A(u*)``;
    both cumulatives are piecewise linear on the same grid, so the inversion
    is a single bisection (``searchsorted``) plus interpolation.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    target = t / rates.constants(path.alpha).c_alpha
    g = cache.cumulative_neg_alpha
    if target > g[-1]:
        raise HorizonError("r_inverse: grid exhausted before R reached the level")
    i, frac = _locate(g, target)
    a = cache.cumulative_inverse
    return a[i] if frac == 0.0 else a[i] + frac * (a[i + 1] - a[i])


def compute_R_direct(path, cache, t, n_points=2001):
    """``C_alpha int_0^t Z(s)**(1 - alpha) ds`` by the trapezoid rule on a
    uniform grid of CSBP times; the other side of the change of variables
    used in :func:`compute_R`."""
    s = np.linspace(0.0, t, n_points)
    z = csbp_path(path, cache, s)
    if np.any(z <= 0):
        raise AbsorbedError("compute_R_direct: path absorbed before t")
    f = z ** (1.0 - path.alpha)
    return rates.constants(path.alpha).c_alpha * float(
        np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(s)))


def integral_X(path):
    """Trapezoid integral of ``Y(s) - 1`` over ``[0, 1]`` on the free path."""
    if path.horizon < 1.0 - 1e-12:
        raise DomainError("integral_X needs a path horizon of at least 1")
    h = path.step
    y0 = path.values - 1.0
    m = int(math.floor(1.0 / h + 1e-9))
    total = 0.5 * h * float(np.sum(y0[1 : m + 1] + y0[:m]))
    rest = 1.0 - m * h
    if rest > 1e-12 * h:
        end = y0[m] + (rest / h) * (y0[m + 1] - y0[m])
        total += 0.5 * rest * (y0[m] + end)
    return total


def csbp_path(path, cache, out_times):
    """CSBP values ``Z(t) = Y(U(t))``, zero from extinction onward."""
    out_times = np.asarray(out_times, dtype=float)
    if np.any(out_times < 0) or np.any(np.diff(out_times) < 0):
        raise DomainError("out_times must be nondecreasing and >= 0")
    cum = cache.cumulative_inverse
    y = path.alive
    z = np.zeros(out_times.shape)
    beyond = out_times > cum[-1]
    if np.any(beyond) and path.absorbed_at is None:
        raise HorizonError("csbp_path: grid horizon too short")
    inside = ~beyond
    t_in = out_times[inside]
    j = np.searchsorted(cum, t_in, side="left")
    jm = np.maximum(j - 1, 0)
    denom = np.where(j > 0, cum[j] - cum[jm], 1.0)
    frac = np.where(j > 0, (t_in - cum[jm]) / denom, 0.0)
    z[inside] = y[jm] + frac * (y[j] - y[jm])
    return z


def path_to_csv(path, fh):
    """Write ``time,value`` rows (17 significant digits) with a header."""
    fh.write("time,value\n")
    for t, v in zip(path.times, path.values):
        fh.write(f"{t:.17g},{v:.17g}\n")


@numba.njit(cache=True, nogil=True)
def _csbp_value(alpha, step, t, refine, max_steps, gen):
    y = 1.0
    clock = 0.0
    for _ in range(max_steps):
        dt = step
        if refine > 0.0:
            dt = min(step, (refine * y) ** alpha)
        y_next = y + dt ** (1.0 / alpha) * draw_standard(alpha, gen)
        if y_next <= ABSORPTION_LEVEL:
            return 0.0
        cell = 0.5 * dt * (1.0 / y + 1.0 / y_next)
        if clock + cell >= t:
            frac = (t - clock) / cell
            return y + frac * (y_next - y)
        clock += cell
        y = y_next
    return -1.0


def csbp_value(alpha, t, step, rng, refine=0.1, max_steps=10**9):
    """``Z(t)`` for the CSBP started at 1, streaming the Levy grid without
    storing it; same cell conventions as :func:`csbp_path`.

    Near zero the Levy step shrinks to ``(refine * y)**alpha`` so that a single
    cell cannot jump over the clock mass left before extinction (of order
    ``y**(alpha - 1)``); the grid then depends only on the current value,
    which keeps increments exact in law. ``refine=0`` gives the plain
    uniform grid.

    Raises HorizonError if ``max_steps`` cells do not reach time ``t``.
    """
    alpha = check_alpha(alpha, regime=True)
    if refine < 0:
        raise DomainError("refine must be >= 0")
    z = _csbp_value(alpha, float(step), float(t), float(refine), int(max_steps), rng)
    if z < 0:
        raise HorizonError("csbp_value: step budget exhausted")
    return z
