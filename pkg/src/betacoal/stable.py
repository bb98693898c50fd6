"""Seedable random streams and samplers for the spectrally positive stable law.

The standard draw ``S`` has ``E exp(-lam S) = exp(lam**alpha)``. It is produced
by the Chambers-Mallows-Stuck transform for skewness +1 with scale
``|cos(pi alpha / 2)|**(1/alpha)``, which is the scale that makes the Laplace
exponent exactly ``lam**alpha``.
"""

from dataclasses import dataclass
import math

import numba
import numpy as np

from .errors import DomainError, check_alpha


def rng_stream(master_seed, stream_index=0):
    """Independent generator for replicate ``stream_index`` of a run.

    ``SeedSequence`` hashes ``(master_seed, stream_index)`` into the PCG64
    state, so streams with different indices do not overlap.
    """
    if stream_index < 0:
        raise DomainError("stream_index must be >= 0")
    seq = np.random.SeedSequence(int(master_seed) & 0xFFFFFFFFFFFFFFFF,
                                 spawn_key=(int(stream_index),))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class StableDraw:
    value: float
    alpha: float
    time_scale: float


@numba.njit(cache=True, nogil=True)
def _cms(alpha, u, w):
    # u uniform on [0, 1), w standard exponential
    v = math.pi * (u - 0.5)
    shift = 0.5 * math.pi * alpha - math.pi  # alpha * B for skewness +1
    a = alpha * v + shift
    return (math.sin(a) / math.cos(v) ** (1.0 / alpha)
            * (math.cos(v - a) / w) ** ((1.0 - alpha) / alpha))


@numba.njit(cache=True, nogil=True)
def draw_standard(alpha, gen):
    """One standard draw from inside compiled code."""
    return _cms(alpha, gen.random(), gen.standard_exponential())


def _cms_array(alpha, u, w):
    v = np.pi * (u - 0.5)
    a = alpha * v + (0.5 * np.pi * alpha - np.pi)
    return (np.sin(a) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - a) / w) ** ((1.0 - alpha) / alpha))


def sample_standard_stable(alpha, rng, size=None):
    """Draws with Laplace transform ``exp(lam**alpha)`` (mean zero, no negative
    jumps). Returns a float, or an array when ``size`` is given."""
    alpha = check_alpha(alpha, regime=True)
    if size is None:
        return float(_cms(alpha, rng.random(), rng.standard_exponential()))
    u = rng.random(size)
    w = rng.standard_exponential(size)
    return _cms_array(alpha, u, w)


def sample_increment(alpha, dt, rng, size=None):
    """Increment of the centred stable Levy process over a time ``dt``.

    A scalar call returns a :class:`StableDraw`; with ``size`` an array.
    """
    alpha = check_alpha(alpha, regime=True)
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    scale = dt ** (1.0 / alpha)
    if size is None:
        return StableDraw(scale * sample_standard_stable(alpha, rng), alpha, float(dt))
    return scale * sample_standard_stable(alpha, rng, size)


def limit_scale(alpha):
    """``(alpha + 1) ** (-1 / alpha)``, the scale of ``int_0^1 Y_0(s) ds``."""
    return (alpha + 1.0) ** (-1.0 / alpha)


def sample_limit_X(alpha, rng, size=None):
    """Draws of ``X = int_0^1 Y_0(s) ds``, with ``E exp(-lam X) =
    exp(lam**alpha / (alpha + 1))``."""
    alpha = check_alpha(alpha, regime=True)
    return limit_scale(alpha) * sample_standard_stable(alpha, rng, size)


def sample_poisson(theta, rng, size=None):
    """Poisson(theta) counts, exact in law for every theta.

    Delegates to ``Generator.poisson``: multiplication of uniforms for small
    means and Hormann's PTRS transformed rejection for large ones.
    """
    theta = float(theta)
    if not math.isfinite(theta) or theta < 0:
        raise DomainError(f"theta must be finite and >= 0, got {theta}")
    if size is None:
        return int(rng.poisson(theta))
    return rng.poisson(theta, size)
