"""Block-counting chain of the Beta-coalescent and the ancestor count D(r)."""

from dataclasses import dataclass
import math

import numba
import numpy as np

from . import rates
from .errors import DomainError, check_alpha
from .stable import sample_poisson

# Guard on merger-size scan steps per trajectory.
MAX_SCAN_STEPS = 10**8


@dataclass(frozen=True)
class BlockTrajectory:
    alpha: float
    initial_blocks: int
    t_end: float
    event_times: np.ndarray
    block_counts: np.ndarray


@numba.njit(cache=True, nogil=True)
def _merger_size(b, alpha, total_rate, gen):
    # inverse-CDF scan from k = 2 using q_{k+1}/q_k; returns (k, scan steps)
    p = math.exp(math.log(0.5 * b * (b - 1.0)) + math.lgamma(b - 2.0 + alpha)
                 - math.lgamma(b) - math.lgamma(alpha)) / total_rate
    u = gen.random()
    cdf = p
    k = 2
    while u >= cdf and k < b:
        p *= (b - k) / (k + 1.0) * (k - alpha) / (b - k - 1.0 + alpha)
        k += 1
        cdf += p
    return k, k - 1


@numba.njit(cache=True, nogil=True)
def _sample_merger_size(b, alpha, gen):
    # total rate by summing the recurrence, for use without a rate table
    q = math.exp(math.log(0.5 * b * (b - 1.0)) + math.lgamma(b - 2.0 + alpha)
                 - math.lgamma(b) - math.lgamma(alpha))
    total = 0.0
    for k in range(2, b + 1):
        total += q
        q *= (b - k) / (k + 1.0) * (k - alpha) / (b - k - 1.0 + alpha)
    return _merger_size(b, alpha, total, gen)[0]


@numba.njit(cache=True, nogil=True)
def _run(n, alpha, t_end, table, gen, times, counts, max_scan):
    b = n
    t = 0.0
    n_events = 0
    scans = 0
    while b > 1:
        t += gen.standard_exponential() / table[b]
        if t > t_end:
            break
        k, steps = _merger_size(b, alpha, table[b], gen)
        scans += steps
        if scans > max_scan:
            return b, -n_events - 1
        b -= k - 1
        if times.shape[0] > 0:
            times[n_events] = t
            counts[n_events] = b
        n_events += 1
    return b, n_events


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n}")
    return int(n)


def simulate_block_count(n, alpha, t_end, rng):
    """Event times and post-event block counts of the chain from ``n`` blocks,
    up to ``t_end`` or the last merger."""
    alpha = check_alpha(alpha)
    n = _check_n(n)
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    table = rates.total_rate_table(max(n, 2), alpha)
    cap = max(n - 1, 0)
    times = np.empty(cap)
    counts = np.empty(cap, dtype=np.int64)
    if n == 1:
        return BlockTrajectory(alpha, 1, float(t_end), times, counts)
    _, n_events = _run(n, alpha, float(t_end), table, rng, times, counts, MAX_SCAN_STEPS)
    if n_events < 0:
        raise RuntimeError("merger-size scan budget exceeded")
    return BlockTrajectory(alpha, n, float(t_end), times[:n_events].copy(),
                           counts[:n_events].copy())


def block_count_at(traj, t):
    """Number of blocks at time ``t`` (right-continuous)."""
    if t < 0 or t > traj.t_end:
        raise DomainError(f"t must lie in [0, {traj.t_end}]")
    i = int(np.searchsorted(traj.event_times, t, side="right"))
    return traj.initial_blocks if i == 0 else int(traj.block_counts[i - 1])


_EMPTY_F = np.empty(0)
_EMPTY_I = np.empty(0, dtype=np.int64)


def block_count_value(n, alpha, t, rng, table=None):
    """``N^(n)(t)`` without recording the trajectory."""
    alpha = check_alpha(alpha)
    n = _check_n(n)
    if n == 1:
        return 1
    if table is None:
        table = rates.total_rate_table(n, alpha)
    b, n_events = _run(n, alpha, float(t), table, rng, _EMPTY_F, _EMPTY_I,
                       MAX_SCAN_STEPS)
    if n_events < 0:
        raise RuntimeError("merger-size scan budget exceeded")
    return int(b)


def sample_merger_size(b, alpha, rng):
    """Size of the next merger with ``b`` blocks."""
    alpha = check_alpha(alpha)
    if int(b) != b or b < 2:
        raise DomainError(f"b must be an integer >= 2, got {b}")
    return int(_sample_merger_size(int(b), alpha, rng))


def sample_D(r, alpha, rng, size=None):
    """Number of ancestors at CSBP time ``r``: Poisson with mean
    ``((alpha - 1) r) ** (-1 / (alpha - 1))``."""
    theta = rates.poisson_parameter(r, alpha)
    return sample_poisson(theta, rng, size)


def finite_n_mean(n, t, alpha):
    """Deterministic approximation of ``E N^(n)(t)``: the solution of
    ``dN/dt = -psi(N)`` from ``N(0) = n``, i.e. ``v_psi(t + int_n^inf dq/psi)``.

    Reported next to simulated means to separate finite-``n`` bias from the
    behaviour of the chain started from infinitely many blocks.
    """
    alpha = check_alpha(alpha, regime=True)
    return rates.v_psi(t + rates.inverse_psi_tail(float(n), alpha), alpha)


def trajectory_to_csv(traj, fh):
    fh.write("event_time,block_count\n")
    for t, b in zip(traj.event_times, traj.block_counts):
        fh.write(f"{t:.17g},{int(b)}\n")
