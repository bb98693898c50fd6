"""
Counting blocks
===============

Run the block-counting chain from many blocks and watch it come down from
infinity.
"""

import math

import numpy as np

from betacoal import coalescent, rates
from betacoal.stable import rng_stream

alpha = 1.5
traj = coalescent.simulate_block_count(10_000, alpha, math.inf, rng_stream(1))
print("events", traj.event_times.size, " time to the MRCA", traj.event_times[-1].round(3))
for t in (1e-3, 1e-2, 1e-1, 1.0):
    print(f"N({t:g}) = {coalescent.block_count_at(traj, t)}")

# Averages against the deterministic finite-n curve and the n = infinity speed.
t = 0.02
for n in (10**4, 10**5, 10**6):
    vals = [coalescent.block_count_value(n, alpha, t, rng_stream(2, i)) for i in range(200)]
    print(f"n={n:>8}: mean N(t)={np.mean(vals):8.2f}"
          f"  finite-n curve={coalescent.finite_n_mean(n, t, alpha):8.2f}"
          f"  v_psi(t)={rates.v_psi(t, alpha):8.2f}")

# Ancestors of a CSBP population: Poisson with an explicit mean.
d = coalescent.sample_D(0.1, alpha, rng_stream(3), size=5)
print("D(0.1) draws", d, " mean", rates.poisson_parameter(0.1, alpha))
