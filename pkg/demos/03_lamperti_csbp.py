"""
From a Levy path to a branching process
=======================================

Simulate the stable Levy process started at 1, time-change it into the CSBP
and read off the coupled clock R.
"""

import math

import numpy as np

from betacoal import levy, rates
from betacoal.errors import AbsorbedError, HorizonError
from betacoal.stable import rng_stream

alpha = 1.5
path = levy.simulate_path(alpha, horizon=3.0, step=1e-4, rng=rng_stream(7))
cache = levy.time_change_cache(path)
print("grid points", path.values.size, " absorbed at Levy time", levy.hitting_time(path))

# Z(t) = Y(U(t)) on a few CSBP times.
times = np.linspace(0, 0.5, 6)
try:
    print("Z:", levy.csbp_path(path, cache, times).round(4))
except HorizonError:
    print("path horizon too short for these times")

# The clock R computed two ways: through G(U(t)) and directly from Z.
t = 0.05
try:
    print("R(t) via change of variables", levy.compute_R(path, cache, t))
    print("R(t) directly from Z        ", levy.compute_R_direct(path, cache, t, 20001))
    print("R^-1(R(t))                  ", levy.r_inverse(path, cache, levy.compute_R(path, cache, t)))
except (AbsorbedError, HorizonError) as exc:
    print("path died early:", exc)

# Many streamed CSBP values against the exact Laplace flow and extinction law.
z = np.array([levy.csbp_value(alpha, 1.0, 1e-3, rng_stream(8, i)) for i in range(20_000)])
print("E exp(-Z(1))", np.exp(-z).mean().round(4),
      " exact", round(math.exp(-rates.u_flow(1.0, 1.0, alpha)), 4))
print("P(Z(1) = 0)", (z == 0).mean(), " exact", round(math.exp(-rates.poisson_parameter(1.0, alpha)), 5))
