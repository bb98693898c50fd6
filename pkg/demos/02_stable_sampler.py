"""
Spectrally positive stable draws
================================

Chambers-Mallows-Stuck draws with Laplace transform exp(lam^alpha), checked
against the exact transform.
"""

import math

import numpy as np

from betacoal.stable import rng_stream, sample_limit_X, sample_standard_stable, sample_poisson
from betacoal.stats import empirical_laplace

rng = rng_stream(2024)
alpha = 1.5
x = sample_standard_stable(alpha, rng, size=10**6)

# Mean zero, light left tail, heavy right tail.
print("mean", x.mean().round(4), " 0.1% / 99.9% quantiles", np.quantile(x, [1e-3, 1 - 1e-3]))

for lam in (0.25, 0.5, 1.0, 2.0):
    est, se = empirical_laplace(x, lam)
    print(f"lam={lam}: empirical {est:.5f} +- {se:.5f}, exact {math.exp(lam ** alpha):.5f}")

# X = int_0^1 Y_0(s) ds is the same law rescaled by (alpha+1)^(-1/alpha).
xs = sample_limit_X(alpha, rng, size=10**6)
est, se = empirical_laplace(xs, 1.0)
print(f"X: empirical {est:.5f} +- {se:.5f}, exact {math.exp(1 / (alpha + 1)):.5f}")

# Poisson counts for the ancestor numbers.
d = sample_poisson(1e4, rng, size=10**5)
print("Poisson(1e4): mean", d.mean(), " dispersion", round(d.var(ddof=1) / d.mean(), 4))
