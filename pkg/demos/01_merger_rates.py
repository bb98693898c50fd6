"""
Merger rates of the Beta-coalescent
===================================

Rates, the merger-size law and the branching mechanism psi.
"""

import numpy as np

from betacoal import rates

alpha = 1.5

# Two blocks always merge at rate one; with three blocks a triple merger
# takes a tenth of the events at alpha = 1.5.
print("lambda_{2,2} =", rates.lambda_bk(2, 2, alpha))
law = rates.merger_law(3, alpha)
print("b=3: total rate", law.total_rate, "size law", law.pmf)

# The closed form agrees with direct quadrature against the Beta density.
for b, k in [(10, 2), (10, 7), (80, 40)]:
    print(f"lambda_{{{b},{k}}}: closed {rates.lambda_bk(b, k, alpha):.12e}"
          f"  quad {rates.lambda_bk_quad(b, k, alpha):.12e}")

# With many blocks, mergers stay mostly small but the tail is heavy.
law = rates.merger_law(1000, alpha)
print("b=1000: P(k=2) =", round(law.pmf[0], 4), " mean size =",
      round(float(np.dot(law.sizes, law.pmf)), 3))

# psi grows like q^2/2 near zero and like q^alpha / C_alpha far out.
c = rates.constants(alpha)
for q in (0.01, 1.0, 1e2, 1e4, 1e6):
    print(f"q={q:>8g}  psi={rates.psi(q, alpha):.6e}"
          f"  q^2/2={q * q / 2:.3e}  q^a/C_a={q ** alpha / c.c_alpha:.3e}")

# Coming down from infinity happens exactly for alpha in (1, 2).
for a in (0.5, 1.0, 1.2, 1.8):
    print(f"alpha={a}: comes down from infinity = {rates.comes_down_from_infinity(a)}")

# The speed v_psi(t) and its power-law asymptote.
for t in (1e-1, 1e-2, 1e-3, 1e-4):
    print(f"t={t:g}  v_psi={rates.v_psi(t, alpha):.6g}"
          f"  asymptote={c.speed_const * t ** (-1 / (alpha - 1)):.6g}")
