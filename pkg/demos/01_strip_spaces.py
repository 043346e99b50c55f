"""Functions on a horizontal strip, seen through their Fourier coefficients.

A function f holomorphic on |Im z| < omega is stored by its coefficient
g with f(z) = int g(s) e^{-isz} ds.  Growth of g is what the strip norms
measure, so we start with weights and then look at a few norms.

Run:  python demos/01_strip_spaces.py
"""

import math

from hoercalc import StripFunctionRep, Weight, admissibility_report, fourier_algebra_norm, hardy2_norm, sobolev_norm
from hoercalc.functions import gaussian, resolvent

# Weights first.  1 + |s| is subadditive up to a constant; exp(sqrt|s|) is not.
for spec in ("poly:1", "polylog:1:1", "const"):
    report = admissibility_report(Weight.from_spec(spec), scan_range=1e4)
    print(f"{spec:12s} M_v ~ {report.m_v_estimate:.4f}  doubling {report.doubling_trend:9s}"
          f"  growth ~ s^{report.growth_exponent:.2f}")

# The resolvent 1/(2i - z) lives on the strip of half-width 2.  Its Hardy
# norm on |Im z| < 1 has the closed form sqrt(pi).
rep = StripFunctionRep.from_function(resolvent(2j), 1.0)
hardy = hardy2_norm(rep, 1.0)
print(f"\nHardy norm of 1/(2i-z): {hardy.value:.10f}  (sqrt(pi) = {math.sqrt(math.pi):.10f})")

# The Gaussian is entire.  Its weighted algebra norm on the real line is
# 1 + 2/sqrt(pi) for v = 1 + |s|.
gauss = StripFunctionRep.from_function(gaussian(), 0.0, Weight.poly(1.0))
print(f"algebra norm of exp(-z^2), v = 1+|s|: {fourier_algebra_norm(gauss):.12f}"
      f"  (exact {1 + 2 / math.sqrt(math.pi):.12f})")

# Widening the strip inflates the Sobolev norm by e^{omega|s|}.
for omega in (0.0, 0.5, 1.0, 1.5):
    norm = sobolev_norm(StripFunctionRep.from_function(resolvent(2j), omega))
    print(f"Sobolev norm of 1/(2i-z) on |Im z| < {omega:.1f}: {norm:.6f}")
