"""Three ways to compute f(A) for a non-normal matrix, checked against diagonalization.

The contour method integrates f against the resolvent around the strip,
the Sobolev method sums the group exp(-isA) against the coefficient of f,
and the windowed (meda) method chops f into Gaussian-localized pieces so
that bounded functions such as tanh, which are not integrable, still work.

Run:  python demos/02_functional_calculus.py
"""

import numpy as np

from hoercalc import (
    DiagonalizableOperator,
    DivergenceError,
    StripFunctionRep,
    Weight,
    elementary_contour,
    meda_hoermander,
    sobolev_integral,
)
from hoercalc.functions import gaussian_tanh, modulation, resolvent, tanh

rng = np.random.default_rng(7)
A = DiagonalizableOperator.random_strip(6, 0.5, rng)
print(f"random 6x6 model, spectrum in |Im z| <= {A.strip_height:.3f}, "
      f"basis condition {np.linalg.cond(A.basis):.1f}\n")

for f in (resolvent(2j), gaussian_tanh()):
    contour = elementary_contour(A, f)
    sobolev = sobolev_integral(A, StripFunctionRep.from_function(f, A.strip_height))
    meda = meda_hoermander(A, f)
    print(f"{f.label:10s} relative deviation from the oracle:"
          f"  contour {contour.relative_deviation:.1e}"
          f"  sobolev {sobolev.relative_deviation:.1e}"
          f"  meda {meda.relative_deviation:.1e}")

# tanh and e^(-iz) are bounded but f R(., A) is not absolutely integrable
# along the contour, so the contour method refuses them.  meda does not care.
for f in (tanh(), modulation(1.0)):
    try:
        elementary_contour(A, f)
    except DivergenceError as exc:
        print(f"\ncontour on {f.label}: {exc}")
    print(f"meda on {f.label}: relative deviation {meda_hoermander(A, f).relative_deviation:.1e}")

# On a self-adjoint model the windowed representation comes with a chain of bounds.
S = DiagonalizableOperator.random_self_adjoint(5, rng)
chain = meda_hoermander(S, resolvent(2j), bound_weight=Weight.poly(1.0))
print(f"\n||f(A)|| = {np.linalg.norm(chain.matrix, 2):.4f}"
      f" <= triangle bound {chain.meta['triangle_bound']:.4f}"
      f" <= product bound {chain.meta['product_bound']:.4f}")
