"""The Hörmander norm: the worst weighted Sobolev norm over translated windows.

sup_t ||tau_t(psi) f|| only looks at f through a moving window psi, so
constants and modulations, which have no decaying coefficient, get finite
norms.  Changing the window changes the value only by a bounded factor.

Run:  python demos/03_hoermander_windows.py   (about 15 seconds)
"""

import math

from hoercalc import Localizer, Weight, build_partition, calderon_residual, hoermander_norm
from hoercalc.functions import constant, gaussian, modulation, resolvent, tanh

gauss_window = Localizer.gaussian()
sech_window = Localizer.sech_power(2)
weight = Weight.poly(1.0)

print(f"{'function':10s} {'gaussian':>10s} {'sech^2':>10s} {'log ratio':>10s}")
for f in (constant(), modulation(2.0), resolvent(2j), tanh(), gaussian()):
    a = hoermander_norm(f, gauss_window, weight=weight, omega=0.5).value
    b = hoermander_norm(f, sech_window, weight=weight, omega=0.5).value
    print(f"{f.label:10s} {a:10.5f} {b:10.5f} {math.log(a / b):+10.4f}")

print()
# The windows reassemble f: int tau_t(psi) tau_t(phi)* f dt = c f.
for f in (constant(), resolvent(2j)):
    residual = calderon_residual(f, gauss_window, gauss_window, t_range=20, t_step=0.05)
    print(f"Calderon residual for {f.label}: {residual:.2e}")

# A holomorphic partition of unity on the strip of half-width 1.
part = build_partition(1.0, 1.0)
total = sum(part.phi(0.37 + 0.5j - n) for n in range(-60, 61))
print(f"\nsum_n phi(z - n) at z = 0.37 + 0.5i: {complex(total):.12f}")
