"""Sectorial operators, imaginary powers and a Markov semigroup on a cycle.

A function on the sector |arg w| < omega is a strip function after w = e^z,
so A^{-is} is computed as exp(-is log A) with the strip machinery.  For the
lazy random walk on a cycle the measured growth of ||A^{-is}||_p is set
against (1 + |s|)^{1/2} e^{omega_p |s|}.

Run:  python demos/04_sectors_and_semigroups.py
"""

import numpy as np

from hoercalc import DiagonalizableOperator, SectorFunctionRep, Weight, sector_calculus, sector_sobolev_norm
from hoercalc.apps import ContractionModel, OUModel, cd_growth_check, omega_p
from hoercalc.functions import sector_bump, sector_power
from hoercalc.operators import imaginary_power

A = DiagonalizableOperator.from_eig([0.5, 2.0, 9.0], kind="sectorial")
for s0 in (1.0, 3.0):
    via_strip = sector_calculus(A, sector_power(s0), "meda").matrix
    error = np.abs(via_strip - imaginary_power(A, s0)).max()
    print(f"A^(-i{s0:g}) through the windowed strip calculus: max error {error:.1e}")

bump = SectorFunctionRep.from_function(sector_bump(), 1.0, Weight.poly(1.0))
print(f"Sobolev norm of w/(1+w)^2 on |arg w| < 1: {sector_sobolev_norm(bump):.8f}\n")

walk = ContractionModel.cycle_walk(8)
for p in (4 / 3, 2.0, 4.0):
    check = cd_growth_check(walk, p)
    print(f"p = {p:.3f}  omega_p = {omega_p(p):.4f}  fitted constant {check.fitted_c:.4f}"
          f"  outer-shell trend {check.trend:.3f}  {'ok' if check.passes else 'GROWS'}")

ou = OUModel(32)
worst = max(abs(ou.imaginary_power_norm(s) - 1) for s in np.linspace(-20, 20, 21))
print(f"\nOrnstein-Uhlenbeck, 33 Hermite modes: max | ||L^(-is)|| - 1 | = {worst:.1e}")
