"""
Local absorbing boundary conditions
====================================

Each condition is a small linear differential operator. Applied to a plane
wave it reduces to a polynomial in the wave number that vanishes at the
design point, so waves with that wave number leave without reflection.
"""

import numpy as np

from slabnls.abc import abc10_operator, abc11_operator, fj_operator, operator_symbol
from slabnls.grid import GridSpec, WaveField
from slabnls.slab import AbcConfig, PhysicsSpec, SlabStepper

k0 = 2.0
for k in (1.0, 1.5, 2.0, 2.5, 3.0):
    w = k**2
    print(f"k={k:3.1f}  ABC(1,1): {abs(operator_symbol(abc11_operator(k0), k, 0, w)):8.4f}"
          f"  ABC(1,0): {abs(operator_symbol(abc10_operator(k0, k0), k, 0, w)):8.4f}"
          f"  product p=1: {abs(operator_symbol(fj_operator([2 * k0]), k, 0, w)):8.4f}")

# a Gaussian packet with wave number 3 hits the right boundary of [0, 20]
grid = GridSpec.line(0.0, 20.0, 0.1)
psi0 = np.exp(-(grid.x - 10.0) ** 2 / 4) * np.exp(3j * grid.x)

for family in ("dirichlet", "abc10", "abc11", "fj"):
    stepper = SlabStepper(grid, PhysicsSpec(0.0), AbcConfig(family=family))
    field = WaveField(grid, psi0)
    m0 = field.mass()
    for _ in range(500):
        stepper.advance(field)
    print(f"{family:<10} mass left at t=5: {field.mass() / m0:.2e}")
