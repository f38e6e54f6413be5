"""
Estimating the wave number at a boundary
=========================================

A windowed Fourier (Gabor) transform near the boundary isolates the wave
that is about to leave; the weighted mean of |spectrum|**p turns the
spectrum into one number.
"""

import numpy as np

from slabnls.metrics import soliton_train
from slabnls.spectral import (AdaptiveConfig, BoundaryEstimator, FixedWindow, pick_k0_max,
                              pick_k0_weighted, wavenumber_grid, windowed_dft)

x = np.linspace(0.0, 40.0, 401)
# the fast soliton (k=5) is near x=40, the slow one (k=2) far inside
psi = soliton_train(x, 1.0, [(1.0, 2.0, 10.0), (1.0, 5.0, 30.0)], g=-2.0)

ks, dk = wavenumber_grid(40.0, 0.1)
whole = windowed_dft(psi, x, (0.0, 40.0), ks, dk)
near = windowed_dft(psi, x, (30.0, 40.0), ks, dk)

# the whole-domain spectrum mixes both solitons, the window sees only one
for p in (1, 2, 4, 64):
    print(f"p={p:<3} Fourier k0={pick_k0_weighted(whole, p):6.3f}"
          f"   Gabor k0={pick_k0_weighted(near, p):6.3f}")
print("largest mode (Gabor):", pick_k0_max(near))

# BoundaryEstimator does the same for many rows at once and clamps the result
est = BoundaryEstimator(x, AdaptiveConfig(window=FixedWindow(10.0)))
print("estimator, right side:", est.estimate(psi, "high", 1.0))
