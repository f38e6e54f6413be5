"""Nonlinear Schrödinger solver with split local absorbing boundary conditions."""

from .abc import (abc10_operator, abc11_corner_operator, abc11_edge_operator,
                  abc11_operator, fj_operator, operator_symbol)
from .config import RunConfig, load_config, preset
from .experiment import reference_run, simulate
from .grid import ConfigurationError, GridSpec, WaveField, apply_diff
from .linsolve import StepSystem, solve_banded, solve_sparse
from .metrics import bright_soliton, l1_error, pde_residual, reflection_ratio, soliton_train
from .slab import AbcConfig, GaussianPotential, ConstantPotential, PhysicsSpec, SlabStepper
from .spectral import (AdaptiveConfig, BoundaryEstimator, FixedWindow, ProportionalWindow,
                       pick_k0_max, pick_k0_weighted, windowed_dft)

__version__ = "0.1.0"
