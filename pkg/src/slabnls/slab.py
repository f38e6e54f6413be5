"""One SLAB time step for the cubic NLS ``i psi_t = -lap psi + g|psi|^2 psi + V psi``.

Interior points use the semi-implicit Crank-Nicolson scheme with the
nonlinear coefficient extrapolated from levels ``n`` and ``n - 1``. Near
the artificial boundary the equation is split: the exact phase rotation of
``i psi_t = f(|psi|^2) psi`` gives ``psi*`` on the boundary band, and the
linear remainder is closed by a local absorbing condition written in terms
of ``psi*`` and ``psi^{n+1}``. Both kinds of rows go into one linear system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import abc
from .grid import ConfigurationError, GridSpec, WaveField
from .linsolve import StepSystem, solve_banded, solve_sparse
from .spectral import AdaptiveConfig, BoundaryEstimator

logger = logging.getLogger(__name__)


class AssemblyError(RuntimeError):
    pass


class StepFailure(RuntimeError):
    def __init__(self, message, step_index, diagnostics=None):
        super().__init__(f"step {step_index}: {message}")
        self.step_index = step_index
        self.diagnostics = diagnostics


# -- physics ----------------------------------------------------------------

@dataclass(frozen=True)
class ConstantPotential:
    value: float = 0.0

    def __call__(self, x, y=None, t=0.0):
        shape = np.broadcast(x, 0.0 if y is None else y).shape
        return np.full(shape, float(self.value))


@dataclass(frozen=True)
class GaussianPotential:
    """``amplitude * exp(-|r - center|^2 / (2 width^2))``."""

    amplitude: float = 1.0
    width: float = 1.0
    center: tuple = (0.0,)

    def __call__(self, x, y=None, t=0.0):
        r2 = (np.asarray(x) - self.center[0]) ** 2
        if y is not None:
            cy = self.center[1] if len(self.center) > 1 else 0.0
            r2 = r2 + (np.asarray(y) - cy) ** 2
        return self.amplitude * np.exp(-r2 / (2.0 * self.width**2))


@dataclass(frozen=True)
class PhysicsSpec:
    """Cubic nonlinearity ``f(s) = g s`` and a potential ``V(x, y, t)``."""

    g: float = 0.0
    potential: object = ConstantPotential(0.0)

    def f(self, s):
        return self.g * np.asarray(s)

    def V(self, grid: GridSpec, t):
        if grid.dim == 1:
            return self.potential(grid.x, None, t)
        X, Y = grid.mesh()
        return self.potential(X, Y, t)


# -- boundary configuration -------------------------------------------------

FAMILIES = ("abc11", "abc10", "fj", "dirichlet")


@dataclass
class AbcConfig:
    """Boundary family and how its wave-number parameter is chosen.

    Sides listed in ``fixed`` keep that wave number; every other side is
    estimated with ``adaptive`` or, if that is ``None``, uses ``k0``.
    ``abc10`` uses ``alpha`` when given, otherwise ``alpha1 = alpha2 = k0``;
    ``fj`` uses ``velocities`` when given, otherwise ``fj_order`` copies of
    the group velocity ``2 k0``.
    """

    family: str = "abc11"
    k0: float = 1.0
    adaptive: AdaptiveConfig | None = field(default_factory=AdaptiveConfig)
    fixed: dict = field(default_factory=dict)
    alpha: tuple | None = None
    velocities: tuple | None = None
    fj_order: int = 3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown boundary family {self.family!r}")

    def is_adaptive(self, side):
        return self.adaptive is not None and side not in self.fixed

    def stencil_width(self):
        if self.family == "fj":
            p = len(self.velocities) if self.velocities else self.fj_order
            return p + 1
        return 2


@dataclass
class StepDiagnostics:
    step_index: int
    time: float
    k0: dict
    iterations: int
    residual: float


# -- building blocks --------------------------------------------------------

def nonlinear_phase_step(psi_n, f, dt):
    """Exact solution of ``i psi_t = f(|psi|^2) psi`` over ``dt``."""
    psi_n = np.asarray(psi_n, dtype=complex)
    return np.exp(-1j * f(np.abs(psi_n) ** 2) * dt) * psi_n


def boundary_band(grid: GridSpec, width=2):
    """Mask of points within ``width`` layers of any artificial boundary."""
    ix = np.zeros(grid.I + 1, dtype=bool)
    ix[:width] = ix[-width:] = True
    if grid.dim == 1:
        return ix
    iy = np.zeros(grid.J + 1, dtype=bool)
    iy[:width] = iy[-width:] = True
    return iy[:, None] | ix[None, :]


def effective_potential(psi_n, psi_nm1, physics, grid, t):
    """``3/2 f(|psi^n|^2) - 1/2 f(|psi^{n-1}|^2) + V`` at ``t + dt/2``."""
    return (1.5 * physics.f(np.abs(psi_n) ** 2) - 0.5 * physics.f(np.abs(psi_nm1) ** 2)
            + physics.V(grid, t + 0.5 * grid.dt))


def interior_rows(psi_n, psi_nm1, physics, grid: GridSpec, t):
    """Crank-Nicolson rows at every interior grid point."""
    dt = grid.dt
    W = effective_potential(psi_n, psi_nm1, physics, grid, t)
    psi_n = np.asarray(psi_n, dtype=complex)
    if grid.dim == 1:
        dx2 = grid.dx**2
        i = np.arange(1, grid.I)
        lap = (psi_n[i + 1] - 2 * psi_n[i] + psi_n[i - 1]) / dx2
        off = np.full(len(i), 0.5 / dx2, dtype=complex)
        diag = 1j / dt - 1.0 / dx2 - 0.5 * W[i]
        cols = np.stack([i - 1, i, i + 1], axis=1)
        coeffs = np.stack([off, diag, off], axis=1)
        rhs = 1j / dt * psi_n[i] - 0.5 * lap + 0.5 * W[i] * psi_n[i]
        return abc.BoundaryRows(i, cols, coeffs, rhs)

    nx = grid.I + 1
    dx2, dy2 = grid.dx**2, grid.dy**2
    c = psi_n[1:-1, 1:-1]
    lap = ((psi_n[1:-1, 2:] - 2 * c + psi_n[1:-1, :-2]) / dx2
           + (psi_n[2:, 1:-1] - 2 * c + psi_n[:-2, 1:-1]) / dy2)
    Wi = W[1:-1, 1:-1]
    jj, ii = np.meshgrid(np.arange(1, grid.J), np.arange(1, grid.I), indexing="ij")
    ids = (jj * nx + ii).ravel()
    cols = np.stack([ids - 1, ids + 1, ids - nx, ids + nx, ids], axis=1)
    m = len(ids)
    ox = np.full(m, 0.5 / dx2, dtype=complex)
    oy = np.full(m, 0.5 / dy2, dtype=complex)
    diag = (1j / dt - 1.0 / dx2 - 1.0 / dy2 - 0.5 * Wi).ravel()
    coeffs = np.stack([ox, ox, oy, oy, diag], axis=1)
    rhs = (1j / dt * c - 0.5 * lap + 0.5 * Wi * c).ravel()
    return abc.BoundaryRows(ids, cols, coeffs, rhs)


def rows_to_system(batches, n):
    """Stack row batches into a CSR system, checking each point has one row."""
    row_ids = np.concatenate([b.row_ids for b in batches])
    counts = np.bincount(row_ids, minlength=n)
    if len(counts) != n or np.any(counts != 1):
        bad = np.flatnonzero(counts != 1)
        raise AssemblyError(f"grid points without exactly one row: {bad[:10].tolist()}")
    rows = np.concatenate([np.repeat(b.row_ids, b.cols.shape[1]) for b in batches])
    cols = np.concatenate([b.cols.ravel() for b in batches])
    data = np.concatenate([b.coeffs.ravel() for b in batches])
    rhs = np.zeros(n, dtype=complex)
    for b in batches:
        rhs[b.row_ids] = b.rhs
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return StepSystem(matrix, rhs)


# -- the stepper ------------------------------------------------------------

class SlabStepper:
    """Holds the per-run setup and the boundary parameters between steps.

    ``k0`` maps each side to its current wave number (a float in 1D, a
    profile over the edge's grid points in 2D).
    """

    def __init__(self, grid: GridSpec, physics: PhysicsSpec, boundary: AbcConfig,
                 tol=1e-10, max_iter=500):
        self.grid = grid
        self.physics = physics
        self.boundary = boundary
        self.tol = tol
        self.max_iter = max_iter
        self.sides = abc.SIDES_1D if grid.dim == 1 else abc.EDGES
        width = max(2, boundary.stencil_width())
        if grid.dim == 2 and boundary.family in ("abc10", "fj"):
            raise ConfigurationError(f"{boundary.family} is only available in 1D")
        if min(grid.shape) < 2 * width + 1:
            raise ConfigurationError("grid too small for the boundary band")
        self.band = boundary_band(grid, width)
        self.estimators = {}
        if boundary.adaptive is not None:
            self.estimators["x"] = BoundaryEstimator(grid.x, boundary.adaptive)
            if grid.dim == 2:
                self.estimators["y"] = BoundaryEstimator(grid.y, boundary.adaptive)
        floor = boundary.adaptive.k_floor if boundary.adaptive is not None else boundary.k0
        self.k0 = {}
        for side in self.sides:
            value = boundary.fixed.get(side, boundary.k0 if boundary.adaptive is None else floor)
            if grid.dim == 2:
                n_tan = grid.J + 1 if side in ("east", "west") else grid.I + 1
                value = np.full(n_tan, float(value))
            self.k0[side] = value

    # parameters

    def refresh_parameters(self, psi, step_index):
        cfg = self.boundary.adaptive
        if cfg is None or step_index % cfg.refresh_every:
            return
        psi = np.asarray(psi)
        for side in self.sides:
            if not self.boundary.is_adaptive(side):
                continue
            if self.grid.dim == 1:
                est = self.estimators["x"]
                orient = "high" if side == "right" else "low"
                self.k0[side] = float(est.estimate(psi, orient, self.k0[side])[0])
            else:
                rows = psi if side in ("east", "west") else psi.T
                est = self.estimators["x" if side in ("east", "west") else "y"]
                orient = "high" if side in ("east", "north") else "low"
                self.k0[side] = est.estimate(rows, orient, self.k0[side])

    def k0_summary(self):
        return {s: float(np.mean(v)) for s, v in self.k0.items()}

    # assembly

    def _rows_1d(self, side, psi_star, V):
        b, k0 = self.boundary, self.k0[side]
        g = self.grid
        if b.family == "abc11":
            return abc.abc11_rows_1d(side, k0, V, g.dx, g.dt, psi_star)
        if b.family == "abc10":
            a1, a2 = b.alpha if b.alpha else (k0, k0)
            return abc.abc10_rows_1d(side, a1, a2, V, g.dx, g.dt, psi_star)
        if b.family == "fj":
            vel = b.velocities if b.velocities else (2.0 * k0,) * b.fj_order
            return abc.fj_rows_1d(side, vel, g.dx, psi_star, g.dt)
        return abc.dirichlet_rows([0 if side == "left" else g.I])

    def boundary_rows(self, psi_star, t):
        g = self.grid
        th = t + 0.5 * g.dt
        if g.dim == 1:
            Vb = {"left": float(self.physics.potential(g.x[0], None, th)),
                  "right": float(self.physics.potential(g.x[-1], None, th))}
            return [self._rows_1d(s, psi_star, Vb[s]) for s in self.sides]

        if self.boundary.family == "dirichlet":
            mask = np.zeros(g.shape, dtype=bool)
            mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
            return [abc.dirichlet_rows(np.flatnonzero(mask.ravel()))]
        x, y = g.x, g.y
        pot = self.physics.potential
        V_edge = {"east": pot(np.full_like(y, x[-1]), y, th), "west": pot(np.full_like(y, x[0]), y, th),
                  "north": pot(x, np.full_like(x, y[-1]), th), "south": pot(x, np.full_like(x, y[0]), th)}
        batches = [abc.abc11_edge_rows_2d(e, self.k0[e], V_edge[e], g, g.dt, psi_star)
                   for e in abc.EDGES]
        for corner in abc.CORNERS:
            xs = "east" if corner[1] == "e" else "west"
            ys = "north" if corner[0] == "n" else "south"
            # corner parameters come from the adjacent edge profiles at the shared point
            xi0 = self.k0[xs][-1 if ys == "north" else 0]
            eta0 = self.k0[ys][-1 if xs == "east" else 0]
            Vc = float(pot(x[-1] if xs == "east" else x[0], y[-1] if ys == "north" else y[0], th))
            batches.append(abc.abc11_corner_rows(corner, xi0, eta0, Vc, g, g.dt, psi_star))
        return batches

    def split_star(self, psi_n):
        """``psi*`` on the boundary band; ``psi^n`` elsewhere."""
        star = np.array(psi_n, dtype=complex)
        if self.physics.g != 0:
            star[self.band] = nonlinear_phase_step(star[self.band], self.physics.f, self.grid.dt)
        return star

    def assemble(self, field: WaveField, psi_star=None):
        if psi_star is None:
            psi_star = self.split_star(field.current)
        batches = [interior_rows(field.current, field.previous, self.physics, self.grid, field.time)]
        batches += self.boundary_rows(psi_star, field.time)
        return rows_to_system(batches, self.grid.size)

    def solve(self, system, guess):
        if self.grid.dim == 1:
            return solve_banded(system)
        return solve_sparse(system, self.tol, self.max_iter, guess=guess)

    def advance(self, field: WaveField) -> StepDiagnostics:
        """Advance ``field`` from level ``n`` to ``n + 1`` in place."""
        n = field.time_index
        self.refresh_parameters(field.current, n)
        system = self.assemble(field)
        x, report = self.solve(system, field.current.ravel())
        diag = StepDiagnostics(n + 1, (n + 1) * self.grid.dt, self.k0_summary(),
                               report.iterations, report.residual_norm)
        if not report.converged:
            raise StepFailure(f"linear solve did not converge (residual {report.residual_norm:.3e})",
                              n + 1, diag)
        if not np.all(np.isfinite(x)):
            raise StepFailure("non-finite values in solution", n + 1, diag)
        field.commit(x)
        return diag
